#pragma once

#include <charconv>
#include <limits>
#include <string>
#include <vector>

#include "sema/ast.hpp"
#include "sema/lexer.hpp"

namespace sema {

struct ParseResult {
  ast::Storyboard storyboard;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

class Parser {
 public:
  explicit Parser(const LexResult& lex) : toks_(lex.tokens) {
    eof_.kind = TokenKind::EndOfFile;
    eof_.span = lex.end;
  }

  ParseResult run() {
    ParseResult out;
    // Anything before the application keyword is noise; an input with no
    // application block at all is the dedicated empty-input error.
    if (!peek().is_kw("application")) {
      size_t skipped = pos_;
      while (!at_end() && !peek().is_kw("application")) advance();
      if (at_end()) {
        error(DiagCode::ParseEmptyInput, eof_.span,
              "no 'application' block present in input");
        out.errors = std::move(errors_);
        return out;
      }
      error(DiagCode::ParseError, toks_[skipped].span,
            "expected 'application', found " + describe(toks_[skipped]));
    }
    out.storyboard = parse_storyboard();
    if (!at_end())
      error(DiagCode::ParseError, peek().span,
            "unexpected trailing input after application block: " + describe(peek()));
    out.errors = std::move(errors_);
    return out;
  }

 private:
  const std::vector<Token>& toks_;
  Token eof_;
  size_t pos_ = 0;
  std::vector<Diagnostic> errors_;

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(size_t k = 0) const {
    return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof_;
  }
  const Token& advance() {
    const Token& t = peek();
    if (!at_end()) pos_++;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::Keyword: return "keyword '" + t.value + "'";
      case TokenKind::Identifier: return "identifier '" + t.value + "'";
      case TokenKind::String: return "string literal";
      case TokenKind::Integer: return "integer '" + t.text + "'";
      case TokenKind::Punct: return "'" + t.text + "'";
      case TokenKind::EndOfFile: return "end of input";
    }
    return "token";
  }

  void error(DiagCode code, const SourceSpan& span, std::string msg) {
    errors_.push_back({code, Severity::Error, std::move(msg), span});
  }
  void expected(const std::string& what) {
    error(DiagCode::ParseError, peek().span,
          "expected " + what + ", found " + describe(peek()));
  }

  bool accept_kw(std::string_view kw) {
    if (peek().is_kw(kw)) {
      advance();
      return true;
    }
    return false;
  }
  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      advance();
      return true;
    }
    return false;
  }
  bool expect_punct(std::string_view p, const std::string& context) {
    if (accept_punct(p)) return true;
    expected("'" + std::string(p) + "' " + context);
    return false;
  }
  bool expect_kw(std::string_view kw, const std::string& context) {
    if (accept_kw(kw)) return true;
    expected("'" + std::string(kw) + "' " + context);
    return false;
  }
  bool expect_ident(std::string& out, SourceSpan& span, const std::string& what) {
    if (peek().kind == TokenKind::Identifier) {
      span = peek().span;
      out = advance().value;
      return true;
    }
    expected(what);
    return false;
  }

  static bool is_decl_start(const Token& t) {
    return t.is_kw("screen") || t.is_kw("resources") || t.is_kw("security-requirements");
  }
  static bool is_widget_kw(const Token& t) {
    return t.is_kw("Button") || t.is_kw("TextView") || t.is_kw("TextInput");
  }

  // Panic-mode recovery: skip to the next declaration keyword at the current
  // nesting level, or to the '}' that closes the enclosing block.
  void sync(bool (*stop)(const Token&)) {
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (depth == 0 && (stop(t) || t.is_punct("}"))) return;
      if (t.is_punct("{")) depth++;
      if (t.is_punct("}")) {
        if (depth == 0) return;
        depth--;
      }
      advance();
    }
  }
  void sync_decl() { sync(&is_decl_start); }
  void sync_body() {
    sync([](const Token& t) {
      return is_widget_kw(t) || t.is_kw("go from") || is_decl_start(t);
    });
  }

  ast::Storyboard parse_storyboard() {
    ast::Storyboard sb;
    SourceSpan start = peek().span;
    accept_kw("application");
    expect_ident(sb.app_name, sb.app_span, "application name");
    expect_punct("{", "to open the application body");

    if (peek().is_kw("resources")) parse_resources(sb);
    if (peek().is_kw("security-requirements")) parse_requirements(sb);
    if (peek().is_kw("resources")) {
      expected("'screen' (a resources block must precede security-requirements)");
      parse_resources(sb);
    }

    bool any_screen = false;
    while (!at_end() && !peek().is_punct("}")) {
      if (peek().is_kw("screen")) {
        sb.screens.push_back(parse_screen());
        any_screen = true;
      } else {
        expected("'screen'");
        sync_decl();
        if (peek().is_punct("}")) break;
        if (!is_decl_start(peek()) && !at_end()) advance();
        if (peek().is_kw("resources")) parse_resources(sb);
        if (peek().is_kw("security-requirements")) parse_requirements(sb);
      }
    }
    if (!any_screen)
      error(DiagCode::ParseError, peek().span,
            "an application must declare at least one screen");
    SourceSpan close = peek().span;
    expect_punct("}", "to close the application body");
    sb.span = merge(start, close);
    return sb;
  }

  void parse_resources(ast::Storyboard& sb) {
    accept_kw("resources");
    if (!expect_punct("{", "to open the resources block")) {
      sync_decl();
      return;
    }
    bool any = false;
    while (!at_end() && !peek().is_punct("}")) {
      if (peek().kind == TokenKind::Identifier) {
        sb.resources.push_back(parse_resource());
        any = true;
      } else {
        expected("a resource name");
        sync_decl();
        if (!peek().is_punct("}") && is_decl_start(peek())) break;
        if (!peek().is_punct("}") && peek().kind != TokenKind::Identifier && !at_end())
          advance();
      }
    }
    if (!any) expected("at least one resource declaration");
    if (peek().is_punct("}")) advance();
  }

  ast::Resource parse_resource() {
    ast::Resource r;
    SourceSpan start = peek().span;
    expect_ident(r.name, r.name_span, "a resource name");
    expect_punct(":", "after the resource name");
    if (accept_kw("private")) {
      r.trust = Trust::Private;
    } else if (accept_kw("shared")) {
      r.trust = Trust::Shared;
    } else if (accept_kw("external")) {
      r.trust = Trust::External;
    } else {
      expected("a trust level ('private', 'shared' or 'external')");
    }
    if (!expect_punct("{", "to open the capability list")) {
      sync_decl();
      r.span = merge(start, peek().span);
      return r;
    }
    bool any = false;
    while (!at_end() && !peek().is_punct("}")) {
      if (peek().kind == TokenKind::Identifier) {
        r.capabilities.push_back(parse_capability());
        any = true;
      } else {
        expected("a capability name");
        int depth = 0;
        while (!at_end()) {
          const Token& t = peek();
          if (depth == 0 &&
              (t.is_punct("}") || t.kind == TokenKind::Identifier || is_decl_start(t)))
            break;
          if (t.is_punct("{")) depth++;
          if (t.is_punct("}")) depth--;
          advance();
        }
        if (is_decl_start(peek())) break;
      }
    }
    if (!any) expected("at least one capability");
    SourceSpan close = peek().span;
    if (peek().is_punct("}")) advance();
    r.span = merge(start, close);
    return r;
  }

  ast::Capability parse_capability() {
    ast::Capability c;
    SourceSpan start = peek().span;
    expect_ident(c.name, c.name_span, "a capability name");
    if (expect_punct("(", "after the capability name")) {
      if (!peek().is_punct(")")) parse_params(c.params);
      expect_punct(")", "to close the parameter list");
    }
    if (accept_punct("->")) {
      std::string ret;
      SourceSpan sp;
      if (expect_ident(ret, sp, "a return type name")) c.returns = ret;
    }
    for (;;) {
      if (accept_kw("sensitive")) {
        c.sensitive = true;
      } else if (accept_kw("privileged")) {
        c.privileged = true;
      } else {
        break;
      }
    }
    c.span = merge(start, toks_[pos_ ? pos_ - 1 : 0].span);
    return c;
  }

  void parse_params(std::vector<ast::Param>& out) {
    do {
      ast::Param p;
      SourceSpan name_span;
      if (!expect_ident(p.name, name_span, "a parameter name")) return;
      expect_punct(":", "after the parameter name");
      SourceSpan type_span;
      if (!expect_ident(p.type, type_span, "a type name")) return;
      p.span = merge(name_span, type_span);
      out.push_back(std::move(p));
    } while (accept_punct(","));
  }

  void parse_requirements(ast::Storyboard& sb) {
    accept_kw("security-requirements");
    if (!expect_punct("{", "to open the security-requirements block")) {
      sync_decl();
      return;
    }
    bool any = false;
    while (!at_end() && !peek().is_punct("}")) {
      if (peek().kind == TokenKind::String) {
        ast::Requirement req;
        SourceSpan start = peek().span;
        req.asset = advance().value;
        SourceSpan end = peek().span;
        expect_kw("is private", "after the asset name");
        req.span = merge(start, end);
        if (req.asset.empty()) {
          error(DiagCode::ParseError, req.span,
                "security requirement asset must be non-empty");
        } else {
          sb.requirements.push_back(std::move(req));
        }
        any = true;
      } else {
        expected("a quoted asset name");
        sync_decl();
        if (is_decl_start(peek()) || peek().is_punct("}")) break;
        advance();
      }
    }
    if (!any) expected("at least one security requirement");
    if (peek().is_punct("}")) advance();
  }

  ast::Screen parse_screen() {
    ast::Screen s;
    SourceSpan start = peek().span;
    accept_kw("screen");
    expect_ident(s.name, s.name_span, "a screen name");
    for (;;) {
      if (accept_kw("launcher")) {
        s.launcher = true;
      } else if (accept_kw("exported")) {
        s.exported = true;
      } else {
        break;
      }
    }
    if (accept_punct("(")) {
      if (!peek().is_punct(")")) parse_params(s.params);
      expect_punct(")", "to close the screen parameter list");
    }
    if (!expect_punct("{", "to open the screen body")) {
      sync_decl();
      s.span = merge(start, peek().span);
      return s;
    }

    bool seen_transition = false;
    while (!at_end() && !peek().is_punct("}")) {
      if (is_widget_kw(peek())) {
        if (seen_transition)
          error(DiagCode::ParseError, peek().span,
                "widget declarations must precede transitions in a screen body");
        s.widgets.push_back(parse_widget());
      } else if (peek().is_kw("go from")) {
        seen_transition = true;
        s.transitions.push_back(parse_transition());
      } else {
        expected("a widget declaration, a transition, or '}'");
        sync_body();
        if (is_decl_start(peek())) break;
        if (!peek().is_punct("}") && !is_widget_kw(peek()) && !peek().is_kw("go from") &&
            !at_end())
          advance();
      }
    }
    SourceSpan close = peek().span;
    if (peek().is_punct("}")) advance();
    s.span = merge(start, close);
    return s;
  }

  ast::Widget parse_widget() {
    ast::Widget w;
    SourceSpan start = peek().span;
    const Token& kw = advance();
    if (kw.value == "Button") w.kind = WidgetKind::Button;
    if (kw.value == "TextView") w.kind = WidgetKind::TextView;
    if (kw.value == "TextInput") w.kind = WidgetKind::TextInput;
    SourceSpan name_span;
    expect_ident(w.name, name_span, "a widget name");
    SourceSpan end = name_span;
    if (accept_kw("init")) {
      w.init = parse_expr();
      if (w.init) end = w.init->span;
    }
    w.span = merge(start, end);
    return w;
  }

  ast::Transition parse_transition() {
    ast::Transition t;
    SourceSpan start = peek().span;
    SourceSpan end = start;
    accept_kw("go from");
    expect_ident(t.source, t.source_span, "the source screen name");
    expect_kw("to", "after the source screen name");
    if (expect_ident(t.target, t.target_span, "the target screen name"))
      end = t.target_span;
    if (accept_kw("when")) {
      if (auto g = parse_guard()) {
        end = g->span;
        t.guard = std::move(g);
      }
    }
    while (peek().is_kw("propagate")) {
      ast::Propagation p;
      SourceSpan pstart = peek().span;
      advance();
      p.value = parse_expr();
      if (!p.value) break;
      expect_kw("as", "after the propagated expression");
      SourceSpan name_span = peek().span;
      if (!expect_ident(p.param, name_span, "a target parameter name")) break;
      p.span = merge(pstart, name_span);
      end = name_span;
      t.propagations.push_back(std::move(p));
    }
    t.span = merge(start, end);
    return t;
  }

  // Guard precedence: not > and > or, binary operators left-associative.
  ast::GuardPtr parse_guard() { return parse_or(); }

  ast::GuardPtr parse_or() {
    auto lhs = parse_and();
    while (lhs && peek().is_kw("or")) {
      advance();
      auto rhs = parse_and();
      if (!rhs) return lhs;
      SourceSpan sp = merge(lhs->span, rhs->span);
      lhs = ast::make_binary(ast::GuardKind::Or, std::move(lhs), std::move(rhs), sp);
    }
    return lhs;
  }

  ast::GuardPtr parse_and() {
    auto lhs = parse_unary();
    while (lhs && peek().is_kw("and")) {
      advance();
      auto rhs = parse_unary();
      if (!rhs) return lhs;
      SourceSpan sp = merge(lhs->span, rhs->span);
      lhs = ast::make_binary(ast::GuardKind::And, std::move(lhs), std::move(rhs), sp);
    }
    return lhs;
  }

  ast::GuardPtr parse_unary() {
    if (peek().is_kw("not")) {
      SourceSpan start = advance().span;
      auto inner = parse_unary();
      if (!inner) return nullptr;
      SourceSpan sp = merge(start, inner->span);
      return ast::make_not(std::move(inner), sp);
    }
    if (accept_punct("(")) {
      auto inner = parse_or();
      expect_punct(")", "to close the guard group");
      return inner;
    }
    if (peek().is_kw("condition")) {
      SourceSpan start = advance().span;
      auto e = parse_expr();
      if (!e) return nullptr;
      SourceSpan sp = merge(start, e->span);
      return ast::make_cond(std::move(e), sp);
    }
    if (peek().kind == TokenKind::Identifier && peek(1).is_kw("was pressed")) {
      SourceSpan start = peek().span;
      std::string name = advance().value;
      SourceSpan end = advance().span;
      return ast::make_press(std::move(name), merge(start, end));
    }
    expected("a guard ('<Button> was pressed', 'condition <expr>', 'not', or '(')");
    return nullptr;
  }

  ast::ExprPtr parse_expr() {
    const Token& t = peek();
    if (t.kind == TokenKind::String) {
      advance();
      return ast::make_string(t.value, t.span);
    }
    if (t.kind == TokenKind::Integer) {
      long long v = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc()) v = std::numeric_limits<long long>::max();
      advance();
      return ast::make_int(v, t.span);
    }
    if (t.kind == TokenKind::Identifier) {
      SourceSpan start = t.span;
      SourceSpan end = t.span;
      std::string base = advance().value;
      std::optional<std::string> member;
      if (peek().is_punct(".")) {
        advance();
        std::string m;
        SourceSpan msp;
        if (!expect_ident(m, msp, "a capability name after '.'")) return nullptr;
        member = m;
        end = msp;
      }
      if (accept_punct("(")) {
        std::vector<ast::ExprPtr> args;
        if (!peek().is_punct(")")) {
          do {
            auto a = parse_expr();
            if (!a) return nullptr;
            args.push_back(std::move(a));
          } while (accept_punct(","));
        }
        end = peek().span;
        expect_punct(")", "to close the argument list");
        return ast::make_call(std::move(base), std::move(member), std::move(args),
                              merge(start, end));
      }
      return ast::make_ref(std::move(base), std::move(member), merge(start, end));
    }
    expected("an expression (string, integer, or name)");
    return nullptr;
  }
};

}  // namespace detail

/// Parse a token stream into a raw storyboard tree. Collects every syntax
/// error it can recover from; the partial tree is only meaningful when ok().
inline ParseResult parse(const LexResult& lex) { return detail::Parser(lex).run(); }

/// Convenience front end: lex + parse, with lex errors first in the list.
inline ParseResult parse_source(std::string_view source, const std::string& file) {
  LexResult lex = tokenize(source, file);
  ParseResult res = parse(lex);
  if (!lex.errors.empty()) {
    std::vector<Diagnostic> all = lex.errors;
    all.insert(all.end(), res.errors.begin(), res.errors.end());
    res.errors = std::move(all);
  }
  return res;
}

}  // namespace sema
