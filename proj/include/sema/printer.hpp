#pragma once

#include <string>

#include "sema/ast.hpp"
#include "sema/util.hpp"

namespace sema {

/// Re-quote a cooked string value for source output.
inline std::string quote_string(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string print_expr(const ast::Expr& e) {
  switch (e.kind) {
    case ast::ExprKind::String:
      return quote_string(e.str);
    case ast::ExprKind::Int:
      return std::to_string(e.num);
    case ast::ExprKind::Ref:
      return e.member ? e.base + "." + *e.member : e.base;
    case ast::ExprKind::Call: {
      std::string head = e.member ? e.base + "." + *e.member : e.base;
      std::vector<std::string> parts;
      parts.reserve(e.args.size());
      for (const auto& a : e.args) parts.push_back(print_expr(*a));
      return head + "(" + join(parts, ", ") + ")";
    }
  }
  return "";
}

namespace detail {

inline int guard_prec(ast::GuardKind k) {
  switch (k) {
    case ast::GuardKind::Or: return 1;
    case ast::GuardKind::And: return 2;
    case ast::GuardKind::Not: return 3;
    default: return 4;  // atoms
  }
}

inline std::string print_guard_prec(const ast::Guard& g, int min_prec) {
  int prec = guard_prec(g.kind);
  std::string body;
  switch (g.kind) {
    case ast::GuardKind::Press:
      body = g.button + " was pressed";
      break;
    case ast::GuardKind::Cond:
      body = "condition " + print_expr(*g.expr);
      break;
    case ast::GuardKind::Not:
      body = "not " + print_guard_prec(*g.lhs, prec);
      break;
    case ast::GuardKind::And:
    case ast::GuardKind::Or: {
      const char* op = g.kind == ast::GuardKind::And ? " and " : " or ";
      // left-associative: the right operand needs strictly higher precedence
      body = print_guard_prec(*g.lhs, prec) + op + print_guard_prec(*g.rhs, prec + 1);
      break;
    }
  }
  if (prec < min_prec) return "(" + body + ")";
  return body;
}

}  // namespace detail

inline std::string print_guard(const ast::Guard& g) {
  return detail::print_guard_prec(g, 0);
}

inline std::string print_transition(const ast::Transition& t) {
  std::string line = "go from " + t.source + " to " + t.target;
  if (t.guard) line += " when " + print_guard(*t.guard);
  for (const auto& p : t.propagations)
    line += " propagate " + print_expr(*p.value) + " as " + p.param;
  return line;
}

inline std::string print_params(const std::vector<ast::Param>& params) {
  std::vector<std::string> parts;
  parts.reserve(params.size());
  for (const auto& p : params) parts.push_back(p.name + ": " + p.type);
  return "(" + join(parts, ", ") + ")";
}

/// Canonical source form: 2-space indent, one declaration per line, empty
/// bodies printed as `{ }`. Re-parses to a structurally identical tree.
inline std::string pretty_print(const ast::Storyboard& sb) {
  std::string out;
  auto line = [&out](int indent, const std::string& text) {
    out.append(static_cast<size_t>(indent) * 2, ' ');
    out += text;
    out += '\n';
  };

  line(0, "application " + sb.app_name + " {");

  if (!sb.resources.empty()) {
    line(1, "resources {");
    for (const auto& r : sb.resources) {
      line(2, r.name + " : " + std::string(trust_name(r.trust)) + " {");
      for (const auto& c : r.capabilities) {
        std::string sig = c.name + print_params(c.params);
        if (c.returns) sig += " -> " + *c.returns;
        if (c.sensitive) sig += " sensitive";
        if (c.privileged) sig += " privileged";
        line(3, sig);
      }
      line(2, "}");
    }
    line(1, "}");
  }

  if (!sb.requirements.empty()) {
    line(1, "security-requirements {");
    for (const auto& req : sb.requirements)
      line(2, quote_string(req.asset) + " is private");
    line(1, "}");
  }

  for (const auto& s : sb.screens) {
    std::string head = "screen " + s.name;
    if (s.launcher) head += " launcher";
    if (s.exported) head += " exported";
    if (!s.params.empty()) head += " " + print_params(s.params);
    if (s.widgets.empty() && s.transitions.empty()) {
      line(1, head + " { }");
      continue;
    }
    line(1, head + " {");
    for (const auto& w : s.widgets) {
      std::string decl = std::string(widget_kind_name(w.kind)) + " " + w.name;
      if (w.init) decl += " init " + print_expr(*w.init);
      line(2, decl);
    }
    for (const auto& t : s.transitions) line(2, print_transition(t));
    line(1, "}");
  }

  line(0, "}");
  return out;
}

}  // namespace sema
