#pragma once

#include <string>
#include <vector>

#include "sema/source.hpp"
#include "sema/token.hpp"

namespace sema {

struct LexResult {
  std::vector<Token> tokens;      // real tokens only, no EOF sentinel
  SourceSpan end;                 // position just past the last character
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_utf8_continuation(unsigned char c) { return (c & 0xc0) == 0x80; }

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  LexResult run() {
    LexResult out;
    while (!at_end()) {
      skip_trivia();
      if (at_end()) break;
      lex_one(out);
    }
    out.end = here_span();
    return out;
  }

 private:
  std::string_view src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  // Columns count characters, not bytes: only count a column for bytes that
  // start a new UTF-8 code point. Invalid sequences degrade to byte counting.
  void advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      line_++;
      col_ = 1;
      return;
    }
    if (pos_ >= src_.size() || !is_utf8_continuation(static_cast<unsigned char>(src_[pos_])))
      col_++;
  }

  SourceSpan here_span() const {
    SourceSpan s;
    s.file = file_;
    s.start_line = s.end_line = line_;
    s.start_col = s.end_col = col_;
    return s;
  }

  struct Mark {
    size_t pos;
    int line, col;
  };
  Mark mark() const { return {pos_, line_, col_}; }
  void rewind(const Mark& m) {
    pos_ = m.pos;
    line_ = m.line;
    col_ = m.col;
  }

  SourceSpan span_from(const Mark& m) const {
    SourceSpan s;
    s.file = file_;
    s.start_line = m.line;
    s.start_col = m.col;
    // end is the last consumed character position
    s.end_line = line_;
    s.end_col = col_ > 1 ? col_ - 1 : 1;
    return s;
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  // Spaces/tabs only; a two-word keyword must sit on one line.
  bool skip_inline_blanks() {
    bool any = false;
    while (!at_end() && (peek() == ' ' || peek() == '\t')) {
      advance();
      any = true;
    }
    return any;
  }

  void push(LexResult& out, TokenKind kind, const Mark& m, std::string value) {
    Token t;
    t.kind = kind;
    t.offset = m.pos;
    t.text = std::string(src_.substr(m.pos, pos_ - m.pos));
    t.value = std::move(value);
    t.span = span_from(m);
    out.tokens.push_back(std::move(t));
  }

  void error(LexResult& out, DiagCode code, const SourceSpan& span, std::string msg) {
    out.errors.push_back({code, Severity::Error, std::move(msg), span});
  }

  void lex_one(LexResult& out) {
    Mark m = mark();
    char c = peek();

    if (is_ident_start(c)) {
      lex_word(out, m);
      return;
    }
    if (is_digit(c)) {
      while (!at_end() && is_digit(peek())) advance();
      push(out, TokenKind::Integer, m, std::string(src_.substr(m.pos, pos_ - m.pos)));
      return;
    }
    if (c == '"') {
      lex_string(out, m);
      return;
    }

    // punctuation
    switch (c) {
      case '{': case '}': case '(': case ')': case ':': case ',': case '.':
        advance();
        push(out, TokenKind::Punct, m, std::string(1, c));
        return;
      case '-':
        if (peek(1) == '>') {
          advance();
          advance();
          push(out, TokenKind::Punct, m, "->");
          return;
        }
        break;
      default:
        break;
    }

    advance();
    error(out, DiagCode::LexIllegalChar, span_from(m),
          "illegal character '" + printable(c) + "'");
  }

  static std::string printable(char c) {
    if (c >= 0x20 && c < 0x7f) return std::string(1, c);
    char buf[8];
    std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
    return buf;
  }

  void lex_word(LexResult& out, const Mark& m) {
    while (!at_end() && is_ident_char(peek())) advance();
    std::string word(src_.substr(m.pos, pos_ - m.pos));

    // "security-requirements" is the one hyphenated keyword.
    if (word == "security" && src_.substr(pos_).starts_with("-requirements") &&
        (pos_ + 13 >= src_.size() || !is_ident_char(src_[pos_ + 13]))) {
      for (int i = 0; i < 13; ++i) advance();
      push(out, TokenKind::Keyword, m, "security-requirements");
      return;
    }

    if (const char* tail = keyword_pair_tail(word)) {
      Mark after_head = mark();
      skip_inline_blanks();
      Mark m2 = mark();
      if (!at_end() && is_ident_start(peek())) {
        while (!at_end() && is_ident_char(peek())) advance();
        std::string second(src_.substr(m2.pos, pos_ - m2.pos));
        if (second == tail && m2.pos > after_head.pos) {
          push(out, TokenKind::Keyword, m, word + " " + tail);
          return;
        }
      }
      rewind(after_head);
    }

    if (is_single_keyword(word)) {
      push(out, TokenKind::Keyword, m, word);
    } else {
      push(out, TokenKind::Identifier, m, word);
    }
  }

  void lex_string(LexResult& out, const Mark& m) {
    advance();  // opening quote
    std::string value;
    while (true) {
      if (at_end() || peek() == '\n') {
        push(out, TokenKind::String, m, value);
        error(out, DiagCode::LexUnterminatedString, span_from(m), "unterminated string literal");
        return;
      }
      char c = peek();
      if (c == '"') {
        advance();
        push(out, TokenKind::String, m, value);
        return;
      }
      if (c == '\\') {
        Mark em = mark();
        advance();
        char e = peek();
        if (e == '"' || e == '\\') {
          value.push_back(e);
          advance();
        } else {
          advance();
          error(out, DiagCode::LexBadEscape, span_from(em),
                "unsupported escape sequence (only \\\" and \\\\ are allowed)");
        }
        continue;
      }
      value.push_back(c);
      advance();
    }
  }
};

}  // namespace detail

/// Lex `source` into tokens. Never throws: lexical problems are collected in
/// the result and scanning continues past them.
inline LexResult tokenize(std::string_view source, const std::string& file) {
  return detail::Lexer(source, file).run();
}

}  // namespace sema
