#pragma once

#include <array>
#include <string>
#include <string_view>

#include "sema/source.hpp"

namespace sema {

enum class TokenKind { Keyword, Identifier, String, Integer, Punct, EndOfFile };

/// `text` is the verbatim source slice (string literals keep their quotes,
/// multi-word keywords keep interior whitespace). `value` is the cooked form:
/// the canonical keyword spelling, the unescaped string contents, or the
/// identifier itself.
struct Token {
  TokenKind kind = TokenKind::EndOfFile;
  std::string text;
  std::string value;
  SourceSpan span;
  size_t offset = 0;  // byte offset of `text` in the source

  bool is_kw(std::string_view kw) const { return kind == TokenKind::Keyword && value == kw; }
  bool is_punct(std::string_view p) const { return kind == TokenKind::Punct && value == p; }
};

// Single-word keyword set. "go from", "was pressed" and "is private" are
// assembled by the lexer from word pairs; their leading words are ordinary
// identifiers on their own.
inline bool is_single_keyword(std::string_view w) {
  static constexpr std::array words = {
      std::string_view("application"), std::string_view("screen"),
      std::string_view("launcher"),    std::string_view("exported"),
      std::string_view("resources"),   std::string_view("security-requirements"),
      std::string_view("private"),     std::string_view("shared"),
      std::string_view("external"),    std::string_view("sensitive"),
      std::string_view("privileged"),  std::string_view("Button"),
      std::string_view("TextView"),    std::string_view("TextInput"),
      std::string_view("init"),        std::string_view("to"),
      std::string_view("when"),        std::string_view("propagate"),
      std::string_view("as"),          std::string_view("condition"),
      std::string_view("and"),         std::string_view("or"),
      std::string_view("not"),
  };
  for (auto w2 : words)
    if (w == w2) return true;
  return false;
}

/// First word of a two-word keyword -> required second word.
inline const char* keyword_pair_tail(std::string_view head) {
  if (head == "go") return "from";
  if (head == "was") return "pressed";
  if (head == "is") return "private";
  return nullptr;
}

}  // namespace sema
