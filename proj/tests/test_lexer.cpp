#include <random>

#include "helpers.hpp"

using namespace sema;

namespace {

std::vector<std::string> token_values(const std::string& src) {
  LexResult r = tokenize(src, "<t>");
  std::vector<std::string> out;
  for (const auto& t : r.tokens) out.push_back(t.value);
  return out;
}

const Token& single(const LexResult& r) {
  REQUIRE(r.tokens.size() == 1);
  return r.tokens[0];
}

}  // namespace

TEST_CASE("single-word keywords vs identifiers") {
  LexResult r = tokenize("application screen Fancy launcher widgetry", "<t>");
  REQUIRE(r.ok());
  REQUIRE(r.tokens.size() == 5);
  CHECK(r.tokens[0].kind == TokenKind::Keyword);
  CHECK(r.tokens[0].value == "application");
  CHECK(r.tokens[1].is_kw("screen"));
  CHECK(r.tokens[2].kind == TokenKind::Identifier);
  CHECK(r.tokens[2].value == "Fancy");
  CHECK(r.tokens[3].is_kw("launcher"));
  // not a keyword, even though it shares a prefix with one
  CHECK(r.tokens[4].kind == TokenKind::Identifier);
}

TEST_CASE("two-word keywords join only within one line") {
  SECTION("go from") {
    LexResult r = tokenize("go from", "<t>");
    const Token& t = single(r);
    CHECK(t.kind == TokenKind::Keyword);
    CHECK(t.value == "go from");
    CHECK(t.text == "go from");
  }
  SECTION("interior blanks are preserved in text but normalized in value") {
    LexResult r = tokenize("go \t  from", "<t>");
    const Token& t = single(r);
    CHECK(t.value == "go from");
    CHECK(t.text == "go \t  from");
  }
  SECTION("a newline splits the pair") {
    LexResult r = tokenize("go\nfrom", "<t>");
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].kind == TokenKind::Identifier);
    CHECK(r.tokens[0].value == "go");
    CHECK(r.tokens[1].kind == TokenKind::Identifier);
  }
  SECTION("wrong second word leaves two identifiers") {
    LexResult r = tokenize("go forth", "<t>");
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].kind == TokenKind::Identifier);
    CHECK(r.tokens[1].kind == TokenKind::Identifier);
  }
  SECTION("second word must end at an identifier boundary") {
    LexResult r = tokenize("was pressedX", "<t>");
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].value == "was");
    CHECK(r.tokens[1].value == "pressedX");
  }
  SECTION("was pressed / is private") {
    CHECK(token_values("was pressed") == std::vector<std::string>{"was pressed"});
    CHECK(token_values("is private") == std::vector<std::string>{"is private"});
  }
}

TEST_CASE("security-requirements is one hyphenated keyword") {
  LexResult r = tokenize("security-requirements", "<t>");
  const Token& t = single(r);
  CHECK(t.kind == TokenKind::Keyword);
  CHECK(t.value == "security-requirements");

  // With a longer identifier tail the hyphen is not part of any token.
  LexResult r2 = tokenize("security-requirementsX", "<t>");
  REQUIRE(r2.tokens.size() == 2);
  CHECK(r2.tokens[0].value == "security");
  CHECK(r2.tokens[1].value == "requirementsX");
  REQUIRE(r2.errors.size() == 1);
  CHECK(r2.errors[0].code == DiagCode::LexIllegalChar);

  LexResult r3 = tokenize("security", "<t>");
  CHECK(single(r3).kind == TokenKind::Identifier);
}

TEST_CASE("string literals") {
  SECTION("plain") {
    LexResult r = tokenize("\"hello there\"", "<t>");
    const Token& t = single(r);
    CHECK(t.kind == TokenKind::String);
    CHECK(t.value == "hello there");
    CHECK(t.text == "\"hello there\"");
  }
  SECTION("escapes") {
    LexResult r = tokenize("\"a\\\"b\\\\c\"", "<t>");
    REQUIRE(r.ok());
    CHECK(single(r).value == "a\"b\\c");
  }
  SECTION("unsupported escape is an error but lexing continues") {
    LexResult r = tokenize("\"a\\nb\" next", "<t>");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].code == DiagCode::LexBadEscape);
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].kind == TokenKind::String);
    CHECK(r.tokens[1].value == "next");
  }
  SECTION("unterminated at end of line") {
    LexResult r = tokenize("\"abc\nnext", "<t>");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].code == DiagCode::LexUnterminatedString);
    REQUIRE(r.tokens.size() == 2);
    CHECK(r.tokens[0].value == "abc");
    CHECK(r.tokens[1].value == "next");
  }
  SECTION("unterminated at end of input") {
    LexResult r = tokenize("\"abc", "<t>");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].code == DiagCode::LexUnterminatedString);
  }
}

TEST_CASE("integers and punctuation") {
  LexResult r = tokenize("init 42 -> ( ) { } : , .", "<t>");
  REQUIRE(r.ok());
  REQUIRE(r.tokens.size() == 10);
  CHECK(r.tokens[1].kind == TokenKind::Integer);
  CHECK(r.tokens[1].value == "42");
  CHECK(r.tokens[2].is_punct("->"));
  CHECK(r.tokens[3].is_punct("("));
  CHECK(r.tokens[9].is_punct("."));
}

TEST_CASE("illegal characters are reported and skipped") {
  LexResult r = tokenize("a @ b", "<t>");
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].code == DiagCode::LexIllegalChar);
  CHECK(r.errors[0].message.find("'@'") != std::string::npos);
  CHECK(token_values("a @ b") == std::vector<std::string>{"a", "b"});

  // a bare '-' (not part of '->') is illegal
  LexResult r2 = tokenize("a - b", "<t>");
  REQUIRE(r2.errors.size() == 1);

  // non-printable characters render as hex escapes in the message
  LexResult r3 = tokenize(std::string("\x01", 1), "<t>");
  REQUIRE(r3.errors.size() == 1);
  CHECK(r3.errors[0].message.find("\\x01") != std::string::npos);
}

TEST_CASE("comments run to end of line") {
  LexResult r = tokenize("a // all of : this ( ignored\nb", "<t>");
  REQUIRE(r.ok());
  CHECK(token_values("a // ignored\nb") == std::vector<std::string>{"a", "b"});
  CHECK(r.tokens[1].span.start_line == 2);
}

TEST_CASE("spans are 1-based inclusive and columns count characters") {
  LexResult r = tokenize("screen Home\n  Button Go", "<t>");
  REQUIRE(r.tokens.size() == 4);
  CHECK(r.tokens[0].span.start_line == 1);
  CHECK(r.tokens[0].span.start_col == 1);
  CHECK(r.tokens[0].span.end_col == 6);
  CHECK(r.tokens[1].span.start_col == 8);
  CHECK(r.tokens[2].span.start_line == 2);
  CHECK(r.tokens[2].span.start_col == 3);

  // multibyte characters inside a string advance the column by one each
  LexResult u = tokenize("\"h\xc3\xa9llo\" x", "<t>");
  REQUIRE(u.ok());
  REQUIRE(u.tokens.size() == 2);
  CHECK(u.tokens[0].span.end_col == 7);
  CHECK(u.tokens[1].span.start_col == 9);
}

TEST_CASE("token text slices concatenate back into the source") {
  // every token's text is literally the source bytes at its offset
  auto check_offsets = [](const std::string& src) {
    LexResult r = tokenize(src, "<t>");
    size_t prev_end = 0;
    for (const auto& t : r.tokens) {
      REQUIRE(t.offset >= prev_end);
      REQUIRE(t.offset + t.text.size() <= src.size());
      CHECK(src.substr(t.offset, t.text.size()) == t.text);
      prev_end = t.offset + t.text.size();
    }
  };
  check_offsets(testutil::slurp_fixture("emergency.sb"));
  check_offsets(testutil::slurp_fixture("exported.sb"));
  check_offsets("go from \"str\\\"\" 12 -> // c\nwas pressed");
}

TEST_CASE("lexing arbitrary bytes neither crashes nor loops") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(0, 160);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> nice(0, 20);
  const std::string pool = "az09_{}():,.\"\\-> \n\t/";
  for (int iter = 0; iter < 300; ++iter) {
    std::string src;
    int n = len(rng);
    for (int i = 0; i < n; ++i) {
      // bias towards structurally interesting bytes
      if (nice(rng) < 17)
        src.push_back(pool[static_cast<size_t>(nice(rng))]);
      else
        src.push_back(static_cast<char>(byte(rng)));
    }
    LexResult r = tokenize(src, "<fuzz>");
    size_t prev = 0;
    for (const auto& t : r.tokens) {
      REQUIRE(t.offset >= prev);
      REQUIRE(src.substr(t.offset, t.text.size()) == t.text);
      REQUIRE(t.span.valid());
      prev = t.offset + t.text.size();
    }
  }
}
