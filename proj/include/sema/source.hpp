#pragma once

#include <compare>
#include <string>
#include <vector>

namespace sema {

/// Half-open is tempting but the storyboard toolchain reports ranges to
/// humans, so spans are inclusive and 1-based, columns counted in characters.
struct SourceSpan {
  std::string file;
  int start_line = 0;
  int start_col = 0;
  int end_line = 0;
  int end_col = 0;

  bool valid() const { return start_line > 0; }

  friend auto operator<=>(const SourceSpan&, const SourceSpan&) = default;
};

inline SourceSpan merge(const SourceSpan& a, const SourceSpan& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  SourceSpan s = a;
  if (b.end_line > s.end_line || (b.end_line == s.end_line && b.end_col > s.end_col)) {
    s.end_line = b.end_line;
    s.end_col = b.end_col;
  }
  return s;
}

enum class Severity { Error, Warning };

enum class DiagCode {
  // lexer
  LexIllegalChar,
  LexUnterminatedString,
  LexBadEscape,
  // parser
  ParseError,
  ParseEmptyInput,
  // resolver
  UnknownScreen,
  UnknownResource,
  UnknownCapability,
  ArityMismatch,
  DuplicateName,
  NoLauncher,
  MultipleLaunchers,
  PressOnNonButton,
  UnboundParam,
  InvalidInit,
  // well-formedness warnings
  UnreachableScreen,
  UnsatisfiableGuard,
  ExportedNoParams,
};

inline const char* diag_code_name(DiagCode c) {
  switch (c) {
    case DiagCode::LexIllegalChar: return "lex-illegal-char";
    case DiagCode::LexUnterminatedString: return "lex-unterminated-string";
    case DiagCode::LexBadEscape: return "lex-bad-escape";
    case DiagCode::ParseError: return "parse-error";
    case DiagCode::ParseEmptyInput: return "parse-empty-input";
    case DiagCode::UnknownScreen: return "unknown-screen";
    case DiagCode::UnknownResource: return "unknown-resource";
    case DiagCode::UnknownCapability: return "unknown-capability";
    case DiagCode::ArityMismatch: return "arity-mismatch";
    case DiagCode::DuplicateName: return "duplicate-name";
    case DiagCode::NoLauncher: return "no-launcher";
    case DiagCode::MultipleLaunchers: return "multiple-launchers";
    case DiagCode::PressOnNonButton: return "press-on-non-button";
    case DiagCode::UnboundParam: return "unbound-param";
    case DiagCode::InvalidInit: return "invalid-init";
    case DiagCode::UnreachableScreen: return "unreachable-screen";
    case DiagCode::UnsatisfiableGuard: return "unsatisfiable-guard";
    case DiagCode::ExportedNoParams: return "exported-no-params";
  }
  return "unknown";
}

struct Diagnostic {
  DiagCode code{};
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;
};

inline std::string format_diagnostic(const Diagnostic& d) {
  std::string out;
  if (!d.span.file.empty() || d.span.valid()) {
    out += d.span.file + ":" + std::to_string(d.span.start_line) + ":" +
           std::to_string(d.span.start_col) + ": ";
  }
  out += d.severity == Severity::Error ? "error: " : "warning: ";
  out += d.message;
  out += " [";
  out += diag_code_name(d.code);
  out += "]";
  return out;
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace sema
