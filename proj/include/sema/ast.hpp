#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sema/source.hpp"

namespace sema {

enum class Trust { Private, Shared, External };

inline const char* trust_name(Trust t) {
  switch (t) {
    case Trust::Private: return "private";
    case Trust::Shared: return "shared";
    case Trust::External: return "external";
  }
  return "?";
}

enum class WidgetKind { Button, TextView, TextInput };

inline const char* widget_kind_name(WidgetKind k) {
  switch (k) {
    case WidgetKind::Button: return "Button";
    case WidgetKind::TextView: return "TextView";
    case WidgetKind::TextInput: return "TextInput";
  }
  return "?";
}

namespace ast {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  String,  // literal text
  Int,     // literal integer
  Ref,     // IDENT or IDENT.IDENT without argument list
  Call,    // IDENT(args) or IDENT.IDENT(args)
};

struct Expr {
  ExprKind kind = ExprKind::String;
  SourceSpan span;
  std::string str;                    // String: cooked value
  long long num = 0;                  // Int
  std::string base;                   // Ref/Call: leading identifier
  std::optional<std::string> member;  // Ref/Call: identifier after '.'
  std::vector<ExprPtr> args;          // Call
};

inline ExprPtr make_string(std::string v, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::String;
  e->str = std::move(v);
  e->span = sp;
  return e;
}
inline ExprPtr make_int(long long v, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Int;
  e->num = v;
  e->span = sp;
  return e;
}
inline ExprPtr make_ref(std::string base, std::optional<std::string> member, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ref;
  e->base = std::move(base);
  e->member = std::move(member);
  e->span = sp;
  return e;
}
inline ExprPtr make_call(std::string base, std::optional<std::string> member,
                         std::vector<ExprPtr> args, SourceSpan sp) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Call;
  e->base = std::move(base);
  e->member = std::move(member);
  e->args = std::move(args);
  e->span = sp;
  return e;
}

struct Guard;
using GuardPtr = std::shared_ptr<const Guard>;

enum class GuardKind { Press, Cond, And, Or, Not };

struct Guard {
  GuardKind kind = GuardKind::Cond;
  SourceSpan span;
  std::string button;  // Press: button name
  ExprPtr expr;        // Cond
  GuardPtr lhs, rhs;   // And/Or both, Not uses lhs only
};

inline GuardPtr make_press(std::string button, SourceSpan sp) {
  auto g = std::make_shared<Guard>();
  g->kind = GuardKind::Press;
  g->button = std::move(button);
  g->span = sp;
  return g;
}
inline GuardPtr make_cond(ExprPtr e, SourceSpan sp) {
  auto g = std::make_shared<Guard>();
  g->kind = GuardKind::Cond;
  g->expr = std::move(e);
  g->span = sp;
  return g;
}
inline GuardPtr make_binary(GuardKind k, GuardPtr l, GuardPtr r, SourceSpan sp) {
  auto g = std::make_shared<Guard>();
  g->kind = k;
  g->lhs = std::move(l);
  g->rhs = std::move(r);
  g->span = sp;
  return g;
}
inline GuardPtr make_not(GuardPtr inner, SourceSpan sp) {
  auto g = std::make_shared<Guard>();
  g->kind = GuardKind::Not;
  g->lhs = std::move(inner);
  g->span = sp;
  return g;
}

struct Param {
  std::string name;
  std::string type;
  SourceSpan span;
};

struct Widget {
  WidgetKind kind = WidgetKind::Button;
  std::string name;
  ExprPtr init;  // null when absent
  SourceSpan span;
};

struct Propagation {
  ExprPtr value;
  std::string param;  // target-screen parameter name
  SourceSpan span;
};

struct Transition {
  std::string source;
  std::string target;
  SourceSpan source_span;
  SourceSpan target_span;
  GuardPtr guard;  // null when unguarded
  std::vector<Propagation> propagations;
  SourceSpan span;
};

struct Screen {
  std::string name;
  SourceSpan name_span;
  bool launcher = false;
  bool exported = false;
  std::vector<Param> params;
  std::vector<Widget> widgets;
  std::vector<Transition> transitions;
  SourceSpan span;
};

struct Capability {
  std::string name;
  SourceSpan name_span;
  std::vector<Param> params;
  std::optional<std::string> returns;
  bool sensitive = false;
  bool privileged = false;
  SourceSpan span;
};

struct Resource {
  std::string name;
  SourceSpan name_span;
  Trust trust = Trust::Private;
  std::vector<Capability> capabilities;
  SourceSpan span;
};

struct Requirement {
  std::string asset;  // cooked string value
  SourceSpan span;
};

struct Storyboard {
  std::string app_name;
  SourceSpan app_span;
  std::vector<Resource> resources;
  std::vector<Requirement> requirements;
  std::vector<Screen> screens;
  SourceSpan span;
};

// Structural equality, ignoring spans. Used by the round-trip property.

inline bool same(const ExprPtr& a, const ExprPtr& b);
inline bool same(const GuardPtr& a, const GuardPtr& b);

inline bool same(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::String: return a.str == b.str;
    case ExprKind::Int: return a.num == b.num;
    case ExprKind::Ref: return a.base == b.base && a.member == b.member;
    case ExprKind::Call:
      if (a.base != b.base || a.member != b.member) return false;
      if (a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if (!same(a.args[i], b.args[i])) return false;
      return true;
  }
  return false;
}

inline bool same(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same(*a, *b);
}

inline bool same(const Guard& a, const Guard& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case GuardKind::Press: return a.button == b.button;
    case GuardKind::Cond: return same(a.expr, b.expr);
    case GuardKind::Not: return same(a.lhs, b.lhs);
    case GuardKind::And:
    case GuardKind::Or: return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
  return false;
}

inline bool same(const GuardPtr& a, const GuardPtr& b) {
  if (!a || !b) return !a && !b;
  return same(*a, *b);
}

inline bool same(const Param& a, const Param& b) {
  return a.name == b.name && a.type == b.type;
}

inline bool same(const Widget& a, const Widget& b) {
  return a.kind == b.kind && a.name == b.name && same(a.init, b.init);
}

inline bool same(const Propagation& a, const Propagation& b) {
  return a.param == b.param && same(a.value, b.value);
}

inline bool same(const Transition& a, const Transition& b) {
  if (a.source != b.source || a.target != b.target) return false;
  if (!same(a.guard, b.guard)) return false;
  if (a.propagations.size() != b.propagations.size()) return false;
  for (size_t i = 0; i < a.propagations.size(); ++i)
    if (!same(a.propagations[i], b.propagations[i])) return false;
  return true;
}

template <class T>
inline bool same_seq(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

inline bool same(const Screen& a, const Screen& b) {
  return a.name == b.name && a.launcher == b.launcher && a.exported == b.exported &&
         same_seq(a.params, b.params) && same_seq(a.widgets, b.widgets) &&
         same_seq(a.transitions, b.transitions);
}

inline bool same(const Capability& a, const Capability& b) {
  return a.name == b.name && same_seq(a.params, b.params) && a.returns == b.returns &&
         a.sensitive == b.sensitive && a.privileged == b.privileged;
}

inline bool same(const Resource& a, const Resource& b) {
  return a.name == b.name && a.trust == b.trust && same_seq(a.capabilities, b.capabilities);
}

inline bool same(const Requirement& a, const Requirement& b) { return a.asset == b.asset; }

inline bool same(const Storyboard& a, const Storyboard& b) {
  return a.app_name == b.app_name && same_seq(a.resources, b.resources) &&
         same_seq(a.requirements, b.requirements) && same_seq(a.screens, b.screens);
}

}  // namespace ast
}  // namespace sema
