#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sema/ast.hpp"
#include "sema/printer.hpp"

namespace sema::model {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { String, Int, WidgetRef, ParamRef, Call };

struct Expr {
  ExprKind kind = ExprKind::String;
  SourceSpan span;
  std::string str;         // String
  long long num = 0;       // Int
  std::string screen;      // WidgetRef/ParamRef: enclosing screen
  std::string name;        // WidgetRef/ParamRef: widget or param name
  std::string resource;    // Call
  std::string capability;  // Call
  std::vector<ExprPtr> args;
};

struct Guard;
using GuardPtr = std::shared_ptr<const Guard>;

enum class GuardKind { Press, Cond, And, Or, Not };

struct Guard {
  GuardKind kind = GuardKind::Cond;
  SourceSpan span;
  std::string button;  // Press
  ExprPtr expr;        // Cond
  GuardPtr lhs, rhs;   // And/Or; Not uses lhs
};

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
  std::string param;
  SourceSpan span;
};

struct Transition {
  std::string source;
  std::string target;
  GuardPtr guard;  // null = always fires
  std::vector<Propagation> propagations;
  SourceSpan span;
};

struct Screen {
  std::string name;
  bool launcher = false;
  bool exported = false;
  std::vector<Param> params;
  std::vector<Widget> widgets;
  std::vector<Transition> transitions;  // transitions whose source is this screen
  SourceSpan span;

  const Widget* widget(const std::string& n) const {
    for (const auto& w : widgets)
      if (w.name == n) return &w;
    return nullptr;
  }
  const Param* param(const std::string& n) const {
    for (const auto& p : params)
      if (p.name == n) return &p;
    return nullptr;
  }
};

struct Capability {
  std::string name;
  std::vector<Param> params;
  std::optional<std::string> returns;
  bool sensitive = false;
  bool privileged = false;
  SourceSpan span;
};

struct ResourceView {
  std::string name;
  Trust trust = Trust::Private;
  std::vector<Capability> capabilities;
  SourceSpan span;

  const Capability* capability(const std::string& n) const {
    for (const auto& c : capabilities)
      if (c.name == n) return &c;
    return nullptr;
  }
};

struct SecurityRequirement {
  std::string asset;  // IsPrivate is the only requirement kind
  SourceSpan span;
};

struct Storyboard {
  std::string app_name;
  std::vector<Screen> screens;
  std::vector<ResourceView> resources;
  std::vector<SecurityRequirement> requirements;
  std::string entry;  // launcher screen name

  const Screen* screen(const std::string& n) const {
    for (const auto& s : screens)
      if (s.name == n) return &s;
    return nullptr;
  }
  Screen* screen_mut(const std::string& n) {
    for (auto& s : screens)
      if (s.name == n) return &s;
    return nullptr;
  }
  const ResourceView* resource(const std::string& n) const {
    for (const auto& r : resources)
      if (r.name == n) return &r;
    return nullptr;
  }
  const Capability* capability(const std::string& r, const std::string& c) const {
    const ResourceView* rv = resource(r);
    return rv ? rv->capability(c) : nullptr;
  }
  bool asset_required_private(const std::string& asset) const {
    for (const auto& req : requirements)
      if (req.asset == asset) return true;
    return false;
  }
};

// Canonical text forms, used in reports and generated artifacts.

inline std::string to_text(const Expr& e) {
  switch (e.kind) {
    case ExprKind::String: return quote_string(e.str);
    case ExprKind::Int: return std::to_string(e.num);
    case ExprKind::WidgetRef:
    case ExprKind::ParamRef: return e.name;
    case ExprKind::Call: {
      std::vector<std::string> parts;
      parts.reserve(e.args.size());
      for (const auto& a : e.args) parts.push_back(to_text(*a));
      return e.resource + "." + e.capability + "(" + join(parts, ", ") + ")";
    }
  }
  return "";
}

namespace detail {
inline int guard_prec(GuardKind k) {
  switch (k) {
    case GuardKind::Or: return 1;
    case GuardKind::And: return 2;
    case GuardKind::Not: return 3;
    default: return 4;
  }
}
inline std::string guard_text_prec(const Guard& g, int min_prec) {
  int prec = guard_prec(g.kind);
  std::string body;
  switch (g.kind) {
    case GuardKind::Press: body = g.button + " was pressed"; break;
    case GuardKind::Cond: body = "condition " + to_text(*g.expr); break;
    case GuardKind::Not: body = "not " + guard_text_prec(*g.lhs, prec); break;
    case GuardKind::And:
    case GuardKind::Or:
      body = guard_text_prec(*g.lhs, prec) +
             (g.kind == GuardKind::And ? " and " : " or ") +
             guard_text_prec(*g.rhs, prec + 1);
      break;
  }
  return prec < min_prec ? "(" + body + ")" : body;
}
}  // namespace detail

inline std::string to_text(const Guard& g) { return detail::guard_text_prec(g, 0); }

// Structural equality ignoring spans (used by the guard-contradiction check).

inline bool same(const ExprPtr& a, const ExprPtr& b);

inline bool same(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::String: return a.str == b.str;
    case ExprKind::Int: return a.num == b.num;
    case ExprKind::WidgetRef:
    case ExprKind::ParamRef: return a.screen == b.screen && a.name == b.name;
    case ExprKind::Call:
      if (a.resource != b.resource || a.capability != b.capability) return false;
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
    case GuardKind::Not: return same(*a.lhs, *b.lhs);
    case GuardKind::And:
    case GuardKind::Or: return same(*a.lhs, *b.lhs) && same(*a.rhs, *b.rhs);
  }
  return false;
}

struct ResolveResult {
  Storyboard storyboard;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

class Resolver {
 public:
  explicit Resolver(const ast::Storyboard& raw) : raw_(raw) {}

  ResolveResult run() {
    ResolveResult out;
    Storyboard& sb = out.storyboard;
    sb.app_name = raw_.app_name;

    resolve_resources(sb);
    resolve_requirements(sb);
    declare_screens(sb);
    pick_entry(sb);
    resolve_screen_bodies(sb);

    out.errors = std::move(errors_);
    return out;
  }

 private:
  const ast::Storyboard& raw_;
  std::vector<Diagnostic> errors_;

  void error(DiagCode code, const SourceSpan& span, std::string msg) {
    errors_.push_back({code, Severity::Error, std::move(msg), span});
  }

  void resolve_resources(Storyboard& sb) {
    for (const auto& rr : raw_.resources) {
      if (sb.resource(rr.name)) {
        error(DiagCode::DuplicateName, rr.name_span,
              "duplicate resource name '" + rr.name + "'");
        continue;
      }
      ResourceView rv;
      rv.name = rr.name;
      rv.trust = rr.trust;
      rv.span = rr.span;
      for (const auto& rc : rr.capabilities) {
        if (rv.capability(rc.name)) {
          error(DiagCode::DuplicateName, rc.name_span,
                "duplicate capability '" + rc.name + "' in resource '" + rr.name + "'");
          continue;
        }
        Capability c;
        c.name = rc.name;
        c.returns = rc.returns;
        c.sensitive = rc.sensitive;
        c.privileged = rc.privileged;
        c.span = rc.span;
        for (const auto& p : rc.params) {
          bool dup = std::any_of(c.params.begin(), c.params.end(),
                                 [&](const Param& q) { return q.name == p.name; });
          if (dup)
            error(DiagCode::DuplicateName, p.span,
                  "duplicate parameter '" + p.name + "' in capability '" + rc.name + "'");
          c.params.push_back({p.name, p.type, p.span});
        }
        rv.capabilities.push_back(std::move(c));
      }
      sb.resources.push_back(std::move(rv));
    }
  }

  void resolve_requirements(Storyboard& sb) {
    for (const auto& rq : raw_.requirements)
      sb.requirements.push_back({rq.asset, rq.span});
  }

  void declare_screens(Storyboard& sb) {
    for (const auto& rs : raw_.screens) {
      if (sb.screen(rs.name)) {
        error(DiagCode::DuplicateName, rs.name_span,
              "duplicate screen name '" + rs.name + "'");
        continue;
      }
      Screen s;
      s.name = rs.name;
      s.launcher = rs.launcher;
      s.exported = rs.exported;
      s.span = rs.span;
      for (const auto& p : rs.params) {
        bool dup = std::any_of(s.params.begin(), s.params.end(),
                               [&](const Param& q) { return q.name == p.name; });
        if (dup)
          error(DiagCode::DuplicateName, p.span,
                "duplicate parameter '" + p.name + "' on screen '" + rs.name + "'");
        s.params.push_back({p.name, p.type, p.span});
      }
      for (const auto& w : rs.widgets) {
        if (s.widget(w.name)) {
          error(DiagCode::DuplicateName, w.span,
                "duplicate widget name '" + w.name + "' on screen '" + rs.name + "'");
          continue;
        }
        if (s.param(w.name))
          error(DiagCode::DuplicateName, w.span,
                "widget '" + w.name + "' collides with a parameter of screen '" +
                    rs.name + "'");
        Widget mw;
        mw.kind = w.kind;
        mw.name = w.name;
        mw.span = w.span;
        s.widgets.push_back(std::move(mw));  // init resolved later, needs all names
      }
      sb.screens.push_back(std::move(s));
    }
  }

  void pick_entry(Storyboard& sb) {
    std::vector<const ast::Screen*> launchers;
    for (const auto& rs : raw_.screens)
      if (rs.launcher) launchers.push_back(&rs);
    if (launchers.empty()) {
      error(DiagCode::NoLauncher, raw_.app_span,
            "no screen is marked 'launcher'; the app has no entry point");
      return;
    }
    if (launchers.size() > 1) {
      for (size_t i = 1; i < launchers.size(); ++i)
        error(DiagCode::MultipleLaunchers, launchers[i]->name_span,
              "screen '" + launchers[i]->name + "' is a second launcher (entry is '" +
                  launchers[0]->name + "')");
    }
    sb.entry = launchers[0]->name;
  }

  // Expression resolution against a screen context.

  ExprPtr resolve_expr(const Storyboard& sb, const Screen& ctx, const ast::Expr& e) {
    auto out = std::make_shared<Expr>();
    out->span = e.span;
    switch (e.kind) {
      case ast::ExprKind::String:
        out->kind = ExprKind::String;
        out->str = e.str;
        return out;
      case ast::ExprKind::Int:
        out->kind = ExprKind::Int;
        out->num = e.num;
        return out;
      case ast::ExprKind::Ref:
        if (!e.member) {
          if (ctx.widget(e.base)) {
            out->kind = ExprKind::WidgetRef;
            out->screen = ctx.name;
            out->name = e.base;
            return out;
          }
          if (ctx.param(e.base)) {
            out->kind = ExprKind::ParamRef;
            out->screen = ctx.name;
            out->name = e.base;
            return out;
          }
          error(DiagCode::UnboundParam, e.span,
                "'" + e.base + "' is not a widget or parameter of screen '" + ctx.name +
                    "'");
          return nullptr;
        }
        // dotted reference without arguments: a zero-argument capability call
        return resolve_call(sb, ctx, e, {});
      case ast::ExprKind::Call:
        return resolve_call(sb, ctx, e, e.args);
    }
    return nullptr;
  }

  ExprPtr resolve_call(const Storyboard& sb, const Screen& ctx, const ast::Expr& e,
                       const std::vector<ast::ExprPtr>& args) {
    if (!e.member) {
      if (sb.resource(e.base))
        error(DiagCode::UnknownCapability, e.span,
              "call to resource '" + e.base + "' is missing a capability name");
      else
        error(DiagCode::UnknownResource, e.span,
              "'" + e.base + "' is not a declared resource");
      return nullptr;
    }
    const ResourceView* rv = sb.resource(e.base);
    if (!rv) {
      error(DiagCode::UnknownResource, e.span,
            "'" + e.base + "' is not a declared resource");
      return nullptr;
    }
    const Capability* cap = rv->capability(*e.member);
    if (!cap) {
      error(DiagCode::UnknownCapability, e.span,
            "resource '" + rv->name + "' has no capability '" + *e.member + "'");
      return nullptr;
    }
    auto out = std::make_shared<Expr>();
    out->kind = ExprKind::Call;
    out->span = e.span;
    out->resource = rv->name;
    out->capability = cap->name;
    if (args.size() != cap->params.size()) {
      error(DiagCode::ArityMismatch, e.span,
            "capability '" + rv->name + "." + cap->name + "' expects " +
                std::to_string(cap->params.size()) + " argument(s), got " +
                std::to_string(args.size()));
      // keep resolving the arguments for their own diagnostics
    }
    bool bad_arg = false;
    for (const auto& a : args) {
      ExprPtr ra = resolve_expr(sb, ctx, *a);
      if (!ra) bad_arg = true;
      out->args.push_back(std::move(ra));
    }
    if (bad_arg || args.size() != cap->params.size()) return nullptr;
    return out;
  }

  GuardPtr resolve_guard(const Storyboard& sb, const Screen& ctx, const ast::Guard& g) {
    auto out = std::make_shared<Guard>();
    out->span = g.span;
    switch (g.kind) {
      case ast::GuardKind::Press: {
        out->kind = GuardKind::Press;
        out->button = g.button;
        const Widget* w = ctx.widget(g.button);
        if (!w)
          error(DiagCode::PressOnNonButton, g.span,
                "'" + g.button + "' is not a widget of screen '" + ctx.name + "'");
        else if (w->kind != WidgetKind::Button)
          error(DiagCode::PressOnNonButton, g.span,
                "'" + g.button + "' is a " + widget_kind_name(w->kind) +
                    ", only Buttons can be pressed");
        return out;
      }
      case ast::GuardKind::Cond: {
        out->kind = GuardKind::Cond;
        out->expr = resolve_expr(sb, ctx, *g.expr);
        return out->expr ? out : nullptr;
      }
      case ast::GuardKind::Not: {
        out->kind = GuardKind::Not;
        out->lhs = resolve_guard(sb, ctx, *g.lhs);
        return out->lhs ? out : nullptr;
      }
      case ast::GuardKind::And:
      case ast::GuardKind::Or: {
        out->kind = g.kind == ast::GuardKind::And ? GuardKind::And : GuardKind::Or;
        out->lhs = resolve_guard(sb, ctx, *g.lhs);
        out->rhs = resolve_guard(sb, ctx, *g.rhs);
        return out->lhs && out->rhs ? out : nullptr;
      }
    }
    return nullptr;
  }

  void resolve_screen_bodies(Storyboard& sb) {
    // widget init expressions
    for (const auto& rs : raw_.screens) {
      Screen* s = sb.screen_mut(rs.name);
      if (!s) continue;
      for (const auto& rw : rs.widgets) {
        if (!rw.init) continue;
        if (rw.kind == WidgetKind::Button) {
          error(DiagCode::InvalidInit, rw.span,
                "Button '" + rw.name + "' cannot have an init expression");
          continue;
        }
        for (auto& w : s->widgets)
          if (w.name == rw.name) w.init = resolve_expr(sb, *s, *rw.init);
      }
    }
    // transitions are attached to the screen named as their source
    for (const auto& rs : raw_.screens) {
      for (const auto& rt : rs.transitions) {
        Screen* src = sb.screen_mut(rt.source);
        if (!src) {
          error(DiagCode::UnknownScreen, rt.source_span,
                "'" + rt.source + "' is not a declared screen");
          continue;
        }
        const Screen* tgt = sb.screen(rt.target);
        if (!tgt) {
          error(DiagCode::UnknownScreen, rt.target_span,
                "'" + rt.target + "' is not a declared screen");
          continue;
        }
        Transition t;
        t.source = rt.source;
        t.target = rt.target;
        t.span = rt.span;
        if (rt.guard) t.guard = resolve_guard(sb, *src, *rt.guard);
        std::set<std::string> bound;
        for (const auto& rp : rt.propagations) {
          if (!tgt->param(rp.param)) {
            error(DiagCode::UnboundParam, rp.span,
                  "screen '" + tgt->name + "' has no parameter '" + rp.param + "'");
            continue;
          }
          if (!bound.insert(rp.param).second) {
            error(DiagCode::DuplicateName, rp.span,
                  "parameter '" + rp.param + "' is bound twice on this transition");
            continue;
          }
          Propagation p;
          p.param = rp.param;
          p.span = rp.span;
          p.value = rp.value ? resolve_expr(sb, *src, *rp.value) : nullptr;
          if (p.value) t.propagations.push_back(std::move(p));
        }
        for (const auto& p : tgt->params) {
          if (!bound.count(p.name))
            error(DiagCode::UnboundParam, rt.span,
                  "transition to '" + tgt->name + "' does not bind parameter '" +
                      p.name + "'");
        }
        src->transitions.push_back(std::move(t));
      }
    }
  }
};

}  // namespace detail

/// Resolve a syntax tree into a validated semantic storyboard. All resolution
/// errors are aggregated; the storyboard is only meaningful when ok().
inline ResolveResult resolve(const ast::Storyboard& raw) {
  return detail::Resolver(raw).run();
}

/// Least set containing the entry screen and all exported screens, closed
/// under transition targets. Exported screens count as roots because external
/// components can trigger them directly.
inline std::set<std::string> reachable_screens(const Storyboard& sb) {
  std::set<std::string> out;
  std::vector<const Screen*> work;
  auto add = [&](const std::string& name) {
    const Screen* s = sb.screen(name);
    if (s && out.insert(name).second) work.push_back(s);
  };
  if (!sb.entry.empty()) add(sb.entry);
  for (const auto& s : sb.screens)
    if (s.exported) add(s.name);
  while (!work.empty()) {
    const Screen* s = work.back();
    work.pop_back();
    for (const auto& t : s->transitions) add(t.target);
  }
  return out;
}

namespace detail {

inline void top_conjuncts(const GuardPtr& g, std::vector<GuardPtr>& out) {
  if (!g) return;
  if (g->kind == GuardKind::And) {
    top_conjuncts(g->lhs, out);
    top_conjuncts(g->rhs, out);
  } else {
    out.push_back(g);
  }
}

}  // namespace detail

/// Post-resolution lint: warnings only.
inline std::vector<Diagnostic> check_wellformed(const Storyboard& sb) {
  std::vector<Diagnostic> out;
  std::set<std::string> reach = reachable_screens(sb);
  for (const auto& s : sb.screens) {
    if (!reach.count(s.name))
      out.push_back({DiagCode::UnreachableScreen, Severity::Warning,
                     "screen '" + s.name + "' is unreachable from the entry screen",
                     s.span});
    for (const auto& t : s.transitions) {
      if (!t.guard) continue;
      std::vector<GuardPtr> cj;
      detail::top_conjuncts(t.guard, cj);
      bool contradict = false;
      for (size_t i = 0; i < cj.size() && !contradict; ++i)
        for (size_t j = 0; j < cj.size() && !contradict; ++j)
          if (cj[j]->kind == GuardKind::Not && cj[j]->lhs && same(*cj[j]->lhs, *cj[i]))
            contradict = true;
      if (contradict)
        out.push_back({DiagCode::UnsatisfiableGuard, Severity::Warning,
                       "guard is unsatisfiable: contains both a condition and its "
                       "negation",
                       t.span});
    }
    if (s.exported && s.params.empty())
      out.push_back({DiagCode::ExportedNoParams, Severity::Warning,
                     "exported screen '" + s.name + "' declares no parameters",
                     s.span});
  }
  return out;
}

}  // namespace sema::model
