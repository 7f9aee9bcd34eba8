#pragma once

#include <json.hpp>

#include "sema/model.hpp"
#include "sema/util.hpp"

namespace sema::model {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const Expr& e);

inline ordered_json expr_or_null(const ExprPtr& e) {
  return e ? to_json(*e) : ordered_json(nullptr);
}

inline ordered_json to_json(const Expr& e) {
  ordered_json j;
  switch (e.kind) {
    case ExprKind::String:
      j["kind"] = "string";
      j["value"] = e.str;
      break;
    case ExprKind::Int:
      j["kind"] = "int";
      j["value"] = e.num;
      break;
    case ExprKind::WidgetRef:
      j["kind"] = "widget-ref";
      j["screen"] = e.screen;
      j["name"] = e.name;
      break;
    case ExprKind::ParamRef:
      j["kind"] = "param-ref";
      j["screen"] = e.screen;
      j["name"] = e.name;
      break;
    case ExprKind::Call: {
      j["kind"] = "call";
      j["resource"] = e.resource;
      j["capability"] = e.capability;
      ordered_json args = ordered_json::array();
      for (const auto& a : e.args) args.push_back(to_json(*a));
      j["args"] = std::move(args);
      break;
    }
  }
  return j;
}

inline ordered_json to_json(const Guard& g) {
  ordered_json j;
  switch (g.kind) {
    case GuardKind::Press:
      j["kind"] = "press";
      j["button"] = g.button;
      break;
    case GuardKind::Cond:
      j["kind"] = "cond";
      j["expr"] = to_json(*g.expr);
      break;
    case GuardKind::Not:
      j["kind"] = "not";
      j["inner"] = to_json(*g.lhs);
      break;
    case GuardKind::And:
    case GuardKind::Or:
      j["kind"] = g.kind == GuardKind::And ? "and" : "or";
      j["lhs"] = to_json(*g.lhs);
      j["rhs"] = to_json(*g.rhs);
      break;
  }
  return j;
}

inline ordered_json params_json(const std::vector<Param>& params) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : params) arr.push_back({{"name", p.name}, {"type", p.type}});
  return arr;
}

/// Canonical interchange document, schema "sema-model/1". Key order is fixed;
/// source spans are deliberately excluded so the document (and the storyboard
/// hash derived from it) is stable under reformatting of the source text.
inline ordered_json to_json(const Storyboard& sb) {
  ordered_json j;
  j["schema"] = "sema-model/1";
  j["app"] = sb.app_name;
  j["entry"] = sb.entry;

  ordered_json resources = ordered_json::array();
  for (const auto& r : sb.resources) {
    ordered_json caps = ordered_json::array();
    for (const auto& c : r.capabilities) {
      ordered_json cj;
      cj["name"] = c.name;
      cj["params"] = params_json(c.params);
      cj["returns"] = c.returns ? ordered_json(*c.returns) : ordered_json(nullptr);
      cj["sensitive"] = c.sensitive;
      cj["privileged"] = c.privileged;
      caps.push_back(std::move(cj));
    }
    resources.push_back(
        {{"name", r.name}, {"trust", trust_name(r.trust)}, {"capabilities", caps}});
  }
  j["resources"] = std::move(resources);

  ordered_json reqs = ordered_json::array();
  for (const auto& rq : sb.requirements)
    reqs.push_back({{"asset", rq.asset}, {"kind", "is-private"}});
  j["requirements"] = std::move(reqs);

  ordered_json screens = ordered_json::array();
  for (const auto& s : sb.screens) {
    ordered_json sj;
    sj["name"] = s.name;
    sj["launcher"] = s.launcher;
    sj["exported"] = s.exported;
    sj["params"] = params_json(s.params);
    ordered_json widgets = ordered_json::array();
    for (const auto& w : s.widgets)
      widgets.push_back({{"kind", widget_kind_name(w.kind)},
                         {"name", w.name},
                         {"init", expr_or_null(w.init)}});
    sj["widgets"] = std::move(widgets);
    ordered_json transitions = ordered_json::array();
    for (const auto& t : s.transitions) {
      ordered_json tj;
      tj["source"] = t.source;
      tj["target"] = t.target;
      tj["guard"] = t.guard ? to_json(*t.guard) : ordered_json(nullptr);
      ordered_json props = ordered_json::array();
      for (const auto& p : t.propagations)
        props.push_back({{"value", to_json(*p.value)}, {"param", p.param}});
      tj["propagations"] = std::move(props);
      transitions.push_back(std::move(tj));
    }
    sj["transitions"] = std::move(transitions);
    screens.push_back(std::move(sj));
  }
  j["screens"] = std::move(screens);
  return j;
}

/// Stable storyboard fingerprint: FNV-1a over the canonical model document.
inline std::string storyboard_hash(const Storyboard& sb) {
  return to_hex(fnv1a64(to_json(sb).dump()));
}

}  // namespace sema::model
