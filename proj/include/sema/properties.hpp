#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sema/flow.hpp"
#include "sema/printer.hpp"

namespace sema::flow {

enum class Property { P1, P2, P3, P4, R1 };

inline const char* property_name(Property p) {
  switch (p) {
    case Property::P1: return "P1";
    case Property::P2: return "P2";
    case Property::P3: return "P3";
    case Property::P4: return "P4";
    case Property::R1: return "R1";
  }
  return "?";
}

inline const char* property_title(Property p) {
  switch (p) {
    case Property::P1: return "exported-input-to-sensitive-op";
    case Property::P2: return "untrusted-source-to-sensitive-op";
    case Property::P3: return "sensitive-disclosure";
    case Property::P4: return "privileged-exposure";
    case Property::R1: return "private-asset-in-shared-store";
  }
  return "?";
}

inline std::optional<Property> parse_property(const std::string& s) {
  if (s == "P1") return Property::P1;
  if (s == "P2") return Property::P2;
  if (s == "P3") return Property::P3;
  if (s == "P4") return Property::P4;
  if (s == "R1") return Property::R1;
  return std::nullopt;
}

inline std::set<Property> all_properties() {
  return {Property::P1, Property::P2, Property::P3, Property::P4, Property::R1};
}

enum class FindingSeverity { Medium, High };

inline const char* severity_name(FindingSeverity s) {
  return s == FindingSeverity::High ? "high" : "medium";
}

inline FindingSeverity property_severity(Property p) {
  switch (p) {
    case Property::P2:
    case Property::P3:
    case Property::R1: return FindingSeverity::High;
    default: return FindingSeverity::Medium;
  }
}

struct RehomeRewrite {
  std::string resource;     // resource currently holding the asset
  std::string asset;        // literal asset key being rehomed
  std::string to_resource;  // private resource that will hold it
  std::string text;         // full rewritten storyboard source
};

struct Fix {
  std::string description;
  std::optional<RehomeRewrite> rewrite;
};

struct Finding {
  Property property = Property::P1;
  FindingSeverity severity = FindingSeverity::Medium;
  std::string sink;     // sink id: cap:R.c | cell:R[k] | cell:R[*] | prop:S.p
  std::string message;
  std::vector<Edge> witness;
  SourceSpan anchor;    // report ordering position
  std::optional<Fix> fix;
};

namespace detail {

// Walk every expression in the storyboard in declaration order.
template <class F>
void for_each_expr(const model::Storyboard& sb, F&& fn) {
  auto walk = [&](const model::ExprPtr& e, auto&& self) -> void {
    if (!e) return;
    fn(*e);
    for (const auto& a : e->args) self(a, self);
  };
  auto walk_guard = [&](const model::GuardPtr& g, auto&& self) -> void {
    if (!g) return;
    if (g->kind == model::GuardKind::Cond) walk(g->expr, walk);
    self(g->lhs, self);
    self(g->rhs, self);
  };
  for (const auto& s : sb.screens) {
    for (const auto& w : s.widgets) walk(w.init, walk);
    for (const auto& t : s.transitions) {
      walk_guard(t.guard, walk_guard);
      for (const auto& p : t.propagations) walk(p.value, walk);
    }
  }
}

inline std::vector<Edge> path_key_sequence(const std::vector<Edge>& p) { return p; }

inline bool witness_less(const std::vector<Edge>& a, const std::vector<Edge>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i) {
    auto ka = edge_key(a[i]), kb = edge_key(b[i]);
    if (ka != kb) return ka < kb;
  }
  return false;
}

inline void keep_minimal(std::optional<std::vector<Edge>>& best,
                         const std::optional<std::vector<Edge>>& cand) {
  if (!cand) return;
  if (!best || witness_less(*cand, *best)) best = cand;
}

// Witness for taint findings: a path from the external world whose first hop
// lands on a seed of the requested kind.
inline std::optional<std::vector<Edge>> world_witness(const FlowGraph& g,
                                                      NodeKind seed_kind,
                                                      const Node& sink) {
  FlowGraph filtered;
  for (const auto& e : g.edges) {
    if (e.reason == EdgeReason::EnvWrite && e.from == Node::world() &&
        e.to.kind != seed_kind)
      continue;
    filtered.edges.push_back(e);
  }
  return extract_witness(filtered, Node::world(), sink);
}

// Witness for sensitivity findings: shortest path from any sensitivity seed.
inline std::optional<std::vector<Edge>> seed_witness(const FlowGraph& g,
                                                     const Node& target) {
  std::optional<std::vector<Edge>> best;
  for (const auto& [seed, assets] : g.sensitivity_seeds) {
    if (seed == target) continue;
    keep_minimal(best, extract_witness(g, seed, target));
  }
  return best;
}

}  // namespace detail

/// Evaluate the selected security properties over a computed taint state.
/// Findings are deduplicated by (property, sink) keeping the minimal witness,
/// and ordered by source position.
inline std::vector<Finding> check_properties(
    const model::Storyboard& sb, const FlowGraph& g, const TaintState& ts,
    const std::set<Property>& selected = all_properties()) {
  std::vector<Finding> out;

  auto push = [&](Property prop, std::string sink, std::string message,
                  std::vector<Edge> witness) {
    Finding f;
    f.property = prop;
    f.severity = property_severity(prop);
    f.sink = std::move(sink);
    f.message = std::move(message);
    f.anchor = witness.empty() ? SourceSpan{} : witness.back().site;
    f.witness = std::move(witness);
    out.push_back(std::move(f));
  };

  // P1 / P2: tainted data reaching a sensitive capability parameter.
  if (selected.count(Property::P1) || selected.count(Property::P2)) {
    for (const auto& r : sb.resources) {
      for (const auto& c : r.capabilities) {
        if (!c.sensitive) continue;
        std::vector<Node> ins;
        for (const auto& n : g.nodes)
          if (n.kind == NodeKind::CapabilityIn && n.a == r.name && n.b == c.name)
            ins.push_back(n);
        bool from_exported = false, from_external = false;
        std::string exported_screen, external_resource;
        for (const auto& n : ins) {
          for (const auto& o : ts.origins(n)) {
            if (o.kind == NodeKind::ParamSlot) {
              from_exported = true;
              if (exported_screen.empty()) exported_screen = o.a;
            }
            if (o.kind == NodeKind::ResourceCell) {
              from_external = true;
              if (external_resource.empty()) external_resource = o.a;
            }
          }
        }
        std::string sink = "cap:" + r.name + "." + c.name;
        if (from_exported && selected.count(Property::P1)) {
          std::optional<std::vector<Edge>> best;
          for (const auto& n : ins)
            detail::keep_minimal(best,
                                 detail::world_witness(g, NodeKind::ParamSlot, n));
          if (best)
            push(Property::P1, sink,
                 "input accepted via exported screen '" + exported_screen +
                     "' reaches sensitive operation " + r.name + "." + c.name,
                 std::move(*best));
        }
        if (from_external && selected.count(Property::P2)) {
          std::optional<std::vector<Edge>> best;
          for (const auto& n : ins)
            detail::keep_minimal(best,
                                 detail::world_witness(g, NodeKind::ResourceCell, n));
          if (best)
            push(Property::P2, sink,
                 "potentially malicious data from external resource '" +
                     external_resource + "' reaches sensitive operation " + r.name +
                     "." + c.name,
                 std::move(*best));
        }
      }
    }
  }

  // P3 prong (a): sensitive data arriving at an external resource cell from
  // outside that resource's own cells.
  if (selected.count(Property::P3)) {
    std::map<Node, std::pair<std::vector<Edge>, std::set<std::string>>> sinks;
    for (const auto& e : g.edges) {
      if (e.to.kind != NodeKind::ResourceCell) continue;
      const model::ResourceView* rv = sb.resource(e.to.a);
      if (!rv || rv->trust != Trust::External) continue;
      if (e.from.kind == NodeKind::ResourceCell && e.from.a == e.to.a) continue;
      const auto& sens = ts.sens(e.from);
      if (sens.empty()) continue;
      std::optional<std::vector<Edge>> w;
      if (g.sensitivity_seeds.count(e.from)) {
        w = std::vector<Edge>{e};
      } else {
        auto prefix = detail::seed_witness(g, e.from);
        if (prefix) {
          prefix->push_back(e);
          w = std::move(prefix);
        }
      }
      if (!w) continue;
      auto it = sinks.find(e.to);
      if (it == sinks.end()) {
        sinks.emplace(e.to, std::make_pair(std::move(*w), sens));
      } else {
        it->second.second.insert(sens.begin(), sens.end());
        if (detail::witness_less(*w, it->second.first)) it->second.first = *w;
      }
    }
    for (auto& [cell, data] : sinks) {
      push(Property::P3, node_id(cell),
           "sensitive data (assets: " +
               join(std::vector<std::string>(data.second.begin(), data.second.end()),
                    ", ") +
               ") flows into cell " + node_id(cell) + " of external resource '" +
               cell.a + "'",
           std::move(data.first));
    }

    // P3 prong (b): sensitive data propagated out of an exported screen.
    std::map<std::string, std::pair<std::vector<Edge>, std::set<std::string>>> props;
    for (const auto& s : sb.screens) {
      if (!s.exported) continue;
      for (const auto& t : s.transitions) {
        for (const auto& p : t.propagations) {
          auto v = value_node(sb, *p.value);
          if (!v) continue;
          const auto& sens = ts.sens(*v);
          if (sens.empty()) continue;
          Node slot = Node::param(t.target, p.param);
          std::vector<Edge> tail{{*v, slot, p.span, EdgeReason::Propagate}};
          std::optional<std::vector<Edge>> w;
          if (g.sensitivity_seeds.count(*v)) {
            w = tail;
          } else {
            auto prefix = detail::seed_witness(g, *v);
            if (prefix) {
              prefix->push_back(tail[0]);
              w = std::move(prefix);
            }
          }
          if (!w) continue;
          std::string sink = "prop:" + t.target + "." + p.param;
          auto it = props.find(sink);
          if (it == props.end()) {
            props.emplace(sink, std::make_pair(std::move(*w), sens));
          } else {
            it->second.second.insert(sens.begin(), sens.end());
            if (detail::witness_less(*w, it->second.first)) it->second.first = *w;
          }
        }
      }
    }
    for (auto& [sink, data] : props) {
      push(Property::P3, sink,
           "sensitive data (assets: " +
               join(std::vector<std::string>(data.second.begin(), data.second.end()),
                    ", ") +
               ") is propagated out of an exported screen via " + sink.substr(5),
           std::move(data.first));
    }
  }

  // P4: privileged capability reachable from an exported screen without an
  // intervening blocking guard.
  if (selected.count(Property::P4)) {
    auto blocking = compute_blocking(sb, g, ts);
    std::set<std::string> exposed;
    std::vector<const model::Screen*> work;
    for (const auto& s : sb.screens)
      if (s.exported && exposed.insert(s.name).second) work.push_back(&s);
    while (!work.empty()) {
      const model::Screen* s = work.back();
      work.pop_back();
      for (size_t i = 0; i < s->transitions.size(); ++i) {
        if (blocking.at({s->name, i})) continue;
        const model::Screen* tgt = sb.screen(s->transitions[i].target);
        if (tgt && exposed.insert(tgt->name).second) work.push_back(tgt);
      }
    }
    std::map<std::string, std::pair<SourceSpan, std::string>> hits;  // sink -> site
    auto scan = [&](const model::ExprPtr& e, const std::string& screen, auto&& self)
        -> void {
      if (!e) return;
      if (e->kind == model::ExprKind::Call) {
        const model::Capability* cap = sb.capability(e->resource, e->capability);
        if (cap && cap->privileged) {
          std::string sink = "cap:" + e->resource + "." + e->capability;
          if (!hits.count(sink)) hits[sink] = {e->span, screen};
        }
      }
      for (const auto& a : e->args) self(a, screen, self);
    };
    auto scan_guard = [&](const model::GuardPtr& gd, const std::string& screen,
                          auto&& self) -> void {
      if (!gd) return;
      if (gd->kind == model::GuardKind::Cond) scan(gd->expr, screen, scan);
      self(gd->lhs, screen, self);
      self(gd->rhs, screen, self);
    };
    for (const auto& s : sb.screens) {
      if (!exposed.count(s.name)) continue;
      for (const auto& w : s.widgets) scan(w.init, s.name, scan);
      for (const auto& t : s.transitions) {
        scan_guard(t.guard, s.name, scan_guard);
        for (const auto& p : t.propagations) scan(p.value, s.name, scan);
      }
    }
    for (const auto& [sink, hit] : hits) {
      std::string capname = sink.substr(4);
      auto dot = capname.find('.');
      Node sinknode = Node::cap_out(capname.substr(0, dot), capname.substr(dot + 1));
      push(Property::P4, sink,
           "privileged capability " + capname +
               " can be triggered from an exported screen (reached via '" +
               hit.second + "') without a blocking guard",
           {{Node::world(), sinknode, hit.first, EdgeReason::EnvWrite}});
    }
  }

  // R1: a requirement asset used as a literal key of a non-private resource.
  if (selected.count(Property::R1)) {
    std::map<std::pair<std::string, std::string>, SourceSpan> hits;
    detail::for_each_expr(sb, [&](const model::Expr& e) {
      if (e.kind != model::ExprKind::Call) return;
      if (e.args.empty() || !e.args[0] ||
          e.args[0]->kind != model::ExprKind::String)
        return;
      const model::ResourceView* rv = sb.resource(e.resource);
      if (!rv || rv->trust == Trust::Private) return;
      if (!sb.asset_required_private(e.args[0]->str)) return;
      auto key = std::make_pair(e.resource, e.args[0]->str);
      if (!hits.count(key)) hits[key] = e.args[0]->span;
    });
    for (const auto& [rk, site] : hits) {
      push(Property::R1, "cell:" + rk.first + "[" + rk.second + "]",
           "asset \"" + rk.second + "\" is required to be private but is kept in " +
               trust_name(sb.resource(rk.first)->trust) + " resource '" + rk.first +
               "'",
           {{Node::world(), Node::cell(rk.first, rk.second), site,
             EdgeReason::EnvWrite}});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
    if (a.anchor != b.anchor) return a.anchor < b.anchor;
    if (a.property != b.property) return a.property < b.property;
    return a.sink < b.sink;
  });
  return out;
}

// ---- fix suggestions ----

namespace detail {

inline ast::ExprPtr rehome_expr(const ast::ExprPtr& e, const std::string& from,
                                const std::string& asset, const std::string& to) {
  if (!e) return e;
  auto copy = std::make_shared<ast::Expr>(*e);
  for (auto& a : copy->args) a = rehome_expr(a, from, asset, to);
  if (copy->kind == ast::ExprKind::Call && copy->base == from && copy->member &&
      !copy->args.empty() && copy->args[0] &&
      copy->args[0]->kind == ast::ExprKind::String && copy->args[0]->str == asset)
    copy->base = to;
  return copy;
}

inline ast::GuardPtr rehome_guard(const ast::GuardPtr& g, const std::string& from,
                                  const std::string& asset, const std::string& to) {
  if (!g) return g;
  auto copy = std::make_shared<ast::Guard>(*g);
  copy->expr = rehome_expr(copy->expr, from, asset, to);
  copy->lhs = rehome_guard(copy->lhs, from, asset, to);
  copy->rhs = rehome_guard(copy->rhs, from, asset, to);
  return copy;
}

inline void collect_rehomed_caps(const ast::ExprPtr& e, const std::string& from,
                                 const std::string& asset,
                                 std::set<std::string>& caps) {
  if (!e) return;
  for (const auto& a : e->args) collect_rehomed_caps(a, from, asset, caps);
  if (e->kind == ast::ExprKind::Call && e->base == from && e->member &&
      !e->args.empty() && e->args[0] &&
      e->args[0]->kind == ast::ExprKind::String && e->args[0]->str == asset)
    caps.insert(*e->member);
}

inline void collect_rehomed_caps_guard(const ast::GuardPtr& g,
                                       const std::string& from,
                                       const std::string& asset,
                                       std::set<std::string>& caps) {
  if (!g) return;
  collect_rehomed_caps(g->expr, from, asset, caps);
  collect_rehomed_caps_guard(g->lhs, from, asset, caps);
  collect_rehomed_caps_guard(g->rhs, from, asset, caps);
}

}  // namespace detail

/// Rewrite the storyboard so every call on `rw.resource` whose first argument
/// is the literal `rw.asset` targets the private resource `rw.to_resource`
/// instead, declaring that resource if needed.
inline ast::Storyboard apply_rehome(const ast::Storyboard& raw,
                                    const RehomeRewrite& rw) {
  std::set<std::string> caps;
  for (const auto& s : raw.screens) {
    for (const auto& w : s.widgets)
      detail::collect_rehomed_caps(w.init, rw.resource, rw.asset, caps);
    for (const auto& t : s.transitions) {
      detail::collect_rehomed_caps_guard(t.guard, rw.resource, rw.asset, caps);
      for (const auto& p : t.propagations)
        detail::collect_rehomed_caps(p.value, rw.resource, rw.asset, caps);
    }
  }

  ast::Storyboard out = raw;
  const ast::Resource* origin = nullptr;
  for (const auto& r : raw.resources)
    if (r.name == rw.resource) origin = &r;

  ast::Resource* target = nullptr;
  for (auto& r : out.resources)
    if (r.name == rw.to_resource) target = &r;
  if (!target) {
    ast::Resource fresh;
    fresh.name = rw.to_resource;
    fresh.trust = Trust::Private;
    out.resources.push_back(std::move(fresh));
    target = &out.resources.back();
  }
  if (origin) {
    for (const auto& c : origin->capabilities) {
      if (!caps.count(c.name)) continue;
      bool present = std::any_of(
          target->capabilities.begin(), target->capabilities.end(),
          [&](const ast::Capability& tc) { return tc.name == c.name; });
      if (!present) target->capabilities.push_back(c);
    }
  }

  for (auto& s : out.screens) {
    for (auto& w : s.widgets)
      w.init = detail::rehome_expr(w.init, rw.resource, rw.asset, rw.to_resource);
    for (auto& t : s.transitions) {
      t.guard = detail::rehome_guard(t.guard, rw.resource, rw.asset, rw.to_resource);
      for (auto& p : t.propagations)
        p.value = detail::rehome_expr(p.value, rw.resource, rw.asset, rw.to_resource);
    }
  }
  return out;
}

/// Choose the private resource that will receive a rehomed asset. Prefers an
/// existing compatible private resource named INT_STORE; otherwise derives a
/// fresh name.
inline std::string pick_rehome_target(const ast::Storyboard& raw,
                                      const std::string& from_resource,
                                      const std::string& asset) {
  std::set<std::string> needed;
  for (const auto& s : raw.screens) {
    for (const auto& w : s.widgets)
      detail::collect_rehomed_caps(w.init, from_resource, asset, needed);
    for (const auto& t : s.transitions) {
      detail::collect_rehomed_caps_guard(t.guard, from_resource, asset, needed);
      for (const auto& p : t.propagations)
        detail::collect_rehomed_caps(p.value, from_resource, asset, needed);
    }
  }
  const ast::Resource* origin = nullptr;
  for (const auto& r : raw.resources)
    if (r.name == from_resource) origin = &r;

  for (int i = 1; i < 100; ++i) {
    std::string name = i == 1 ? "INT_STORE" : "INT_STORE" + std::to_string(i);
    const ast::Resource* existing = nullptr;
    for (const auto& r : raw.resources)
      if (r.name == name) existing = &r;
    if (!existing) return name;
    if (existing->trust != Trust::Private) continue;
    bool compatible = true;
    for (const auto& capname : needed) {
      const ast::Capability* oc = nullptr;
      if (origin)
        for (const auto& c : origin->capabilities)
          if (c.name == capname) oc = &c;
      for (const auto& c : existing->capabilities) {
        if (c.name != capname) continue;
        if (!oc || c.params.size() != oc->params.size() ||
            c.returns.has_value() != oc->returns.has_value())
          compatible = false;
      }
    }
    if (compatible) return name;
  }
  return "INT_STORE_REHOMED";
}

/// Fix template per property. P2/R1 findings whose witness passes through an
/// external resource cell with a literal key get a rehoming rewrite; the rest
/// get descriptive advice only.
inline std::optional<Fix> suggest_fix(const ast::Storyboard& raw,
                                      const model::Storyboard& sb,
                                      const Finding& f) {
  auto rehome_from_witness = [&]() -> std::optional<RehomeRewrite> {
    for (const auto& e : f.witness) {
      for (const Node* n : {&e.from, &e.to}) {
        if (n->kind != NodeKind::ResourceCell || n->top) continue;
        const model::ResourceView* rv = sb.resource(n->a);
        if (!rv || rv->trust != Trust::External) continue;
        RehomeRewrite rw;
        rw.resource = n->a;
        rw.asset = n->b;
        rw.to_resource = pick_rehome_target(raw, rw.resource, rw.asset);
        rw.text = pretty_print(apply_rehome(raw, rw));
        return rw;
      }
    }
    return std::nullopt;
  };

  switch (f.property) {
    case Property::P2:
    case Property::R1: {
      auto rw = rehome_from_witness();
      if (rw) {
        Fix fix;
        fix.description = "store asset \"" + rw->asset + "\" in private resource '" +
                          rw->to_resource + "' instead of '" + rw->resource + "'";
        fix.rewrite = std::move(rw);
        return fix;
      }
      if (f.property == Property::R1)
        return Fix{"move the declared-private asset into a private resource",
                   std::nullopt};
      return Fix{"do not feed external-resource data into sensitive operations "
                 "without validation",
                 std::nullopt};
    }
    case Property::P1:
      return Fix{"validate or do not forward input received via exported screens",
                 std::nullopt};
    case Property::P3:
      return Fix{"do not write sensitive data to external resources or propagate "
                 "it out of exported screens",
                 std::nullopt};
    case Property::P4:
      return Fix{"guard the path from exported screens to this privileged "
                 "operation with a check on trusted data",
                 std::nullopt};
  }
  return std::nullopt;
}

inline nlohmann::ordered_json finding_json(const Finding& f) {
  nlohmann::ordered_json j;
  j["property"] = property_name(f.property);
  j["title"] = property_title(f.property);
  j["severity"] = severity_name(f.severity);
  j["sink"] = f.sink;
  j["message"] = f.message;
  j["witness"] = nlohmann::ordered_json::array();
  for (const auto& e : f.witness) {
    nlohmann::ordered_json step;
    step["from"] = node_id(e.from);
    step["to"] = node_id(e.to);
    step["reason"] = edge_reason_name(e.reason);
    step["file"] = e.site.file;
    step["line"] = e.site.start_line;
    step["col"] = e.site.start_col;
    j["witness"].push_back(std::move(step));
  }
  if (f.fix) {
    nlohmann::ordered_json fx;
    fx["description"] = f.fix->description;
    if (f.fix->rewrite) {
      fx["rewrite"] = {{"resource", f.fix->rewrite->resource},
                       {"asset", f.fix->rewrite->asset},
                       {"to-resource", f.fix->rewrite->to_resource},
                       {"text", f.fix->rewrite->text}};
    } else {
      fx["rewrite"] = nullptr;
    }
    j["fix"] = std::move(fx);
  } else {
    j["fix"] = nullptr;
  }
  return j;
}

inline nlohmann::ordered_json findings_json(const std::string& file,
                                            const std::string& app,
                                            const std::vector<Finding>& findings) {
  nlohmann::ordered_json j;
  j["schema"] = "sema-findings/1";
  j["file"] = file;
  j["app"] = app;
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : findings) j["findings"].push_back(finding_json(f));
  return j;
}

}  // namespace sema::flow
