#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sema/model.hpp"

namespace sema::flow {

enum class NodeKind {
  ExternalWorld,
  WidgetSlot,
  ParamSlot,
  ResourceCell,
  CapabilityIn,
  CapabilityOut,
};

struct Node {
  NodeKind kind = NodeKind::ExternalWorld;
  std::string a;    // screen or resource name
  std::string b;    // widget / param / capability name, or cell literal key
  bool top = false; // ResourceCell: whole-resource cell (statically unknown key)
  int index = -1;   // CapabilityIn: parameter position

  auto operator<=>(const Node&) const = default;

  static Node world() { return {}; }
  static Node widget(std::string screen, std::string name) {
    return {NodeKind::WidgetSlot, std::move(screen), std::move(name), false, -1};
  }
  static Node param(std::string screen, std::string name) {
    return {NodeKind::ParamSlot, std::move(screen), std::move(name), false, -1};
  }
  static Node cell(std::string resource, std::string key) {
    return {NodeKind::ResourceCell, std::move(resource), std::move(key), false, -1};
  }
  static Node cell_top(std::string resource) {
    return {NodeKind::ResourceCell, std::move(resource), "", true, -1};
  }
  static Node cap_in(std::string resource, std::string cap, int i) {
    return {NodeKind::CapabilityIn, std::move(resource), std::move(cap), false, i};
  }
  static Node cap_out(std::string resource, std::string cap) {
    return {NodeKind::CapabilityOut, std::move(resource), std::move(cap), false, -1};
  }
};

inline std::string node_id(const Node& n) {
  switch (n.kind) {
    case NodeKind::ExternalWorld: return "world";
    case NodeKind::WidgetSlot: return "widget:" + n.a + "." + n.b;
    case NodeKind::ParamSlot: return "param:" + n.a + "." + n.b;
    case NodeKind::ResourceCell:
      return n.top ? "cell:" + n.a + "[*]" : "cell:" + n.a + "[" + n.b + "]";
    case NodeKind::CapabilityIn:
      return "in:" + n.a + "." + n.b + "#" + std::to_string(n.index);
    case NodeKind::CapabilityOut: return "out:" + n.a + "." + n.b;
  }
  return "?";
}

enum class EdgeReason { Init, Propagate, GuardUse, CapCall, Persist, EnvWrite };

inline const char* edge_reason_name(EdgeReason r) {
  switch (r) {
    case EdgeReason::Init: return "init";
    case EdgeReason::Propagate: return "propagate";
    case EdgeReason::GuardUse: return "guard-use";
    case EdgeReason::CapCall: return "cap-call";
    case EdgeReason::Persist: return "persist";
    case EdgeReason::EnvWrite: return "env-write";
  }
  return "?";
}

struct Edge {
  Node from, to;
  SourceSpan site;  // invalid for environment-model edges
  EdgeReason reason = EdgeReason::CapCall;
};

struct FlowGraph {
  std::vector<Edge> edges;
  std::set<Node> nodes;
  // sensitivity seed labels per node (requirement assets, private resources)
  std::map<Node, std::set<std::string>> sensitivity_seeds;
  // literal asset keys appearing as call arguments: (resource, key) -> first site
  std::map<std::pair<std::string, std::string>, SourceSpan> literal_cells;

  void add_node(const Node& n) { nodes.insert(n); }
  void add_edge(Node from, Node to, EdgeReason reason, SourceSpan site = {}) {
    nodes.insert(from);
    nodes.insert(to);
    edges.push_back({std::move(from), std::move(to), site, reason});
  }
  void seed_sensitivity(const Node& n, const std::string& asset) {
    nodes.insert(n);
    sensitivity_seeds[n].insert(asset);
  }
};

/// The node carrying an expression's value, if the expression produces one.
/// Literals are constants (no node); calls produce a value only when the
/// capability declares a return type.
inline std::optional<Node> value_node(const model::Storyboard& sb,
                                      const model::Expr& e) {
  switch (e.kind) {
    case model::ExprKind::String:
    case model::ExprKind::Int: return std::nullopt;
    case model::ExprKind::WidgetRef: return Node::widget(e.screen, e.name);
    case model::ExprKind::ParamRef: return Node::param(e.screen, e.name);
    case model::ExprKind::Call: {
      const model::Capability* cap = sb.capability(e.resource, e.capability);
      if (cap && cap->returns) return Node::cap_out(e.resource, e.capability);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

/// The resource cell a call reads/writes: keyed by the first argument when it
/// is a string literal, the whole-resource cell otherwise.
inline Node call_cell(const model::Expr& call) {
  if (!call.args.empty() && call.args[0] &&
      call.args[0]->kind == model::ExprKind::String)
    return Node::cell(call.resource, call.args[0]->str);
  return Node::cell_top(call.resource);
}

namespace detail {

class GraphBuilder {
 public:
  explicit GraphBuilder(const model::Storyboard& sb) : sb_(sb) {}

  FlowGraph run() {
    g_.add_node(Node::world());

    // environment model: the world writes every external resource and the
    // parameters of every exported screen
    for (const auto& r : sb_.resources)
      if (r.trust == Trust::External)
        g_.add_edge(Node::world(), Node::cell_top(r.name), EdgeReason::EnvWrite);
    for (const auto& s : sb_.screens)
      if (s.exported)
        for (const auto& p : s.params)
          g_.add_edge(Node::world(), Node::param(s.name, p.name),
                      EdgeReason::EnvWrite);

    for (const auto& s : sb_.screens) {
      for (const auto& w : s.widgets) {
        if (!w.init) continue;
        auto v = wire_expr(*w.init, nullptr);
        if (v)
          g_.add_edge(*v, Node::widget(s.name, w.name), EdgeReason::Init,
                      w.init->span);
      }
      for (const auto& t : s.transitions) {
        std::vector<std::pair<Node, SourceSpan>> guard_values;
        if (t.guard) wire_guard(*t.guard, guard_values);
        std::vector<Node> prop_slots;
        for (const auto& p : t.propagations) {
          Node slot = Node::param(t.target, p.param);
          prop_slots.push_back(slot);
          auto v = wire_expr(*p.value, nullptr);
          if (v) g_.add_edge(*v, slot, EdgeReason::Propagate, p.span);
        }
        // implicit flow, one level deep: values used by the guard influence
        // everything the transition propagates
        for (const auto& [gv, site] : guard_values)
          for (const auto& slot : prop_slots)
            g_.add_edge(gv, slot, EdgeReason::GuardUse, site);
      }
    }

    // requirement assets are modeled as cells on every resource so that a
    // dynamically keyed access to the asset is covered
    std::set<std::pair<std::string, std::string>> all_cells;
    for (const auto& [rk, site] : g_.literal_cells) all_cells.insert(rk);
    for (const auto& r : sb_.resources)
      for (const auto& req : sb_.requirements)
        all_cells.insert({r.name, req.asset});

    for (const auto& r : sb_.resources) {
      for (const auto& [rk, key] : all_cells) {
        if (rk != r.name) continue;
        Node lit = Node::cell(r.name, key);
        Node top = Node::cell_top(r.name);
        SourceSpan site;
        auto it = g_.literal_cells.find({r.name, key});
        if (it != g_.literal_cells.end()) site = it->second;
        g_.add_edge(top, lit, EdgeReason::Persist, site);
        g_.add_edge(lit, top, EdgeReason::Persist, site);
        if (sb_.asset_required_private(key)) g_.seed_sensitivity(lit, key);
      }
    }
    return std::move(g_);
  }

 private:
  const model::Storyboard& sb_;
  FlowGraph g_;

  std::optional<Node> wire_expr(const model::Expr& e,
                                std::vector<std::pair<Node, SourceSpan>>* collect) {
    switch (e.kind) {
      case model::ExprKind::String:
      case model::ExprKind::Int:
        return std::nullopt;
      case model::ExprKind::WidgetRef:
      case model::ExprKind::ParamRef: {
        Node n = e.kind == model::ExprKind::WidgetRef ? Node::widget(e.screen, e.name)
                                                      : Node::param(e.screen, e.name);
        g_.add_node(n);
        if (collect) collect->push_back({n, e.span});
        return n;
      }
      case model::ExprKind::Call: {
        const model::Capability* cap = sb_.capability(e.resource, e.capability);
        Node cell = call_cell(e);
        if (!cell.top) {
          auto key = std::make_pair(e.resource, cell.b);
          if (!g_.literal_cells.count(key)) g_.literal_cells[key] = e.args[0]->span;
        }
        g_.add_node(cell);
        for (size_t i = 0; i < e.args.size(); ++i) {
          auto av = wire_expr(*e.args[i], collect);
          Node in = Node::cap_in(e.resource, e.capability, static_cast<int>(i));
          g_.add_node(in);
          if (av) g_.add_edge(*av, in, EdgeReason::CapCall, e.args[i]->span);
          g_.add_edge(in, cell, EdgeReason::Persist, e.span);
        }
        if (cap && cap->returns) {
          Node out = Node::cap_out(e.resource, e.capability);
          g_.add_edge(cell, out, EdgeReason::Persist, e.span);
          const model::ResourceView* rv = sb_.resource(e.resource);
          if (rv && rv->trust == Trust::Private)
            g_.seed_sensitivity(out, e.resource);
          if (collect) collect->push_back({out, e.span});
          return out;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  void wire_guard(const model::Guard& g,
                  std::vector<std::pair<Node, SourceSpan>>& collect) {
    switch (g.kind) {
      case model::GuardKind::Press:
        return;  // a press is an event, not a value
      case model::GuardKind::Cond:
        wire_expr(*g.expr, &collect);
        return;
      case model::GuardKind::Not:
        wire_guard(*g.lhs, collect);
        return;
      case model::GuardKind::And:
      case model::GuardKind::Or:
        wire_guard(*g.lhs, collect);
        wire_guard(*g.rhs, collect);
        return;
    }
  }
};

}  // namespace detail

/// Build the dataflow graph for a resolved storyboard.
inline FlowGraph build_flow_graph(const model::Storyboard& sb) {
  return detail::GraphBuilder(sb).run();
}

struct TaintState {
  // node -> origin seeds (the environment entry points taint arrived through)
  std::map<Node, std::set<Node>> taint;
  // node -> sensitive asset labels
  std::map<Node, std::set<std::string>> sensitivity;

  const std::set<Node>& origins(const Node& n) const {
    static const std::set<Node> empty;
    auto it = taint.find(n);
    return it == taint.end() ? empty : it->second;
  }
  const std::set<std::string>& sens(const Node& n) const {
    static const std::set<std::string> empty;
    auto it = sensitivity.find(n);
    return it == sensitivity.end() ? empty : it->second;
  }
  bool tainted(const Node& n) const { return !origins(n).empty(); }

  bool operator==(const TaintState&) const = default;

  /// Pointwise set inclusion; used by the monotonicity property tests.
  bool subset_of(const TaintState& other) const {
    for (const auto& [n, s] : taint) {
      const auto& o = other.origins(n);
      for (const auto& v : s)
        if (!o.count(v)) return false;
    }
    for (const auto& [n, s] : sensitivity) {
      const auto& o = other.sens(n);
      for (const auto& v : s)
        if (!o.count(v)) return false;
    }
    return true;
  }
};

/// Least fixpoint of the taint/sensitivity transfer rules, optionally seeded
/// with a prior state (used by the idempotence property test).
inline TaintState propagate_taint(const FlowGraph& g, TaintState initial = {}) {
  TaintState ts = std::move(initial);
  ts.taint[Node::world()].insert(Node::world());
  for (const auto& [n, assets] : g.sensitivity_seeds)
    ts.sensitivity[n].insert(assets.begin(), assets.end());

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : g.edges) {
      if (e.reason == EdgeReason::EnvWrite && e.from == Node::world()) {
        // the environment is an origin: the node it writes becomes a seed
        if (ts.taint[e.to].insert(e.to).second) changed = true;
      } else {
        auto it = ts.taint.find(e.from);
        if (it != ts.taint.end() && !it->second.empty()) {
          auto& dst = ts.taint[e.to];
          for (const auto& o : it->second)
            if (dst.insert(o).second) changed = true;
        }
      }
      auto is = ts.sensitivity.find(e.from);
      if (is != ts.sensitivity.end() && !is->second.empty()) {
        auto& dst = ts.sensitivity[e.to];
        for (const auto& a : is->second)
          if (dst.insert(a).second) changed = true;
      }
    }
  }
  return ts;
}

namespace detail {

struct EdgeOrderKey {
  SourceSpan site;
  std::string to_id;
  int reason;
  auto operator<=>(const EdgeOrderKey&) const = default;
};

inline EdgeOrderKey edge_key(const Edge& e) {
  return {e.site, node_id(e.to), static_cast<int>(e.reason)};
}

}  // namespace detail

/// Shortest path from source to sink by edge count; ties broken by expanding
/// each node's out-edges in (site, target, reason) order, which makes the
/// result the lexicographically least shortest path. Returns nullopt when the
/// sink is unreachable. A source==sink query returns the minimal self-loop if
/// one exists.
inline std::optional<std::vector<Edge>> extract_witness(const FlowGraph& g,
                                                        const Node& source,
                                                        const Node& sink) {
  std::map<Node, std::vector<const Edge*>> adj;
  for (const auto& e : g.edges) adj[e.from].push_back(&e);
  for (auto& [n, outs] : adj)
    std::sort(outs.begin(), outs.end(), [](const Edge* a, const Edge* b) {
      return detail::edge_key(*a) < detail::edge_key(*b);
    });

  std::map<Node, const Edge*> parent;
  std::vector<Node> frontier{source};
  std::set<Node> seen{source};
  bool found = false;
  while (!frontier.empty() && !found) {
    std::vector<Node> next;
    for (const auto& n : frontier) {
      auto it = adj.find(n);
      if (it == adj.end()) continue;
      for (const Edge* e : it->second) {
        // the sink is matched before the seen check so that source==sink
        // finds the minimal returning path instead of stopping immediately
        if (e->to == sink) {
          parent[sink] = e;
          found = true;
          break;
        }
        if (seen.insert(e->to).second) {
          parent[e->to] = e;
          next.push_back(e->to);
        }
      }
      if (found) break;
    }
    frontier = std::move(next);
  }
  if (!parent.count(sink)) return std::nullopt;

  std::vector<Edge> path;
  Node cur = sink;
  for (;;) {
    const Edge* e = parent.at(cur);
    path.push_back(*e);
    cur = e->from;
    if (cur == source) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// Transitions that vet untrusted launches: a top-level conjunct of the guard
/// is a non-trivial condition (a call or a widget/param reference) whose value
/// sources are all statically untainted. Keyed by (screen, transition index).
inline std::map<std::pair<std::string, size_t>, bool> compute_blocking(
    const model::Storyboard& sb, const FlowGraph&, const TaintState& ts) {
  std::map<std::pair<std::string, size_t>, bool> out;

  auto collect_values = [&](const model::Expr& e, auto&& self,
                            std::vector<Node>& acc) -> void {
    if (auto v = value_node(sb, e)) acc.push_back(*v);
    if (e.kind == model::ExprKind::Call)
      for (const auto& a : e.args) self(*a, self, acc);
  };

  for (const auto& s : sb.screens) {
    for (size_t i = 0; i < s.transitions.size(); ++i) {
      const auto& t = s.transitions[i];
      bool blocking = false;
      if (t.guard) {
        std::vector<model::GuardPtr> conjuncts;
        model::detail::top_conjuncts(t.guard, conjuncts);
        for (const auto& c : conjuncts) {
          if (c->kind != model::GuardKind::Cond || !c->expr) continue;
          auto k = c->expr->kind;
          if (k != model::ExprKind::Call && k != model::ExprKind::WidgetRef &&
              k != model::ExprKind::ParamRef)
            continue;
          std::vector<Node> values;
          collect_values(*c->expr, collect_values, values);
          bool untainted = true;
          for (const auto& v : values)
            if (ts.tainted(v)) untainted = false;
          if (untainted) {
            blocking = true;
            break;
          }
        }
      }
      out[{s.name, i}] = blocking;
    }
  }
  return out;
}

}  // namespace sema::flow
