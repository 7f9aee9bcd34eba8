#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sema/flow.hpp"
#include "sema/properties.hpp"

namespace sema::interp {

/// Concrete runtime value carrying the same tags the static analysis tracks.
struct TaggedValue {
  std::string value;
  std::set<flow::Node> taint;           // origin nodes
  std::set<std::string> sensitivity;    // asset labels
  bool truthy() const { return !value.empty() && value != "0"; }
  friend bool operator==(const TaggedValue&, const TaggedValue&) = default;
};

enum class EventKind { Press, LaunchExported, EnvWrite, Restart };

struct Event {
  EventKind kind = EventKind::Restart;
  std::string button;               // Press
  std::string screen;               // LaunchExported
  std::vector<TaggedValue> args;    // LaunchExported
  std::string resource, key;        // EnvWrite
  TaggedValue value;                // EnvWrite

  static Event press(std::string b) {
    Event e;
    e.kind = EventKind::Press;
    e.button = std::move(b);
    return e;
  }
  static Event launch(std::string s, std::vector<TaggedValue> a) {
    Event e;
    e.kind = EventKind::LaunchExported;
    e.screen = std::move(s);
    e.args = std::move(a);
    return e;
  }
  static Event env_write(std::string r, std::string k, TaggedValue v) {
    Event e;
    e.kind = EventKind::EnvWrite;
    e.resource = std::move(r);
    e.key = std::move(k);
    e.value = std::move(v);
    return e;
  }
  static Event restart() { return Event{}; }
};

/// Stable ordering key for events (canonical enumeration order).
inline std::string event_key(const Event& e) {
  switch (e.kind) {
    case EventKind::Press: return "0:press:" + e.button;
    case EventKind::EnvWrite: return "1:env:" + e.resource + "/" + e.key;
    case EventKind::LaunchExported: return "2:launch:" + e.screen;
    case EventKind::Restart: return "3:restart";
  }
  return "?";
}

/// A flow observed at runtime: how the data got to the sink, and where.
struct DynFlow {
  std::string source_kind;  // exported-param | external-resource | sensitive-data | exported-entry
  std::string sink;         // cap:R.c | cell:R[key] | prop:S.p
  friend auto operator<=>(const DynFlow&, const DynFlow&) = default;
};

struct TraceStep {
  Event event;
  std::optional<std::pair<std::string, size_t>> taken;  // (source screen, transition idx)
  std::string screen_after;
  std::set<DynFlow> flows;
};

struct Trace {
  std::string start_screen;
  std::set<DynFlow> init_flows;  // flows from entry-screen widget initialization
  std::vector<TraceStep> steps;
};

struct ExecState {
  std::string current;
  std::map<std::pair<std::string, std::string>, TaggedValue> widget_values;
  std::map<std::string, TaggedValue> bindings;
  std::map<std::pair<std::string, std::string>, TaggedValue> store;
  bool externally_launched = false;
  bool vetted = false;  // a blocking guard was passed since external entry
  std::set<DynFlow> init_flows;
  std::vector<TraceStep> trace;
};

struct StoreSeed {
  std::string resource, key;
  TaggedValue value;
};

struct InvalidEvent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdversaryPolicy {
  bool env_writes = true;
  bool launches = true;
  bool restarts = true;
  size_t step_budget = 1000000;
};

struct ObservedFlow {
  flow::Property property = flow::Property::P1;
  std::string source_kind;
  std::string sink;
  friend auto operator<=>(const ObservedFlow&, const ObservedFlow&) = default;
};

/// Deterministic storyboard executor. Evaluation order, transition dispatch
/// and tag propagation mirror the static transfer rules one-to-one, which is
/// what makes this the dynamic oracle for the flow analysis.
class Interpreter {
 public:
  explicit Interpreter(const model::Storyboard& sb)
      : sb_(sb),
        graph_(flow::build_flow_graph(sb)),
        taint_(flow::propagate_taint(graph_)),
        blocking_(flow::compute_blocking(sb, graph_, taint_)) {
    for (const auto& r : sb.requirements) requirements_.insert(r.asset);
  }

  const model::Storyboard& storyboard() const { return sb_; }
  const flow::FlowGraph& graph() const { return graph_; }

  ExecState init_state(const std::vector<StoreSeed>& seeds = {}) const {
    ExecState st;
    for (const auto& s : seeds) st.store[{s.resource, s.key}] = s.value;
    const model::Screen* entry = sb_.screen(sb_.entry);
    if (entry) enter(st, *entry, {}, st.init_flows);
    return st;
  }

  ExecState step(const ExecState& state, const Event& ev) const {
    validate(state, ev);
    ExecState ns = state;
    TraceStep ts;
    ts.event = ev;
    std::set<DynFlow> flows;
    switch (ev.kind) {
      case EventKind::Restart: {
        ns.externally_launched = false;
        ns.vetted = false;
        ns.widget_values.clear();
        ns.bindings.clear();
        const model::Screen* entry = sb_.screen(sb_.entry);
        if (entry) enter(ns, *entry, {}, flows);
        break;
      }
      case EventKind::LaunchExported: {
        const model::Screen* s = sb_.screen(ev.screen);
        ns.externally_launched = true;
        ns.vetted = false;
        std::map<std::string, TaggedValue> bind;
        for (size_t i = 0; i < s->params.size(); ++i)
          bind[s->params[i].name] = ev.args[i];
        enter(ns, *s, std::move(bind), flows);
        break;
      }
      case EventKind::EnvWrite: {
        ns.store[{ev.resource, ev.key}] = ev.value;
        dispatch(ns, ev, ts, flows);
        break;
      }
      case EventKind::Press: {
        dispatch(ns, ev, ts, flows);
        break;
      }
    }
    ts.screen_after = ns.current;
    ts.flows = std::move(flows);
    ns.trace.push_back(std::move(ts));
    return ns;
  }

  /// Canonical adversarial event alphabet for a state: presses of the current
  /// screen's buttons, one tainted write per external literal asset key, one
  /// tainted launch per exported screen, and a restart.
  std::vector<Event> valid_events(const ExecState& st,
                                  const AdversaryPolicy& pol = {}) const {
    std::vector<Event> out;
    if (const model::Screen* s = sb_.screen(st.current)) {
      for (const auto& w : s->widgets)
        if (w.kind == WidgetKind::Button) out.push_back(Event::press(w.name));
    }
    if (pol.env_writes) {
      for (const auto& [cell, site] : graph_.literal_cells) {
        const model::ResourceView* rv = sb_.resource(cell.first);
        if (!rv || rv->trust != Trust::External) continue;
        TaggedValue v{"env:" + cell.first + "/" + cell.second,
                      {flow::Node::cell_top(cell.first)},
                      {}};
        out.push_back(Event::env_write(cell.first, cell.second, v));
      }
    }
    if (pol.launches) {
      for (const auto& s : sb_.screens) {
        if (!s.exported) continue;
        std::vector<TaggedValue> args;
        for (const auto& p : s.params)
          args.push_back(TaggedValue{"launch:" + s.name + "/" + p.name,
                                     {flow::Node::param(s.name, p.name)},
                                     {}});
        out.push_back(Event::launch(s.name, std::move(args)));
      }
    }
    if (pol.restarts) out.push_back(Event::restart());
    return out;
  }

  /// Depth-first walk over all event sequences up to `depth`; calls `visit`
  /// on every reached state (each state carries its full trace). Throws
  /// BudgetExceeded past the policy's step budget.
  template <class Visit>
  void walk(int depth, const AdversaryPolicy& pol, Visit&& visit) const {
    size_t steps = 0;
    ExecState init = init_state();
    visit(init);
    if (depth <= 0) return;
    walk_rec(init, depth, pol, steps, visit);
  }

  /// All traces of length ≤ depth (every prefix is its own trace), in
  /// canonical order: by length, then by event sequence.
  std::vector<Trace> enumerate_traces(int depth,
                                      const AdversaryPolicy& pol = {}) const {
    std::vector<Trace> out;
    walk(depth, pol, [&](const ExecState& st) { out.push_back(to_trace(st)); });
    std::stable_sort(out.begin(), out.end(), [](const Trace& a, const Trace& b) {
      if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
      for (size_t i = 0; i < a.steps.size(); ++i) {
        auto ka = event_key(a.steps[i].event), kb = event_key(b.steps[i].event);
        if (ka != kb) return ka < kb;
      }
      return false;
    });
    return out;
  }

  /// Union of observed flows over all event sequences up to `depth`, without
  /// materializing traces (used by the differential oracle).
  std::set<ObservedFlow> observed_flows_to_depth(
      int depth, const AdversaryPolicy& pol = {}) const {
    std::set<ObservedFlow> out;
    walk(depth, pol, [&](const ExecState& st) {
      for (const auto& f : st.init_flows) out.insert(classify(f));
      if (!st.trace.empty())
        for (const auto& f : st.trace.back().flows) out.insert(classify(f));
    });
    return out;
  }

  Trace to_trace(const ExecState& st) const {
    Trace t;
    t.start_screen = sb_.entry;
    t.init_flows = st.init_flows;
    t.steps = st.trace;
    return t;
  }

  static ObservedFlow classify(const DynFlow& f) {
    ObservedFlow o;
    o.source_kind = f.source_kind;
    o.sink = f.sink;
    if (f.source_kind == "exported-param") o.property = flow::Property::P1;
    else if (f.source_kind == "external-resource") o.property = flow::Property::P2;
    else if (f.source_kind == "sensitive-data") o.property = flow::Property::P3;
    else o.property = flow::Property::P4;  // exported-entry
    return o;
  }

 private:
  template <class Visit>
  void walk_rec(const ExecState& st, int remaining, const AdversaryPolicy& pol,
                size_t& steps, Visit& visit) const {
    for (const Event& ev : valid_events(st, pol)) {
      if (++steps > pol.step_budget)
        throw BudgetExceeded("trace enumeration exceeded step budget of " +
                             std::to_string(pol.step_budget));
      ExecState ns = step(st, ev);
      visit(ns);
      if (remaining > 1) walk_rec(ns, remaining - 1, pol, steps, visit);
    }
  }

  void validate(const ExecState& st, const Event& ev) const {
    switch (ev.kind) {
      case EventKind::Press: {
        const model::Screen* s = sb_.screen(st.current);
        const model::Widget* w = s ? s->widget(ev.button) : nullptr;
        if (!w || w->kind != WidgetKind::Button)
          throw InvalidEvent("press of '" + ev.button +
                             "': no such button on screen '" + st.current + "'");
        break;
      }
      case EventKind::EnvWrite: {
        const model::ResourceView* rv = sb_.resource(ev.resource);
        if (!rv || rv->trust != Trust::External)
          throw InvalidEvent("environment write to '" + ev.resource +
                             "': not an external resource");
        break;
      }
      case EventKind::LaunchExported: {
        const model::Screen* s = sb_.screen(ev.screen);
        if (!s || !s->exported)
          throw InvalidEvent("launch of '" + ev.screen +
                             "': not an exported screen");
        if (ev.args.size() != s->params.size())
          throw InvalidEvent("launch of '" + ev.screen + "': expected " +
                             std::to_string(s->params.size()) + " argument(s)");
        break;
      }
      case EventKind::Restart: break;
    }
  }

  // Enter a screen: set current, replace bindings, re-evaluate widget
  // initializers in declaration order (they may read params and resources).
  void enter(ExecState& st, const model::Screen& s,
             std::map<std::string, TaggedValue> bindings,
             std::set<DynFlow>& flows) const {
    st.current = s.name;
    st.bindings = std::move(bindings);
    for (const auto& w : s.widgets) {
      TaggedValue v;
      if (w.init) {
        v = eval(st, w.init, flows);
      } else if (w.kind == WidgetKind::TextInput) {
        v = TaggedValue{"input:" + s.name + "." + w.name, {}, {}};
      }
      st.widget_values[{s.name, w.name}] = std::move(v);
    }
  }

  // First-match transition dispatch for Press / EnvWrite events. Side effects
  // of failed guards (store writes from executed calls) persist.
  void dispatch(ExecState& st, const Event& ev, TraceStep& ts,
                std::set<DynFlow>& flows) const {
    const model::Screen* s = sb_.screen(st.current);
    if (!s) return;
    for (size_t i = 0; i < s->transitions.size(); ++i) {
      const model::Transition& t = s->transitions[i];
      if (!eval_guard(st, t.guard, ev, flows)) continue;
      ts.taken = std::make_pair(s->name, i);
      auto bit = blocking_.find({s->name, i});
      if (bit != blocking_.end() && bit->second) st.vetted = true;
      std::map<std::string, TaggedValue> bind;
      for (const auto& p : t.propagations) {
        TaggedValue v = eval(st, p.value, flows);
        if (s->exported && !v.sensitivity.empty())
          flows.insert({"sensitive-data", "prop:" + t.target + "." + p.param});
        bind[p.param] = std::move(v);
      }
      if (const model::Screen* tgt = sb_.screen(t.target))
        enter(st, *tgt, std::move(bind), flows);
      return;
    }
  }

  bool eval_guard(ExecState& st, const model::GuardPtr& g, const Event& ev,
                  std::set<DynFlow>& flows) const {
    if (!g) return true;
    switch (g->kind) {
      case model::GuardKind::Press:
        return ev.kind == EventKind::Press && ev.button == g->button;
      case model::GuardKind::Cond: return eval(st, g->expr, flows).truthy();
      case model::GuardKind::Not: return !eval_guard(st, g->lhs, ev, flows);
      case model::GuardKind::And:
        return eval_guard(st, g->lhs, ev, flows) &&
               eval_guard(st, g->rhs, ev, flows);
      case model::GuardKind::Or:
        return eval_guard(st, g->lhs, ev, flows) ||
               eval_guard(st, g->rhs, ev, flows);
    }
    return false;
  }

  TaggedValue eval(ExecState& st, const model::ExprPtr& e,
                   std::set<DynFlow>& flows) const {
    switch (e->kind) {
      case model::ExprKind::String: return TaggedValue{e->str, {}, {}};
      case model::ExprKind::Int:
        return TaggedValue{std::to_string(e->num), {}, {}};
      case model::ExprKind::WidgetRef: {
        auto it = st.widget_values.find({e->screen, e->name});
        return it == st.widget_values.end() ? TaggedValue{} : it->second;
      }
      case model::ExprKind::ParamRef: {
        auto it = st.bindings.find(e->name);
        return it == st.bindings.end() ? TaggedValue{} : it->second;
      }
      case model::ExprKind::Call: return eval_call(st, *e, flows);
    }
    return {};
  }

  TaggedValue eval_call(ExecState& st, const model::Expr& e,
                        std::set<DynFlow>& flows) const {
    std::vector<TaggedValue> args;
    for (const auto& a : e.args) args.push_back(eval(st, a, flows));
    const model::Capability* cap = sb_.capability(e.resource, e.capability);
    const model::ResourceView* rv = sb_.resource(e.resource);
    std::string sink = "cap:" + e.resource + "." + e.capability;

    if (cap && cap->sensitive) {
      for (const auto& a : args) {
        for (const auto& o : a.taint) {
          if (o.kind == flow::NodeKind::ParamSlot)
            flows.insert({"exported-param", sink});
          if (o.kind == flow::NodeKind::ResourceCell)
            flows.insert({"external-resource", sink});
        }
      }
    }
    if (cap && cap->privileged && st.externally_launched && !st.vetted)
      flows.insert({"exported-entry", sink});

    // Write-like effect: first argument keys the cell, last argument is the
    // payload; tags of every argument stick to the cell.
    if (args.size() >= 2) {
      TaggedValue stored;
      stored.value = args.back().value;
      for (const auto& a : args) {
        stored.taint.insert(a.taint.begin(), a.taint.end());
        stored.sensitivity.insert(a.sensitivity.begin(), a.sensitivity.end());
      }
      std::string key = args[0].value;
      if (rv && rv->trust == Trust::External && !stored.sensitivity.empty())
        flows.insert(
            {"sensitive-data", "cell:" + e.resource + "[" + key + "]"});
      st.store[{e.resource, key}] = std::move(stored);
    }

    if (cap && cap->returns) {
      std::string key = args.empty() ? "" : args[0].value;
      TaggedValue out;
      auto it = st.store.find({e.resource, key});
      if (it != st.store.end()) {
        out = it->second;
      } else if (rv && rv->trust == Trust::External) {
        // Never written during this run: the environment owns the cell, so
        // the read observes the canonical adversarial value.
        out = TaggedValue{"ext:" + e.resource + "/" + key,
                          {flow::Node::cell_top(e.resource)},
                          {}};
      }
      if (rv && rv->trust == Trust::Private) out.sensitivity.insert(e.resource);
      if (requirements_.count(key)) out.sensitivity.insert(key);
      return out;
    }
    bool ok = true;
    for (const auto& a : args)
      if (a.value.empty()) ok = false;
    return TaggedValue{ok ? "ok" : "", {}, {}};
  }

  const model::Storyboard& sb_;
  flow::FlowGraph graph_;
  flow::TaintState taint_;
  std::map<std::pair<std::string, size_t>, bool> blocking_;
  std::set<std::string> requirements_;
};

inline ExecState init_state(const model::Storyboard& sb) {
  return Interpreter(sb).init_state();
}

inline ExecState step(const model::Storyboard& sb, const ExecState& st,
                      const Event& ev) {
  return Interpreter(sb).step(st, ev);
}

inline std::vector<Trace> enumerate_traces(const model::Storyboard& sb, int depth,
                                           const AdversaryPolicy& pol = {}) {
  return Interpreter(sb).enumerate_traces(depth, pol);
}

/// Map observed per-step flows onto property tags with the same classification
/// the static checker uses.
inline std::set<ObservedFlow> observed_flows(const std::vector<Trace>& traces) {
  std::set<ObservedFlow> out;
  for (const auto& t : traces) {
    for (const auto& f : t.init_flows) out.insert(Interpreter::classify(f));
    for (const auto& s : t.steps)
      for (const auto& f : s.flows) out.insert(Interpreter::classify(f));
  }
  return out;
}

/// Is a dynamically observed flow reported by the static findings? A concrete
/// cell sink cell:R[k] is covered by a static finding on the same literal cell
/// or on the resource's summary cell cell:R[*].
inline bool flow_covered(const std::vector<flow::Finding>& findings,
                         const ObservedFlow& of) {
  for (const auto& f : findings) {
    if (f.property != of.property) continue;
    if (f.sink == of.sink) return true;
    if (of.property == flow::Property::P3 && of.sink.rfind("cell:", 0) == 0) {
      auto bracket = of.sink.find('[');
      if (bracket != std::string::npos &&
          f.sink == of.sink.substr(0, bracket) + "[*]")
        return true;
    }
  }
  return false;
}

// ---- trace serialization (sema-trace/1, one JSON object per line) ----

inline nlohmann::ordered_json tagged_value_json(const TaggedValue& v) {
  nlohmann::ordered_json j;
  j["value"] = v.value;
  j["taint"] = nlohmann::ordered_json::array();
  for (const auto& n : v.taint) j["taint"].push_back(flow::node_id(n));
  j["sensitivity"] = nlohmann::ordered_json::array();
  for (const auto& s : v.sensitivity) j["sensitivity"].push_back(s);
  return j;
}

inline nlohmann::ordered_json event_json(const Event& e) {
  nlohmann::ordered_json j;
  switch (e.kind) {
    case EventKind::Press:
      j["kind"] = "press";
      j["button"] = e.button;
      break;
    case EventKind::LaunchExported: {
      j["kind"] = "launch";
      j["screen"] = e.screen;
      j["args"] = nlohmann::ordered_json::array();
      for (const auto& a : e.args) j["args"].push_back(tagged_value_json(a));
      break;
    }
    case EventKind::EnvWrite:
      j["kind"] = "env-write";
      j["resource"] = e.resource;
      j["key"] = e.key;
      j["value"] = tagged_value_json(e.value);
      break;
    case EventKind::Restart: j["kind"] = "restart"; break;
  }
  return j;
}

inline nlohmann::ordered_json flows_json(const std::set<DynFlow>& flows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : flows)
    arr.push_back({{"source-kind", f.source_kind}, {"sink", f.sink}});
  return arr;
}

/// One line per step; line 0 describes the initial state. When several traces
/// share a stream, `trace_index` distinguishes them.
inline std::vector<std::string> trace_jsonl(
    const Trace& t, std::optional<size_t> trace_index = std::nullopt) {
  std::vector<std::string> lines;
  nlohmann::ordered_json head;
  head["schema"] = "sema-trace/1";
  if (trace_index) head["trace"] = *trace_index;
  head["step"] = 0;
  head["event"] = {{"kind", "init"}};
  head["screen"] = t.start_screen;
  head["flows"] = flows_json(t.init_flows);
  lines.push_back(head.dump());
  for (size_t i = 0; i < t.steps.size(); ++i) {
    const TraceStep& s = t.steps[i];
    nlohmann::ordered_json j;
    j["schema"] = "sema-trace/1";
    if (trace_index) j["trace"] = *trace_index;
    j["step"] = i + 1;
    j["event"] = event_json(s.event);
    if (s.taken) {
      j["taken"] = {{"screen", s.taken->first}, {"transition", s.taken->second}};
    } else {
      j["taken"] = nullptr;
    }
    j["screen"] = s.screen_after;
    j["flows"] = flows_json(s.flows);
    lines.push_back(j.dump());
  }
  return lines;
}

}  // namespace sema::interp
