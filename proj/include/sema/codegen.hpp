#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sema/interp.hpp"
#include "sema/model_json.hpp"

namespace sema::codegen {

struct CodeUnit {
  std::string path;
  std::string contents;
};

struct GenRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Guard linearization: every value lands in a vN register, every boolean in a
// bN register, in evaluation order. lhs of and/or before rhs; call arguments
// left to right before the call itself.
struct GuardEmitter {
  std::ostringstream out;
  int v = 0, b = 0;

  std::string emit_expr(const model::ExprPtr& e) {
    switch (e->kind) {
      case model::ExprKind::String: {
        std::string r = "v" + std::to_string(v++);
        out << "  " << r << " = lit " << quote_string(e->str) << "\n";
        return r;
      }
      case model::ExprKind::Int: {
        std::string r = "v" + std::to_string(v++);
        out << "  " << r << " = lit " << e->num << "\n";
        return r;
      }
      case model::ExprKind::WidgetRef: {
        std::string r = "v" + std::to_string(v++);
        out << "  " << r << " = widget " << e->name << "\n";
        return r;
      }
      case model::ExprKind::ParamRef: {
        std::string r = "v" + std::to_string(v++);
        out << "  " << r << " = param " << e->name << "\n";
        return r;
      }
      case model::ExprKind::Call: {
        std::vector<std::string> regs;
        for (const auto& a : e->args) regs.push_back(emit_expr(a));
        std::string r = "v" + std::to_string(v++);
        out << "  " << r << " = call " << e->resource << "." << e->capability;
        for (const auto& a : regs) out << " " << a;
        out << "\n";
        return r;
      }
    }
    return "v?";
  }

  std::string emit_guard(const model::GuardPtr& g) {
    switch (g->kind) {
      case model::GuardKind::Press: {
        std::string r = "b" + std::to_string(b++);
        out << "  " << r << " = pressed " << g->button << "\n";
        return r;
      }
      case model::GuardKind::Cond: {
        std::string val = emit_expr(g->expr);
        std::string r = "b" + std::to_string(b++);
        out << "  " << r << " = truthy " << val << "\n";
        return r;
      }
      case model::GuardKind::Not: {
        std::string a = emit_guard(g->lhs);
        std::string r = "b" + std::to_string(b++);
        out << "  " << r << " = not " << a << "\n";
        return r;
      }
      case model::GuardKind::And:
      case model::GuardKind::Or: {
        std::string a = emit_guard(g->lhs);
        std::string c = emit_guard(g->rhs);
        std::string r = "b" + std::to_string(b++);
        out << "  " << r << " = "
            << (g->kind == model::GuardKind::And ? "and" : "or") << " " << a << " "
            << c << "\n";
        return r;
      }
    }
    return "b?";
  }
};

inline std::string guard_function(const std::string& screen, size_t index,
                                  const model::GuardPtr& g) {
  std::ostringstream out;
  out << "guard " << screen << "__g" << index << " {\n";
  if (!g) {
    out << "  spec always\n";
    out << "  accept\n";
  } else {
    out << "  spec " << model::to_text(*g) << "\n";
    GuardEmitter em;
    std::string r = em.emit_guard(g);
    out << em.out.str();
    out << "  require " << r << "\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string screen_unit(const model::Storyboard& sb, const std::string& hash,
                               const model::Screen& s) {
  std::ostringstream out;
  std::string path = "screens/" + s.name + ".sk";
  out << "sema-skeleton/1 app=" << sb.app_name << " hash=" << hash
      << " unit=" << path << "\n";
  out << "screen " << s.name;
  if (s.launcher) out << " launcher";
  if (s.exported) out << " exported";
  out << "\n";
  for (const auto& p : s.params)
    out << "param " << p.name << ": " << p.type << "\n";

  out << "\n== WIDGETS ==\n";
  for (const auto& w : s.widgets) {
    out << "widget " << widget_kind_name(w.kind) << " " << w.name;
    if (w.init) out << " init " << model::to_text(*w.init);
    out << "\n";
  }

  out << "\n== GUARDS ==\n";
  for (size_t i = 0; i < s.transitions.size(); ++i)
    out << guard_function(s.name, i, s.transitions[i].guard);

  out << "\n== DISPATCH ==\n";
  for (size_t i = 0; i < s.transitions.size(); ++i) {
    const auto& t = s.transitions[i];
    out << "t" << i << " guard " << s.name << "__g" << i << " goto " << t.target
        << "\n";
    for (const auto& p : t.propagations)
      out << "t" << i << ".pass " << p.param << " = " << model::to_text(*p.value)
          << "\n";
  }

  out << "\n== BUSINESS-LOGIC ==\n";
  out << "hook " << s.name << ".on_enter\n";
  for (size_t i = 0; i < s.transitions.size(); ++i)
    out << "hook " << s.name << ".t" << i << ".before_navigate\n";
  return out.str();
}

inline std::string resources_unit(const model::Storyboard& sb,
                                  const flow::FlowGraph& g,
                                  const std::string& hash) {
  std::ostringstream out;
  out << "sema-skeleton/1 app=" << sb.app_name << " hash=" << hash
      << " unit=resources.sk\n";
  out << "\n== RESOURCES ==\n";
  for (const auto& r : sb.resources) {
    out << "resource " << r.name << " trust " << trust_name(r.trust) << "\n";
    if (r.trust == Trust::Private) {
      out << "  allow-keys";
      for (const auto& [cell, site] : g.literal_cells)
        if (cell.first == r.name) out << " " << quote_string(cell.second);
      out << "\n";
    }
    for (const auto& c : r.capabilities) {
      out << "  capability " << c.name << "(";
      for (size_t i = 0; i < c.params.size(); ++i) {
        if (i) out << ", ";
        out << c.params[i].name << ": " << c.params[i].type;
      }
      out << ")";
      if (c.returns) out << " -> " << *c.returns;
      if (c.sensitive) out << " sensitive";
      if (c.privileged) out << " privileged";
      if (r.trust == Trust::Private) out << " wrapper require key-owned";
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace detail

/// Emit the neutral skeleton: one unit per screen plus one resources unit.
/// Pure function of the storyboard; byte-identical across runs.
inline std::vector<CodeUnit> generate_structural_code(const model::Storyboard& sb) {
  std::string hash = model::storyboard_hash(sb);
  flow::FlowGraph g = flow::build_flow_graph(sb);
  std::vector<CodeUnit> units;
  for (const auto& s : sb.screens)
    units.push_back({"screens/" + s.name + ".sk", detail::screen_unit(sb, hash, s)});
  units.push_back({"resources.sk", detail::resources_unit(sb, g, hash)});
  return units;
}

// ---- characterization tests ----

struct BindingExpectation {
  std::set<std::string> taint;        // origin node ids
  std::set<std::string> sensitivity;  // asset labels
  friend bool operator==(const BindingExpectation&,
                         const BindingExpectation&) = default;
};

struct TestSpec {
  enum class Kind { Transition, Negative };
  std::string name;
  Kind kind = Kind::Transition;
  std::string screen;  // screen under test
  std::optional<std::pair<std::string, size_t>> transition;  // (source, index)
  std::vector<interp::StoreSeed> seeds;
  std::vector<interp::Event> setup;  // press events reaching the screen
  std::optional<interp::Event> stimulus;
  std::string expect_screen;
  std::map<std::string, BindingExpectation> expect_bindings;
  bool skipped = false;
  std::string skip_reason;
};

inline BindingExpectation binding_tags(const interp::TaggedValue& v) {
  BindingExpectation b;
  for (const auto& n : v.taint) b.taint.insert(flow::node_id(n));
  b.sensitivity = v.sensitivity;
  return b;
}

/// Replay a non-skipped spec through the interpreter; true when the observed
/// behavior matches the expectation exactly.
inline bool replay(const interp::Interpreter& it, const TestSpec& spec) {
  if (spec.skipped || !spec.stimulus) return false;
  interp::ExecState st = it.init_state(spec.seeds);
  for (const auto& ev : spec.setup) st = it.step(st, ev);
  if (st.current != spec.screen) return false;
  interp::ExecState after = it.step(st, *spec.stimulus);
  const auto& taken = after.trace.back().taken;
  if (spec.kind == TestSpec::Kind::Negative)
    return !taken && after.current == spec.screen;
  if (!taken || !spec.transition || *taken != *spec.transition) return false;
  if (after.current != spec.expect_screen) return false;
  std::map<std::string, BindingExpectation> got;
  for (const auto& [p, v] : after.bindings) got[p] = binding_tags(v);
  return got == spec.expect_bindings;
}

namespace detail {

struct SearchPoint {
  std::vector<interp::Event> setup;
  interp::ExecState state;
};

// All states reachable by press sequences of length <= max_len, in canonical
// breadth-first order (shorter setups preferred).
inline std::vector<SearchPoint> press_reach(const interp::Interpreter& it,
                                            const std::vector<interp::StoreSeed>& seeds,
                                            int max_len) {
  interp::AdversaryPolicy presses_only;
  presses_only.env_writes = false;
  presses_only.launches = false;
  presses_only.restarts = false;
  std::vector<SearchPoint> points;
  points.push_back({{}, it.init_state(seeds)});
  size_t level_begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t level_end = points.size();
    for (size_t i = level_begin; i < level_end; ++i) {
      for (const auto& ev : it.valid_events(points[i].state, presses_only)) {
        SearchPoint next;
        next.setup = points[i].setup;
        next.setup.push_back(ev);
        next.state = it.step(points[i].state, ev);
        points.push_back(std::move(next));
      }
    }
    level_begin = level_end;
  }
  return points;
}

inline std::vector<std::vector<interp::StoreSeed>> seed_sets(
    const interp::Interpreter& it) {
  std::vector<interp::StoreSeed> cells;
  for (const auto& [cell, site] : it.graph().literal_cells)
    cells.push_back({cell.first, cell.second,
                     interp::TaggedValue{"seed:" + cell.first + "/" + cell.second,
                                         {},
                                         {}}});
  std::vector<std::vector<interp::StoreSeed>> sets;
  sets.push_back({});
  for (const auto& c : cells) sets.push_back({c});
  if (cells.size() > 1) sets.push_back(cells);
  return sets;
}

}  // namespace detail

/// One spec per transition (setup found by bounded search over store seeds and
/// press sequences of length <= 3, stimulus a press or environment write) plus
/// one negative no-op spec per screen. Unsatisfiable specs are emitted as
/// SKIPPED with a reason. Every non-skipped spec is replay-validated.
inline std::vector<TestSpec> generate_characterization_tests(
    const model::Storyboard& sb) {
  interp::Interpreter it(sb);
  interp::AdversaryPolicy stimuli_pol;
  stimuli_pol.launches = false;
  stimuli_pol.restarts = false;

  auto seed_sets = detail::seed_sets(it);
  std::vector<std::vector<detail::SearchPoint>> reach;
  for (const auto& seeds : seed_sets)
    reach.push_back(detail::press_reach(it, seeds, 3));

  std::vector<TestSpec> specs;

  for (const auto& s : sb.screens) {
    for (size_t ti = 0; ti < s.transitions.size(); ++ti) {
      const auto& t = s.transitions[ti];
      TestSpec spec;
      spec.name = s.name + "_t" + std::to_string(ti) + "_to_" + t.target;
      spec.kind = TestSpec::Kind::Transition;
      spec.screen = s.name;
      spec.transition = std::make_pair(s.name, ti);
      bool found = false;
      for (size_t si = 0; si < seed_sets.size() && !found; ++si) {
        for (const auto& point : reach[si]) {
          if (point.state.current != s.name) continue;
          for (const auto& ev : it.valid_events(point.state, stimuli_pol)) {
            interp::ExecState after = it.step(point.state, ev);
            const auto& taken = after.trace.back().taken;
            if (!taken || taken->first != s.name || taken->second != ti) continue;
            spec.seeds = seed_sets[si];
            spec.setup = point.setup;
            spec.stimulus = ev;
            spec.expect_screen = after.current;
            for (const auto& [p, v] : after.bindings)
              spec.expect_bindings[p] = binding_tags(v);
            found = true;
            break;
          }
          if (found) break;
        }
      }
      if (!found) {
        spec.skipped = true;
        spec.skip_reason = "no satisfiable setup found within depth 4";
      } else if (!replay(it, spec)) {
        spec.skipped = true;
        spec.skip_reason = "replay validation failed";
        spec.stimulus.reset();
      }
      specs.push_back(std::move(spec));
    }
  }

  for (const auto& s : sb.screens) {
    TestSpec spec;
    spec.name = s.name + "_negative";
    spec.kind = TestSpec::Kind::Negative;
    spec.screen = s.name;
    spec.expect_screen = s.name;
    bool found = false;
    for (size_t si = 0; si < seed_sets.size() && !found; ++si) {
      for (const auto& point : reach[si]) {
        if (point.state.current != s.name) continue;
        for (const auto& ev : it.valid_events(point.state, stimuli_pol)) {
          interp::ExecState after = it.step(point.state, ev);
          if (after.trace.back().taken || after.current != s.name) continue;
          spec.seeds = seed_sets[si];
          spec.setup = point.setup;
          spec.stimulus = ev;
          found = true;
          break;
        }
        if (found) break;
      }
    }
    if (!found) {
      spec.skipped = true;
      spec.skip_reason = "no unmatched stimulus found within depth 4";
    } else if (!replay(it, spec)) {
      spec.skipped = true;
      spec.skip_reason = "replay validation failed";
      spec.stimulus.reset();
    }
    specs.push_back(std::move(spec));
  }

  return specs;
}

inline nlohmann::ordered_json test_spec_json(const TestSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["kind"] = s.kind == TestSpec::Kind::Transition ? "transition" : "negative";
  j["screen"] = s.screen;
  if (s.transition) {
    j["transition"] = {{"source", s.transition->first},
                       {"index", s.transition->second}};
  } else {
    j["transition"] = nullptr;
  }
  if (s.skipped) {
    j["skipped"] = true;
    j["reason"] = s.skip_reason;
    return j;
  }
  j["skipped"] = false;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const auto& sd : s.seeds)
    seeds.push_back({{"resource", sd.resource},
                     {"key", sd.key},
                     {"value", interp::tagged_value_json(sd.value)}});
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& ev : s.setup) events.push_back(interp::event_json(ev));
  j["setup"] = {{"seeds", std::move(seeds)}, {"events", std::move(events)}};
  j["stimulus"] = interp::event_json(*s.stimulus);
  nlohmann::ordered_json bindings = nlohmann::ordered_json::object();
  for (const auto& [p, b] : s.expect_bindings) {
    bindings[p] = {{"taint", b.taint}, {"sensitivity", b.sensitivity}};
  }
  j["expect"] = {{"screen", s.expect_screen}, {"bindings", std::move(bindings)}};
  return j;
}

inline nlohmann::ordered_json tests_json(const model::Storyboard& sb,
                                         const std::vector<TestSpec>& specs) {
  nlohmann::ordered_json j;
  j["schema"] = "sema-tests/1";
  j["app"] = sb.app_name;
  j["hash"] = model::storyboard_hash(sb);
  j["specs"] = nlohmann::ordered_json::array();
  for (const auto& s : specs) j["specs"].push_back(test_spec_json(s));
  return j;
}

}  // namespace sema::codegen
