// Acceptance gate: one self-contained binary, one [PASS]/[FAIL] line per
// criterion. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"

namespace fs = std::filesystem;
using namespace sema;
using Clock = std::chrono::steady_clock;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(SEMA_FIXTURES_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

struct Criterion {
  std::vector<std::string> failures;
  void expect(bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  }
};

int g_failed = 0;

void report(int index, const std::string& label, const Criterion& c, double ms,
            double limit_ms) {
  bool in_budget = limit_ms <= 0.0 || ms < limit_ms;
  bool pass = c.failures.empty() && in_budget;
  std::printf("[%s] criterion %d: %s (%.1f ms)\n", pass ? "PASS" : "FAIL", index,
              label.c_str(), ms);
  for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
  if (!in_budget)
    std::printf("       - exceeded time budget of %.0f ms\n", limit_ms);
  if (!pass) ++g_failed;
}

model::Storyboard load_model(const std::string& name, Criterion& c, bool& ok) {
  ParseResult pr = parse_source(slurp(fixture_path(name)), name);
  if (!pr.ok()) {
    c.expect(false, name + ": parse failed");
    ok = false;
    return {};
  }
  model::ResolveResult rr = model::resolve(pr.storyboard);
  if (!rr.ok()) {
    c.expect(false, name + ": resolve failed");
    ok = false;
    return {};
  }
  ok = true;
  return rr.storyboard;
}

std::vector<flow::Finding> analyze_all(const model::Storyboard& sb) {
  flow::FlowGraph g = flow::build_flow_graph(sb);
  flow::TaintState ts = flow::propagate_taint(g);
  return flow::check_properties(sb, g, ts, flow::all_properties());
}

// ---------------------------------------------------------------------------
// Criterion 1: the messenger storyboard yields exactly one P2 finding whose
// witness runs through the external contact cell and ends at the SMS send;
// adding the privacy requirement yields exactly one additional R1.
// ---------------------------------------------------------------------------
void criterion1() {
  Criterion c;
  auto t0 = Clock::now();

  bool ok = false;
  model::Storyboard sb = load_model("emergency.sb", c, ok);
  if (ok) {
    std::vector<flow::Finding> fs = analyze_all(sb);
    c.expect(fs.size() == 1,
             "expected exactly 1 finding, got " + std::to_string(fs.size()));
    if (fs.size() == 1) {
      const flow::Finding& f = fs[0];
      c.expect(f.property == flow::Property::P2, "finding is not P2");
      c.expect(f.severity == flow::FindingSeverity::High, "P2 is not high");
      c.expect(f.sink == "cap:SMS.send", "sink is " + f.sink);
      bool through_cell = false;
      for (const auto& e : f.witness)
        if (flow::node_id(e.to) == "cell:EXT_STORE[MyContacts.txt]")
          through_cell = true;
      c.expect(through_cell,
               "witness does not pass through cell:EXT_STORE[MyContacts.txt]");
      c.expect(!f.witness.empty() &&
                   flow::node_id(f.witness.front().from) == "world" &&
                   flow::node_id(f.witness.back().to) == "in:SMS.send#1",
               "witness does not run world -> in:SMS.send#1");
    }
  }

  bool ok_req = false;
  model::Storyboard sbr = load_model("emergency_req.sb", c, ok_req);
  if (ok_req) {
    std::vector<flow::Finding> fs = analyze_all(sbr);
    size_t p2 = 0, r1 = 0, other = 0;
    const flow::Finding* r1f = nullptr;
    for (const auto& f : fs) {
      if (f.property == flow::Property::P2) ++p2;
      else if (f.property == flow::Property::R1) { ++r1; r1f = &f; }
      else ++other;
    }
    c.expect(p2 == 1 && r1 == 1 && other == 0,
             "with requirement: expected one P2 plus one R1, got " +
                 std::to_string(fs.size()) + " finding(s)");
    if (r1f) {
      c.expect(r1f->sink == "cell:EXT_STORE[MyContacts.txt]",
               "R1 sink is " + r1f->sink);
      c.expect(r1f->severity == flow::FindingSeverity::High, "R1 is not high");
    }
  }

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(1, "messenger analysis is exact", c, ms, 1000.0);
}

// ---------------------------------------------------------------------------
// Criterion 2: the suggested rehoming rewrite eliminates every finding and the
// driver exits clean on the rewritten storyboard.
// ---------------------------------------------------------------------------
void criterion2() {
  Criterion c;
  auto t0 = Clock::now();

  ParseResult pr = parse_source(slurp(fixture_path("emergency.sb")), "emergency.sb");
  model::ResolveResult rr = model::resolve(pr.storyboard);
  c.expect(pr.ok() && rr.ok(), "fixture failed to load");
  if (pr.ok() && rr.ok()) {
    std::vector<flow::Finding> fs = analyze_all(rr.storyboard);
    c.expect(fs.size() == 1, "expected one finding before the fix");
    std::optional<flow::Fix> fix;
    if (!fs.empty()) fix = flow::suggest_fix(pr.storyboard, rr.storyboard, fs[0]);
    c.expect(fix && fix->rewrite, "no rewrite suggested");
    if (fix && fix->rewrite) {
      c.expect(fix->rewrite->to_resource == "INT_STORE",
               "rehoming target is " + fix->rewrite->to_resource);

      ParseResult fixed = parse_source(fix->rewrite->text, "fixed.sb");
      model::ResolveResult fixed_rr = model::resolve(fixed.storyboard);
      c.expect(fixed.ok() && fixed_rr.ok(), "rewritten storyboard is invalid");
      if (fixed.ok() && fixed_rr.ok()) {
        std::vector<flow::Finding> after = analyze_all(fixed_rr.storyboard);
        c.expect(after.empty(), "rewritten storyboard still has " +
                                    std::to_string(after.size()) + " finding(s)");
      }

      fs::path dir = fs::current_path() / "acceptance_scratch";
      fs::remove_all(dir);
      fs::create_directories(dir);
      fs::path fixed_file = dir / "emergency.fixed.sb";
      std::ofstream(fixed_file, std::ios::binary) << fix->rewrite->text;
      driver::RunConfig cfg;
      cfg.command = driver::Command::Analyze;
      cfg.inputs = {fixed_file.string()};
      std::ostringstream out, err;
      int exit = driver::run(cfg, out, err);
      c.expect(exit == driver::kExitClean,
               "driver exit on fixed storyboard is " + std::to_string(exit));
    }
  }

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(2, "suggested fix eliminates the findings", c, ms, 1000.0);
}

// ---------------------------------------------------------------------------
// Criterion 3: over 100 random storyboards, every flow the interpreter can
// observe within depth 6 is covered by a static finding.
// ---------------------------------------------------------------------------
void criterion3() {
  Criterion c;
  auto t0 = Clock::now();

  int storyboards = 0;
  size_t flows_checked = 0;
  for (unsigned seed = 1; seed <= 100; ++seed) {
    std::mt19937 rng(seed);
    ast::Storyboard raw = testutil::random_storyboard(rng);
    std::optional<model::Storyboard> sb = testutil::resolve_generated(raw);
    if (!sb) {
      c.expect(false, "seed " + std::to_string(seed) + ": failed to resolve");
      continue;
    }
    ++storyboards;
    std::vector<flow::Finding> findings = analyze_all(*sb);
    std::set<interp::ObservedFlow> observed;
    try {
      observed = interp::Interpreter(*sb).observed_flows_to_depth(6);
    } catch (const interp::BudgetExceeded&) {
      c.expect(false, "seed " + std::to_string(seed) + ": budget exceeded");
      continue;
    }
    for (const auto& f : observed) {
      ++flows_checked;
      if (!interp::flow_covered(findings, f)) {
        c.expect(false, "seed " + std::to_string(seed) +
                            ": uncovered dynamic flow " +
                            flow::property_name(f.property) + " " +
                            f.source_kind + " -> " + f.sink);
      }
    }
  }
  c.expect(storyboards == 100, "resolved only " + std::to_string(storyboards) +
                                   " of 100 storyboards");

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(3,
         "dynamic oracle finds no counterexample (100 storyboards, depth 6, " +
             std::to_string(flows_checked) + " flows)",
         c, ms, 300000.0);
}

// ---------------------------------------------------------------------------
// Criterion 4: parse -> pretty-print -> parse is the structural identity on
// every fixture and on 50 random storyboards.
// ---------------------------------------------------------------------------
void criterion4() {
  Criterion c;
  auto t0 = Clock::now();

  const char* fixtures[] = {"emergency.sb",  "emergency_req.sb",
                            "emergency_fixed.sb", "minimal.sb",
                            "warnings.sb",   "exported.sb",
                            "vetting.sb",    "diamond.sb"};
  for (const char* name : fixtures) {
    ParseResult pr = parse_source(slurp(fixture_path(name)), name);
    if (!pr.ok()) {
      c.expect(false, std::string(name) + ": parse failed");
      continue;
    }
    ParseResult again = parse_source(pretty_print(pr.storyboard), name);
    c.expect(again.ok(), std::string(name) + ": printed form failed to parse");
    if (again.ok())
      c.expect(ast::same(pr.storyboard, again.storyboard),
               std::string(name) + ": round trip changed the structure");
  }

  for (unsigned seed = 1001; seed <= 1050; ++seed) {
    std::mt19937 rng(seed);
    ast::Storyboard raw = testutil::random_storyboard(rng);
    ParseResult again = parse_source(pretty_print(raw), "random.sb");
    if (!again.ok()) {
      c.expect(false, "seed " + std::to_string(seed) +
                          ": printed form failed to parse");
      continue;
    }
    c.expect(ast::same(raw, again.storyboard),
             "seed " + std::to_string(seed) + ": round trip changed the structure");
  }

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(4, "parse/print round trip is the identity (8 fixtures + 50 random)", c,
         ms, 0.0);
}

// ---------------------------------------------------------------------------
// Criterion 5: generation conformance. Every non-skipped test spec replays
// through the interpreter, double runs are byte-identical, and every
// transition guard lands in exactly one guard function.
// ---------------------------------------------------------------------------
void criterion5() {
  Criterion c;
  auto t0 = Clock::now();

  std::vector<std::pair<std::string, model::Storyboard>> targets;
  for (const char* name : {"emergency.sb", "emergency_req.sb",
                           "emergency_fixed.sb", "minimal.sb", "warnings.sb",
                           "exported.sb", "vetting.sb", "diamond.sb"}) {
    bool ok = false;
    model::Storyboard sb = load_model(name, c, ok);
    if (ok) targets.emplace_back(name, std::move(sb));
  }
  for (unsigned seed = 2001; seed <= 2020; ++seed) {
    std::mt19937 rng(seed);
    std::optional<model::Storyboard> sb =
        testutil::resolve_generated(testutil::random_storyboard(rng));
    if (!sb) {
      c.expect(false, "seed " + std::to_string(seed) + ": failed to resolve");
      continue;
    }
    targets.emplace_back("seed " + std::to_string(seed), std::move(*sb));
  }

  for (const auto& [label, sb] : targets) {
    std::vector<codegen::CodeUnit> u1 = codegen::generate_structural_code(sb);
    std::vector<codegen::CodeUnit> u2 = codegen::generate_structural_code(sb);
    bool identical = u1.size() == u2.size();
    for (size_t i = 0; identical && i < u1.size(); ++i)
      identical = u1[i].path == u2[i].path && u1[i].contents == u2[i].contents;
    c.expect(identical, label + ": structural double run differs");

    std::vector<codegen::TestSpec> s1 = codegen::generate_characterization_tests(sb);
    std::vector<codegen::TestSpec> s2 = codegen::generate_characterization_tests(sb);
    c.expect(codegen::tests_json(sb, s1).dump() == codegen::tests_json(sb, s2).dump(),
             label + ": test-spec double run differs");

    interp::Interpreter it(sb);
    for (const auto& spec : s1) {
      if (spec.skipped) continue;
      if (!codegen::replay(it, spec))
        c.expect(false, label + ": spec " + spec.name + " does not replay");
    }

    std::string all;
    for (const auto& u : u1) all += u.contents;
    size_t transitions = 0;
    bool guards_ok = true;
    for (const auto& s : sb.screens) {
      for (size_t i = 0; i < s.transitions.size(); ++i) {
        ++transitions;
        std::string header =
            "guard " + s.name + "__g" + std::to_string(i) + " {";
        size_t n = 0;
        for (size_t pos = all.find(header); pos != std::string::npos;
             pos = all.find(header, pos + 1))
          ++n;
        if (n != 1) guards_ok = false;
      }
    }
    size_t headers = 0;
    for (size_t pos = all.find("\nguard "); pos != std::string::npos;
         pos = all.find("\nguard ", pos + 1))
      ++headers;
    c.expect(guards_ok && headers == transitions,
             label + ": guards are not in one-to-one correspondence with "
                     "transitions");
  }

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(5, "generated code and tests conform (8 fixtures + 20 random)", c, ms,
         0.0);
}

// ---------------------------------------------------------------------------
// Criterion 6: taint propagation is idempotent and monotone under edge
// addition on 50 random graphs.
// ---------------------------------------------------------------------------
void criterion6() {
  Criterion c;
  auto t0 = Clock::now();

  for (unsigned seed = 3001; seed <= 3050; ++seed) {
    std::mt19937 rng(seed);
    flow::FlowGraph g = testutil::random_graph(rng);

    flow::TaintState ts = flow::propagate_taint(g);
    flow::TaintState twice = flow::propagate_taint(g, ts);
    c.expect(twice == ts, "seed " + std::to_string(seed) + ": not idempotent");

    std::vector<flow::Node> pool(g.nodes.begin(), g.nodes.end());
    flow::FlowGraph g2 = g;
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    g2.add_edge(pool[pick(rng)], pool[pick(rng)], flow::EdgeReason::Persist);
    flow::TaintState grown = flow::propagate_taint(g2);
    c.expect(ts.subset_of(grown),
             "seed " + std::to_string(seed) + ": not monotone under edge addition");
  }

  double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  report(6, "taint propagation is idempotent and monotone (50 graphs)", c, ms,
         0.0);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  if (g_failed == 0) {
    std::printf("all 6 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failed);
  }
  return g_failed;
}
