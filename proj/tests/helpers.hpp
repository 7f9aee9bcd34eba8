#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "sema/sema.hpp"

#ifndef SEMA_FIXTURES_DIR
#error "SEMA_FIXTURES_DIR must name the fixtures directory"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(SEMA_FIXTURES_DIR) + "/" + name;
}

inline std::string schema_path(const std::string& name) {
  return std::string(SEMA_FIXTURES_DIR) + "/../schemas/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string slurp_fixture(const std::string& name) {
  return slurp(fixture_path(name));
}

/// Parse source that is expected to be syntactically valid.
inline sema::ast::Storyboard parse_ok(const std::string& src,
                                      const std::string& file = "<test>") {
  sema::ParseResult pr = sema::parse_source(src, file);
  for (const auto& d : pr.errors) UNSCOPED_INFO(sema::format_diagnostic(d));
  REQUIRE(pr.ok());
  return pr.storyboard;
}

/// Parse + resolve source that is expected to be fully valid.
inline sema::model::Storyboard resolve_ok(const std::string& src,
                                          const std::string& file = "<test>") {
  sema::model::ResolveResult rr = sema::model::resolve(parse_ok(src, file));
  for (const auto& d : rr.errors) UNSCOPED_INFO(sema::format_diagnostic(d));
  REQUIRE(rr.ok());
  return rr.storyboard;
}

inline sema::ast::Storyboard parse_fixture(const std::string& name) {
  return parse_ok(slurp_fixture(name), name);
}

inline sema::model::Storyboard load_fixture(const std::string& name) {
  return resolve_ok(slurp_fixture(name), name);
}

/// Findings for a storyboard with everything switched on.
inline std::vector<sema::flow::Finding> analyze(const sema::model::Storyboard& sb) {
  sema::flow::FlowGraph g = sema::flow::build_flow_graph(sb);
  sema::flow::TaintState ts = sema::flow::propagate_taint(g);
  return sema::flow::check_properties(sb, g, ts);
}

inline std::vector<std::string> finding_sinks(
    const std::vector<sema::flow::Finding>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs)
    out.push_back(std::string(sema::flow::property_name(f.property)) + " " + f.sink);
  return out;
}

}  // namespace testutil
