#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sema/codegen.hpp"
#include "sema/parser.hpp"

namespace sema::driver {

enum class Command { Check, Analyze, GenCode, GenTests, Simulate, Fix };

struct RunConfig {
  Command command = Command::Check;
  std::vector<std::string> inputs;
  std::string format = "human";  // human | json
  std::string out_dir;           // required for gen-*
  std::set<flow::Property> properties = flow::all_properties();
  int depth = 4;                 // simulate only
  bool allow_findings = false;
  bool color = false;
};

// Exit statuses of run(): 0 clean, 1 findings present, 2 parse/resolve
// errors, 3 internal fault.
inline constexpr int kExitClean = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitErrors = 2;
inline constexpr int kExitFault = 3;

namespace detail {

inline std::string paint(bool color, const char* code, const std::string& s) {
  if (!color) return s;
  return std::string("\x1b[") + code + "m" + s + "\x1b[0m";
}

inline std::string severity_color(flow::FindingSeverity s) {
  return s == flow::FindingSeverity::High ? "31" : "33";  // red / yellow
}

inline nlohmann::ordered_json diagnostics_json(const std::string& file,
                                               const std::vector<Diagnostic>& ds) {
  nlohmann::ordered_json j;
  j["schema"] = "sema-diagnostics/1";
  j["file"] = file;
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : ds) {
    j["diagnostics"].push_back({{"file", d.span.file},
                                {"line", d.span.start_line},
                                {"col", d.span.start_col},
                                {"severity", d.severity == Severity::Error
                                                 ? "error"
                                                 : "warning"},
                                {"code", diag_code_name(d.code)},
                                {"message", d.message}});
  }
  return j;
}

// Findings grouped by property (stable within a property); the same order is
// used for the human and the JSON rendering.
inline std::vector<flow::Finding> report_order(std::vector<flow::Finding> fs) {
  std::stable_sort(fs.begin(), fs.end(),
                   [](const flow::Finding& a, const flow::Finding& b) {
                     return a.property < b.property;
                   });
  return fs;
}

inline std::string span_anchor(const SourceSpan& s) {
  if (!s.valid()) return "";
  std::ostringstream os;
  os << s.file << ":" << s.start_line << ":" << s.start_col;
  return os.str();
}

}  // namespace detail

/// Render a findings report. Human format groups findings by property and
/// prints each witness as an arrow chain with file:line anchors; json format
/// is a single sema-findings/1 document line. Ordering is identical across
/// formats. Pure: identical inputs render byte-identically.
inline std::string render_report(const std::string& file, const std::string& app,
                                 const std::vector<flow::Finding>& findings,
                                 const std::string& format, bool color = false) {
  std::vector<flow::Finding> ordered = detail::report_order(findings);
  if (format == "json") return flow::findings_json(file, app, ordered).dump() + "\n";

  std::ostringstream os;
  if (ordered.empty()) {
    os << "no findings\n";
    return os.str();
  }
  os << file << ": " << ordered.size()
     << (ordered.size() == 1 ? " finding" : " findings") << "\n";
  flow::Property group{};
  bool first = true;
  for (const auto& f : ordered) {
    if (first || f.property != group) {
      group = f.property;
      first = false;
      os << "\n"
         << detail::paint(color, "1",
                          std::string(flow::property_name(f.property)) + " " +
                              flow::property_title(f.property))
         << "\n";
    }
    os << "  ["
       << detail::paint(color, detail::severity_color(f.severity).c_str(),
                        flow::severity_name(f.severity))
       << "] " << f.message << "\n";
    os << "    sink: " << f.sink;
    std::string anchor = detail::span_anchor(f.anchor);
    if (!anchor.empty()) os << "  (" << anchor << ")";
    os << "\n";
    if (!f.witness.empty()) {
      os << "    witness: " << flow::node_id(f.witness.front().from) << "\n";
      for (const auto& e : f.witness) {
        os << "          -> " << flow::node_id(e.to) << "  ["
           << flow::edge_reason_name(e.reason) << "]";
        std::string a = detail::span_anchor(e.site);
        if (!a.empty()) os << " at " << a;
        os << "\n";
      }
    }
    if (f.fix) os << "    fix: " << f.fix->description << "\n";
  }
  return os.str();
}

namespace detail {

struct LoadResult {
  bool ok = false;
  ast::Storyboard raw;
  model::Storyboard sb;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;
};

inline LoadResult load(const std::string& path) {
  LoadResult r;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Diagnostic d;
    d.severity = Severity::Error;
    d.code = DiagCode::ParseError;
    d.span.file = path;
    d.message = "cannot read input file";
    r.errors.push_back(std::move(d));
    return r;
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ParseResult pr = parse_source(text, path);
  if (!pr.ok()) {
    r.errors = pr.errors;
    return r;
  }
  model::ResolveResult rr = model::resolve(pr.storyboard);
  if (!rr.ok()) {
    r.errors = rr.errors;
    return r;
  }
  r.ok = true;
  r.raw = pr.storyboard;
  r.sb = rr.storyboard;
  r.warnings = model::check_wellformed(r.sb);
  return r;
}

inline void emit_diagnostics(const LoadResult& lr, const std::string& path,
                             const RunConfig& cfg, std::ostream& out,
                             std::ostream& err) {
  if (cfg.format == "json") {
    std::vector<Diagnostic> all = lr.errors;
    all.insert(all.end(), lr.warnings.begin(), lr.warnings.end());
    out << diagnostics_json(path, all).dump() << "\n";
  } else {
    for (const auto& d : lr.errors) err << format_diagnostic(d) << "\n";
    for (const auto& d : lr.warnings) err << format_diagnostic(d) << "\n";
  }
}

inline std::vector<flow::Finding> analyze(const LoadResult& lr,
                                          const RunConfig& cfg) {
  flow::FlowGraph g = flow::build_flow_graph(lr.sb);
  flow::TaintState ts = flow::propagate_taint(g);
  std::vector<flow::Finding> fs =
      flow::check_properties(lr.sb, g, ts, cfg.properties);
  for (auto& f : fs) f.fix = flow::suggest_fix(lr.raw, lr.sb, f);
  return fs;
}

inline bool has_high(const std::vector<flow::Finding>& fs) {
  for (const auto& f : fs)
    if (f.severity == flow::FindingSeverity::High) return true;
  return false;
}

inline std::string input_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Run one input through the pipeline for the configured command; returns the
// per-file exit status.
inline int run_file(const std::string& path, const RunConfig& cfg,
                    std::ostream& out, std::ostream& err) {
  LoadResult lr = load(path);
  if (!lr.ok) {
    emit_diagnostics(lr, path, cfg, out, err);
    return kExitErrors;
  }

  if (cfg.command == Command::Check) {
    emit_diagnostics(lr, path, cfg, out, err);
    if (cfg.format != "json")
      out << path << ": ok (" << lr.sb.screens.size() << " screens, "
          << lr.sb.resources.size() << " resources)\n";
    return kExitClean;
  }

  if (cfg.command == Command::Simulate) {
    if (cfg.format != "json") emit_diagnostics(lr, path, cfg, out, err);
    interp::Interpreter it(lr.sb);
    std::vector<interp::Trace> traces = it.enumerate_traces(cfg.depth);
    std::set<interp::ObservedFlow> flows = interp::observed_flows(traces);
    std::vector<std::string> lines;
    size_t index = 0;
    for (const auto& t : traces) {
      if ((int)t.steps.size() != cfg.depth) continue;  // maximal traces only
      for (auto& l : interp::trace_jsonl(t, index)) lines.push_back(std::move(l));
      ++index;
    }
    if (!cfg.out_dir.empty()) {
      std::filesystem::path p =
          std::filesystem::path(cfg.out_dir) / (input_stem(path) + ".trace.jsonl");
      std::ostringstream body;
      for (const auto& l : lines) body << l << "\n";
      write_text(p, body.str());
      if (cfg.format != "json")
        out << path << ": wrote " << index << " traces to " << p.string() << "\n";
    } else if (cfg.format == "json") {
      for (const auto& l : lines) out << l << "\n";
    }
    if (cfg.format != "json") {
      out << path << ": " << traces.size() << " traces at depth " << cfg.depth
          << ", " << flows.size() << " observed flow(s)\n";
      for (const auto& f : flows)
        out << "  " << flow::property_name(f.property) << " " << f.source_kind
            << " -> " << f.sink << "\n";
    }
    return kExitClean;
  }

  // Analyze / GenCode / GenTests / Fix all need findings.
  std::vector<flow::Finding> findings = analyze(lr, cfg);
  if (cfg.format != "json") emit_diagnostics(lr, path, cfg, out, err);

  if (cfg.command == Command::Analyze) {
    out << render_report(path, lr.sb.app_name, findings, cfg.format, cfg.color);
    return findings.empty() ? kExitClean : kExitFindings;
  }

  if (cfg.command == Command::Fix) {
    std::vector<flow::Finding> ordered = detail::report_order(findings);
    const flow::Finding* chosen = nullptr;
    for (const auto& f : ordered) {
      if (f.fix && f.fix->rewrite) {
        chosen = &f;
        break;
      }
    }
    nlohmann::ordered_json jdoc = flow::findings_json(path, lr.sb.app_name, ordered);
    if (findings.empty()) {
      if (cfg.format == "json") {
        jdoc["applied"] = nullptr;
        out << jdoc.dump() << "\n";
      } else {
        out << "no findings\n";
      }
      return kExitClean;
    }
    if (!chosen) {
      if (cfg.format == "json") {
        jdoc["applied"] = nullptr;
        out << jdoc.dump() << "\n";
      } else {
        out << render_report(path, lr.sb.app_name, findings, cfg.format, cfg.color);
        out << path << ": no applicable rewrite\n";
      }
      return kExitFindings;
    }
    std::filesystem::path target = std::filesystem::path(path);
    target.replace_filename(input_stem(path) + ".fixed.sb");
    write_text(target, chosen->fix->rewrite->text);
    if (cfg.format == "json") {
      jdoc["applied"] = {{"property", flow::property_name(chosen->property)},
                         {"sink", chosen->sink},
                         {"description", chosen->fix->description},
                         {"output", target.string()}};
      out << jdoc.dump() << "\n";
    } else {
      out << render_report(path, lr.sb.app_name, findings, cfg.format, cfg.color);
      out << path << ": applied fix for " << flow::property_name(chosen->property)
          << " (" << chosen->fix->description << ")\n";
      out << path << ": wrote " << target.string() << "\n";
    }
    return kExitFindings;
  }

  // gen-code / gen-tests
  bool refused = has_high(findings) && !cfg.allow_findings;
  std::vector<std::string> artifacts;
  if (!refused) {
    std::filesystem::path base =
        std::filesystem::path(cfg.out_dir) / input_stem(path);
    if (cfg.command == Command::GenCode) {
      for (const auto& u : codegen::generate_structural_code(lr.sb)) {
        std::filesystem::path p = base / u.path;
        write_text(p, u.contents);
        artifacts.push_back(p.string());
      }
    } else {
      auto specs = codegen::generate_characterization_tests(lr.sb);
      std::filesystem::path p =
          std::filesystem::path(cfg.out_dir) / (input_stem(path) + ".tests.json");
      write_text(p, codegen::tests_json(lr.sb, specs).dump(2) + "\n");
      artifacts.push_back(p.string());
    }
  }
  if (cfg.format == "json") {
    nlohmann::ordered_json jdoc =
        flow::findings_json(path, lr.sb.app_name, detail::report_order(findings));
    jdoc["artifacts"] = artifacts;
    jdoc["refused"] = refused;
    out << jdoc.dump() << "\n";
  } else {
    out << render_report(path, lr.sb.app_name, findings, cfg.format, cfg.color);
    if (refused) {
      out << path
          << ": generation refused: error-severity findings present "
             "(use --allow-findings to override)\n";
    } else {
      out << path << ": wrote " << artifacts.size() << " artifact(s)\n";
      for (const auto& a : artifacts) out << "  " << a << "\n";
    }
  }
  return findings.empty() ? kExitClean : kExitFindings;
}

}  // namespace detail

/// Execute the configured command over every input sequentially. The exit
/// status is the maximum of the per-file statuses.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  int exit = kExitClean;
  for (const auto& path : cfg.inputs) {
    int code;
    try {
      code = detail::run_file(path, cfg, out, err);
    } catch (const interp::BudgetExceeded& e) {
      err << path << ": internal fault: " << e.what() << "\n";
      code = kExitFault;
    } catch (const std::exception& e) {
      err << path << ": internal fault: " << e.what() << "\n";
      code = kExitFault;
    }
    exit = std::max(exit, code);
  }
  return exit;
}

}  // namespace sema::driver
