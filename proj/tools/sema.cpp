#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "sema/driver.hpp"

namespace {

bool color_enabled() {
  const char* env = std::getenv("SEMA_COLOR");
  if (env && std::string(env) == "0") return false;
  return isatty(fileno(stdout)) != 0;
}

bool parse_properties(const std::string& csv, std::set<sema::flow::Property>& out) {
  out.clear();
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return true;
    auto p = sema::flow::parse_property(cur);
    if (!p) return false;
    out.insert(*p);
    cur.clear();
    return true;
  };
  for (char c : csv) {
    if (c == ',') {
      if (!flush()) return false;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  return flush() && !out.empty();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sema: storyboard security analyzer and generator"};
  app.require_subcommand(1);

  struct Shared {
    std::vector<std::string> inputs;
    std::string format = "human";
    std::string out_dir;
    std::string properties;
    int depth = 4;
    bool allow_findings = false;
  };

  std::map<std::string, std::pair<CLI::App*, Shared>> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc,
                     bool wants_out, bool wants_depth) {
    CLI::App* s = app.add_subcommand(name, desc);
    auto& shared = subs[name];
    shared.first = s;
    s->add_option("inputs", shared.second.inputs, "storyboard (.sb) files")
        ->required();
    s->add_option("--format", shared.second.format, "report format")
        ->check(CLI::IsMember({"human", "json"}));
    s->add_option("--properties", shared.second.properties,
                  "comma-separated subset of P1,P2,P3,P4,R1");
    if (wants_out)
      s->add_option("--out", shared.second.out_dir, "output directory");
    if (wants_depth)
      s->add_option("--depth", shared.second.depth,
                    "trace enumeration depth (1..8)");
    s->add_flag("--allow-findings", shared.second.allow_findings,
                "generate artifacts even with error-severity findings");
  };

  add_sub("check", "parse, resolve and well-formedness checks", false, false);
  add_sub("analyze", "check plus flow analysis and findings report", false, false);
  add_sub("gen-code", "analyze plus skeleton code generation", true, false);
  add_sub("gen-tests", "analyze plus characterization test generation", true,
          false);
  add_sub("simulate", "exhaustive trace enumeration and flow report", true, true);
  add_sub("fix", "apply the first applicable rewrite", false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return sema::driver::kExitFault;
  }

  sema::driver::RunConfig cfg;
  cfg.color = color_enabled();
  const Shared* shared = nullptr;
  for (auto& [name, sub] : subs) {
    if (!sub.first->parsed()) continue;
    shared = &sub.second;
    if (name == "check") cfg.command = sema::driver::Command::Check;
    if (name == "analyze") cfg.command = sema::driver::Command::Analyze;
    if (name == "gen-code") cfg.command = sema::driver::Command::GenCode;
    if (name == "gen-tests") cfg.command = sema::driver::Command::GenTests;
    if (name == "simulate") cfg.command = sema::driver::Command::Simulate;
    if (name == "fix") cfg.command = sema::driver::Command::Fix;
  }
  if (!shared) {
    std::cerr << app.help() << "\n";
    return sema::driver::kExitFault;
  }
  cfg.inputs = shared->inputs;
  cfg.format = shared->format;
  cfg.out_dir = shared->out_dir;
  cfg.depth = shared->depth;
  cfg.allow_findings = shared->allow_findings;
  if (!shared->properties.empty() &&
      !parse_properties(shared->properties, cfg.properties)) {
    std::cerr << "invalid --properties value: " << shared->properties << "\n";
    return sema::driver::kExitFault;
  }
  if ((cfg.command == sema::driver::Command::GenCode ||
       cfg.command == sema::driver::Command::GenTests) &&
      cfg.out_dir.empty()) {
    std::cerr << "--out DIR is required for gen-code and gen-tests\n";
    return sema::driver::kExitFault;
  }
  if (cfg.command == sema::driver::Command::Simulate &&
      (cfg.depth < 1 || cfg.depth > 8)) {
    std::cerr << "--depth must be between 1 and 8\n";
    return sema::driver::kExitFault;
  }

  try {
    return sema::driver::run(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal fault: " << e.what() << "\n";
    return sema::driver::kExitFault;
  }
}
