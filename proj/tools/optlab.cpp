#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optlab/experiments.hpp"

namespace {

void apply_set_overrides(const std::vector<std::string>& sets,
                         std::map<std::string, std::string>& overrides) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
    }
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
}

std::uint64_t parse_seed(const std::string& text) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    throw std::invalid_argument("config: cannot parse seed '" + text + "'");
  }
  return v;
}

int report(const optlab::ExperimentOutcome& outcome, const std::string& out_dir) {
  std::cout << "experiment " << outcome.name << " (seed " << outcome.seed << ")\n";
  for (const auto& a : outcome.assertions) {
    std::cout << "  [" << (a.pass ? "PASS" : "FAIL") << "] " << a.name;
    if (!a.detail.empty()) std::cout << "  " << a.detail;
    std::cout << '\n';
  }
  for (const auto& f : outcome.files) std::cout << "  wrote " << out_dir << '/' << f << '\n';
  std::cout << "status: " << (outcome.passed() ? "pass" : "fail") << '\n';
  return outcome.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optlab: gradient methods on non-differentiable losses"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one registered experiment");
  std::string name;
  std::uint64_t seed = 42;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  std::string config_path;
  bool svg = false;
  run_cmd->add_option("name", name, "experiment name")->required();
  run_cmd->add_option("--seed", seed, "base seed (default 42)");
  run_cmd->add_option("--set", sets, "override, key=value; repeatable");
  run_cmd->add_option("--out", out_dir, "output directory (default .)");
  run_cmd->add_option("--config", config_path, "key = value defaults file");
  run_cmd->add_flag("--svg", svg, "also render SVG plots");

  auto* list_cmd = app.add_subcommand("list", "list registered experiments");

  auto* verify_cmd = app.add_subcommand("verify-all", "run every experiment, report pass/fail");
  std::uint64_t verify_seed = 42;
  std::string verify_out = ".";
  bool verify_svg = false;
  verify_cmd->add_option("--seed", verify_seed, "base seed (default 42)");
  verify_cmd->add_option("--out", verify_out, "output directory (default .)");
  verify_cmd->add_flag("--svg", verify_svg, "also render SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*list_cmd) {
      for (const auto& info : optlab::experiment_registry()) {
        std::cout << info.name << "\n    " << info.summary << "\n    keys:";
        for (const auto& k : info.keys) std::cout << ' ' << k;
        std::cout << '\n';
      }
      return 0;
    }

    if (*run_cmd) {
      optlab::ExperimentConfig cfg;
      cfg.name = name;
      cfg.output_dir = out_dir;
      cfg.svg = svg;
      if (!config_path.empty()) cfg.overrides = optlab::parse_config_file(config_path);
      apply_set_overrides(sets, cfg.overrides);
      if (const auto it = cfg.overrides.find("seed"); it != cfg.overrides.end()) {
        cfg.seed = parse_seed(it->second);
        cfg.overrides.erase(it);
      }
      if (run_cmd->count("--seed") > 0) cfg.seed = seed;
      const auto outcome = optlab::run_experiment(cfg);
      return report(outcome, cfg.output_dir);
    }

    // verify-all
    bool all_pass = true;
    for (const auto& info : optlab::experiment_registry()) {
      optlab::ExperimentConfig cfg;
      cfg.name = info.name;
      cfg.seed = verify_seed;
      cfg.output_dir = verify_out;
      cfg.svg = verify_svg;
      const auto outcome = optlab::run_experiment(cfg);
      all_pass = all_pass && outcome.passed();
      std::cout << '[' << (outcome.passed() ? "PASS" : "FAIL") << "] " << info.name << '\n';
      for (const auto& a : outcome.assertions) {
        if (!a.pass) {
          std::cout << "       failed: " << a.name;
          if (!a.detail.empty()) std::cout << "  " << a.detail;
          std::cout << '\n';
        }
      }
    }
    return all_pass ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
