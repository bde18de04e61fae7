#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace optlab {

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 42;
  std::map<std::string, std::string> overrides;
  std::string output_dir = ".";
  bool svg = false;
};

struct AssertionResult {
  std::string name;
  bool pass;
  std::string detail;
};

struct ExperimentOutcome {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> notes;  // echoed config, findings
  std::vector<AssertionResult> assertions;
  std::vector<std::string> files;  // file names inside the output directory

  bool passed() const;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> keys;  // override keys accepted via --set
};

const std::vector<ExperimentInfo>& experiment_registry();

// Runs one registered experiment: writes its CSVs (and SVGs when asked), a
// deterministic manifest, and evaluates the built-in assertions. Unknown
// names and unknown override keys raise std::invalid_argument.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Flat "key = value" file; blank lines and lines starting with # ignored.
std::map<std::string, std::string> parse_config_file(std::istream& in);
std::map<std::string, std::string> parse_config_file(const std::string& path);

void write_manifest(std::ostream& out, const ExperimentOutcome& outcome);

}  // namespace optlab
