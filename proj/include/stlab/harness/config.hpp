#pragma once

#include "stlab/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stlab::harness {

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Parameters of one experiment run. Every field has a key of the same name
/// in both the flat key=value format and the JSON format.
struct ExperimentConfig {
  std::string kind = "converge";
  std::vector<std::string> problems{"decay"};
  std::vector<double> thetas{1.0};
  std::vector<int> qs;
  std::vector<int> Ns{8, 16, 32, 64};
  std::vector<int> dims{8};
  std::vector<std::string> phis{"zero"};
  std::string triple = "spectral";  // spectral | p1
  double length = 1.0;              // p1 domain length
  double T = 1.0;
  std::uint64_t seed = 20240607;
  std::vector<double> k_lambda{0.5, 1.0, 3.0};  // cfl-scan
  int cfl_N = 10;
  int q_max = 7;
  int refine = 4;               // reference refinement factor (quasiopt)
  double quasiopt_slack = 0.05;
  bool witness = true;          // bnb-scan: alternating witness for theta = 1/2
};

/// Flat format: one `key = value` per line, lists comma separated, `#`
/// starts a comment. Unknown keys are errors.
ExperimentConfig parse_config_kv(const std::string& text);
ExperimentConfig parse_config_json(const std::string& text);
/// Chooses the format from the first non-blank character ('{' means JSON).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& c);
std::string to_kv(const ExperimentConfig& c);

}  // namespace stlab::harness
