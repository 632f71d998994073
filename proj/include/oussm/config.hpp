#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace oussm {

/// Settings shared by the command-line subcommands. A JSON config file may set
/// any of these by name; flags given on the command line take precedence.
struct RunConfig {
  std::string input;
  std::string params;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int m = 2;
  std::vector<int> m_range{1, 2, 3};
  int n_starts = 5;
  int max_evals = 5000;
  double tol = 1e-8;
  double train_fraction = 0.9;
  double pseudocount = 0.3;
  std::string reference;
  std::string scenario;
  int n = 2000;
  double dt = 1.0;
  int replicates = 20;
  double measurement_variance = 0.1;
  bool measurement_error = true;
};

/// Names accepted in config files (same as the long flags, '-' -> '_').
const std::vector<std::string>& run_config_keys();

/// Copies every key of `j` into `cfg` unless its name is in `explicit_keys`.
/// Unknown keys and values of the wrong type throw InvalidInput.
void apply_run_config(const nlohmann::json& j, RunConfig& cfg,
                      const std::set<std::string>& explicit_keys = {});

/// Reads a JSON object from `path` and applies it as above.
void load_run_config(const std::string& path, RunConfig& cfg,
                     const std::set<std::string>& explicit_keys = {});

/// Range checks; throws InvalidInput naming the offending setting.
void validate_run_config(const RunConfig& cfg);

}  // namespace oussm
