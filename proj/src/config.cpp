#include "oussm/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "oussm/errors.hpp"
#include "oussm/io.hpp"

namespace oussm {

namespace {

using Setter = std::function<void(const nlohmann::json&, RunConfig&)>;

template <class T>
Setter set(T RunConfig::*field) {
  return [field](const nlohmann::json& v, RunConfig& c) { c.*field = v.get<T>(); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input", set(&RunConfig::input)},
      {"params", set(&RunConfig::params)},
      {"out_dir", set(&RunConfig::out_dir)},
      {"seed", set(&RunConfig::seed)},
      {"threads", set(&RunConfig::threads)},
      {"m", set(&RunConfig::m)},
      {"m_range", set(&RunConfig::m_range)},
      {"n_starts", set(&RunConfig::n_starts)},
      {"max_evals", set(&RunConfig::max_evals)},
      {"tol", set(&RunConfig::tol)},
      {"train_fraction", set(&RunConfig::train_fraction)},
      {"pseudocount", set(&RunConfig::pseudocount)},
      {"reference", set(&RunConfig::reference)},
      {"scenario", set(&RunConfig::scenario)},
      {"n", set(&RunConfig::n)},
      {"dt", set(&RunConfig::dt)},
      {"replicates", set(&RunConfig::replicates)},
      {"measurement_variance", set(&RunConfig::measurement_variance)},
      {"measurement_error", set(&RunConfig::measurement_error)},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_run_config(const nlohmann::json& j, RunConfig& cfg,
                      const std::set<std::string>& explicit_keys) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw InvalidInput("unknown config key '" + key + "'");
    if (explicit_keys.count(key)) continue;
    try {
      it->second(value, cfg);
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput("config key '" + key + "' has the wrong type");
    }
  }
}

void load_run_config(const std::string& path, RunConfig& cfg,
                     const std::set<std::string>& explicit_keys) {
  const nlohmann::json j = read_json(path);
  try {
    apply_run_config(j, cfg, explicit_keys);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void validate_run_config(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidInput(what);
  };
  require(cfg.threads >= 1 && cfg.threads <= 1024, "threads must be in [1, 1024]");
  require(cfg.m >= 1 && cfg.m <= 50, "m must be in [1, 50]");
  require(!cfg.m_range.empty(), "m_range must not be empty");
  require(std::all_of(cfg.m_range.begin(), cfg.m_range.end(),
                      [](int m) { return m >= 1 && m <= 50; }),
          "m_range entries must be in [1, 50]");
  require(cfg.n_starts >= 1 && cfg.n_starts <= 10000, "n_starts must be in [1, 10000]");
  require(cfg.max_evals >= 10, "max_evals must be at least 10");
  require(cfg.tol > 0.0 && cfg.tol < 1.0, "tol must be in (0, 1)");
  require(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0,
          "train_fraction must be in (0, 1)");
  require(cfg.pseudocount > 0.0 && std::isfinite(cfg.pseudocount),
          "pseudocount must be positive");
  require(cfg.n >= 4, "n must be at least 4");
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "dt must be positive");
  require(cfg.replicates >= 1, "replicates must be at least 1");
  require(cfg.measurement_variance > 0.0 && std::isfinite(cfg.measurement_variance),
          "measurement_variance must be positive");
}

}  // namespace oussm
