#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "oussm/estimate.hpp"
#include "oussm/kalman.hpp"
#include "oussm/ou_core.hpp"

namespace oussm {

struct Simulation {
  TimeSeries series;
  MatrixXd latent;  // row i is x(t_i)
};

/// Exact draw from the model on the given grid: x_0 ~ N(0, Q_inf),
/// x_{n+1} = C x_n + eta with eta ~ N(0, Q(dt)), y = mu + Z x (+ eps).
/// Gaussian draws use the symmetric square root of each covariance. Per row
/// the stream is consumed as: measurement noise (p draws, only with
/// measurement error), then transition noise (m draws) for the next row;
/// x_0 takes the first m draws.
Simulation simulate(const OussmParams& params, const std::vector<double>& times,
                    std::uint64_t seed, bool include_measurement_error = true);

/// t_0 = 0, t_n = n * dt for n < count.
std::vector<double> regular_times(Index count, double dt);

/// Symmetric PSD square root; eigenvalues below zero are clamped.
MatrixXd symmetric_sqrt(const MatrixXd& cov);

struct Scenario {
  std::string id;
  int theta_index = 0;  // 1..15
  int z_index = 0;      // 1..6
  MatrixXd theta;
  MatrixXd z;
  // Labels as printed in the source tables; eigen_label is metadata only,
  // the computed classification comes from spectral_summary.
  std::string eigen_label;
  std::string diag_separation;  // "close" | "far"
  std::string diag_magnitude;   // "small" | "large"
  std::string z_angle;          // "small-angle" | "orthogonal"
};

/// The 15 x 6 simulation grid, Theta-major.
std::vector<Scenario> scenario_suite();

/// Looks up a scenario by id; throws InvalidInput if unknown.
Scenario find_scenario(const std::string& id);

/// Parameters used to simulate a scenario: the scenario's Theta and Z with
/// Sigma = I, mu = 0 and h_i = measurement_variance.
OussmParams scenario_params(const Scenario& s, double measurement_variance);

struct ExperimentOptions {
  int n_replicates = 20;
  Index series_length = 2000;
  double dt = 1.0;
  std::uint64_t seed = 1;
  double measurement_variance = 0.1;
  std::vector<Index> m_values{1, 2, 3};
  FitOptions fit;
  unsigned threads = 1;
};

struct ReplicateResult {
  int replicate = 0;
  bool ok = false;
  std::string message;
  MatrixXd theta_hat;  // at m = 2 (true dimension)
  double exp_error_ratio = std::numeric_limits<double>::quiet_NaN();
  std::vector<Index> m_values;
  std::vector<double> loglik;
  std::vector<double> aic;
  std::vector<double> bic;
  Index aic_choice = 0;
  Index bic_choice = 0;
};

/// Simulates n_replicates series from the scenario and fits every m in
/// m_values. Replicate r simulates with Rng stream (seed, 2r) and fits with
/// seed stream (seed, 2r + 1). Failures are recorded per replicate.
std::vector<ReplicateResult> run_experiment(const Scenario& scenario,
                                            const ExperimentOptions& options);

}  // namespace oussm
