#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oussm/kalman.hpp"
#include "oussm/ou_core.hpp"

namespace oussm {

/// Number of free parameters, p(m + 2) + m(m + 1)/2.
Index parameter_count(Index p, Index m);

/// Unconstrained coordinates of a canonical parameter set, laid out as
///   [log alpha_1..m | Theta strict upper triangle, row-major |
///    Z row-major | mu | log h_1..p]
/// with Theta_kk = sum_{i>=k} alpha_i.
VectorXd pack(const OussmParams& params);
OussmParams unpack(const VectorXd& packed, Index p, Index m);

using ScalarFunction = std::function<double(const VectorXd&)>;

/// Central differences with step cbrt(eps) * max(1, |x_i|). Throws
/// NumericalError naming the coordinate when a probe is not finite.
VectorXd numerical_gradient(const ScalarFunction& f, const VectorXd& x);

struct FitOptions {
  int n_starts = 5;
  int max_evals = 5000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double restart_scale = 0.5;
  // Packed vectors tried before the default initialization (warm starts).
  std::vector<VectorXd> extra_starts;
  FilterOptions filter;
};

struct StartDiagnostics {
  double loglik = 0.0;  // -inf when the start failed
  int n_evals = 0;
  int iterations = 0;
  bool converged = false;
  double grad_inf_norm = 0.0;
  std::string message;
};

struct FitResult {
  OussmParams params;  // canonical, sign-normalized
  double loglik = 0.0;
  int n_evals = 0;     // summed over starts
  bool converged = false;
  VectorXd packed_optimum;
  int start_index = 0;
  double grad_inf_norm = 0.0;
  std::vector<StartDiagnostics> starts;
};

/// Deterministic initial packed vector: PCA loadings, sample mean, half the
/// sample variances, log-spaced rates in [0.05, 1].
VectorXd initial_guess(const TimeSeries& series, Index m);

/// Maximum likelihood over the packed coordinates with multi-start L-BFGS.
FitResult fit(const TimeSeries& series, Index m, const FitOptions& options = {});

/// Negative log-likelihood of a packed vector; +inf when the filter fails.
double negative_loglik(const VectorXd& packed, const TimeSeries& series, Index m,
                       const FilterOptions& options = {});

}  // namespace oussm
