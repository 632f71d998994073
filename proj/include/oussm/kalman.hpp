#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oussm/ou_core.hpp"

namespace oussm {

/// Observations y(t_0..t_N) on an arbitrary increasing time grid. A row is
/// either fully observed or fully missing; missing rows hold NaN.
struct TimeSeries {
  std::vector<double> times;
  MatrixXd values;            // (N+1) x p
  std::vector<char> missing;  // one flag per row; empty means none missing

  Index rows() const { return static_cast<Index>(times.size()); }
  Index dim() const { return values.cols(); }
  bool is_missing(Index row) const {
    return !missing.empty() && missing[static_cast<std::size_t>(row)] != 0;
  }
  Index observed_rows() const;
};

/// Throws InvalidInput on non-increasing times, shape mismatches, partially
/// missing rows or non-finite observed values.
void validate_series(const TimeSeries& series);

/// Builds a series and derives the missing mask from all-NaN rows.
TimeSeries make_series(std::vector<double> times, MatrixXd values);

/// Rows [begin, end) of a series.
TimeSeries slice(const TimeSeries& series, Index begin, Index end);

struct FilterOptions {
  // Once the predicted covariance stops changing on an equally spaced run
  // (max abs change <= tol * max abs entry), the gain, innovation covariance
  // and its factor are reused until the gap changes or a row is missing.
  // Zero disables the shortcut.
  double steady_state_tol = 1e-13;
};

/// Per-step output of the recursion. Index n refers to observation time t_n.
/// predicted_means / predicted_cov have one extra trailing entry: the
/// filtered state at t_N (a zero-length time update).
struct FilterResult {
  double loglik = 0.0;
  MatrixXd innovations;                // (N+1) x p, NaN on missing rows
  std::vector<MatrixXd> innovation_cov;  // F_n, p x p
  std::vector<MatrixXd> gains;           // K_n, m x p (zero on missing rows)
  MatrixXd predicted_means;            // (N+2) x m, row 0 is zero
  std::vector<MatrixXd> predicted_cov;   // P_n, row 0 is Q_inf
};

FilterResult filter(const OussmParams& params, const TimeSeries& series,
                    const FilterOptions& options = {});

/// Same recursion without storing per-step output.
double loglikelihood(const OussmParams& params, const TimeSeries& series,
                     const FilterOptions& options = {});

inline constexpr double kNormal975Quantile = 1.959964;

struct Prediction {
  double time = 0.0;
  VectorXd mean;
  VectorXd lower95;
  VectorXd upper95;
};

/// Filters through `train`, then continues over `test`, emitting at each test
/// time the one-step-ahead mean mu + Z a and the plug-in interval
/// mean +- 1.959964 sqrt(diag F) before that observation is absorbed.
std::vector<Prediction> predict_one_step(const OussmParams& params,
                                         const TimeSeries& train,
                                         const TimeSeries& test,
                                         const FilterOptions& options = {});

}  // namespace oussm
