#pragma once

#include <string>
#include <vector>

#include "oussm/estimate.hpp"

namespace oussm {

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  Index k = 0;
};

/// AIC = -2 loglik + 2k, BIC = -2 loglik + log(n) k with
/// k = p(m + 2) + m(m + 1)/2. `n` counts observation vectors (rows).
InformationCriteria information_criteria(double loglik, Index m, Index p, Index n);

struct SelectionRow {
  Index m = 0;
  bool available = false;
  double loglik = 0.0;
  Index k = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int n_evals = 0;
  bool refit = false;  // refitted after violating nestedness
  std::string message;
  FitResult fit;
};

struct SelectionTable {
  std::vector<SelectionRow> rows;  // ordered by m
  Index n = 0;
  Index argmin_aic = 0;  // 0 when no row is available
  Index argmin_bic = 0;
};

struct SelectOptions {
  FitOptions fit;
  // Seed the fit at m from the fit at m - 1 (extra column in Z, small extra
  // rate appended to the cumulative-sum chain).
  bool warm_start = true;
  // loglik(m) may fall below loglik(m - 1) by at most this much before the
  // larger model is refitted with twice the starts.
  double nested_tol = 1e-3;
};

SelectionTable select_dimension(const TimeSeries& series, std::vector<Index> m_range,
                                const SelectOptions& options = {});

/// Packed start for dimension m + 1 built from a canonical fit at m.
VectorXd warm_start_from(const OussmParams& smaller, std::uint64_t seed);

}  // namespace oussm
