#include "oussm/modelsel.hpp"

#include <algorithm>
#include <cmath>

#include "oussm/errors.hpp"
#include "oussm/random.hpp"

namespace oussm {

InformationCriteria information_criteria(double loglik, Index m, Index p, Index n) {
  if (n < 1) throw InvalidInput("observation count must be at least 1");
  if (m < 1 || p < 1) throw InvalidInput("m and p must be positive");
  InformationCriteria ic;
  ic.k = parameter_count(p, m);
  const double k = static_cast<double>(ic.k);
  ic.aic = -2.0 * loglik + 2.0 * k;
  ic.bic = -2.0 * loglik + std::log(static_cast<double>(n)) * k;
  return ic;
}

VectorXd warm_start_from(const OussmParams& smaller, std::uint64_t seed) {
  const Index m = smaller.m();
  const Index p = smaller.p();
  const double extra = 0.05 * smaller.theta(m - 1, m - 1);
  MatrixXd theta = MatrixXd::Zero(m + 1, m + 1);
  theta.topLeftCorner(m, m) = smaller.theta;
  theta.diagonal().head(m).array() += extra;
  theta(m, m) = extra;
  // Keep the cumulative-sum chain strictly decreasing.
  for (Index i = 0; i < m; ++i) {
    const double next = theta(i + 1, i + 1);
    if (!(theta(i, i) > next)) theta(i, i) = next * (1.0 + 1e-6) + 1e-12;
  }
  MatrixXd z = MatrixXd::Zero(p, m + 1);
  z.leftCols(m) = smaller.z;
  Rng rng(seed);
  const double scale = 0.01 * std::max(1e-6, smaller.z.cwiseAbs().maxCoeff());
  z.col(m) = scale * rng.normal_vector(p);
  return pack(OussmParams::with_unit_diffusion(theta, z, smaller.mu, smaller.h_diag));
}

SelectionTable select_dimension(const TimeSeries& series, std::vector<Index> m_range,
                                const SelectOptions& options) {
  if (m_range.empty()) throw InvalidInput("m_range is empty");
  std::sort(m_range.begin(), m_range.end());
  m_range.erase(std::unique(m_range.begin(), m_range.end()), m_range.end());
  if (m_range.front() < 1) throw InvalidInput("state dimensions must be positive");
  validate_series(series);

  SelectionTable table;
  table.n = series.observed_rows();
  const Index p = series.dim();

  table.rows.reserve(m_range.size());
  const SelectionRow* previous = nullptr;
  for (Index m : m_range) {
    SelectionRow row;
    row.m = m;
    row.k = parameter_count(p, m);
    auto attempt = [&](FitOptions fo) {
      const bool chained = previous && previous->available && previous->m == m - 1;
      if (options.warm_start && chained) {
        fo.extra_starts.push_back(
            warm_start_from(previous->fit.params, splitmix64(fo.seed + static_cast<std::uint64_t>(m))));
      }
      row.fit = fit(series, m, fo);
      row.available = true;
      row.loglik = row.fit.loglik;
      row.converged = row.fit.converged;
      row.n_evals += row.fit.n_evals;
    };
    try {
      attempt(options.fit);
      if (previous && previous->available &&
          row.loglik < previous->loglik - options.nested_tol) {
        const FitResult first = row.fit;
        FitOptions more = options.fit;
        more.n_starts = std::max(1, 2 * options.fit.n_starts);
        more.seed = splitmix64(options.fit.seed ^ 0x5bd1e995ULL);
        attempt(more);
        row.refit = true;
        if (first.loglik > row.loglik) {
          row.fit = first;
          row.loglik = first.loglik;
          row.converged = first.converged;
        }
        if (row.loglik < previous->loglik - options.nested_tol) {
          row.message = "log-likelihood below the smaller model after refit";
        }
      }
    } catch (const Error& e) {
      row.available = false;
      row.message = e.what();
    }
    if (row.available) {
      const InformationCriteria ic = information_criteria(row.loglik, m, p, table.n);
      row.aic = ic.aic;
      row.bic = ic.bic;
    }
    table.rows.push_back(std::move(row));
    previous = &table.rows.back();
  }

  double best_aic = 0.0, best_bic = 0.0;
  for (const auto& row : table.rows) {
    if (!row.available) continue;
    if (table.argmin_aic == 0 || row.aic < best_aic) {
      best_aic = row.aic;
      table.argmin_aic = row.m;
    }
    if (table.argmin_bic == 0 || row.bic < best_bic) {
      best_bic = row.bic;
      table.argmin_bic = row.m;
    }
  }
  return table;
}

}  // namespace oussm
