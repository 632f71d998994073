#include "oussm/kalman.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "oussm/errors.hpp"

namespace oussm {

Index TimeSeries::observed_rows() const {
  Index n = 0;
  for (Index i = 0; i < rows(); ++i) n += is_missing(i) ? 0 : 1;
  return n;
}

void validate_series(const TimeSeries& series) {
  const Index n = series.rows();
  if (n == 0) throw InvalidInput("series is empty");
  if (series.values.rows() != n) {
    throw InvalidInput("series has " + std::to_string(series.values.rows()) +
                       " value rows but " + std::to_string(n) + " times");
  }
  if (series.values.cols() == 0) throw InvalidInput("series has no columns");
  if (!series.missing.empty() && static_cast<Index>(series.missing.size()) != n) {
    throw InvalidInput("missing mask length differs from series length");
  }
  for (Index i = 0; i < n; ++i) {
    const double t = series.times[static_cast<std::size_t>(i)];
    if (!std::isfinite(t)) {
      throw InvalidInput("non-finite time at row " + std::to_string(i));
    }
    if (i > 0 && !(t > series.times[static_cast<std::size_t>(i - 1)])) {
      throw InvalidInput("times not strictly increasing at row " + std::to_string(i));
    }
    if (series.is_missing(i)) continue;
    for (Index j = 0; j < series.values.cols(); ++j) {
      if (!std::isfinite(series.values(i, j))) {
        std::ostringstream os;
        os << "non-finite observation at row " << i << ", column " << j
           << " (only fully missing rows are supported)";
        throw InvalidInput(os.str());
      }
    }
  }
}

TimeSeries make_series(std::vector<double> times, MatrixXd values) {
  TimeSeries s;
  s.times = std::move(times);
  s.values = std::move(values);
  s.missing.assign(static_cast<std::size_t>(s.values.rows()), 0);
  bool any = false;
  for (Index i = 0; i < s.values.rows(); ++i) {
    if (s.values.row(i).array().isNaN().all()) {
      s.missing[static_cast<std::size_t>(i)] = 1;
      any = true;
    }
  }
  if (!any) s.missing.clear();
  return s;
}

TimeSeries slice(const TimeSeries& series, Index begin, Index end) {
  if (begin < 0 || end > series.rows() || begin >= end) {
    throw InvalidInput("invalid series slice");
  }
  TimeSeries out;
  out.times.assign(series.times.begin() + begin, series.times.begin() + end);
  out.values = series.values.middleRows(begin, end - begin);
  if (!series.missing.empty()) {
    out.missing.assign(series.missing.begin() + begin, series.missing.begin() + end);
  }
  return out;
}

namespace {

struct Discretization {
  double gap;
  MatrixXd transition;
  MatrixXd noise;
};

class DiscretizationCache {
 public:
  DiscretizationCache(const MatrixXd& theta, const MatrixXd& q_inf)
      : theta_(theta), q_inf_(q_inf) {}

  const Discretization& get(double gap) {
    for (const auto& d : entries_) {
      if (d.gap == gap) return d;
    }
    MatrixXd c = transition_matrix(theta_, gap);
    MatrixXd q = innovation_covariance_from(q_inf_, c);
    entries_.push_back({gap, std::move(c), std::move(q)});
    return entries_.back();
  }

 private:
  const MatrixXd& theta_;
  const MatrixXd& q_inf_;
  std::vector<Discretization> entries_;
};

constexpr double kMaxCondition = 1e12;

// Shared recursion. `store` is null when only the likelihood is wanted.
double run_filter(const OussmParams& params, const TimeSeries& series,
                  const FilterOptions& options, FilterResult* store) {
  validate_model(params);
  validate_series(series);
  if (series.dim() != params.p()) {
    throw InvalidInput("series has " + std::to_string(series.dim()) +
                       " columns but the model has p = " +
                       std::to_string(params.p()));
  }
  const Index m = params.m();
  const Index p = params.p();
  const Index n_rows = series.rows();
  const MatrixXd& z = params.z;
  const MatrixXd q_inf = stationary_covariance(params.theta, params.sigma);
  DiscretizationCache cache(params.theta, q_inf);
  const MatrixXd identity = MatrixXd::Identity(m, m);
  const MatrixXd zero_m = MatrixXd::Zero(m, m);

  if (store) {
    store->innovations = MatrixXd::Constant(n_rows, p, std::numeric_limits<double>::quiet_NaN());
    store->innovation_cov.assign(static_cast<std::size_t>(n_rows), MatrixXd());
    store->gains.assign(static_cast<std::size_t>(n_rows), MatrixXd());
    store->predicted_means = MatrixXd::Zero(n_rows + 1, m);
    store->predicted_cov.assign(static_cast<std::size_t>(n_rows + 1), MatrixXd());
    store->predicted_cov[0] = q_inf;
  }

  VectorXd a = VectorXd::Zero(m);
  MatrixXd P = q_inf;
  VectorXd v(p), a_next(m);
  MatrixXd F(p, p), pzt(m, p), cpzt(m, p), K(m, p), P_next(m, m), c_minus_kz(m, m);
  Eigen::LLT<MatrixXd> llt(p);

  // Steady-state shortcut.
  bool frozen = false;
  double frozen_gap = 0.0;
  double frozen_logdet = 0.0;
  MatrixXd frozen_F, frozen_K;
  Eigen::LLT<MatrixXd> frozen_llt(p);
  double last_full_gap = -1.0;  // gap used on the previous full update

  double sum = 0.0;
  Index observed = 0;
  for (Index n = 0; n < n_rows; ++n) {
    const std::size_t un = static_cast<std::size_t>(n);
    const double gap = n + 1 < n_rows ? series.times[un + 1] - series.times[un] : 0.0;
    const MatrixXd* c = &identity;
    const MatrixXd* q = &zero_m;
    if (gap > 0.0) {
      const Discretization& d = cache.get(gap);
      c = &d.transition;
      q = &d.noise;
    }

    if (series.is_missing(n)) {
      frozen = false;
      last_full_gap = -1.0;
      F.noalias() = z * P * z.transpose();
      F.diagonal() += params.h_diag;
      a_next.noalias() = (*c) * a;
      P_next.noalias() = (*c) * P * c->transpose();
      P_next += *q;
      P = 0.5 * (P_next + P_next.transpose());
      a = a_next;
      if (store) {
        store->innovation_cov[un] = 0.5 * (F + F.transpose());
        store->gains[un] = MatrixXd::Zero(m, p);
        store->predicted_means.row(n + 1) = a.transpose();
        store->predicted_cov[un + 1] = P;
      }
      continue;
    }

    ++observed;
    v = series.values.row(n).transpose() - params.mu;
    v.noalias() -= z * a;

    if (frozen && gap == frozen_gap) {
      sum += frozen_logdet + v.dot(frozen_llt.solve(v));
      a_next.noalias() = (*c) * a;
      a_next.noalias() += frozen_K * v;
      a = a_next;
      if (store) {
        store->innovations.row(n) = v.transpose();
        store->innovation_cov[un] = frozen_F;
        store->gains[un] = frozen_K;
        store->predicted_means.row(n + 1) = a.transpose();
        store->predicted_cov[un + 1] = P;
      }
      continue;
    }
    frozen = false;

    pzt.noalias() = P * z.transpose();
    F.noalias() = z * pzt;
    F.diagonal() += params.h_diag;
    F = 0.5 * (F + F.transpose()).eval();
    llt.compute(F);
    if (llt.info() != Eigen::Success) {
      throw FilterDivergence(static_cast<std::size_t>(n),
                             "innovation covariance is not positive definite");
    }
    const auto diag = llt.matrixLLT().diagonal();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    if (!(dmin > 0.0) || (dmax / dmin) * (dmax / dmin) > kMaxCondition) {
      throw FilterDivergence(static_cast<std::size_t>(n),
                             "innovation covariance is numerically singular");
    }
    const double logdet = 2.0 * diag.array().log().sum();
    const double quad = v.dot(llt.solve(v));
    if (!std::isfinite(logdet) || !std::isfinite(quad)) {
      throw FilterDivergence(static_cast<std::size_t>(n), "non-finite likelihood term");
    }
    sum += logdet + quad;

    cpzt.noalias() = (*c) * pzt;
    K = llt.solve(cpzt.transpose()).transpose();
    a_next.noalias() = (*c) * a;
    a_next.noalias() += K * v;
    c_minus_kz = *c;
    c_minus_kz.noalias() -= K * z;
    P_next.noalias() = (*c) * P * c_minus_kz.transpose();
    P_next += *q;
    P_next = 0.5 * (P_next + P_next.transpose()).eval();

    if (options.steady_state_tol > 0.0 && gap > 0.0 && gap == last_full_gap) {
      const double change = (P_next - P).cwiseAbs().maxCoeff();
      if (change <= options.steady_state_tol * P_next.cwiseAbs().maxCoeff()) {
        frozen = true;
        frozen_gap = gap;
        frozen_logdet = logdet;
        frozen_F = F;
        frozen_K = K;
        frozen_llt = llt;
      }
    }
    last_full_gap = gap;

    if (store) {
      store->innovations.row(n) = v.transpose();
      store->innovation_cov[un] = F;
      store->gains[un] = K;
      store->predicted_means.row(n + 1) = a_next.transpose();
      store->predicted_cov[un + 1] = P_next;
    }
    a = a_next;
    // Under the shortcut P_{n+1} is replaced by P_n, which it matches to tol.
    if (!frozen) P = P_next;
  }

  const double loglik =
      -0.5 * static_cast<double>(observed * p) * std::log(2.0 * std::numbers::pi) -
      0.5 * sum;
  if (!std::isfinite(loglik)) {
    throw FilterDivergence(static_cast<std::size_t>(n_rows - 1), "non-finite log-likelihood");
  }
  if (store) store->loglik = loglik;
  return loglik;
}

}  // namespace

FilterResult filter(const OussmParams& params, const TimeSeries& series,
                    const FilterOptions& options) {
  FilterResult out;
  run_filter(params, series, options, &out);
  return out;
}

double loglikelihood(const OussmParams& params, const TimeSeries& series,
                     const FilterOptions& options) {
  return run_filter(params, series, options, nullptr);
}

std::vector<Prediction> predict_one_step(const OussmParams& params,
                                         const TimeSeries& train,
                                         const TimeSeries& test,
                                         const FilterOptions& options) {
  validate_series(train);
  validate_series(test);
  if (train.dim() != test.dim()) {
    throw InvalidInput("train and test series have different dimensions");
  }
  if (!(test.times.front() > train.times.back())) {
    throw InvalidInput("test times must all follow the training times");
  }
  TimeSeries joined;
  joined.times = train.times;
  joined.times.insert(joined.times.end(), test.times.begin(), test.times.end());
  joined.values.resize(train.rows() + test.rows(), train.dim());
  joined.values << train.values, test.values;
  if (!train.missing.empty() || !test.missing.empty()) {
    joined.missing.assign(joined.times.size(), 0);
    for (Index i = 0; i < train.rows(); ++i) joined.missing[static_cast<std::size_t>(i)] = train.is_missing(i);
    for (Index i = 0; i < test.rows(); ++i) {
      joined.missing[static_cast<std::size_t>(train.rows() + i)] = test.is_missing(i);
    }
  }

  const FilterResult fr = filter(params, joined, options);
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(test.rows()));
  for (Index i = 0; i < test.rows(); ++i) {
    const Index n = train.rows() + i;
    Prediction pred;
    pred.time = joined.times[static_cast<std::size_t>(n)];
    pred.mean = params.mu + params.z * fr.predicted_means.row(n).transpose();
    const VectorXd half = kNormal975Quantile *
                          fr.innovation_cov[static_cast<std::size_t>(n)].diagonal().cwiseSqrt();
    pred.lower95 = pred.mean - half;
    pred.upper95 = pred.mean + half;
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace oussm
