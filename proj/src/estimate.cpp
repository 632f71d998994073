#include "oussm/estimate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "oussm/canonical.hpp"
#include "oussm/errors.hpp"
#include "oussm/optimizer.hpp"
#include "oussm/parallel.hpp"
#include "oussm/random.hpp"

namespace oussm {

Index parameter_count(Index p, Index m) { return p * (m + 2) + m * (m + 1) / 2; }

VectorXd pack(const OussmParams& params) {
  validate_canonical(params, /*check_z_signs=*/false);
  const Index m = params.m();
  const Index p = params.p();
  VectorXd out(parameter_count(p, m));
  Index k = 0;
  for (Index i = 0; i < m; ++i) {
    const double next = i + 1 < m ? params.theta(i + 1, i + 1) : 0.0;
    const double alpha = params.theta(i, i) - next;
    if (!(alpha > 0.0)) {
      throw InvalidInput("theta diagonal must be strictly decreasing to be packed");
    }
    out[k++] = std::log(alpha);
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) out[k++] = params.theta(i, j);
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < m; ++j) out[k++] = params.z(i, j);
  }
  for (Index i = 0; i < p; ++i) out[k++] = params.mu[i];
  for (Index i = 0; i < p; ++i) out[k++] = std::log(params.h_diag[i]);
  return out;
}

OussmParams unpack(const VectorXd& packed, Index p, Index m) {
  if (p < 1 || m < 1) throw InvalidInput("p and m must be positive");
  if (packed.size() != parameter_count(p, m)) {
    std::ostringstream os;
    os << "packed vector has length " << packed.size() << ", expected "
       << parameter_count(p, m) << " for p = " << p << ", m = " << m;
    throw InvalidInput(os.str());
  }
  if (!packed.allFinite()) throw InvalidInput("packed vector has non-finite entries");
  MatrixXd theta = MatrixXd::Zero(m, m);
  Index k = 0;
  VectorXd alpha(m);
  for (Index i = 0; i < m; ++i) alpha[i] = std::exp(packed[k++]);
  double acc = 0.0;
  for (Index i = m; i-- > 0;) {
    acc += alpha[i];
    theta(i, i) = acc;
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      theta(i, j) = packed[k];
      theta(j, i) = -packed[k];
      ++k;
    }
  }
  MatrixXd z(p, m);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < m; ++j) z(i, j) = packed[k++];
  }
  VectorXd mu = packed.segment(k, p);
  k += p;
  VectorXd h = packed.segment(k, p).array().exp();
  return OussmParams::with_unit_diffusion(std::move(theta), std::move(z),
                                          std::move(mu), std::move(h));
}

VectorXd numerical_gradient(const ScalarFunction& f, const VectorXd& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  VectorXd grad(x.size());
  VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h_raw = base * std::max(1.0, std::abs(x[i]));
    const volatile double up_x = x[i] + h_raw;
    const double h = up_x - x[i];
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("objective not finite when probing coordinate " +
                           std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double negative_loglik(const VectorXd& packed, const TimeSeries& series, Index m,
                       const FilterOptions& options) {
  try {
    const OussmParams params = unpack(packed, series.dim(), m);
    return -loglikelihood(params, series, options);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

VectorXd initial_guess(const TimeSeries& series, Index m) {
  const Index p = series.dim();
  const Index n_obs = series.observed_rows();
  MatrixXd obs(n_obs, p);
  for (Index i = 0, r = 0; i < series.rows(); ++i) {
    if (!series.is_missing(i)) obs.row(r++) = series.values.row(i);
  }
  const VectorXd mean = obs.colwise().mean();
  const MatrixXd centered = obs.rowwise() - mean.transpose();
  const MatrixXd cov = centered.transpose() * centered /
                       static_cast<double>(std::max<Index>(1, n_obs - 1));
  const VectorXd var = cov.diagonal().cwiseMax(1e-8);

  VectorXd rates(m);
  if (m == 1) {
    rates[0] = std::sqrt(0.05);
  } else {
    for (Index j = 0; j < m; ++j) {
      const double frac = static_cast<double>(j) / static_cast<double>(m - 1);
      rates[j] = std::exp((1.0 - frac) * std::log(1.0) + frac * std::log(0.05));
    }
  }

  // Loadings chosen so that Z diag(1/(2 theta)) Z^T reproduces half of the
  // leading principal components of the sample covariance.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  MatrixXd z = MatrixXd::Zero(p, m);
  const double mean_var = var.mean();
  for (Index j = 0; j < m; ++j) {
    if (j < p) {
      const Index src = p - 1 - j;
      const double lambda = std::max(es.eigenvalues()[src], 1e-8 * mean_var);
      z.col(j) = es.eigenvectors().col(src) * std::sqrt(lambda * rates[j]);
    } else {
      z(j % p, j) = 0.1 * std::sqrt(mean_var * 2.0 * rates[j]);
    }
  }

  MatrixXd theta = MatrixXd::Zero(m, m);
  theta.diagonal() = rates;
  OussmParams init = OussmParams::with_unit_diffusion(theta, z, mean, 0.5 * var);
  return pack(init);
}

namespace {

struct StartOutcome {
  StartDiagnostics diag;
  VectorXd x;
};

StartOutcome run_start(const VectorXd& x0, const TimeSeries& series, Index m,
                       const FitOptions& options) {
  const ScalarFunction value = [&](const VectorXd& x) {
    return negative_loglik(x, series, m, options.filter);
  };
  const Objective objective = [&](const VectorXd& x, VectorXd* grad) {
    const double fx = value(x);
    if (grad && std::isfinite(fx)) {
      try {
        *grad = numerical_gradient(value, x);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return fx;
  };
  LbfgsOptions lo;
  lo.max_evals = options.max_evals;
  lo.f_rel_tol = options.tol;
  const LbfgsResult r = minimize_lbfgs(objective, x0, lo);
  StartOutcome out;
  out.x = r.x;
  out.diag.n_evals = r.n_evals;
  out.diag.iterations = r.iterations;
  out.diag.converged = r.converged;
  out.diag.message = r.reason;
  out.diag.loglik = std::isfinite(r.f) ? -r.f : -std::numeric_limits<double>::infinity();
  out.diag.grad_inf_norm = r.grad.size() ? r.grad.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

}  // namespace

FitResult fit(const TimeSeries& series, Index m, const FitOptions& options) {
  validate_series(series);
  if (m < 1) throw InvalidInput("state dimension m must be at least 1");
  if (series.observed_rows() < m + 2) {
    throw InvalidInput("series needs at least m + 2 observed rows");
  }
  if (options.n_starts < 1 && options.extra_starts.empty()) {
    throw InvalidInput("n_starts must be at least 1");
  }
  const Index p = series.dim();
  const Index k = parameter_count(p, m);
  for (const auto& s : options.extra_starts) {
    if (s.size() != k) throw InvalidInput("warm start has the wrong length");
  }

  std::vector<VectorXd> starts = options.extra_starts;
  const VectorXd base = initial_guess(series, m);
  for (int r = 0; r < options.n_starts; ++r) {
    if (r == 0) {
      starts.push_back(base);
    } else {
      Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(r));
      starts.push_back(base + options.restart_scale * rng.normal_vector(k));
    }
  }

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), options.threads, [&](std::size_t i) {
    outcomes[i] = run_start(starts[i], series, m, options);
  });

  FitResult res;
  int best = -1;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    res.starts.push_back(outcomes[i].diag);
    res.n_evals += outcomes[i].diag.n_evals;
    if (!std::isfinite(outcomes[i].diag.loglik)) continue;
    if (best < 0 || outcomes[i].diag.loglik > outcomes[static_cast<std::size_t>(best)].diag.loglik) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    std::vector<std::string> msgs;
    for (const auto& o : outcomes) msgs.push_back(o.diag.message);
    throw EstimationFailed("every start failed to produce a finite likelihood", msgs);
  }

  const StartOutcome& win = outcomes[static_cast<std::size_t>(best)];
  const OussmParams raw = unpack(win.x, p, m);
  SignNormalized sn = sign_normalize(raw.z, raw.theta);
  res.params = OussmParams::with_unit_diffusion(std::move(sn.theta), std::move(sn.z),
                                                raw.mu, raw.h_diag);
  res.loglik = loglikelihood(res.params, series, options.filter);
  res.converged = win.diag.converged;
  res.grad_inf_norm = win.diag.grad_inf_norm;
  res.start_index = best;
  try {
    res.packed_optimum = pack(res.params);
  } catch (const InvalidInput&) {
    // Tied diagonal entries (alpha underflow) cannot be re-packed.
    res.packed_optimum = win.x;
  }
  return res;
}

}  // namespace oussm
