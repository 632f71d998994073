#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical routines.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "oussm/kalman.hpp"
#include "oussm/ou_core.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Plain truncated power series sum_{k<terms} A^k / k!.
inline MatrixXd expm_taylor(const MatrixXd& a, int terms = 20) {
  MatrixXd sum = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// Power series after halving until the norm is below 1/8, then squaring.
inline MatrixXd expm_scaled(const MatrixXd& a) {
  int s = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.125) {
    norm /= 2.0;
    ++s;
  }
  MatrixXd e = expm_taylor(a / std::ldexp(1.0, s), 30);
  for (int i = 0; i < s; ++i) e = e * e;
  return e;
}

/// Solves theta Q + Q theta^T = rhs by assembling the m^2 x m^2 Kronecker
/// system entry by entry (column-major vec) and using full pivoting.
inline MatrixXd lyapunov_kron(const MatrixXd& theta, const MatrixXd& rhs) {
  const Index m = theta.rows();
  const Index n = m * m;
  MatrixXd k = MatrixXd::Zero(n, n);
  // vec(theta Q) = (I kron theta) vec Q ; vec(Q theta^T) = (theta kron I) vec Q
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Index row = j * m + i;  // entry (i, j)
      for (Index l = 0; l < m; ++l) {
        k(row, j * m + l) += theta(i, l);  // theta(i,l) Q(l,j)
        k(row, l * m + i) += theta(j, l);  // Q(i,l) theta(j,l)
      }
    }
  }
  VectorXd b(n);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) b(j * m + i) = rhs(i, j);
  const VectorXd x = k.fullPivLu().solve(b);
  MatrixXd q(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) q(i, j) = x(j * m + i);
  return q;
}

/// Joint Gaussian log-density of all observed rows, with
/// cov(y_t, y_s) = Z exp(-Theta (t - s)) Q_inf Z^T (t >= s) + delta_ts H.
inline double joint_loglik(const oussm::OussmParams& params, const oussm::TimeSeries& series) {
  const Index p = params.p();
  const MatrixXd q_inf = lyapunov_kron(params.theta, params.sigma);
  std::vector<Index> rows;
  for (Index i = 0; i < series.rows(); ++i) {
    if (!series.is_missing(i)) rows.push_back(i);
  }
  const Index n = static_cast<Index>(rows.size());
  MatrixXd cov(n * p, n * p);
  VectorXd dev(n * p);
  for (Index a = 0; a < n; ++a) {
    dev.segment(a * p, p) = series.values.row(rows[a]).transpose() - params.mu;
    for (Index b = 0; b <= a; ++b) {
      const double lag = series.times[rows[a]] - series.times[rows[b]];
      const MatrixXd block =
          params.z * expm_scaled(-params.theta * lag) * q_inf * params.z.transpose();
      cov.block(a * p, b * p, p, p) = block;
      cov.block(b * p, a * p, p, p) = block.transpose();
    }
    cov.block(a * p, a * p, p, p) += params.h_diag.asDiagonal();
  }
  Eigen::LDLT<MatrixXd> ldlt(cov);
  const double logdet = ldlt.vectorD().array().log().sum();
  const double quad = dev.dot(ldlt.solve(dev));
  return -0.5 * (static_cast<double>(n * p) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

inline MatrixXd rotation(double phi) {
  MatrixXd b(2, 2);
  b << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
  return b;
}

inline MatrixXd reflection(double phi) {
  MatrixXd b(2, 2);
  b << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
  return b;
}

/// min over a grid of `n` angles and both branches (rotation, reflection)
/// of ||target - B x B^T||_F.
inline double orbit_grid_min(const MatrixXd& target, const MatrixXd& x, int n = 3600) {
  double best = INFINITY;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    for (const MatrixXd& b : {rotation(phi), reflection(phi)}) {
      best = std::min(best, (target - b * x * b.transpose()).norm());
    }
  }
  return best;
}

/// 8th-order central difference of f along coordinate i.
inline double fd8(const std::function<double(const VectorXd&)>& f, const VectorXd& x, Index i,
                  double h) {
  static constexpr double w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  double acc = 0.0;
  for (int k = 1; k <= 4; ++k) {
    VectorXd xp = x, xm = x;
    xp(i) += k * h;
    xm(i) -= k * h;
    acc += w[k - 1] * (f(xp) - f(xm));
  }
  return acc / h;
}

/// Steady-state innovation variance of the scalar model
/// x+ = c x + w (var q), y = x + e (var h), from the Riccati fixed point
/// P = c^2 P h / (P + h) + q solved in closed form.
inline double scalar_steady_innovation(double c, double q, double h) {
  // P^2 + P (h - c^2 h - q) - q h = 0, positive root.
  const double b = h - c * c * h - q;
  const double p = 0.5 * (-b + std::sqrt(b * b + 4.0 * q * h));
  return p + h;
}

/// Innovation variance of the ARMA(1,1) form y_n - c y_{n-1} = u_n - b u_{n-1}:
/// matching the lag-0 and lag-1 autocovariances of (1 - cL) y, which are
/// q + (1 + c^2) h and -c h, gives sigma^2 = gamma0 / (1 + b^2) with
/// b/(1+b^2) = c h / gamma0 and |b| < 1.
inline double arma11_innovation_variance(double c, double q, double h) {
  const double g0 = q + (1.0 + c * c) * h;
  const double r = c * h / g0;  // b / (1 + b^2)
  const double b = r == 0.0 ? 0.0 : (1.0 - std::sqrt(1.0 - 4.0 * r * r)) / (2.0 * r);
  return g0 / (1.0 + b * b);
}

/// Random matrix with N(0,1) entries.
inline MatrixXd gaussian(std::mt19937_64& gen, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  MatrixXd a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = nd(gen);
  return a;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

/// Random canonical Theta: decreasing positive diagonal, antisymmetric rest.
inline MatrixXd random_canonical_theta(std::mt19937_64& gen, Index m, double lo = 0.05,
                                       double hi = 2.0, double anti = 1.0) {
  std::vector<double> d;
  for (Index i = 0; i < m; ++i) d.push_back(uniform(gen, lo, hi));
  std::sort(d.begin(), d.end(), std::greater<>());
  MatrixXd t = MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    t(i, i) = d[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < m; ++j) {
      t(i, j) = uniform(gen, -anti, anti);
      t(j, i) = -t(i, j);
    }
  }
  return t;
}

/// Random stable Theta (not canonical): canonical core conjugated by a
/// well-conditioned random matrix.
inline MatrixXd random_stable_theta(std::mt19937_64& gen, Index m) {
  const MatrixXd core = random_canonical_theta(gen, m, 0.1, 2.0);
  MatrixXd a = MatrixXd::Identity(m, m) + 0.3 * gaussian(gen, m, m);
  return a * core * a.inverse();
}

inline MatrixXd random_spd(std::mt19937_64& gen, Index m) {
  const MatrixXd g = gaussian(gen, m, m);
  return g * g.transpose() + 0.5 * MatrixXd::Identity(m, m);
}

inline MatrixXd random_orthogonal(std::mt19937_64& gen, Index m) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(gen, m, m));
  return qr.householderQ();
}

/// Random valid model with canonical Theta and unit diffusion.
inline oussm::OussmParams random_params(std::mt19937_64& gen, Index p, Index m) {
  oussm::OussmParams prm;
  prm.theta = random_canonical_theta(gen, m, 0.1, 2.0);
  prm.z = gaussian(gen, p, m);
  prm.mu = gaussian(gen, p, 1);
  prm.h_diag = VectorXd::NullaryExpr(p, [&] { return uniform(gen, 0.05, 1.0); });
  prm.sigma = MatrixXd::Identity(m, m);
  return prm;
}

/// Irregular times with gaps in [0.1, 2].
inline std::vector<double> random_times(std::mt19937_64& gen, Index n) {
  std::vector<double> t{uniform(gen, -1.0, 1.0)};
  for (Index i = 1; i < n; ++i) t.push_back(t.back() + uniform(gen, 0.1, 2.0));
  return t;
}

}  // namespace oracle
