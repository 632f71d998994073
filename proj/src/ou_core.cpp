#include "oussm/ou_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "oussm/errors.hpp"

namespace oussm {

namespace {

void require_square_finite(const MatrixXd& a, const char* name) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << name << " must be a non-empty square matrix, got " << a.rows()
       << "x" << a.cols();
    throw InvalidInput(os.str());
  }
  if (!a.allFinite()) throw InvalidInput(std::string(name) + " has non-finite entries");
}

void require_spd(const MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sigma + sigma.transpose()),
                                             Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) {
    throw InvalidInput("sigma is not symmetric positive definite");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + hi)) {
    throw InvalidInput("sigma is not symmetric");
  }
}

void require_stable(const MatrixXd& theta) {
  Eigen::EigenSolver<MatrixXd> es(theta, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation for theta failed");
  }
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (!(es.eigenvalues()[i].real() > 0.0)) {
      std::ostringstream os;
      os << "theta has eigenvalue " << es.eigenvalues()[i]
         << " with nonpositive real part; no stationary distribution";
      throw NoStationaryState(os.str());
    }
  }
}

}  // namespace

OussmParams OussmParams::with_unit_diffusion(MatrixXd theta, MatrixXd z,
                                             VectorXd mu, VectorXd h_diag) {
  OussmParams p;
  const Index m = theta.rows();
  p.theta = std::move(theta);
  p.z = std::move(z);
  p.mu = std::move(mu);
  p.h_diag = std::move(h_diag);
  p.sigma = MatrixXd::Identity(m, m);
  return p;
}

void validate_model(const OussmParams& params) {
  require_square_finite(params.theta, "theta");
  require_square_finite(params.sigma, "sigma");
  const Index m = params.m();
  const Index p = params.p();
  if (params.sigma.rows() != m) throw InvalidInput("sigma must be m x m");
  if (p == 0 || params.z.cols() != m) throw InvalidInput("z must be p x m");
  if (params.mu.size() != p) throw InvalidInput("mu must have length p");
  if (params.h_diag.size() != p) throw InvalidInput("h_diag must have length p");
  if (!params.z.allFinite() || !params.mu.allFinite() ||
      !params.h_diag.allFinite()) {
    throw InvalidInput("parameters contain non-finite entries");
  }
  if ((params.h_diag.array() < 0.0).any()) {
    throw InvalidInput("h_diag must be non-negative");
  }
  require_spd(params.sigma);
  require_stable(params.theta);
}

bool is_canonical_theta(const MatrixXd& theta, double tol) {
  if (theta.rows() != theta.cols()) return false;
  const Index m = theta.rows();
  const double scale = 1.0 + theta.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m; ++i) {
    if (!(theta(i, i) > 0.0)) return false;
    if (i + 1 < m && theta(i + 1, i + 1) > theta(i, i) + tol * scale) return false;
    for (Index j = i + 1; j < m; ++j) {
      if (std::abs(theta(i, j) + theta(j, i)) > tol * scale) return false;
    }
  }
  return true;
}

void validate_canonical(const OussmParams& params, bool check_z_signs,
                        double tol) {
  validate_model(params);
  if (!is_canonical_theta(params.theta, tol)) {
    throw InvalidInput(
        "theta is not antisymmetric plus a positive non-increasing diagonal");
  }
  const Index m = params.m();
  if ((params.sigma - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInput("canonical form requires sigma = I");
  }
  if ((params.h_diag.array() <= 0.0).any()) {
    throw InvalidInput("h_diag must be strictly positive");
  }
  if (check_z_signs && (params.z.row(0).array() < 0.0).any()) {
    throw InvalidInput("first row of z must be non-negative");
  }
}

MatrixXd transition_matrix(const MatrixXd& theta, double dt) {
  require_square_finite(theta, "theta");
  if (!std::isfinite(dt) || !(dt > 0.0)) {
    throw InvalidInput("time step must be positive and finite");
  }
  const MatrixXd scaled = -dt * theta;
  MatrixXd out = scaled.exp();
  if (!out.allFinite()) throw NumericalError("matrix exponential overflowed");
  return out;
}

MatrixXd solve_lyapunov(const MatrixXd& theta, const MatrixXd& rhs) {
  const Index m = theta.rows();
  const Index n = m * m;
  MatrixXd op = MatrixXd::Zero(n, n);
  // vec is column-major: entry (i, j) lives at j * m + i.
  for (Index j = 0; j < m; ++j) {
    op.block(j * m, j * m, m, m) += theta;
    for (Index l = 0; l < m; ++l) {
      op.block(j * m, l * m, m, m).diagonal().array() += theta(j, l);
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(op);
  if (!(lu.rcond() > 1e-14)) {
    throw NumericalError("Lyapunov system is numerically singular");
  }
  const VectorXd rhs_vec = Eigen::Map<const VectorXd>(rhs.data(), n);
  const VectorXd sol = lu.solve(rhs_vec);
  return Eigen::Map<const MatrixXd>(sol.data(), m, m);
}

MatrixXd stationary_covariance(const MatrixXd& theta, const MatrixXd& sigma) {
  require_square_finite(theta, "theta");
  require_square_finite(sigma, "sigma");
  if (sigma.rows() != theta.rows()) throw InvalidInput("sigma must match theta");
  require_stable(theta);
  MatrixXd q = solve_lyapunov(theta, sigma);
  q = 0.5 * (q + q.transpose()).eval();
  Eigen::LLT<MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("stationary covariance is not positive definite");
  }
  return q;
}

MatrixXd repair_psd(const MatrixXd& q) {
  MatrixXd sym = 0.5 * (q + q.transpose());
  Eigen::LLT<MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return sym;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  const double lo = es.eigenvalues().minCoeff();
  if (lo >= 0.0) return sym;
  const double tol = 1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -tol) {
    std::ostringstream os;
    os << "covariance has eigenvalue " << lo << " below roundoff tolerance";
    throw NumericalError(os.str());
  }
  const VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  MatrixXd out = es.eigenvectors() * clamped.asDiagonal() *
                 es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

MatrixXd innovation_covariance_from(const MatrixXd& q_inf,
                                    const MatrixXd& transition) {
  return repair_psd(q_inf - transition * q_inf * transition.transpose());
}

MatrixXd innovation_covariance(const MatrixXd& theta, const MatrixXd& sigma,
                               double dt) {
  const MatrixXd q_inf = stationary_covariance(theta, sigma);
  return innovation_covariance_from(q_inf, transition_matrix(theta, dt));
}

SpectralSummary spectral_summary(const MatrixXd& theta) {
  require_square_finite(theta, "theta");
  Eigen::EigenSolver<MatrixXd> es(theta, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation for theta failed");
  }
  SpectralSummary out;
  const auto& ev = es.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(out.eigenvalues.begin(), out.eigenvalues.end(),
                   [](const auto& a, const auto& b) {
                     const double ma = std::abs(a), mb = std::abs(b);
                     if (ma != mb) return ma > mb;
                     return a.imag() > b.imag();
                   });
  out.max_modulus = std::abs(out.eigenvalues.front());
  const double scale = 1.0 + theta.cwiseAbs().maxCoeff();
  out.kind = EigenKind::kAllReal;
  for (const auto& l : out.eigenvalues) {
    if (std::abs(l.imag()) > 1e-14 * scale) out.kind = EigenKind::kHasComplexPairs;
  }
  if (out.eigenvalues.size() == 2) {
    const auto d = out.eigenvalues[0] - out.eigenvalues[1];
    out.sq_diff = d * d;
  }
  return out;
}

const char* to_string(EigenKind kind) {
  return kind == EigenKind::kAllReal ? "all-real" : "has-complex-pairs";
}

}  // namespace oussm
