#include "oussm/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "oussm/errors.hpp"

namespace oussm {

namespace {

// Index of the entry that decides a column's sign.
Index sign_pivot(const Eigen::Ref<const VectorXd>& column) {
  for (Index i = 0; i < column.size(); ++i) {
    if (column[i] != 0.0) return i;
  }
  return 0;
}

void require_canonical_2x2(const MatrixXd& t, const char* name) {
  if (t.rows() != 2 || t.cols() != 2) {
    throw InvalidInput(std::string(name) + " must be 2x2");
  }
  if (!is_canonical_theta(t, 1e-8)) {
    throw InvalidInput(std::string(name) + " is not in canonical form");
  }
}

}  // namespace

CanonicalTransform canonicalize(const MatrixXd& theta, const MatrixXd& sigma) {
  if (theta.rows() != theta.cols() || sigma.rows() != sigma.cols() ||
      theta.rows() != sigma.rows() || theta.rows() == 0) {
    throw InvalidInput("theta and sigma must be square of the same size");
  }
  if (!theta.allFinite() || !sigma.allFinite()) {
    throw InvalidInput("theta or sigma has non-finite entries");
  }
  const Index m = theta.rows();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw InvalidInput("sigma is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> sig(0.5 * (sigma + sigma.transpose()));
  const VectorXd s = sig.eigenvalues();
  if (!(s.maxCoeff() > 0.0) || s.minCoeff() <= 1e-12 * s.maxCoeff()) {
    throw InvalidInput("sigma is not symmetric positive definite");
  }
  const MatrixXd& v = sig.eigenvectors();
  const MatrixXd inv_root = v * s.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  const MatrixXd root = v * s.cwiseSqrt().asDiagonal() * v.transpose();

  CanonicalTransform out;
  out.phi = inv_root * theta * root;

  Eigen::SelfAdjointEigenSolver<MatrixXd> sym(out.phi + out.phi.transpose());
  // Eigen sorts ascending; B takes the eigenvectors as rows, largest first.
  MatrixXd b(m, m);
  for (Index i = 0; i < m; ++i) {
    VectorXd row = sym.eigenvectors().col(m - 1 - i);
    Index big = 0;
    row.cwiseAbs().maxCoeff(&big);
    if (row[big] < 0.0) row = -row;
    b.row(i) = row.transpose();
  }
  out.d = sym.eigenvalues().reverse();

  out.a = b * inv_root;
  const MatrixXd rotated = b * out.phi * b.transpose();
  out.theta_tilde = 0.5 * (rotated - rotated.transpose());
  out.theta_tilde.diagonal() = 0.5 * out.d;

  const double scale = std::max(1.0, out.d.cwiseAbs().maxCoeff());
  for (Index i = 0; i + 1 < m; ++i) {
    if (out.d[i] - out.d[i + 1] < 1e-8 * scale) out.repeated_diagonal = true;
  }
  return out;
}

SignNormalized sign_normalize(const MatrixXd& z, const MatrixXd& theta) {
  if (z.cols() != theta.rows() || theta.rows() != theta.cols()) {
    throw InvalidInput("z and theta dimensions disagree");
  }
  const Index m = theta.rows();
  SignNormalized out{z, theta, VectorXd::Ones(m)};
  for (Index j = 0; j < m; ++j) {
    if (z.rows() > 0 && z(sign_pivot(z.col(j)), j) < 0.0) out.signs[j] = -1.0;
  }
  for (Index j = 0; j < m; ++j) out.z.col(j) *= out.signs[j];
  out.theta = out.signs.asDiagonal() * theta * out.signs.asDiagonal();
  return out;
}

OussmParams to_canonical(const OussmParams& params) {
  validate_model(params);
  const CanonicalTransform ct = canonicalize(params.theta, params.sigma);
  const MatrixXd z_tilde = params.z * ct.a.inverse();
  SignNormalized sn = sign_normalize(z_tilde, ct.theta_tilde);
  return OussmParams::with_unit_diffusion(std::move(sn.theta), std::move(sn.z),
                                          params.mu, params.h_diag);
}

BlockForm block_diagonalize(const OussmParams& params) {
  validate_model(params);
  const Index m = params.m();
  Eigen::EigenSolver<MatrixXd> es(params.theta, true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of theta failed");
  }
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if (std::abs(lambda[i] - lambda[j]) <= 1e-8 * scale) {
        std::ostringstream os;
        os << "theta has near-repeated eigenvalues " << lambda[i] << " and "
           << lambda[j];
        throw DegenerateSpectrum(os.str());
      }
    }
  }

  // One representative per block: real eigenvalues and the positive-imaginary
  // member of each conjugate pair.
  const double imag_tol = 1e-14 * scale;
  std::vector<Index> reps;
  for (Index i = 0; i < m; ++i) {
    if (lambda[i].imag() >= -imag_tol) {
      if (std::abs(lambda[i].imag()) <= imag_tol || lambda[i].imag() > 0.0) {
        reps.push_back(i);
      }
    }
  }
  std::stable_sort(reps.begin(), reps.end(), [&](Index x, Index y) {
    if (lambda[x].real() != lambda[y].real()) {
      return lambda[x].real() > lambda[y].real();
    }
    return lambda[x].imag() < lambda[y].imag();
  });

  BlockForm out;
  MatrixXd basis(m, m);
  Index col = 0;
  for (Index r : reps) {
    const Eigen::VectorXcd vec = es.eigenvectors().col(r);
    SpectralBlock blk;
    blk.offset = col;
    blk.real = lambda[r].real();
    if (std::abs(lambda[r].imag()) <= imag_tol) {
      blk.size = 1;
      basis.col(col++) = vec.real();
    } else {
      blk.size = 2;
      blk.imag = lambda[r].imag();
      basis.col(col++) = vec.imag();
      basis.col(col++) = vec.real();
    }
    out.blocks.push_back(blk);
  }
  if (col != m) throw NumericalError("could not pair complex eigenvalues");

  Eigen::FullPivLU<MatrixXd> lu(basis);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    throw DegenerateSpectrum("eigenvector basis of theta is ill-conditioned");
  }
  MatrixXd t = lu.inverse();

  // Fix the remaining freedom inside each block using the diffusion covariance
  // and the first row of Z.
  for (const auto& blk : out.blocks) {
    const Index o = blk.offset;
    if (blk.size == 1) {
      const double var = (t.row(o) * params.sigma * t.row(o).transpose())(0, 0);
      t.row(o) /= std::sqrt(var);
    } else {
      const MatrixXd rows = t.middleRows(o, 2);
      const MatrixXd s_blk = rows * params.sigma * rows.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> e2(s_blk);
      Eigen::Matrix2d g;
      g.row(0) = e2.eigenvectors().col(1).transpose();
      g.row(1) = e2.eigenvectors().col(0).transpose();
      if (g.determinant() < 0.0) g.row(1) *= -1.0;
      const double trace = e2.eigenvalues().sum();
      t.middleRows(o, 2) = std::sqrt(2.0 / trace) * g * rows;
    }
  }

  MatrixXd inv = t.inverse();
  for (const auto& blk : out.blocks) {
    const Index o = blk.offset;
    const VectorXd zc = params.z * inv.col(o);
    if (zc[sign_pivot(zc)] < 0.0) {
      t.middleRows(o, blk.size) *= -1.0;
      inv.middleCols(o, blk.size) *= -1.0;
    }
  }

  out.theta_block = MatrixXd::Zero(m, m);
  for (const auto& blk : out.blocks) {
    const Index o = blk.offset;
    out.theta_block(o, o) = blk.real;
    if (blk.size == 2) {
      out.theta_block(o + 1, o + 1) = blk.real;
      out.theta_block(o, o + 1) = -blk.imag;
      out.theta_block(o + 1, o) = blk.imag;
    }
  }
  out.z_transformed = params.z * inv;
  out.sigma_transformed = t * params.sigma * t.transpose();
  out.sigma_transformed = 0.5 * (out.sigma_transformed + out.sigma_transformed.transpose()).eval();
  out.transform = std::move(t);
  out.inverse = std::move(inv);
  return out;
}

double theta_distance(const MatrixXd& theta, const MatrixXd& theta_hat) {
  require_canonical_2x2(theta, "theta");
  require_canonical_2x2(theta_hat, "theta_hat");
  // Stationary points of the orthogonal orbit: identity, transpose, and the
  // two with the diagonal swapped.
  const double d11 = theta(0, 0), d22 = theta(1, 1), s = theta(0, 1);
  const double e11 = theta_hat(0, 0), e22 = theta_hat(1, 1), t = theta_hat(0, 1);
  const double same = std::pow(d11 - e11, 2) + std::pow(d22 - e22, 2);
  const double swapped = std::pow(d11 - e22, 2) + std::pow(d22 - e11, 2);
  const double anti = 2.0 * std::min(std::pow(s - t, 2), std::pow(s + t, 2));
  return std::sqrt(std::min(same, swapped) + anti);
}

double exp_error_ratio(const MatrixXd& theta_true, const MatrixXd& theta_hat) {
  if (theta_true.rows() != theta_hat.rows() ||
      theta_true.cols() != theta_hat.cols() ||
      theta_true.rows() != theta_true.cols()) {
    throw InvalidInput("exp_error_ratio: dimension mismatch");
  }
  if (!is_canonical_theta(theta_true, 1e-8) || !is_canonical_theta(theta_hat, 1e-8)) {
    throw InvalidInput("exp_error_ratio: inputs must be in canonical form");
  }
  const MatrixXd c = (-theta_true).exp();
  const MatrixXd c_hat = (-theta_hat).exp();
  const double denom = c.norm();
  if (theta_true.rows() != 2) return (c_hat - c).norm() / denom;

  // exp(-X) = alpha X + beta I for 2x2 X, so both exponentials are again
  // diagonal plus antisymmetric and the same four-candidate reduction as for
  // theta_distance applies.
  MatrixXd swapped = c_hat;
  std::swap(swapped(0, 0), swapped(1, 1));
  const double best = std::min({(c_hat - c).norm(),
                                (MatrixXd(c_hat.transpose()) - c).norm(),
                                (swapped - c).norm(),
                                (MatrixXd(swapped.transpose()) - c).norm()});
  return best / denom;
}

}  // namespace oussm
