#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace oussm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Parameters of the factor OU state-space model
///
///   y(t_n)     = mu + Z x(t_n) + eps,        eps ~ N(0, diag(h))
///   x(t_{n+1}) = exp(-Theta dt) x(t_n) + eta, eta ~ N(0, Q(dt))
///
/// In the identifiable form Theta is antisymmetric plus a positive,
/// non-increasing diagonal, Sigma is the identity and the first row of Z is
/// non-negative. `sigma` is carried explicitly so that equivalent
/// non-canonical representations (A Theta A^-1, Z A^-1, A Sigma A^T) can be
/// evaluated as well.
struct OussmParams {
  MatrixXd theta;   // m x m mean reversion
  MatrixXd z;       // p x m loadings
  VectorXd mu;      // p
  VectorXd h_diag;  // p measurement-error variances
  MatrixXd sigma;   // m x m diffusion covariance

  Index m() const { return theta.rows(); }
  Index p() const { return z.rows(); }

  /// Builds a parameter set with Sigma = I.
  static OussmParams with_unit_diffusion(MatrixXd theta, MatrixXd z,
                                         VectorXd mu, VectorXd h_diag);
};

/// Shape and finiteness checks shared by every entry point. Requires a
/// stable Theta, SPD Sigma and h >= 0. Throws InvalidInput.
void validate_model(const OussmParams& params);

/// Checks the identifiability constraints: Theta + Theta^T diagonal with
/// positive non-increasing entries, Sigma = I, h > 0. The Z first-row sign
/// constraint is checked only when `check_z_signs` is set.
void validate_canonical(const OussmParams& params, bool check_z_signs = true,
                        double tol = 1e-10);

bool is_canonical_theta(const MatrixXd& theta, double tol = 1e-10);

/// exp(-Theta dt).
MatrixXd transition_matrix(const MatrixXd& theta, double dt);

/// Solves Theta X + X Theta^T = rhs through the vectorized system
/// (I (x) Theta + Theta (x) I) vec(X) = vec(rhs).
MatrixXd solve_lyapunov(const MatrixXd& theta, const MatrixXd& rhs);

/// Stationary covariance Q_inf with Theta Q + Q Theta^T = Sigma.
MatrixXd stationary_covariance(const MatrixXd& theta, const MatrixXd& sigma);

/// Q(dt) = Q_inf - C Q_inf C^T with C = exp(-Theta dt), symmetrized and with
/// roundoff-level negative eigenvalues clamped to zero.
MatrixXd innovation_covariance(const MatrixXd& theta, const MatrixXd& sigma,
                               double dt);
MatrixXd innovation_covariance_from(const MatrixXd& q_inf,
                                    const MatrixXd& transition);

/// Symmetrizes and clamps eigenvalues in (-1e-10 * scale, 0) to zero.
/// Anything more negative raises NumericalError.
MatrixXd repair_psd(const MatrixXd& q);

enum class EigenKind { kAllReal, kHasComplexPairs };

struct SpectralSummary {
  std::vector<std::complex<double>> eigenvalues;  // descending modulus
  double max_modulus = 0.0;
  std::complex<double> sq_diff{0.0, 0.0};  // (l1 - l2)^2, m == 2 only
  EigenKind kind = EigenKind::kAllReal;
};

SpectralSummary spectral_summary(const MatrixXd& theta);

const char* to_string(EigenKind kind);

}  // namespace oussm
