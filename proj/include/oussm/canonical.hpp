#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oussm/ou_core.hpp"

namespace oussm {

/// Result of reducing (Theta, Sigma) to the identifiable representative.
/// `a` maps the original state to the canonical one: a Sigma a^T = I and
/// theta_tilde = a Theta a^-1, with theta_tilde + theta_tilde^T = diag(d),
/// d non-increasing.
struct CanonicalTransform {
  MatrixXd a;
  MatrixXd theta_tilde;
  MatrixXd phi;  // Sigma^-1/2 Theta Sigma^1/2
  VectorXd d;
  // Set when two entries of d agree to 1e-8; the canonical form is then not
  // unique up to sign flips.
  bool repeated_diagonal = false;
};

CanonicalTransform canonicalize(const MatrixXd& theta, const MatrixXd& sigma);

struct SignNormalized {
  MatrixXd z;
  MatrixXd theta;
  VectorXd signs;  // the diag(+-1) that was applied
};

/// Flips latent coordinates so that the first row of z is non-negative,
/// conjugating theta by the same diag(+-1). A zero entry defers to the first
/// nonzero entry further down its column.
SignNormalized sign_normalize(const MatrixXd& z, const MatrixXd& theta);

/// Maps an arbitrary valid parameter set to the equivalent canonical one:
/// canonicalize (Theta, Sigma), carry Z through A^-1, then sign-normalize.
OussmParams to_canonical(const OussmParams& params);

struct SpectralBlock {
  Index offset = 0;
  Index size = 1;      // 1 or 2
  double real = 0.0;   // eigenvalue real part (a)
  double imag = 0.0;   // b >= 0, block [[a, -b], [b, a]]
};

/// Real block-diagonal representation of the model. The new state is
/// transform * x, so theta_block = transform * Theta * inverse,
/// z_transformed = Z * inverse and sigma_transformed = transform * Sigma *
/// transform^T describe the same model.
struct BlockForm {
  MatrixXd transform;
  MatrixXd inverse;
  MatrixXd theta_block;
  std::vector<SpectralBlock> blocks;
  MatrixXd z_transformed;
  MatrixXd sigma_transformed;
};

/// Blocks are ordered by descending real part. Each 1x1 coordinate is scaled
/// to unit diffusion variance; each 2x2 pair is rotated so its diffusion
/// block is diagonal (larger variance first) and scaled to trace 2. Signs
/// follow the first-row-of-Z convention. Throws DegenerateSpectrum when two
/// eigenvalues are closer than 1e-8 (relative).
BlockForm block_diagonalize(const OussmParams& params);

/// Orthogonal-class distance between two canonical 2x2 matrices:
/// inf over orthogonal A, B of ||A Theta A^T - B Theta_hat B^T||_F.
double theta_distance(const MatrixXd& theta, const MatrixXd& theta_hat);

/// ||exp(-Theta_hat) - exp(-Theta)||_F / ||exp(-Theta)||_F. For m == 2 the
/// numerator is minimized over orthogonal conjugations of exp(-Theta_hat),
/// which covers the transpose branch used when the off-diagonal signs of the
/// two estimates disagree. For m != 2 the direct ratio is returned.
double exp_error_ratio(const MatrixXd& theta_true, const MatrixXd& theta_hat);

}  // namespace oussm
