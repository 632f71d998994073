#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "oussm/canonical.hpp"
#include "oussm/errors.hpp"
#include "oussm/kalman.hpp"
#include "oussm/simulate.hpp"

using namespace oussm;

namespace {

MatrixXd m2(double a, double b, double c, double d) {
  MatrixXd x(2, 2);
  x << a, b, c, d;
  return x;
}

// min over diag(+-1) D of max |x - D y D|.
double sign_gauge_error(const MatrixXd& x, const MatrixXd& y) {
  const Index m = x.rows();
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    VectorXd d(m);
    for (Index i = 0; i < m; ++i) d(i) = (mask >> i) & 1u ? -1.0 : 1.0;
    best = std::min(best, (x - d.asDiagonal() * y * d.asDiagonal()).cwiseAbs().maxCoeff());
  }
  return best;
}

std::vector<std::complex<double>> sorted_eigs(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  std::vector<std::complex<double>> v(es.eigenvalues().data(),
                                      es.eigenvalues().data() + a.rows());
  std::sort(v.begin(), v.end(), [](auto l, auto r) {
    return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
  });
  return v;
}

}  // namespace

TEST(Canonicalize, FixedPointOfCanonicalInput) {
  const MatrixXd theta = m2(0.8, 0.3, -0.3, 0.1);
  const CanonicalTransform ct = canonicalize(theta, MatrixXd::Identity(2, 2));
  EXPECT_LT((ct.a.cwiseAbs() - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(sign_gauge_error(ct.theta_tilde, theta), 1e-12);
  EXPECT_FALSE(ct.repeated_diagonal);
}

TEST(Canonicalize, InvariantsOnRandomInputs) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 2 + trial % 3;
    const MatrixXd theta = oracle::gaussian(gen, m, m) + 2.0 * MatrixXd::Identity(m, m);
    const MatrixXd sigma = oracle::random_spd(gen, m);
    const CanonicalTransform ct = canonicalize(theta, sigma);
    EXPECT_LT((ct.a * sigma * ct.a.transpose() - MatrixXd::Identity(m, m)).norm(), 1e-10);
    EXPECT_LT((ct.theta_tilde - ct.a * theta * ct.a.inverse()).norm(),
              1e-10 * std::max(1.0, theta.norm()));
    const MatrixXd sym = ct.theta_tilde + ct.theta_tilde.transpose();
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (i != j) EXPECT_EQ(sym(i, j), 0.0);
      }
      if (i + 1 < m) EXPECT_GE(sym(i, i), sym(i + 1, i + 1));
      EXPECT_NEAR(sym(i, i), ct.d(i), 1e-14);
    }
    const auto e1 = sorted_eigs(theta), e2 = sorted_eigs(ct.theta_tilde);
    for (Index i = 0; i < m; ++i) EXPECT_LT(std::abs(e1[i] - e2[i]), 1e-8);
  }
}

TEST(Canonicalize, GaugeUniqueness) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 2 + trial % 3;
    const MatrixXd core = oracle::random_canonical_theta(gen, m, 0.1, 2.0);
    // Arbitrary equivalent representation: A core A^-1 with Sigma = A A^T.
    const MatrixXd a = MatrixXd::Identity(m, m) + 0.4 * oracle::gaussian(gen, m, m);
    const CanonicalTransform ct =
        canonicalize(a * core * a.inverse(), a * a.transpose());
    EXPECT_LT(sign_gauge_error(ct.theta_tilde, core), 1e-8);
  }
}

TEST(Canonicalize, RejectsBadSigmaAndFlagsRepeats) {
  EXPECT_THROW(canonicalize(MatrixXd::Identity(2, 2), m2(1, 0, 0, 0)), InvalidInput);
  EXPECT_THROW(canonicalize(MatrixXd::Identity(2, 2), m2(1, 2, 2, 1)), InvalidInput);
  EXPECT_THROW(canonicalize(MatrixXd::Identity(2, 2), m2(1, 0.5, 0, 1)), InvalidInput);
  EXPECT_THROW(canonicalize(MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3)), InvalidInput);
  EXPECT_TRUE(canonicalize(m2(1, 0.3, -0.3, 1), MatrixXd::Identity(2, 2)).repeated_diagonal);
}

TEST(SignNormalize, Examples) {
  const MatrixXd theta = m2(2, 0.5, -0.5, 1);
  const SignNormalized same = sign_normalize(m2(1, 2, 3, 4), theta);
  EXPECT_EQ(same.z, m2(1, 2, 3, 4));
  EXPECT_EQ(same.theta, theta);

  const SignNormalized flipped = sign_normalize(m2(-1, 2, 3, 4), theta);
  EXPECT_EQ(flipped.z, m2(1, 2, -3, 4));
  EXPECT_EQ(flipped.theta, m2(2, -0.5, 0.5, 1));
  EXPECT_EQ(flipped.signs, Eigen::Vector2d(-1, 1));
}

TEST(SignNormalize, ZeroEntryDefersToNextRow) {
  const SignNormalized s = sign_normalize(m2(0, 1, -2, 1), m2(2, 0.5, -0.5, 1));
  EXPECT_EQ(s.z, m2(0, 1, 2, 1));
}

TEST(SignNormalize, PreservesLikelihood) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    OussmParams p = oracle::random_params(gen, 3, 2);
    const TimeSeries s = make_series(oracle::random_times(gen, 8), oracle::gaussian(gen, 8, 3));
    const SignNormalized sn = sign_normalize(p.z, p.theta);
    OussmParams q = p;
    q.z = sn.z;
    q.theta = sn.theta;
    EXPECT_TRUE((q.z.row(0).array() >= 0.0).all());
    EXPECT_EQ(q.theta.diagonal(), p.theta.diagonal());
    EXPECT_NEAR(loglikelihood(p, s), loglikelihood(q, s), 1e-9);
  }
}

TEST(ToCanonical, EquivalentModel) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 10; ++trial) {
    OussmParams p = oracle::random_params(gen, 3, 3);
    const MatrixXd a = MatrixXd::Identity(3, 3) + 0.4 * oracle::gaussian(gen, 3, 3);
    OussmParams q = p;
    q.theta = a * p.theta * a.inverse();
    q.z = p.z * a.inverse();
    q.sigma = a * a.transpose();
    const OussmParams c = to_canonical(q);
    EXPECT_NO_THROW(validate_canonical(c, true, 1e-9));
    const TimeSeries s = make_series(oracle::random_times(gen, 6), oracle::gaussian(gen, 6, 3));
    EXPECT_NEAR(loglikelihood(c, s), loglikelihood(p, s), 1e-8);
  }
}

TEST(BlockDiagonalize, DiagonalTheta) {
  const OussmParams p = OussmParams::with_unit_diffusion(
      m2(1.0495, 0, 0, 0.0517), m2(1.0060, 0.1381, 0.3248, 0.3095), VectorXd::Zero(2),
      VectorXd::Ones(2));
  const BlockForm bf = block_diagonalize(p);
  ASSERT_EQ(bf.blocks.size(), 2u);
  EXPECT_EQ(bf.blocks[0].size, 1);
  EXPECT_EQ(bf.blocks[1].size, 1);
  EXPECT_NEAR(bf.blocks[0].real, 1.0495, 1e-12);
  EXPECT_NEAR(bf.blocks[1].real, 0.0517, 1e-12);
  EXPECT_LT((bf.transform - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BlockDiagonalize, ComplexPair) {
  const OussmParams p = OussmParams::with_unit_diffusion(
      m2(0.9883, 0.1981, -0.1981, 0.6960), m2(0.3588, 0.6064, -0.1747, 0.6417),
      VectorXd::Zero(2), VectorXd::Ones(2));
  const BlockForm bf = block_diagonalize(p);
  ASSERT_EQ(bf.blocks.size(), 1u);
  EXPECT_EQ(bf.blocks[0].size, 2);
  EXPECT_GT(bf.blocks[0].imag, 0.0);
  const MatrixXd& b = bf.theta_block;
  EXPECT_NEAR(b(0, 0), b(1, 1), 1e-12);
  EXPECT_NEAR(b(0, 1), -b(1, 0), 1e-12);
  EXPECT_NEAR(b(0, 0), 0.5 * (0.9883 + 0.6960), 1e-12);
  EXPECT_NEAR(b(1, 0), bf.blocks[0].imag, 1e-12);
  // Only a joint flip keeps b > 0, so the block's first column carries the sign.
  EXPECT_GE(bf.z_transformed(0, 0), 0.0);
}

TEST(BlockDiagonalize, ReconstructionAndEquivalence) {
  std::mt19937_64 gen(14);
  int complex_seen = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const OussmParams p = oracle::random_params(gen, 3, 4);
    const BlockForm bf = block_diagonalize(p);
    EXPECT_LT((bf.inverse * bf.theta_block * bf.transform - p.theta).norm(),
              1e-8 * std::max(1.0, p.theta.norm()));
    EXPECT_LT((bf.transform * bf.inverse - MatrixXd::Identity(4, 4)).norm(), 1e-10);
    // Block structure: zero outside blocks, standardized 2x2 blocks.
    MatrixXd mask = MatrixXd::Zero(4, 4);
    double prev = INFINITY;
    for (const auto& b : bf.blocks) {
      mask.block(b.offset, b.offset, b.size, b.size).setOnes();
      EXPECT_LE(b.real, prev + 1e-12);
      prev = b.real;
      if (b.size == 2) {
        ++complex_seen;
        const auto blk = bf.theta_block.block(b.offset, b.offset, 2, 2);
        EXPECT_NEAR(blk(0, 0), blk(1, 1), 1e-10);
        EXPECT_NEAR(blk(0, 1), -blk(1, 0), 1e-10);
        EXPECT_GT(blk(1, 0), 0.0);
      }
    }
    EXPECT_LT(((1.0 - mask.array()) * bf.theta_block.array()).abs().maxCoeff(), 1e-10);
    OussmParams q = p;
    q.theta = bf.theta_block;
    q.z = bf.z_transformed;
    q.sigma = bf.sigma_transformed;
    const TimeSeries s = make_series(oracle::random_times(gen, 6), oracle::gaussian(gen, 6, 3));
    EXPECT_NEAR(loglikelihood(q, s), loglikelihood(p, s), 1e-8);
  }
  EXPECT_GT(complex_seen, 0);
}

TEST(BlockDiagonalize, DegenerateSpectrum) {
  const OussmParams p = OussmParams::with_unit_diffusion(
      MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), VectorXd::Zero(2), VectorXd::Ones(2));
  EXPECT_THROW(block_diagonalize(p), DegenerateSpectrum);
}

TEST(ThetaDistance, Examples) {
  const MatrixXd theta = m2(0.8, 0.3, -0.3, 0.1);
  EXPECT_EQ(theta_distance(theta, theta), 0.0);
  EXPECT_NEAR(theta_distance(theta, m2(0.8, -0.3, 0.3, 0.1)), 0.0, 1e-15);
  EXPECT_THROW(theta_distance(theta, m2(0.8, 0.3, 0.3, 0.1)), InvalidInput);
  EXPECT_THROW(theta_distance(MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)), InvalidInput);
}

TEST(ThetaDistance, MatchesGridInfimum) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd a = oracle::random_canonical_theta(gen, 2);
    const MatrixXd b = oracle::random_canonical_theta(gen, 2);
    const double d = theta_distance(a, b);
    const double grid = oracle::orbit_grid_min(a, b);
    EXPECT_LE(d, grid + 1e-12);
    EXPECT_LE(grid - d, 1e-3 * grid);
  }
}

TEST(ThetaDistance, Pseudometric) {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd a = oracle::random_canonical_theta(gen, 2);
    const MatrixXd b = oracle::random_canonical_theta(gen, 2);
    const MatrixXd c = oracle::random_canonical_theta(gen, 2);
    EXPECT_NEAR(theta_distance(a, b), theta_distance(b, a), 1e-14);
    EXPECT_LE(theta_distance(a, c), theta_distance(a, b) + theta_distance(b, c) + 1e-12);
    const MatrixXd flip = Eigen::Vector2d(1, -1).asDiagonal() * a * Eigen::Vector2d(1, -1).asDiagonal();
    EXPECT_NEAR(theta_distance(a, flip), 0.0, 1e-14);
  }
}

TEST(ExpErrorRatio, Examples) {
  const MatrixXd theta = m2(0.8, 0.3, -0.3, 0.1);
  EXPECT_EQ(exp_error_ratio(theta, theta), 0.0);
  EXPECT_NEAR(exp_error_ratio(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 0.6)),
              std::abs(std::exp(-0.1) - 1.0), 1e-14);
  EXPECT_NEAR(std::abs(std::exp(-0.1) - 1.0), 0.09516, 1e-5);
  EXPECT_THROW(exp_error_ratio(theta, MatrixXd::Identity(3, 3)), InvalidInput);
}

TEST(ExpErrorRatio, OppositeSignsMatchGridInfimum) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd a = oracle::random_canonical_theta(gen, 2);
    MatrixXd b = oracle::random_canonical_theta(gen, 2);
    if (a(0, 1) * b(0, 1) > 0) b.transposeInPlace();
    const MatrixXd ea = oracle::expm_scaled(-a);
    const MatrixXd eb = oracle::expm_scaled(-b);
    const double grid = oracle::orbit_grid_min(ea, eb) / ea.norm();
    const double r = exp_error_ratio(a, b);
    EXPECT_LE(r, grid + 1e-12);
    EXPECT_LE(grid - r, 1e-3 * grid);
    // The transpose branch.
    EXPECT_LE(r, (oracle::expm_scaled(-MatrixXd(b.transpose())) - ea).norm() / ea.norm() + 1e-12);
  }
}

TEST(ExpErrorRatio, SignConjugationInvariance) {
  std::mt19937_64 gen(18);
  const Eigen::Vector2d d(1, -1);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd a = oracle::random_canonical_theta(gen, 2);
    const MatrixXd b = oracle::random_canonical_theta(gen, 2);
    const MatrixXd da = d.asDiagonal() * a * d.asDiagonal();
    const MatrixXd db = d.asDiagonal() * b * d.asDiagonal();
    EXPECT_NEAR(exp_error_ratio(a, b), exp_error_ratio(da, db), 1e-14);
  }
}

TEST(ExpErrorRatio, HigherDimensionIsDirect) {
  std::mt19937_64 gen(19);
  const MatrixXd a = oracle::random_canonical_theta(gen, 3);
  const MatrixXd b = oracle::random_canonical_theta(gen, 3);
  const MatrixXd ea = oracle::expm_scaled(-a);
  EXPECT_NEAR(exp_error_ratio(a, b), (oracle::expm_scaled(-b) - ea).norm() / ea.norm(), 1e-12);
}
