#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "oussm/errors.hpp"
#include "oussm/modelsel.hpp"
#include "oussm/simulate.hpp"

using namespace oussm;

TEST(InformationCriteria, Examples) {
  const InformationCriteria ic = information_criteria(0.0, 2, 2, 1);
  EXPECT_EQ(ic.k, 11);
  EXPECT_DOUBLE_EQ(ic.aic, 22.0);
  EXPECT_DOUBLE_EQ(ic.bic, 0.0);  // log 1 = 0
  // With log n = 1 the BIC equals k; n is integral so check the formula.
  const InformationCriteria ic3 = information_criteria(0.0, 2, 2, 3);
  EXPECT_DOUBLE_EQ(ic3.bic / std::log(3.0), 11.0);
  EXPECT_EQ(information_criteria(0.0, 4, 4, 10).k, 34);
  const InformationCriteria neg = information_criteria(-100.5, 1, 3, 50);
  EXPECT_EQ(neg.k, 10);
  EXPECT_DOUBLE_EQ(neg.aic, 201.0 + 20.0);
  EXPECT_DOUBLE_EQ(neg.bic, 201.0 + std::log(50.0) * 10.0);
}

TEST(InformationCriteria, DifferenceIdentity) {
  std::mt19937_64 gen(40);
  for (int trial = 0; trial < 200; ++trial) {
    const double ll = oracle::uniform(gen, -1e4, 1e3);
    const Index m = 1 + trial % 5, p = 1 + trial % 7;
    const Index n = 1 + static_cast<Index>(oracle::uniform(gen, 0, 1e5));
    const InformationCriteria ic = information_criteria(ll, m, p, n);
    EXPECT_EQ(ic.k, p * (m + 2) + m * (m + 1) / 2);
    const double expect = static_cast<double>(ic.k) * (2.0 - std::log(static_cast<double>(n)));
    EXPECT_NEAR(ic.aic - ic.bic, expect, 1e-9 * (1.0 + std::abs(ic.aic)));
  }
}

TEST(InformationCriteria, Errors) {
  EXPECT_THROW(information_criteria(0.0, 2, 2, 0), InvalidInput);
  EXPECT_THROW(information_criteria(0.0, 0, 2, 5), InvalidInput);
}

class SelectTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const OussmParams truth = scenario_params(find_scenario("theta04_p2-orth"), 0.1);
    series_ = new TimeSeries(simulate(truth, regular_times(300, 1.0), 12).series);
  }
  static void TearDownTestSuite() { delete series_; }
  static TimeSeries* series_;
};
TimeSeries* SelectTest::series_ = nullptr;

TEST_F(SelectTest, SingleRowRange) {
  SelectOptions o;
  o.fit.n_starts = 1;
  const SelectionTable t = select_dimension(*series_, {3}, o);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.rows[0].available);
  EXPECT_EQ(t.argmin_aic, 3);
  EXPECT_EQ(t.argmin_bic, 3);
}

TEST_F(SelectTest, TableInvariants) {
  SelectOptions o;
  o.fit.n_starts = 2;
  o.fit.seed = 4;
  const SelectionTable t = select_dimension(*series_, {3, 1, 2, 2}, o);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.n, 300);
  Index best_aic = 0, best_bic = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const SelectionRow& r = t.rows[i];
    EXPECT_EQ(r.m, static_cast<Index>(i + 1));
    ASSERT_TRUE(r.available) << r.message;
    EXPECT_EQ(r.k, 2 * (r.m + 2) + r.m * (r.m + 1) / 2);
    EXPECT_EQ(r.aic, -2.0 * r.loglik + 2.0 * static_cast<double>(r.k));
    EXPECT_EQ(r.bic, -2.0 * r.loglik + std::log(300.0) * static_cast<double>(r.k));
    EXPECT_NEAR(r.loglik, loglikelihood(r.fit.params, *series_), 1e-9);
    EXPECT_EQ(r.fit.params.m(), r.m);
    if (i > 0 && r.message.empty()) {
      EXPECT_GE(r.loglik, t.rows[i - 1].loglik - o.nested_tol) << "m = " << r.m;
    }
    if (best_aic == 0 || r.aic < t.rows[static_cast<std::size_t>(best_aic - 1)].aic) best_aic = r.m;
    if (best_bic == 0 || r.bic < t.rows[static_cast<std::size_t>(best_bic - 1)].bic) best_bic = r.m;
  }
  EXPECT_EQ(t.argmin_aic, best_aic);
  EXPECT_EQ(t.argmin_bic, best_bic);
}

TEST_F(SelectTest, FailedRowsAreUnavailable) {
  // Five rows cannot support m = 4 (needs m + 2 observed rows).
  const TimeSeries tiny = slice(*series_, 0, 5);
  SelectOptions o;
  o.fit.n_starts = 1;
  const SelectionTable t = select_dimension(tiny, {1, 4}, o);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(t.rows[0].available);
  EXPECT_FALSE(t.rows[1].available);
  EXPECT_FALSE(t.rows[1].message.empty());
  EXPECT_EQ(t.argmin_aic, 1);
  EXPECT_EQ(t.argmin_bic, 1);

  const SelectionTable none = select_dimension(tiny, {4}, o);
  EXPECT_EQ(none.argmin_aic, 0);
  EXPECT_EQ(none.argmin_bic, 0);
}

TEST_F(SelectTest, Errors) {
  EXPECT_THROW(select_dimension(*series_, {}), InvalidInput);
  EXPECT_THROW(select_dimension(*series_, {0, 1}), InvalidInput);
}

TEST(WarmStart, ExtendsSmallerFit) {
  std::mt19937_64 gen(41);
  const OussmParams small = oracle::random_params(gen, 3, 2);
  const VectorXd packed = warm_start_from(small, 7);
  ASSERT_EQ(packed.size(), parameter_count(3, 3));
  const OussmParams big = unpack(packed, 3, 3);
  EXPECT_NO_THROW(validate_canonical(big, false));
  EXPECT_LT((big.z.leftCols(2) - small.z).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(big.z.col(2).cwiseAbs().maxCoeff(), 0.1 * small.z.cwiseAbs().maxCoeff());
  EXPECT_LT((big.mu - small.mu).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((big.h_diag - small.h_diag).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(warm_start_from(small, 7), packed);
}
