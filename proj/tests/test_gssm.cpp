#include <gtest/gtest.h>

#include "eigenmodel/gssm.hpp"
#include "oracles.hpp"

using namespace eigenmodel;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Largest discrepancy between the smoother and the dense joint Gaussian.
double smoother_error(const GssmInput& in) {
  const auto sm = kalman_smoother(in);
  const auto exact = oracle::dense_gssm(in);
  const auto d = static_cast<Eigen::Index>(in.dim());
  double worst = 0.0;
  for (std::size_t t = 0; t < in.steps(); ++t) {
    const Eigen::Index o = static_cast<Eigen::Index>(t) * d;
    worst = std::max(worst, max_abs(sm.mean[t] - exact.mean.segment(o, d)));
    worst = std::max(worst, max_abs(sm.cov[t] - exact.cov.block(o, o, d, d)));
    if (t + 1 < in.steps())
      worst = std::max(worst, max_abs(sm.cross_cov[t] - exact.cov.block(o, o + d, d, d)));
  }
  return worst;
}

}  // namespace

TEST(KalmanFilter, OneStep) {
  GssmInput in(1, 1);
  in.gamma1[0][0] = 1.0;
  in.gamma2[0](0, 0) = 1.0;
  const auto f = kalman_filter(in);
  EXPECT_DOUBLE_EQ(f.cov[0](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(f.mean[0][0], 0.5);
  EXPECT_TRUE(f.pred_cov.empty());
}

TEST(KalmanFilter, ZeroInformationGivesZeroMeans) {
  Rng rng(3);
  GssmInput in = oracle::random_gssm_input(6, 2, rng);
  for (auto& g : in.gamma1) g.setZero();
  const auto f = kalman_filter(in);
  for (const auto& m : f.mean) EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(KalmanFilter, MatchesTruncatedDenseOracle) {
  // The filtered marginal at t conditions on observations 1..t only.
  GssmInput in(3, 1);
  in.prec_init = 1.0;
  in.prec_step = 2.0;
  const double g1[] = {1.0, 0.0, -1.0};
  for (std::size_t t = 0; t < 3; ++t) {
    in.gamma1[t][0] = g1[t];
    in.gamma2[t](0, 0) = 1.0;
  }
  const auto f = kalman_filter(in);
  for (std::size_t t = 0; t < 3; ++t) {
    GssmInput head(t + 1, 1);
    head.prec_init = in.prec_init;
    head.prec_step = in.prec_step;
    for (std::size_t u = 0; u <= t; ++u) {
      head.gamma1[u] = in.gamma1[u];
      head.gamma2[u] = in.gamma2[u];
    }
    const auto exact = oracle::dense_gssm(head);
    const auto o = static_cast<Eigen::Index>(t);
    EXPECT_NEAR(f.mean[t][0], exact.mean[o], 1e-12);
    EXPECT_NEAR(f.cov[t](0, 0), exact.cov(o, o), 1e-12);
  }
}

TEST(KalmanSmoother, SingleStepEqualsFilter) {
  Rng rng(5);
  const GssmInput in = oracle::random_gssm_input(1, 3, rng);
  const auto f = kalman_filter(in);
  const auto s = kalman_smoother(in);
  EXPECT_TRUE(s.cross_cov.empty());
  EXPECT_EQ(s.mean[0], f.mean[0]);
  EXPECT_EQ(s.cov[0], f.cov[0]);
}

TEST(KalmanSmoother, ZeroInformationPositiveCrossCovariance) {
  GssmInput in(5, 1);
  in.prec_init = 0.5;
  in.prec_step = 3.0;
  for (auto& g : in.gamma2) g(0, 0) = 0.7;
  const auto s = kalman_smoother(in);
  for (const auto& m : s.mean) EXPECT_EQ(m[0], 0.0);
  for (const auto& c : s.cross_cov) EXPECT_GT(c(0, 0), 0.0);
}

TEST(KalmanSmoother, MatchesDenseOracleFourStepsTwoDims) {
  Rng rng(77);
  const GssmInput in = oracle::random_gssm_input(4, 2, rng);
  EXPECT_LE(smoother_error(in), 1e-8);
}

TEST(KalmanSmoother, MatchesDenseOracleRandomized) {
  Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t T = 1 + rng.below(10), d = 1 + rng.below(3);
    const GssmInput in = oracle::random_gssm_input(T, d, rng);
    ASSERT_LE(smoother_error(in), 1e-8) << "T=" << T << " d=" << d;
  }
}

TEST(KalmanSmoother, CovariancesSymmetricPositive) {
  Rng rng(8);
  const GssmInput in = oracle::random_gssm_input(8, 3, rng);
  const auto s = kalman_smoother(in);
  for (const auto& S : s.cov) {
    EXPECT_LT(max_abs(S - S.transpose()), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(GssmInput, Validation) {
  GssmInput in(2, 2);
  in.prec_init = 0.0;
  EXPECT_THROW(kalman_filter(in), ValidationError);
  in.prec_init = 1.0;
  in.gamma2[1](0, 1) = 1.0;
  EXPECT_THROW(kalman_filter(in), ValidationError);
  in.gamma2[1](0, 1) = 0.0;
  in.gamma1[0][0] = std::nan("");
  EXPECT_THROW(kalman_filter(in), ValidationError);
  EXPECT_THROW(kalman_filter(GssmInput{}), ValidationError);
}

TEST(GssmInput, IndefiniteInformationIsNumericalError) {
  GssmInput in(2, 1);
  in.gamma2[1](0, 0) = -50.0;
  EXPECT_THROW(kalman_smoother(in), NumericalError);
}
