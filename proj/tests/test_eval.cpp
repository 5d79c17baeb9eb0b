#include <cmath>

#include <gtest/gtest.h>

#include "eigenmodel/eval.hpp"
#include "oracles.hpp"

using namespace eigenmodel;

namespace {

// Zero-variance posterior centred on a known state.
VariationalPosterior posterior_at(const LatentState& s) {
  VariationalPosterior q(s.n, s.n_layers, s.n_steps, s.dim);
  for (std::size_t k = 0; k < s.n_layers; ++k) q.social_mean[k] = s.delta[k].transpose();
  for (std::size_t t = 0; t < s.n_steps; ++t)
    for (std::size_t i = 0; i < s.n; ++i) q.latent_mean[i][t] = s.latent[t].row(i).transpose();
  Eigen::VectorXd p(static_cast<Eigen::Index>(s.dim));
  for (Eigen::Index h = 0; h < p.size(); ++h) p[h] = s.lambda(0, h) > 0 ? 1.0 : 0.0;
  q.set_reference_lambda(p);
  q.lambda_mean.bottomRows(s.n_layers - 1) = s.lambda.bottomRows(s.n_layers - 1);
  return q;
}

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (y[a] == 1 && y[b] == 0) {
        den += 1.0;
        num += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
      }
  return num / den;
}

DynamicNetwork from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  DynamicNetwork net(n, 1, 1);
  for (auto [i, j] : edges) net.set_value(0, 0, i, j, 1);
  return net;
}

}  // namespace

// ---------------------------------------------------------------------------
// AUC

TEST(Auc, HandExample) {
  EXPECT_DOUBLE_EQ(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}), 0.75);
}

TEST(Auc, ExtremesAndTies) {
  EXPECT_DOUBLE_EQ(auc({0.9, 0.2, 0.8, 0.1}, {1, 0, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auc({0.1, 0.8, 0.2, 0.9}, {1, 0, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(auc({0.5, 0.5, 0.5}, {1, 0, 1}), 0.5);
}

TEST(Auc, MatchesPairwiseCountingAndIsRankInvariant) {
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s(60);
    std::vector<int> y(60);
    for (std::size_t m = 0; m < 60; ++m) {
      s[m] = std::round(rng.uniform() * 10.0) / 10.0;  // plenty of ties
      y[m] = rng.bernoulli(0.4 + 0.3 * s[m]) ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    const double a = auc(s, y);
    EXPECT_NEAR(a, pairwise_auc(s, y), 1e-12);
    std::vector<double> warped(60);
    for (std::size_t m = 0; m < 60; ++m) warped[m] = std::exp(3.0 * s[m]) - 7.0;
    EXPECT_NEAR(auc(warped, y), a, 1e-12);
  }
}

TEST(Auc, Validation) {
  EXPECT_THROW(auc({0.1, 0.2}, {1, 1}), ValidationError);
  EXPECT_THROW(auc({0.1, 0.2}, {0, 2}), ValidationError);
  EXPECT_THROW(auc({0.1}, {0, 1}), ValidationError);
}

TEST(Auc, InSampleSkipsMissingAndHeldOutUsesDyads) {
  const LatentState s = simulate_state(12, 2, 2, 2, 4);
  const auto net = simulate_network(s, 5);
  const auto split = make_holdout(net, 0.3, 6);
  const VariationalPosterior q = posterior_at(s);
  const auto p = plug_in_probabilities(q);
  std::vector<double> sc;
  std::vector<int> lab;
  for (const auto& h : split.heldout) {
    sc.push_back(p[net.dyad_index(h.k, h.t, h.i, h.j)]);
    lab.push_back(h.value);
  }
  EXPECT_DOUBLE_EQ(heldout_auc(q, split.heldout), auc(sc, lab));
  sc.clear();
  lab.clear();
  for (std::size_t m = 0; m < net.n_dyads(); ++m)
    if (split.train.observed_at(m)) {
      sc.push_back(p[m]);
      lab.push_back(split.train.value_at(m));
    }
  EXPECT_DOUBLE_EQ(in_sample_auc(q, split.train), auc(sc, lab));
}

// ---------------------------------------------------------------------------
// branching factor

TEST(BranchingFactor, HandExamples) {
  // cycle: every degree 2
  EXPECT_DOUBLE_EQ(branching_factor(from_edges(5, {{1, 0}, {2, 1}, {3, 2}, {4, 3}, {4, 0}}), 0, 0),
                   2.0);
  std::vector<std::pair<int, int>> star;
  for (int i = 1; i < 10; ++i) star.emplace_back(i, 0);
  EXPECT_DOUBLE_EQ(branching_factor(from_edges(10, star), 0, 0), 5.0);
  EXPECT_DOUBLE_EQ(branching_factor(from_edges(3, {{1, 0}, {2, 1}}), 0, 0), 1.5);
  EXPECT_THROW(branching_factor(DynamicNetwork(4, 1, 1), 0, 0), ValidationError);
  EXPECT_THROW(branching_factor(from_edges(3, {{1, 0}}), 0, 1), ValidationError);
}

TEST(BranchingFactor, AtLeastMeanDegree) {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto net = oracle::random_network(15, 1, 1, rng, 0.0);
    if (net.n_edges() == 0) continue;
    const auto deg = net.degrees(0, 0);
    double sum = 0.0;
    for (double d : deg) sum += d;
    EXPECT_GE(branching_factor(net, 0, 0), sum / 15.0 - 1e-12);
  }
}

TEST(BranchingPosterior, CompleteGraphLimit) {
  LatentState s(8, 2, 2, 1);
  s.lambda(0, 0) = 1.0;
  for (auto& D : s.delta) D.setConstant(20.0);
  const auto b = branching_factor_posterior(posterior_at(s), 1, 1, 30, 3);
  ASSERT_EQ(b.values.size(), 30u);
  for (double v : b.values) EXPECT_DOUBLE_EQ(v, 7.0);
  EXPECT_EQ(b.skipped, 0u);
  EXPECT_EQ(b.draw_index.front(), 0u);
}

TEST(BranchingPosterior, EmptyDrawsAreSkipped) {
  LatentState s(8, 1, 1, 1);
  s.lambda(0, 0) = 1.0;
  s.delta[0].setConstant(-40.0);
  const auto b = branching_factor_posterior(posterior_at(s), 0, 0, 25, 3);
  EXPECT_TRUE(b.values.empty());
  EXPECT_EQ(b.skipped, 25u);
  EXPECT_THROW(branching_factor_posterior(posterior_at(s), 1, 0, 5, 3), ValidationError);
}

TEST(BranchingPosterior, ReproducibleAndPlausible) {
  Rng rng(3);
  const VariationalPosterior q = oracle::random_posterior(10, 2, 3, 2, rng);
  const auto a = branching_factor_posterior(q, 1, 2, 50, 8);
  const auto b = branching_factor_posterior(q, 1, 2, 50, 8);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values.size() + a.skipped, 50u);
  for (double v : a.values) {
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 9.0);
  }
}

// ---------------------------------------------------------------------------
// plug-in probabilities and relative errors

TEST(PlugIn, MatchesMeanState) {
  Rng rng(4);
  const VariationalPosterior q = oracle::random_posterior(6, 2, 3, 2, rng);
  const auto p = plug_in_probabilities(q);
  const LatentState m = q.mean_state();
  DynamicNetwork net(6, 2, 3);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t i = 1; i < 6; ++i)
        for (std::size_t j = 0; j < i; ++j)
          EXPECT_DOUBLE_EQ(p[net.dyad_index(k, t, i, j)], dyad_probability(m, k, t, i, j));
  const auto sp = state_probabilities(m);
  ASSERT_EQ(sp.size(), p.size());
  for (std::size_t d = 0; d < p.size(); ++d) EXPECT_NEAR(sp[d], p[d], 1e-15);
}

TEST(RelativeError, ZeroAtTruth) {
  const LatentState s = simulate_state(10, 3, 4, 2, 7);
  const VariationalPosterior q = posterior_at(s);
  EXPECT_LE(latent_relative_error(q, s), 1e-24);
  EXPECT_LE(lambda_relative_error(q, s), 1e-24);
  EXPECT_LE(probability_relative_error(q, s), 1e-24);
  EXPECT_LE(social_relative_error(q, s, 100, 1), 1e-20);
  const auto net = simulate_network(s, 8);
  const auto r = evaluate(q, s, net, nullptr, 100, 1);
  EXPECT_LE(r.latent_rel_err, 1e-24);
  EXPECT_FALSE(r.auc_holdout.has_value());
  EXPECT_GT(r.auc_in, 0.5);
}

TEST(RelativeError, InvariantToSignedPermutationAndShift) {
  const LatentState s = simulate_state(10, 3, 4, 2, 9);
  LatentState t = s;
  for (auto& X : t.latent) {
    X.col(0).swap(X.col(1));
    X.col(0) *= -1.0;
    X.rowwise() += Eigen::RowVector2d(3.0, -2.0);
  }
  t.lambda.col(0).swap(t.lambda.col(1));
  const VariationalPosterior q = posterior_at(t);
  EXPECT_LE(latent_relative_error(q, s), 1e-20);
  EXPECT_LE(lambda_relative_error(q, s), 1e-24);
}

TEST(RelativeError, ScalingArithmetic) {
  const LatentState s = simulate_state(10, 3, 4, 2, 10);
  const double eps = 0.1;
  LatentState t = s;
  t.lambda *= 1.0 + eps;
  EXPECT_NEAR(lambda_relative_error(posterior_at(s), t),
              (eps / (1 + eps)) * (eps / (1 + eps)), 1e-12);
  const LatentState c = center_state(s);
  std::vector<Eigen::MatrixXd> est;
  double den = 0.0, count = 0.0;
  for (const auto& D : c.delta) {
    est.push_back(D.transpose().array() + eps);
    den += D.squaredNorm();
    count += static_cast<double>(D.size());
  }
  EXPECT_NEAR(social_relative_error(est, s), eps * eps * count / den, 1e-12);
}

TEST(RelativeError, Validation) {
  const LatentState s = simulate_state(10, 3, 4, 2, 11);
  const VariationalPosterior q = posterior_at(s);
  EXPECT_THROW(latent_relative_error(q, simulate_state(10, 3, 4, 1, 1)), ValidationError);
  LatentState flat = s;
  for (auto& X : flat.latent) X.setOnes();
  EXPECT_THROW(latent_relative_error(q, flat), ValidationError);
}
