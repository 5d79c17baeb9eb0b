#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "eigenmodel/errors.hpp"
#include "eigenmodel/model.hpp"
#include "eigenmodel/network.hpp"
#include "eigenmodel/postprocess.hpp"
#include "eigenmodel/posterior.hpp"
#include "eigenmodel/random.hpp"

namespace eigenmodel {

/// Plug-in probabilities for every dyad, indexed like DynamicNetwork::dyad_index.
inline std::vector<double> plug_in_probabilities(const VariationalPosterior& q) {
  std::vector<double> out(q.n_layers * q.n_steps * q.n_pairs());
  for (std::size_t k = 0; k < q.n_layers; ++k) {
    const Eigen::VectorXd lam = q.lambda_mean.row(k).transpose();
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      const std::size_t off = q.slice_offset(k, t);
      for (std::size_t i = 1; i < q.n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          out[off + pair_index(i, j)] = inv_logit(
              psi_mean(q.social_mean[k](i, t), q.social_mean[k](j, t), lam,
                       q.latent_mean[i][t], q.latent_mean[j][t]));
    }
  }
  return out;
}

/// True dyad probabilities of a parameter setting, same layout.
inline std::vector<double> state_probabilities(const LatentState& s) {
  const std::size_t pairs = s.n * (s.n - 1) / 2;
  std::vector<double> out(s.n_layers * s.n_steps * pairs);
  for (std::size_t k = 0; k < s.n_layers; ++k)
    for (std::size_t t = 0; t < s.n_steps; ++t) {
      const std::size_t off = (k * s.n_steps + t) * pairs;
      for (std::size_t i = 1; i < s.n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          out[off + pair_index(i, j)] = dyad_probability(s, k, t, i, j);
    }
  return out;
}

namespace detail {
inline void check_truth_shape(const VariationalPosterior& q, const LatentState& s) {
  if (q.n != s.n || q.n_layers != s.n_layers || q.n_steps != s.n_steps ||
      q.dim != s.dim)
    throw ValidationError("posterior and truth shapes differ");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Relative errors

/// Time average of the aligned squared-Frobenius ratio between centered
/// estimated and true positions.
inline double latent_relative_error(const VariationalPosterior& q,
                                    const LatentState& truth) {
  detail::check_truth_shape(q, truth);
  const TildeLatent est = tilde_latent(q);
  double total = 0.0;
  Eigen::MatrixXd M(q.n, q.dim);
  for (std::size_t t = 0; t < q.n_steps; ++t) {
    const Eigen::MatrixXd X = truth.latent[t].rowwise() - truth.latent[t].colwise().mean();
    const double norm = X.squaredNorm();
    if (!(norm > 0.0)) throw ValidationError("true positions are degenerate");
    for (std::size_t i = 0; i < q.n; ++i) M.row(i) = est.mean[i][t].transpose();
    total += align_signed_permutation(M, X).residual / norm;
  }
  return total / static_cast<double>(q.n_steps);
}

/// Homophily error minimized over one permutation shared by all layers.
inline double lambda_relative_error(const VariationalPosterior& q,
                                    const LatentState& truth) {
  detail::check_truth_shape(q, truth);
  if (q.dim > kMaxAlignDim) throw ValidationError("alignment dimension too large");
  const double norm = truth.lambda.squaredNorm();
  if (!(norm > 0.0)) throw ValidationError("true homophily is all zero");
  std::vector<std::size_t> perm(q.dim);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double r = 0.0;
    for (std::size_t k = 0; k < q.n_layers; ++k)
      for (std::size_t h = 0; h < q.dim; ++h) {
        const double e = truth.lambda(k, h) - q.lambda_mean(k, perm[h]);
        r += e * e;
      }
    best = std::min(best, r);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / norm;
}

/// Squared-Frobenius ratio of identified-sociality estimates (n x T per layer)
/// against the centered truth.
inline double social_relative_error(const std::vector<Eigen::MatrixXd>& est,
                                    const LatentState& truth) {
  if (est.size() != truth.n_layers) throw ValidationError("layer count differs");
  const LatentState centred = center_state(truth);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < truth.n_layers; ++k) {
    const Eigen::MatrixXd ref = centred.delta[k].transpose();
    if (est[k].rows() != ref.rows() || est[k].cols() != ref.cols())
      throw ValidationError("sociality shapes differ");
    num += (est[k] - ref).squaredNorm();
    den += ref.squaredNorm();
  }
  if (!(den > 0.0)) throw ValidationError("true socialities are all zero");
  return num / den;
}

inline double social_relative_error(const VariationalPosterior& q,
                                    const LatentState& truth,
                                    std::size_t n_samples = 2500,
                                    std::uint64_t seed = 0) {
  detail::check_truth_shape(q, truth);
  return social_relative_error(tilde_social(q, n_samples, seed).mean, truth);
}

inline double probability_relative_error(const VariationalPosterior& q,
                                         const LatentState& truth) {
  detail::check_truth_shape(q, truth);
  const auto est = plug_in_probabilities(q);
  const auto ref = state_probabilities(truth);
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m < est.size(); ++m) {
    num += (est[m] - ref[m]) * (est[m] - ref[m]);
    den += ref[m] * ref[m];
  }
  if (!(den > 0.0)) throw ValidationError("true probabilities are all zero");
  return num / den;
}

// ---------------------------------------------------------------------------
// Discrimination

/// Probability that a random positive outscores a random negative, ties
/// counting one half (rank-sum with average ranks).
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc inputs differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t m = lo; m < hi; ++m)
      if (labels[order[m]] == 1) {
        rank_sum += avg_rank;
        ++n_pos;
      } else if (labels[order[m]] != 0) {
        throw ValidationError("auc labels must be 0 or 1");
      }
    lo = hi;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("auc needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// AUC of plug-in probabilities on the observed dyads of `net`.
inline double in_sample_auc(const VariationalPosterior& q, const DynamicNetwork& net) {
  q.check_compatible(net);
  const auto p = plug_in_probabilities(q);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t m = 0; m < net.n_dyads(); ++m)
    if (net.observed_at(m)) {
      scores.push_back(p[m]);
      labels.push_back(net.value_at(m));
    }
  return auc(scores, labels);
}

inline double heldout_auc(const VariationalPosterior& q,
                          const std::vector<HeldoutDyad>& heldout) {
  const auto p = plug_in_probabilities(q);
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& h : heldout) {
    if (h.k >= q.n_layers || h.t >= q.n_steps || h.i >= q.n || h.j >= q.n || h.i == h.j)
      throw ValidationError("held-out dyad outside the posterior's range");
    scores.push_back(p[q.slice_offset(h.k, h.t) + pair_index(h.i, h.j)]);
    labels.push_back(h.value);
  }
  return auc(scores, labels);
}

// ---------------------------------------------------------------------------
// Branching factor

/// kappa = sum d_i^2 / sum d_i.
inline double branching_factor(const std::vector<double>& degrees) {
  double s1 = 0.0, s2 = 0.0;
  for (double d : degrees) {
    s1 += d;
    s2 += d * d;
  }
  if (!(s1 > 0.0)) throw ValidationError("branching factor of an empty network");
  return s2 / s1;
}

inline double branching_factor(const DynamicNetwork& net, std::size_t k, std::size_t t) {
  if (k >= net.n_layers() || t >= net.n_steps())
    throw ValidationError("slice index out of range");
  return branching_factor(net.degrees(k, t));
}

struct BranchingSamples {
  std::vector<double> values;  // one per non-empty draw, in draw order
  std::vector<std::size_t> draw_index;
  std::size_t skipped = 0;     // draws whose sampled slice had no edges
  std::size_t clamp_events = 0;
};

/// Posterior-predictive branching factors of slice (k, t): each draw samples
/// a parameter setting from q, then the slice's edges given it. Draw r uses
/// stream r of `seed`.
inline BranchingSamples branching_factor_posterior(const VariationalPosterior& q,
                                                   std::size_t k, std::size_t t,
                                                   std::size_t n_networks,
                                                   std::uint64_t seed) {
  if (k >= q.n_layers || t >= q.n_steps) throw ValidationError("slice index out of range");
  BranchingSamples out;
  Diagnostics diag;
  const Rng root(seed);
  std::vector<double> deg(q.n);
  for (std::size_t r = 0; r < n_networks; ++r) {
    Rng rng = root.split(r);
    const LatentState s = sample_latent_state(q, rng, &diag);
    std::fill(deg.begin(), deg.end(), 0.0);
    double edges = 0.0;
    for (std::size_t i = 1; i < q.n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (rng.uniform() < dyad_probability(s, k, t, i, j)) {
          deg[i] += 1.0;
          deg[j] += 1.0;
          edges += 1.0;
        }
    if (edges == 0.0) {
      ++out.skipped;
      continue;
    }
    out.values.push_back(branching_factor(deg));
    out.draw_index.push_back(r);
  }
  out.clamp_events = diag.clamp_events;
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct EvalReport {
  double latent_rel_err = 0.0;
  double social_rel_err = 0.0;
  double lambda_rel_err = 0.0;
  double proba_rel_err = 0.0;
  double auc_in = 0.0;
  std::optional<double> auc_holdout;
};

/// All statistics for a fit against a known truth. `net` is the network the
/// fit saw; in-sample AUC uses its observed dyads.
inline EvalReport evaluate(const VariationalPosterior& q, const LatentState& truth,
                           const DynamicNetwork& net,
                           const std::vector<HeldoutDyad>* heldout = nullptr,
                           std::size_t n_samples = 2500, std::uint64_t seed = 0) {
  EvalReport r;
  r.latent_rel_err = latent_relative_error(q, truth);
  r.social_rel_err = social_relative_error(q, truth, n_samples, seed);
  r.lambda_rel_err = lambda_relative_error(q, truth);
  r.proba_rel_err = probability_relative_error(q, truth);
  r.auc_in = in_sample_auc(q, net);
  if (heldout && !heldout->empty()) r.auc_holdout = heldout_auc(q, *heldout);
  return r;
}

}  // namespace eigenmodel
