#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eigenmodel/cavi.hpp"
#include "eigenmodel/errors.hpp"
#include "eigenmodel/model.hpp"
#include "eigenmodel/posterior.hpp"
#include "eigenmodel/random.hpp"

namespace eigenmodel {

// ---------------------------------------------------------------------------
// Sampling helpers

namespace detail {

// Square-root factor L with L L' = cov for a symmetric PSD cov, by
// eigendecomposition. Negative eigenvalues (rounding) are set to zero;
// clearly negative ones are counted.
inline Eigen::MatrixXd gaussian_factor(const Eigen::MatrixXd& cov,
                                       Diagnostics* diag = nullptr) {
  const Eigen::Index d = cov.rows();
  if (d == 1) {
    double v = cov(0, 0);
    if (v < 0.0) {
      if (v < -kVarianceFloor && diag) ++diag->clamp_events;
      v = 0.0;
    }
    return Eigen::MatrixXd::Constant(1, 1, std::sqrt(v));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index h = 0; h < d; ++h)
    if (ev[h] < 0.0) {
      if (ev[h] < -kVarianceFloor * scale && diag) ++diag->clamp_events;
      ev[h] = 0.0;
    }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

inline Eigen::VectorXd draw_with_factor(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& factor, Rng& rng) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index h = 0; h < z.size(); ++h) z[h] = rng.normal();
  return mean + factor * z;
}

inline Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& cov, Rng& rng,
                                     Diagnostics* diag = nullptr) {
  return draw_with_factor(mean, gaussian_factor(cov, diag), rng);
}

// Moore-Penrose inverse of a symmetric PSD matrix, dropping eigenvalues at or
// below the variance floor.
inline Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index h = 0; h < inv.size(); ++h)
    inv[h] = inv[h] > kVarianceFloor ? 1.0 / inv[h] : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// One draw of a Gauss-Markov chain from its marginals and lag-one
// covariances cross[t] = Cov(x_t, x_{t+1}).
inline std::vector<Eigen::VectorXd> draw_markov_chain(
    const std::vector<Eigen::VectorXd>& mean, const std::vector<Eigen::MatrixXd>& cov,
    const std::vector<Eigen::MatrixXd>& cross, Rng& rng, Diagnostics* diag) {
  std::vector<Eigen::VectorXd> x(mean.size());
  x[0] = draw_gaussian(mean[0], cov[0], rng, diag);
  for (std::size_t t = 0; t + 1 < mean.size(); ++t) {
    const Eigen::MatrixXd gain = cross[t].transpose() * psd_pinv(cov[t]);
    const Eigen::VectorXd cond_mean = mean[t + 1] + gain * (x[t] - mean[t]);
    const Eigen::MatrixXd cond_cov = cov[t + 1] - gain * cross[t];
    x[t + 1] = draw_gaussian(cond_mean, cond_cov, rng, diag);
  }
  return x;
}

inline Eigen::VectorXd draw_reference_lambda(const Eigen::VectorXd& prob, Rng& rng) {
  Eigen::VectorXd out(prob.size());
  for (Eigen::Index h = 0; h < prob.size(); ++h)
    out[h] = rng.uniform() < prob[h] ? 1.0 : -1.0;
  return out;
}

// Type-7 sample quantile of sorted data.
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Identified moments

struct TildeLatent {
  std::vector<std::vector<Eigen::VectorXd>> mean;  // [n][T]
  std::vector<std::vector<Eigen::MatrixXd>> cov;   // [n][T]
};

/// Moments of the centered positions X~_t^i = X_t^i - mean_j X_t^j under the
/// factorized posterior.
inline TildeLatent tilde_latent(const VariationalPosterior& q) {
  const double n = static_cast<double>(q.n);
  const double own = (1.0 - 1.0 / n) * (1.0 - 1.0 / n);
  const double other = 1.0 / (n * n);
  TildeLatent out{q.latent_mean, q.latent_cov};
  for (std::size_t t = 0; t < q.n_steps; ++t) {
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(q.dim);
    Eigen::MatrixXd cov_sum = Eigen::MatrixXd::Zero(q.dim, q.dim);
    for (std::size_t i = 0; i < q.n; ++i) {
      centre += q.latent_mean[i][t];
      cov_sum += q.latent_cov[i][t];
    }
    centre /= n;
    for (std::size_t i = 0; i < q.n; ++i) {
      out.mean[i][t] = q.latent_mean[i][t] - centre;
      out.cov[i][t] =
          own * q.latent_cov[i][t] + other * (cov_sum - q.latent_cov[i][t]);
    }
  }
  return out;
}

struct TildeSocial {
  std::vector<Eigen::MatrixXd> mean;   // [K], n x T
  std::vector<Eigen::MatrixXd> lower;  // 2.5% quantile
  std::vector<Eigen::MatrixXd> upper;  // 97.5% quantile
};

/// Monte-Carlo summaries of the identified socialities
///   delta~ = delta + X~_i' Lambda_k c + c' Lambda_k c / 2,  c = mean_j X_t^j.
/// Positions are drawn from their per-(i, t) marginals.
inline TildeSocial tilde_social(const VariationalPosterior& q,
                                std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw ValidationError("tilde_social needs >= 100 samples");
  const std::size_t n = q.n, K = q.n_layers, T = q.n_steps;
  const auto d = static_cast<Eigen::Index>(q.dim);
  TildeSocial out;
  for (std::size_t k = 0; k < K; ++k) {
    out.mean.emplace_back(n, T);
    out.lower.emplace_back(n, T);
    out.upper.emplace_back(n, T);
  }
  const Rng root(seed);
  std::vector<std::vector<double>> draws(K * n, std::vector<double>(n_samples));
  Eigen::MatrixXd X(n, d);
  Eigen::MatrixXd lam(K, d);
  std::vector<Eigen::MatrixXd> lam_factor(K), x_factor(n);
  for (std::size_t k = 1; k < K; ++k) lam_factor[k] = detail::gaussian_factor(q.lambda_cov[k]);
  for (std::size_t t = 0; t < T; ++t) {
    Rng rng = root.split(t);
    for (std::size_t i = 0; i < n; ++i)
      x_factor[i] = detail::gaussian_factor(q.latent_cov[i][t]);
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t i = 0; i < n; ++i)
        X.row(i) = detail::draw_with_factor(q.latent_mean[i][t], x_factor[i], rng)
                       .transpose();
      lam.row(0) = detail::draw_reference_lambda(q.lambda_ref_prob, rng).transpose();
      for (std::size_t k = 1; k < K; ++k)
        lam.row(k) = detail::draw_with_factor(q.lambda_mean.row(k).transpose(),
                                              lam_factor[k], rng)
                         .transpose();
      const Eigen::RowVectorXd c = X.colwise().mean();
      for (std::size_t k = 0; k < K; ++k) {
        const Eigen::RowVectorXd lc = lam.row(k).cwiseProduct(c);
        const double half_quad = 0.5 * lc.dot(c);
        for (std::size_t i = 0; i < n; ++i) {
          const double delta = rng.normal(q.social_mean[k](i, t), q.social_var[k](i, t));
          draws[k * n + i][s] = delta + (X.row(i) - c).dot(lc) + half_quad;
        }
      }
    }
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        auto& v = draws[k * n + i];
        out.mean[k](i, t) =
            std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n_samples);
        std::sort(v.begin(), v.end());
        out.lower[k](i, t) = detail::sorted_quantile(v, 0.025);
        out.upper[k](i, t) = detail::sorted_quantile(v, 0.975);
      }
  }
  return out;
}

struct IdentifiedSummary {
  TildeLatent latent;
  TildeSocial social;
};

inline IdentifiedSummary identified_summary(const VariationalPosterior& q,
                                            std::size_t n_samples = 2500,
                                            std::uint64_t seed = 0) {
  return {tilde_latent(q), tilde_social(q, n_samples, seed)};
}

// ---------------------------------------------------------------------------
// Posterior draws

/// One joint draw of all parameters from q. Trajectories are drawn forward
/// through their Markov conditionals, so temporal correlation is kept.
inline LatentState sample_latent_state(const VariationalPosterior& q, Rng& rng,
                                       Diagnostics* diag = nullptr) {
  LatentState s(q.n, q.n_layers, q.n_steps, q.dim);
  s.lambda.row(0) = detail::draw_reference_lambda(q.lambda_ref_prob, rng).transpose();
  for (std::size_t k = 1; k < q.n_layers; ++k)
    s.lambda.row(k) =
        detail::draw_gaussian(q.lambda_mean.row(k).transpose(), q.lambda_cov[k], rng, diag)
            .transpose();

  std::vector<Eigen::VectorXd> m(q.n_steps, Eigen::VectorXd(1));
  std::vector<Eigen::MatrixXd> v(q.n_steps, Eigen::MatrixXd(1, 1));
  std::vector<Eigen::MatrixXd> c(q.n_steps > 0 ? q.n_steps - 1 : 0, Eigen::MatrixXd(1, 1));
  for (std::size_t k = 0; k < q.n_layers; ++k)
    for (std::size_t i = 0; i < q.n; ++i) {
      for (std::size_t t = 0; t < q.n_steps; ++t) {
        m[t][0] = q.social_mean[k](i, t);
        v[t](0, 0) = q.social_var[k](i, t);
      }
      for (std::size_t t = 0; t + 1 < q.n_steps; ++t)
        c[t](0, 0) = q.social_crosscov[k](i, t);
      const auto x = detail::draw_markov_chain(m, v, c, rng, diag);
      for (std::size_t t = 0; t < q.n_steps; ++t) s.delta[k](t, i) = x[t][0];
    }

  for (std::size_t i = 0; i < q.n; ++i) {
    const auto x = detail::draw_markov_chain(q.latent_mean[i], q.latent_cov[i],
                                             q.latent_crosscov[i], rng, diag);
    for (std::size_t t = 0; t < q.n_steps; ++t) s.latent[t].row(i) = x[t].transpose();
  }
  return s;
}

inline LatentState sample_latent_state(const VariationalPosterior& q,
                                       std::uint64_t seed, Diagnostics* diag = nullptr) {
  Rng rng(seed);
  return sample_latent_state(q, rng, diag);
}

// ---------------------------------------------------------------------------
// Signed-permutation alignment

struct SignedPermutation {
  std::vector<std::size_t> perm;  // column j of the aligned estimate is est column perm[j]
  std::vector<int> signs;         // then multiplied by signs[j]
  Eigen::MatrixXd aligned;
  double residual = 0.0;          // squared Frobenius norm of truth - aligned
};

inline constexpr std::size_t kMaxAlignDim = 8;

/// Minimizes ||truth - est P diag(s)||_F^2 over every permutation and sign
/// vector. Ties go to the lexicographically first (perm, signs), with +1
/// ordered before -1.
inline SignedPermutation align_signed_permutation(const Eigen::MatrixXd& est,
                                                  const Eigen::MatrixXd& truth) {
  const auto d = static_cast<std::size_t>(est.cols());
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw ValidationError("alignment inputs differ in shape");
  if (d > kMaxAlignDim) throw ValidationError("alignment dimension too large");
  // cost[j][c][s]: residual of truth column j against sign s of est column c.
  // For a fixed permutation the columns decouple, so the best sign of each
  // column can be chosen on its own; this agrees with a full enumeration of
  // all 2^d sign vectors, tie order included.
  std::vector<double> cost(d * d * 2);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t c = 0; c < d; ++c) {
      cost[(j * d + c) * 2 + 0] = (truth.col(j) - est.col(c)).squaredNorm();
      cost[(j * d + c) * 2 + 1] = (truth.col(j) + est.col(c)).squaredNorm();
    }
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  SignedPermutation best;
  best.residual = std::numeric_limits<double>::infinity();
  std::vector<int> signs(d);
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double plus = cost[(j * d + perm[j]) * 2];
      const double minus = cost[(j * d + perm[j]) * 2 + 1];
      signs[j] = minus < plus ? -1 : 1;
      total += std::min(plus, minus);
    }
    if (total < best.residual) {
      best.residual = total;
      best.perm = perm;
      best.signs = signs;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.aligned.resize(est.rows(), est.cols());
  for (std::size_t j = 0; j < d; ++j)
    best.aligned.col(j) = best.signs[j] * est.col(best.perm[j]);
  return best;
}

}  // namespace eigenmodel
