#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "eigenmodel/errors.hpp"
#include "eigenmodel/gssm.hpp"
#include "eigenmodel/logistic_init.hpp"
#include "eigenmodel/model.hpp"
#include "eigenmodel/network.hpp"
#include "eigenmodel/polya_gamma.hpp"
#include "eigenmodel/posterior.hpp"
#include "eigenmodel/random.hpp"

namespace eigenmodel {

inline constexpr double kVarianceFloor = 1e-12;

/// How node-level smoother calls inside the social and latent steps read each
/// other's moments. Gauss-Seidel (default) uses the freshest moments in node
/// order. Jacobi assembles every node's input from the state at the start of
/// the step, which allows `jobs` threads but changes the iterates.
struct SweepOptions {
  bool jacobi = false;
  std::size_t jobs = 1;
};

struct FitConfig {
  std::size_t dim = 2;
  Priors priors{};
  double tol = 1e-2;
  std::size_t max_iter = 1000;
  std::size_t n_restarts = 10;
  std::uint64_t seed = 0;
  bool parallel_restarts = false;
  std::size_t jobs = 1;
  SweepOptions sweep{};

  void validate() const {
    if (dim < 1) throw ValidationError("latent dimension must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (n_restarts < 1) throw ValidationError("n_restarts must be >= 1");
    if (jobs < 1) throw ValidationError("jobs must be >= 1");
    priors.validate();
  }
};

/// Counts variance-floor events during an update.
struct Diagnostics {
  std::size_t clamp_events = 0;
};

namespace detail {

inline double floor_variance(double v, Diagnostics* diag) {
  if (v < kVarianceFloor) {
    if (diag) ++diag->clamp_events;
    return kVarianceFloor;
  }
  return v;
}

inline void floor_cov_diagonal(Eigen::MatrixXd& m, Diagnostics* diag) {
  for (Eigen::Index h = 0; h < m.rows(); ++h)
    m(h, h) = floor_variance(m(h, h), diag);
}

// Posterior means and second moments of X_t^i for every (t, i).
struct LatentMoments {
  std::vector<Eigen::MatrixXd> mean;                 // [T], n x d
  std::vector<std::vector<Eigen::MatrixXd>> second;  // [T][n]

  explicit LatentMoments(const VariationalPosterior& q)
      : mean(q.n_steps, Eigen::MatrixXd(q.n, q.dim)),
        second(q.n_steps, std::vector<Eigen::MatrixXd>(q.n)) {
    for (std::size_t i = 0; i < q.n; ++i) refresh(q, i);
  }

  void refresh(const VariationalPosterior& q, std::size_t i) {
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      mean[t].row(i) = q.latent_mean[i][t].transpose();
      second[t][i] = q.latent_second_moment(i, t);
    }
  }
};

template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Polya-gamma factors

/// Sets every observed dyad's q(omega) = PG(1, c) with c^2 = E[psi^2].
inline void update_omega(VariationalPosterior& q, const DynamicNetwork& net) {
  q.check_compatible(net);
  const detail::LatentMoments lm(q);
  for (std::size_t k = 0; k < q.n_layers; ++k) {
    const Eigen::VectorXd lam = q.lambda_mean.row(k).transpose();
    const Eigen::MatrixXd lam2 = q.lambda_second_moment(k);
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      const std::size_t off = q.slice_offset(k, t);
      for (std::size_t i = 1; i < q.n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          const std::size_t dyad = off + pair_index(i, j);
          if (!net.observed_at(dyad)) continue;
          const double c2 = psi_second_moment(
              q.social_mean[k](i, t), q.social_var[k](i, t),
              q.social_mean[k](j, t), q.social_var[k](j, t), lam, lam2,
              q.latent_mean[i][t], lm.second[t][i], q.latent_mean[j][t],
              lm.second[t][j]);
          if (c2 < -1e-10 * (1.0 + std::abs(c2)))
            throw NumericalError("negative second moment of linear predictor");
          q.omega_mean[dyad] = pg_mean(std::sqrt(std::max(c2, 0.0)));
        }
    }
  }
}

// ---------------------------------------------------------------------------
// Social trajectories

/// Expected natural parameters of q(delta^i_{k,1:T}) given the other factors.
inline GssmInput social_gssm_input(const VariationalPosterior& q,
                                   const DynamicNetwork& net, std::size_t k,
                                   std::size_t i,
                                   const std::vector<Eigen::MatrixXd>& latent_means) {
  GssmInput in(q.n_steps, 1);
  in.prec_init = q.ig_social.mean_inv_init();
  in.prec_step = q.ig_social.mean_inv_step();
  const Eigen::RowVectorXd lam = q.lambda_mean.row(k);
  for (std::size_t t = 0; t < q.n_steps; ++t) {
    const std::size_t off = q.slice_offset(k, t);
    const Eigen::MatrixXd& mu = latent_means[t];
    const Eigen::RowVectorXd lam_mu_i = lam.cwiseProduct(mu.row(i));
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t j = 0; j < q.n; ++j) {
      if (j == i) continue;
      const std::size_t dyad = off + pair_index(i, j);
      if (!net.observed_at(dyad)) continue;
      const double w = q.omega_mean[dyad];
      g1 += net.value_at(dyad) - 0.5 -
            w * (q.social_mean[k](j, t) + lam_mu_i.dot(mu.row(j)));
      g2 += w;
    }
    in.gamma1[t][0] = g1;
    in.gamma2[t](0, 0) = g2;
  }
  return in;
}

inline GssmInput social_gssm_input(const VariationalPosterior& q,
                                   const DynamicNetwork& net, std::size_t k,
                                   std::size_t i) {
  return social_gssm_input(q, net, k, i, detail::LatentMoments(q).mean);
}

// Closed-form inverse-gamma updates for the sociality variances.
inline void update_ig_social(VariationalPosterior& q, const Priors& priors) {
  const double nK = static_cast<double>(q.n * q.n_layers);
  double b = priors.b_tau2_delta, d = priors.d_sigma2_delta;
  for (std::size_t k = 0; k < q.n_layers; ++k)
    for (std::size_t i = 0; i < q.n; ++i) {
      const auto mean = q.social_mean[k].row(i);
      const auto var = q.social_var[k].row(i);
      b += var[0] + mean[0] * mean[0];
      for (std::size_t t = 1; t < q.n_steps; ++t)
        d += var[t] + mean[t] * mean[t] + var[t - 1] + mean[t - 1] * mean[t - 1] -
             2.0 * (q.social_crosscov[k](i, t - 1) + mean[t - 1] * mean[t]);
    }
  q.ig_social.a = priors.a_tau2_delta + nK;
  q.ig_social.b = b;
  q.ig_social.c = priors.c_sigma2_delta + nK * static_cast<double>(q.n_steps - 1);
  q.ig_social.d = d;
}

inline void update_social(VariationalPosterior& q, const DynamicNetwork& net,
                          const Priors& priors, const SweepOptions& sweep = {},
                          Diagnostics* diag = nullptr) {
  q.check_compatible(net);
  // Latent moments are fixed during this step.
  const std::vector<Eigen::MatrixXd> latent = detail::LatentMoments(q).mean;
  auto store = [&](std::size_t k, std::size_t i, const SmoothedMarginals& sm) {
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      q.social_mean[k](i, t) = sm.mean[t][0];
      q.social_var[k](i, t) = detail::floor_variance(sm.cov[t](0, 0), diag);
    }
    for (std::size_t t = 0; t + 1 < q.n_steps; ++t)
      q.social_crosscov[k](i, t) = sm.cross_cov[t](0, 0);
  };
  for (std::size_t k = 0; k < q.n_layers; ++k) {
    if (!sweep.jacobi) {
      for (std::size_t i = 0; i < q.n; ++i)
        store(k, i, kalman_smoother(social_gssm_input(q, net, k, i, latent)));
      continue;
    }
    std::vector<GssmInput> inputs(q.n);
    for (std::size_t i = 0; i < q.n; ++i)
      inputs[i] = social_gssm_input(q, net, k, i, latent);
    std::vector<SmoothedMarginals> out(q.n);
    detail::parallel_for(q.n, sweep.jobs,
                         [&](std::size_t i) { out[i] = kalman_smoother(inputs[i]); });
    for (std::size_t i = 0; i < q.n; ++i) store(k, i, out[i]);
  }
  update_ig_social(q, priors);
}

// ---------------------------------------------------------------------------
// Latent trajectories

inline GssmInput latent_gssm_input(const VariationalPosterior& q,
                                   const DynamicNetwork& net, std::size_t i,
                                   const detail::LatentMoments& lm,
                                   const std::vector<Eigen::MatrixXd>& lambda_second) {
  const auto d = static_cast<Eigen::Index>(q.dim);
  GssmInput in(q.n_steps, q.dim);
  in.prec_init = q.ig_latent.mean_inv_init();
  in.prec_step = q.ig_latent.mean_inv_step();
  Eigen::VectorXd weighted_mean(d);
  Eigen::MatrixXd weighted_second(d, d);
  for (std::size_t t = 0; t < q.n_steps; ++t) {
    const Eigen::MatrixXd& mu = lm.mean[t];
    for (std::size_t k = 0; k < q.n_layers; ++k) {
      const std::size_t off = q.slice_offset(k, t);
      const double social_i = q.social_mean[k](i, t);
      weighted_mean.setZero();
      weighted_second.setZero();
      for (std::size_t j = 0; j < q.n; ++j) {
        if (j == i) continue;
        const std::size_t dyad = off + pair_index(i, j);
        if (!net.observed_at(dyad)) continue;
        const double w = q.omega_mean[dyad];
        const double resid =
            net.value_at(dyad) - 0.5 - w * (social_i + q.social_mean[k](j, t));
        weighted_mean += resid * mu.row(j).transpose();
        weighted_second += w * lm.second[t][j];
      }
      in.gamma1[t] += q.lambda_mean.row(k).transpose().cwiseProduct(weighted_mean);
      in.gamma2[t] += lambda_second[k].cwiseProduct(weighted_second);
    }
  }
  return in;
}

inline GssmInput latent_gssm_input(const VariationalPosterior& q,
                                   const DynamicNetwork& net, std::size_t i) {
  std::vector<Eigen::MatrixXd> lam2(q.n_layers);
  for (std::size_t k = 0; k < q.n_layers; ++k) lam2[k] = q.lambda_second_moment(k);
  return latent_gssm_input(q, net, i, detail::LatentMoments(q), lam2);
}

inline void update_ig_latent(VariationalPosterior& q, const Priors& priors) {
  const double nd = static_cast<double>(q.n * q.dim);
  double b = priors.b_tau2, d = priors.d_sigma2;
  for (std::size_t i = 0; i < q.n; ++i) {
    const auto& m = q.latent_mean[i];
    const auto& S = q.latent_cov[i];
    b += S[0].trace() + m[0].squaredNorm();
    for (std::size_t t = 1; t < q.n_steps; ++t)
      d += S[t].trace() + m[t].squaredNorm() + S[t - 1].trace() +
           m[t - 1].squaredNorm() -
           2.0 * (q.latent_crosscov[i][t - 1].trace() + m[t - 1].dot(m[t]));
  }
  q.ig_latent.a = priors.a_tau2 + nd;
  q.ig_latent.b = b;
  q.ig_latent.c = priors.c_sigma2 + nd * static_cast<double>(q.n_steps - 1);
  q.ig_latent.d = d;
}

inline void update_latent(VariationalPosterior& q, const DynamicNetwork& net,
                          const Priors& priors, const SweepOptions& sweep = {},
                          Diagnostics* diag = nullptr) {
  q.check_compatible(net);
  std::vector<Eigen::MatrixXd> lam2(q.n_layers);
  for (std::size_t k = 0; k < q.n_layers; ++k) lam2[k] = q.lambda_second_moment(k);
  detail::LatentMoments lm(q);
  auto store = [&](std::size_t i, SmoothedMarginals& sm) {
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      detail::floor_cov_diagonal(sm.cov[t], diag);
      q.latent_mean[i][t] = std::move(sm.mean[t]);
      q.latent_cov[i][t] = std::move(sm.cov[t]);
    }
    for (std::size_t t = 0; t + 1 < q.n_steps; ++t)
      q.latent_crosscov[i][t] = std::move(sm.cross_cov[t]);
  };
  if (!sweep.jacobi) {
    for (std::size_t i = 0; i < q.n; ++i) {
      auto sm = kalman_smoother(latent_gssm_input(q, net, i, lm, lam2));
      store(i, sm);
      lm.refresh(q, i);
    }
  } else {
    std::vector<GssmInput> inputs(q.n);
    for (std::size_t i = 0; i < q.n; ++i)
      inputs[i] = latent_gssm_input(q, net, i, lm, lam2);
    std::vector<SmoothedMarginals> out(q.n);
    detail::parallel_for(q.n, sweep.jobs,
                         [&](std::size_t i) { out[i] = kalman_smoother(inputs[i]); });
    for (std::size_t i = 0; i < q.n; ++i) store(i, out[i]);
  }
  update_ig_latent(q, priors);
}

// ---------------------------------------------------------------------------
// Homophily coefficients

/// Sufficient statistics of layer k shared by both homophily updates:
///   linear_h    = sum_{t, j<i} [Y - 1/2 - E[w](E[d_i] + E[d_j])] m_ih m_jh
///   quadratic   = sum_{t, j<i} E[w] E[X_i X_i'] (.) E[X_j X_j']
struct LayerDesign {
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;
};

inline LayerDesign layer_design(const VariationalPosterior& q,
                                const DynamicNetwork& net, std::size_t k,
                                const detail::LatentMoments& lm) {
  const auto d = static_cast<Eigen::Index>(q.dim);
  LayerDesign out{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (std::size_t t = 0; t < q.n_steps; ++t) {
    const std::size_t off = q.slice_offset(k, t);
    const Eigen::MatrixXd& mu = lm.mean[t];
    for (std::size_t i = 1; i < q.n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const std::size_t dyad = off + pair_index(i, j);
        if (!net.observed_at(dyad)) continue;
        const double w = q.omega_mean[dyad];
        const double resid = net.value_at(dyad) - 0.5 -
                             w * (q.social_mean[k](i, t) + q.social_mean[k](j, t));
        out.linear += resid * mu.row(i).cwiseProduct(mu.row(j)).transpose();
        out.quadratic += w * lm.second[t][i].cwiseProduct(lm.second[t][j]);
      }
  }
  return out;
}

inline LayerDesign layer_design(const VariationalPosterior& q,
                                const DynamicNetwork& net, std::size_t k) {
  return layer_design(q, net, k, detail::LatentMoments(q));
}

/// Bernoulli factors of the reference layer's +-1 homophily entries, updated
/// one coordinate at a time in index order.
inline void update_lambda_reference(VariationalPosterior& q,
                                    const DynamicNetwork& net, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
  q.check_compatible(net);
  const LayerDesign des = layer_design(q, net, 0);
  const double prior_logit = std::log(rho / (1.0 - rho));
  Eigen::VectorXd prob = q.lambda_ref_prob;
  for (std::size_t h = 0; h < q.dim; ++h) {
    double cross = 0.0;
    for (std::size_t g = 0; g < q.dim; ++g)
      if (g != h) cross += q.lambda_mean(0, g) * des.quadratic(g, h);
    const double eta = prior_logit + 2.0 * (des.linear[h] - cross);
    prob[h] = inv_logit(eta);
    q.set_reference_lambda(prob);
  }
}

/// Gaussian factors of the non-reference layers (conjugate regression).
inline void update_lambda(VariationalPosterior& q, const DynamicNetwork& net,
                          double sigma2_lambda) {
  if (!(sigma2_lambda > 0.0)) throw ValidationError("sigma2_lambda must be positive");
  q.check_compatible(net);
  const detail::LatentMoments lm(q);
  const auto d = static_cast<Eigen::Index>(q.dim);
  for (std::size_t k = 1; k < q.n_layers; ++k) {
    const LayerDesign des = layer_design(q, net, k, lm);
    const Eigen::MatrixXd info =
        des.quadratic + Eigen::MatrixXd::Identity(d, d) / sigma2_lambda;
    q.lambda_cov[k] = detail::spd_inverse(info);
    q.lambda_mean.row(k) = (q.lambda_cov[k] * des.linear).transpose();
  }
}

// ---------------------------------------------------------------------------
// Convergence monitor

/// sum over observed dyads of (Y - 1/2) E[psi] - E[omega] E[psi^2] / 2.
inline double expected_loglik(const VariationalPosterior& q,
                              const DynamicNetwork& net) {
  q.check_compatible(net);
  const detail::LatentMoments lm(q);
  double total = 0.0;
  for (std::size_t k = 0; k < q.n_layers; ++k) {
    const Eigen::VectorXd lam = q.lambda_mean.row(k).transpose();
    const Eigen::MatrixXd lam2 = q.lambda_second_moment(k);
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      const std::size_t off = q.slice_offset(k, t);
      for (std::size_t i = 1; i < q.n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          const std::size_t dyad = off + pair_index(i, j);
          if (!net.observed_at(dyad)) continue;
          const Eigen::VectorXd& mi = q.latent_mean[i][t];
          const Eigen::VectorXd& mj = q.latent_mean[j][t];
          const double si = q.social_mean[k](i, t), sj = q.social_mean[k](j, t);
          const double e1 = psi_mean(si, sj, lam, mi, mj);
          const double e2 = psi_second_moment(si, q.social_var[k](i, t), sj,
                                              q.social_var[k](j, t), lam, lam2,
                                              mi, lm.second[t][i], mj,
                                              lm.second[t][j]);
          total += (net.value_at(dyad) - 0.5) * e1 - 0.5 * q.omega_mean[dyad] * e2;
        }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Initialization

/// Per-slice two-way logistic estimates of the socialities, laid out [k] n x T.
inline std::vector<Eigen::MatrixXd> initial_socialities(const DynamicNetwork& net) {
  std::vector<Eigen::MatrixXd> out(net.n_layers(),
                                   Eigen::MatrixXd(net.n_nodes(), net.n_steps()));
  for (std::size_t k = 0; k < net.n_layers(); ++k)
    for (std::size_t t = 0; t < net.n_steps(); ++t)
      out[k].col(t) = fit_two_way_logit(net, k, t);
  return out;
}

inline VariationalPosterior initialize(const DynamicNetwork& net, std::size_t d,
                                       const Priors& priors, Rng& rng,
                                       const std::vector<Eigen::MatrixXd>& socialities) {
  const std::size_t n = net.n_nodes(), K = net.n_layers(), T = net.n_steps();
  VariationalPosterior q(n, K, T, d);
  for (std::size_t k = 0; k < K; ++k) {
    q.social_mean[k] = socialities[k];
    q.social_var[k].setOnes();
    q.social_crosscov[k].setOnes();
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t h = 0; h < d; ++h) q.latent_mean[i][t][h] = rng.normal();
      q.latent_cov[i][t] = I;
      if (t + 1 < T) q.latent_crosscov[i][t] = I;
    }
  // Reference entries start at mean +1 (probability 1, zero variance).
  q.set_reference_lambda(Eigen::VectorXd::Ones(d));
  for (std::size_t k = 1; k < K; ++k) {
    for (std::size_t h = 0; h < d; ++h) q.lambda_mean(k, h) = rng.normal(0.0, 4.0);
    q.lambda_cov[k] = 10.0 * I;
  }
  std::fill(q.omega_mean.begin(), q.omega_mean.end(), 0.0);
  q.ig_latent = {priors.a_tau2, priors.b_tau2, priors.c_sigma2, priors.d_sigma2};
  q.ig_social = {priors.a_tau2_delta, priors.b_tau2_delta, priors.c_sigma2_delta,
                 priors.d_sigma2_delta};
  return q;
}

inline VariationalPosterior initialize(const DynamicNetwork& net, std::size_t d,
                                       const Priors& priors, std::uint64_t seed) {
  Rng rng(seed);
  return initialize(net, d, priors, rng, initial_socialities(net));
}

// ---------------------------------------------------------------------------
// Driver

/// One full coordinate-ascent sweep in the fixed order omega, socialities,
/// latent trajectories, reference homophily, remaining homophily.
inline void cavi_sweep(VariationalPosterior& q, const DynamicNetwork& net,
                       const FitConfig& config, Diagnostics* diag = nullptr) {
  update_omega(q, net);
  update_social(q, net, config.priors, config.sweep, diag);
  update_latent(q, net, config.priors, config.sweep, diag);
  update_lambda_reference(q, net, config.priors.rho);
  update_lambda(q, net, config.priors.sigma2_lambda);
}

struct RestartResult {
  std::optional<VariationalPosterior> posterior;  // empty if the restart aborted
  std::vector<double> trace;
  bool converged = false;
  std::size_t clamp_events = 0;
  std::string error;

  double final_loglik() const {
    return trace.empty() ? -std::numeric_limits<double>::infinity() : trace.back();
  }
};

struct FitResult {
  VariationalPosterior posterior;
  std::vector<double> trace;  // expected log-likelihood after each sweep
  std::size_t restart = 0;
  bool converged = false;
  std::vector<RestartResult> restarts;  // posteriors dropped; traces kept
};

inline RestartResult run_restart(const DynamicNetwork& net, const FitConfig& config,
                                 std::size_t restart,
                                 const std::vector<Eigen::MatrixXd>& socialities) {
  RestartResult out;
  Diagnostics diag;
  try {
    Rng rng = Rng(config.seed).split(restart);
    VariationalPosterior q = initialize(net, config.dim, config.priors, rng, socialities);
    for (std::size_t s = 0; s < config.max_iter; ++s) {
      cavi_sweep(q, net, config, &diag);
      const double f = expected_loglik(q, net);
      if (!std::isfinite(f)) throw NumericalError("expected log-likelihood diverged");
      out.trace.push_back(f);
      const std::size_t m = out.trace.size();
      if (m >= 2 && std::abs(out.trace[m - 1] - out.trace[m - 2]) < config.tol) {
        out.converged = true;
        break;
      }
    }
    out.posterior = std::move(q);
  } catch (const NumericalError& e) {
    out.posterior.reset();
    out.error = e.what();
  }
  out.clamp_events = diag.clamp_events;
  return out;
}

/// Runs `n_restarts` independent initializations and keeps the one with the
/// highest final expected log-likelihood (lowest index on ties). Restart r
/// draws from stream r of `seed`, so parallel and sequential runs agree.
inline FitResult fit(const DynamicNetwork& net, const FitConfig& config) {
  config.validate();
  const auto socialities = initial_socialities(net);
  std::vector<RestartResult> runs(config.n_restarts);
  const std::size_t jobs = config.parallel_restarts ? config.jobs : 1;
  detail::parallel_for(config.n_restarts, jobs, [&](std::size_t r) {
    runs[r] = run_restart(net, config, r, socialities);
  });

  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].posterior) continue;
    if (!best || runs[r].final_loglik() > runs[*best].final_loglik()) best = r;
  }
  if (!best) {
    std::string msg = "all restarts failed";
    if (!runs.empty()) msg += ": " + runs[0].error;
    throw NumericalError(msg);
  }
  FitResult result{std::move(*runs[*best].posterior), runs[*best].trace, *best,
                   runs[*best].converged, {}};
  for (auto& r : runs) r.posterior.reset();
  result.restarts = std::move(runs);
  return result;
}

}  // namespace eigenmodel
