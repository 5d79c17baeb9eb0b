#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "eigenmodel/errors.hpp"
#include "eigenmodel/model.hpp"
#include "eigenmodel/network.hpp"

namespace eigenmodel {

/// Natural parameters of an IG(a/2, b/2) x IG(c/2, d/2) pair: the initial
/// variance (a, b) and the random-walk step variance (c, d).
struct InverseGammaParams {
  double a = 1.0, b = 1.0, c = 1.0, d = 1.0;

  double mean_inv_init() const { return a / b; }  // E[1/tau^2]
  double mean_inv_step() const { return c / d; }  // E[1/sigma^2]
  bool positive() const { return a > 0 && b > 0 && c > 0 && d > 0; }
  bool operator==(const InverseGammaParams&) const = default;
};

/// Every factor of the structured mean-field approximation. Indices are
/// zero-based; layer 0 is the reference layer.
struct VariationalPosterior {
  std::size_t n = 0, n_layers = 0, n_steps = 0, dim = 0;

  std::vector<std::vector<Eigen::VectorXd>> latent_mean;      // [n][T]
  std::vector<std::vector<Eigen::MatrixXd>> latent_cov;       // [n][T]
  std::vector<std::vector<Eigen::MatrixXd>> latent_crosscov;  // [n][T-1]

  std::vector<Eigen::MatrixXd> social_mean;      // [K], n x T
  std::vector<Eigen::MatrixXd> social_var;       // [K], n x T
  std::vector<Eigen::MatrixXd> social_crosscov;  // [K], n x (T-1)

  Eigen::MatrixXd lambda_mean;              // K x d
  std::vector<Eigen::MatrixXd> lambda_cov;  // [K], d x d
  Eigen::VectorXd lambda_ref_prob;          // d, P(lambda_{0h} = +1)

  // Indexed like DynamicNetwork::dyad_index; entries of unobserved dyads are
  // never read and stay 0.
  std::vector<double> omega_mean;

  InverseGammaParams ig_latent;
  InverseGammaParams ig_social;

  VariationalPosterior() = default;
  VariationalPosterior(std::size_t n_nodes, std::size_t K, std::size_t T,
                       std::size_t d)
      : n(n_nodes), n_layers(K), n_steps(T), dim(d),
        latent_mean(n_nodes, std::vector<Eigen::VectorXd>(T, Eigen::VectorXd::Zero(d))),
        latent_cov(n_nodes, std::vector<Eigen::MatrixXd>(T, Eigen::MatrixXd::Zero(d, d))),
        latent_crosscov(n_nodes, std::vector<Eigen::MatrixXd>(
                                     T > 0 ? T - 1 : 0, Eigen::MatrixXd::Zero(d, d))),
        social_mean(K, Eigen::MatrixXd::Zero(n_nodes, T)),
        social_var(K, Eigen::MatrixXd::Zero(n_nodes, T)),
        social_crosscov(K, Eigen::MatrixXd::Zero(n_nodes, T > 0 ? T - 1 : 0)),
        lambda_mean(Eigen::MatrixXd::Zero(K, d)),
        lambda_cov(K, Eigen::MatrixXd::Zero(d, d)),
        lambda_ref_prob(Eigen::VectorXd::Constant(d, 0.5)),
        omega_mean(K * T * (n_nodes * (n_nodes - 1) / 2), 0.0) {}

  std::size_t n_pairs() const { return n * (n - 1) / 2; }
  std::size_t slice_offset(std::size_t k, std::size_t t) const {
    return (k * n_steps + t) * n_pairs();
  }

  // E[lambda_k lambda_k'] = Sigma_k + mu_k mu_k'
  Eigen::MatrixXd lambda_second_moment(std::size_t k) const {
    const Eigen::VectorXd m = lambda_mean.row(k).transpose();
    return lambda_cov[k] + m * m.transpose();
  }

  // E[X_t^i X_t^i']
  Eigen::MatrixXd latent_second_moment(std::size_t i, std::size_t t) const {
    return latent_cov[i][t] + latent_mean[i][t] * latent_mean[i][t].transpose();
  }

  /// Reference-layer factor from its Bernoulli probabilities.
  void set_reference_lambda(const Eigen::VectorXd& prob) {
    lambda_ref_prob = prob;
    lambda_cov[0].setZero();
    for (Eigen::Index h = 0; h < prob.size(); ++h) {
      const double m = 2.0 * prob[h] - 1.0;
      lambda_mean(0, h) = m;
      lambda_cov[0](h, h) = 1.0 - m * m;
    }
  }

  /// Posterior means arranged as a LatentState. The reference row holds
  /// E[lambda_0] = 2p - 1, which need not be +-1.
  LatentState mean_state() const {
    LatentState s(n, n_layers, n_steps, dim);
    for (std::size_t k = 0; k < n_layers; ++k)
      s.delta[k] = social_mean[k].transpose();
    for (std::size_t t = 0; t < n_steps; ++t)
      for (std::size_t i = 0; i < n; ++i)
        s.latent[t].row(i) = latent_mean[i][t].transpose();
    s.lambda = lambda_mean;
    return s;
  }

  void check_compatible(const DynamicNetwork& net) const {
    if (net.n_nodes() != n || net.n_layers() != n_layers ||
        net.n_steps() != n_steps)
      throw ValidationError("posterior and network shapes differ");
  }

  void validate() const {
    auto fail = [](const std::string& what) {
      throw ValidationError("posterior: " + what);
    };
    const auto d = static_cast<Eigen::Index>(dim);
    if (latent_mean.size() != n || latent_cov.size() != n ||
        latent_crosscov.size() != n || social_mean.size() != n_layers ||
        social_var.size() != n_layers || social_crosscov.size() != n_layers ||
        lambda_cov.size() != n_layers || lambda_mean.rows() != static_cast<Eigen::Index>(n_layers) ||
        lambda_mean.cols() != d || lambda_ref_prob.size() != d ||
        omega_mean.size() != n_layers * n_steps * n_pairs())
      fail("inconsistent shapes");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < n_steps; ++t) {
        const auto& S = latent_cov[i][t];
        if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1 + S.cwiseAbs().maxCoeff()))
          fail("latent covariance not symmetric");
        if ((S.diagonal().array() < 0.0).any()) fail("negative latent variance");
      }
    for (const auto& v : social_var)
      if ((v.array() < 0.0).any()) fail("negative social variance");
    for (Eigen::Index h = 0; h < d; ++h) {
      const double p = lambda_ref_prob[h];
      if (!(p >= 0.0 && p <= 1.0)) fail("reference probability outside [0,1]");
      if (std::abs(lambda_mean(0, h) - (2 * p - 1)) > 1e-12)
        fail("reference mean disagrees with its probability");
    }
    for (double w : omega_mean)
      if (!(w >= 0.0 && w <= 0.25)) fail("omega mean outside [0, 1/4]");
    if (!ig_latent.positive() || !ig_social.positive())
      fail("inverse-gamma parameters must be positive");
  }
};

// ---------------------------------------------------------------------------
// Moments of the linear predictor psi = delta_i + delta_j + X_i' Lambda X_j

// E[psi] from posterior means.
inline double psi_mean(double social_i, double social_j,
                       const Eigen::VectorXd& lambda_mean,
                       const Eigen::VectorXd& mean_i,
                       const Eigen::VectorXd& mean_j) {
  return social_i + social_j + mean_i.dot(lambda_mean.cwiseProduct(mean_j));
}

// E[psi^2] under the factorized posterior; `second_*` are E[X X'] and
// E[lambda lambda'].
inline double psi_second_moment(double social_mean_i, double social_var_i,
                                double social_mean_j, double social_var_j,
                                const Eigen::VectorXd& lambda_mean,
                                const Eigen::MatrixXd& lambda_second,
                                const Eigen::VectorXd& mean_i,
                                const Eigen::MatrixXd& second_i,
                                const Eigen::VectorXd& mean_j,
                                const Eigen::MatrixXd& second_j) {
  const double mi = social_mean_i, mj = social_mean_j;
  const double bilinear = mean_i.dot(lambda_mean.cwiseProduct(mean_j));
  const double quartic =
      lambda_second.cwiseProduct(second_i).cwiseProduct(second_j).sum();
  return social_var_i + mi * mi + social_var_j + mj * mj + 2.0 * mi * mj +
         2.0 * (mi + mj) * bilinear + quartic;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr const char* kPosteriorFormat = "eigenmodel.posterior/1";

namespace detail {
inline std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

inline Eigen::MatrixXd unflatten(const nlohmann::json& j, std::size_t rows,
                                 std::size_t cols) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != rows * cols) throw ValidationError("array has wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  return m;
}

inline nlohmann::ordered_json ig_json(const InverseGammaParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}};
}

inline InverseGammaParams ig_from_json(const nlohmann::json& j) {
  return {j.at("a").get<double>(), j.at("b").get<double>(),
          j.at("c").get<double>(), j.at("d").get<double>()};
}
}  // namespace detail

/// Full document: per-node trajectory moments (matrices row-major), social
/// moments as [k][i][t] arrays, homophily factors, omega means in packed
/// (k, t, pair) order, and both inverse-gamma parameter sets.
inline nlohmann::ordered_json to_json(const VariationalPosterior& q) {
  using detail::flatten;
  nlohmann::ordered_json j;
  j["format"] = kPosteriorFormat;
  j["n_nodes"] = q.n;
  j["n_layers"] = q.n_layers;
  j["n_steps"] = q.n_steps;
  j["dim"] = q.dim;

  nlohmann::json lm = nlohmann::json::array(), lc = nlohmann::json::array(),
                 lx = nlohmann::json::array();
  for (std::size_t i = 0; i < q.n; ++i) {
    nlohmann::json m = nlohmann::json::array(), c = nlohmann::json::array(),
                   x = nlohmann::json::array();
    for (std::size_t t = 0; t < q.n_steps; ++t) {
      m.push_back(flatten(q.latent_mean[i][t]));
      c.push_back(flatten(q.latent_cov[i][t]));
    }
    for (const auto& cc : q.latent_crosscov[i]) x.push_back(flatten(cc));
    lm.push_back(m);
    lc.push_back(c);
    lx.push_back(x);
  }
  j["latent_mean"] = lm;
  j["latent_cov"] = lc;
  j["latent_crosscov"] = lx;

  auto per_layer = [&](const std::vector<Eigen::MatrixXd>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : v) out.push_back(detail::matrix_rows(m));
    return out;
  };
  j["social_mean"] = per_layer(q.social_mean);
  j["social_var"] = per_layer(q.social_var);
  j["social_crosscov"] = per_layer(q.social_crosscov);

  j["lambda_mean"] = detail::matrix_rows(q.lambda_mean);
  nlohmann::json lcov = nlohmann::json::array();
  for (const auto& m : q.lambda_cov) lcov.push_back(flatten(m));
  j["lambda_cov"] = lcov;
  j["lambda_ref_prob"] = flatten(q.lambda_ref_prob);
  j["omega_mean"] = q.omega_mean;
  j["ig_latent"] = detail::ig_json(q.ig_latent);
  j["ig_social"] = detail::ig_json(q.ig_social);
  return j;
}

inline VariationalPosterior posterior_from_json(const nlohmann::json& j) {
  using detail::unflatten;
  try {
    if (j.at("format").get<std::string>() != kPosteriorFormat)
      throw ValidationError("not a posterior document");
    const auto n = j.at("n_nodes").get<std::size_t>();
    const auto K = j.at("n_layers").get<std::size_t>();
    const auto T = j.at("n_steps").get<std::size_t>();
    const auto d = j.at("dim").get<std::size_t>();
    VariationalPosterior q(n, K, T, d);
    const auto& lm = j.at("latent_mean");
    const auto& lc = j.at("latent_cov");
    const auto& lx = j.at("latent_crosscov");
    if (lm.size() != n || lc.size() != n || lx.size() != n)
      throw ValidationError("latent arrays have wrong length");
    for (std::size_t i = 0; i < n; ++i) {
      if (lm[i].size() != T || lc[i].size() != T || lx[i].size() + 1 != T)
        throw ValidationError("latent trajectory has wrong length");
      for (std::size_t t = 0; t < T; ++t) {
        q.latent_mean[i][t] = unflatten(lm[i][t], d, 1);
        q.latent_cov[i][t] = unflatten(lc[i][t], d, d);
      }
      for (std::size_t t = 0; t + 1 < T; ++t)
        q.latent_crosscov[i][t] = unflatten(lx[i][t], d, d);
    }
    for (std::size_t k = 0; k < K; ++k) {
      q.social_mean[k] = detail::matrix_from_rows(j.at("social_mean")[k], n, T);
      q.social_var[k] = detail::matrix_from_rows(j.at("social_var")[k], n, T);
      q.social_crosscov[k] =
          detail::matrix_from_rows(j.at("social_crosscov")[k], n, T - 1);
      q.lambda_cov[k] = unflatten(j.at("lambda_cov")[k], d, d);
    }
    q.lambda_mean = detail::matrix_from_rows(j.at("lambda_mean"), K, d);
    q.lambda_ref_prob = unflatten(j.at("lambda_ref_prob"), d, 1);
    q.omega_mean = j.at("omega_mean").get<std::vector<double>>();
    q.ig_latent = detail::ig_from_json(j.at("ig_latent"));
    q.ig_social = detail::ig_from_json(j.at("ig_social"));
    q.validate();
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("posterior: ") + e.what());
  }
}

}  // namespace eigenmodel
