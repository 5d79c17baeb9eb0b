#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "eigenmodel/errors.hpp"
#include "eigenmodel/network.hpp"
#include "eigenmodel/random.hpp"

namespace eigenmodel {

inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Fixed hyperparameters. Inverse-gamma priors are written IG(a/2, b/2), so
/// E[1/tau^2] under the prior is a/b.
struct Priors {
  double a_tau2 = 4.1;
  double b_tau2 = 21.0;
  double c_sigma2 = 2.0;
  double d_sigma2 = 2.0;
  double a_tau2_delta = 4.1;
  double b_tau2_delta = 21.0;
  double c_sigma2_delta = 2.0;
  double d_sigma2_delta = 2.0;
  double rho = 0.5;
  double sigma2_lambda = 10.0;

  // Nearly flat initial-variance priors: a = 2(2 + eps), b = 2(1 + eps) E[tau^2].
  static Priors flat(double eps = 0.05, double expected_tau2 = 10.0,
                     double expected_tau2_delta = 10.0) {
    Priors p;
    p.a_tau2 = 2.0 * (2.0 + eps);
    p.b_tau2 = 2.0 * (1.0 + eps) * expected_tau2;
    p.a_tau2_delta = 2.0 * (2.0 + eps);
    p.b_tau2_delta = 2.0 * (1.0 + eps) * expected_tau2_delta;
    return p;
  }

  void validate() const {
    for (double v : {a_tau2, b_tau2, c_sigma2, d_sigma2, a_tau2_delta,
                     b_tau2_delta, c_sigma2_delta, d_sigma2_delta,
                     sigma2_lambda})
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("prior hyperparameters must be positive");
    if (!(rho > 0.0 && rho < 1.0))
      throw ValidationError("rho must lie in (0, 1)");
  }
};

/// One realization of every model parameter.
struct LatentState {
  std::size_t n = 0, n_layers = 0, n_steps = 0, dim = 0;
  std::vector<Eigen::MatrixXd> delta;   // [K], each T x n
  std::vector<Eigen::MatrixXd> latent;  // [T], each n x d
  Eigen::MatrixXd lambda;               // K x d; row 0 is the reference layer

  LatentState() = default;
  LatentState(std::size_t n_nodes, std::size_t K, std::size_t T, std::size_t d)
      : n(n_nodes), n_layers(K), n_steps(T), dim(d),
        delta(K, Eigen::MatrixXd::Zero(T, n_nodes)),
        latent(T, Eigen::MatrixXd::Zero(n_nodes, d)),
        lambda(Eigen::MatrixXd::Zero(K, d)) {
    lambda.row(0).setOnes();
  }

  std::size_t parameter_count() const {
    return n * n_steps * n_layers + n * n_steps * dim + n_layers * dim;
  }

  void validate() const {
    if (delta.size() != n_layers || latent.size() != n_steps ||
        lambda.rows() != static_cast<Eigen::Index>(n_layers) ||
        lambda.cols() != static_cast<Eigen::Index>(dim))
      throw ValidationError("latent state has inconsistent shapes");
    for (const auto& m : delta)
      if (m.rows() != static_cast<Eigen::Index>(n_steps) ||
          m.cols() != static_cast<Eigen::Index>(n) || !m.allFinite())
        throw ValidationError("sociality array malformed");
    for (const auto& m : latent)
      if (m.rows() != static_cast<Eigen::Index>(n) ||
          m.cols() != static_cast<Eigen::Index>(dim) || !m.allFinite())
        throw ValidationError("latent position array malformed");
    if (!lambda.allFinite()) throw ValidationError("homophily not finite");
    for (Eigen::Index h = 0; h < lambda.cols(); ++h)
      if (std::abs(lambda(0, h)) != 1.0)
        throw ValidationError("reference-layer homophily must be +1 or -1");
  }
};

namespace detail {
inline void check_dyad(const LatentState& s, std::size_t k, std::size_t t,
                       std::size_t i, std::size_t j) {
  if (k >= s.n_layers || t >= s.n_steps || i >= s.n || j >= s.n)
    throw ValidationError("dyad index out of range");
  if (i == j) throw ValidationError("self-loops are not part of the model");
}
}  // namespace detail

// delta_i + delta_j + X_i' diag(lambda_k) X_j
inline double log_odds(const LatentState& s, std::size_t k, std::size_t t,
                       std::size_t i, std::size_t j) {
  detail::check_dyad(s, k, t, i, j);
  const auto& X = s.latent[t];
  double bilinear = 0.0;
  for (std::size_t h = 0; h < s.dim; ++h)
    bilinear += X(i, h) * s.lambda(k, h) * X(j, h);
  return s.delta[k](t, i) + s.delta[k](t, j) + bilinear;
}

inline double dyad_probability(const LatentState& s, std::size_t k,
                               std::size_t t, std::size_t i, std::size_t j) {
  return inv_logit(log_odds(s, k, t, i, j));
}

inline void center_latent_positions(LatentState& s) {
  for (auto& X : s.latent) X.rowwise() -= X.colwise().mean();
}

/// Draws a parameter setting from the simulation design: +-1 reference
/// homophily, U[-2,2] other layers, U[-4,4] initial socialities with
/// N(., 0.1) steps, N(0, 4I) initial positions with N(., 0.05 I) steps, then
/// centered positions. Normal second arguments are variances.
inline LatentState simulate_state(std::size_t n, std::size_t K, std::size_t T,
                                  std::size_t d, std::uint64_t seed) {
  if (n < 2 || K < 1 || T < 1 || d < 1)
    throw ValidationError("simulate_state requires n>=2, K>=1, T>=1, d>=1");
  LatentState s(n, K, T, d);
  const Rng root(seed);

  Rng rl = root.split(1);
  for (std::size_t h = 0; h < d; ++h)
    s.lambda(0, h) = rl.bernoulli(0.5) ? 1.0 : -1.0;
  for (std::size_t k = 1; k < K; ++k)
    for (std::size_t h = 0; h < d; ++h) s.lambda(k, h) = rl.uniform(-2.0, 2.0);

  Rng rd = root.split(2);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      s.delta[k](0, i) = rd.uniform(-4.0, 4.0);
      for (std::size_t t = 1; t < T; ++t)
        s.delta[k](t, i) = rd.normal(s.delta[k](t - 1, i), 0.1);
    }

  Rng rx = root.split(3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < d; ++h) {
      s.latent[0](i, h) = rx.normal(0.0, 4.0);
      for (std::size_t t = 1; t < T; ++t)
        s.latent[t](i, h) = rx.normal(s.latent[t - 1](i, h), 0.05);
    }

  center_latent_positions(s);
  return s;
}

/// Samples every dyad independently from its Bernoulli probability.
inline DynamicNetwork simulate_network(const LatentState& s,
                                       std::uint64_t seed) {
  s.validate();
  DynamicNetwork net(s.n, s.n_layers, s.n_steps);
  const Rng root(seed);
  for (std::size_t k = 0; k < s.n_layers; ++k)
    for (std::size_t t = 0; t < s.n_steps; ++t) {
      Rng rng = root.split(k * s.n_steps + t);
      for (std::size_t i = 1; i < s.n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          net.set_value(k, t, i, j,
                        rng.uniform() < dyad_probability(s, k, t, i, j) ? 1 : 0);
    }
  return net;
}

/// Moves to the identified parameterization: centered positions, with the
/// translation c absorbed into the socialities as
/// delta + X~' Lambda c + c' Lambda c / 2. Log-odds are unchanged.
inline LatentState center_state(const LatentState& s) {
  LatentState out = s;
  for (std::size_t t = 0; t < s.n_steps; ++t) {
    const Eigen::RowVectorXd c = s.latent[t].colwise().mean();
    out.latent[t] = s.latent[t].rowwise() - c;
    for (std::size_t k = 0; k < s.n_layers; ++k) {
      const Eigen::RowVectorXd lc = s.lambda.row(k).cwiseProduct(c);
      const double half_quad = 0.5 * lc.dot(c);
      for (std::size_t i = 0; i < s.n; ++i)
        out.delta[k](t, i) =
            s.delta[k](t, i) + out.latent[t].row(i).dot(lc) + half_quad;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr const char* kLatentStateFormat = "eigenmodel.latent_state/1";

namespace detail {
inline nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_rows(const nlohmann::json& j,
                                        std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows)
    throw ValidationError("matrix has wrong number of rows");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw ValidationError("matrix has wrong number of columns");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const LatentState& s) {
  nlohmann::ordered_json j;
  j["format"] = kLatentStateFormat;
  j["n_nodes"] = s.n;
  j["n_layers"] = s.n_layers;
  j["n_steps"] = s.n_steps;
  j["dim"] = s.dim;
  j["lambda"] = detail::matrix_rows(s.lambda);
  // delta[k][t][i]
  nlohmann::json delta = nlohmann::json::array();
  for (const auto& m : s.delta) delta.push_back(detail::matrix_rows(m));
  j["delta"] = delta;
  // latent[t][i][h]
  nlohmann::json latent = nlohmann::json::array();
  for (const auto& m : s.latent) latent.push_back(detail::matrix_rows(m));
  j["latent"] = latent;
  return j;
}

inline LatentState latent_state_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kLatentStateFormat)
      throw ValidationError("not a latent state document");
    const auto n = j.at("n_nodes").get<std::size_t>();
    const auto K = j.at("n_layers").get<std::size_t>();
    const auto T = j.at("n_steps").get<std::size_t>();
    const auto d = j.at("dim").get<std::size_t>();
    LatentState s(n, K, T, d);
    s.lambda = detail::matrix_from_rows(j.at("lambda"), K, d);
    const auto& delta = j.at("delta");
    const auto& latent = j.at("latent");
    if (delta.size() != K || latent.size() != T)
      throw ValidationError("latent state arrays have wrong length");
    for (std::size_t k = 0; k < K; ++k)
      s.delta[k] = detail::matrix_from_rows(delta[k], T, n);
    for (std::size_t t = 0; t < T; ++t)
      s.latent[t] = detail::matrix_from_rows(latent[t], n, d);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("latent state: ") + e.what());
  }
}

}  // namespace eigenmodel
