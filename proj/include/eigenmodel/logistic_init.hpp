#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "eigenmodel/model.hpp"
#include "eigenmodel/network.hpp"

namespace eigenmodel {

struct TwoWayLogitOptions {
  double ridge = 1e-2;  // penalty (ridge/2) * ||delta||^2
  std::size_t max_iter = 50;
  double grad_tol = 1e-8;
};

namespace detail {

inline double two_way_objective(const DynamicNetwork& net, std::size_t k,
                                std::size_t t, const Eigen::VectorXd& delta,
                                double ridge) {
  double ll = 0.0;
  const std::size_t n = net.n_nodes();
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      if (!net.observed(k, t, i, j)) continue;
      const double eta = delta[i] + delta[j];
      // log(1 + e^eta), evaluated without overflow
      const double softplus =
          eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
      ll += net.value(k, t, i, j) * eta - softplus;
    }
  return ll - 0.5 * ridge * delta.squaredNorm();
}

}  // namespace detail

/// Ridge-penalized fit of Y_ij ~ Bernoulli(logit^-1(delta_i + delta_j)) on the
/// observed dyads of slice (k, t) by damped Newton iterations.
inline Eigen::VectorXd fit_two_way_logit(const DynamicNetwork& net,
                                         std::size_t k, std::size_t t,
                                         const TwoWayLogitOptions& opt = {}) {
  const std::size_t n = net.n_nodes();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  double obj = detail::two_way_objective(net, k, t, delta, opt.ridge);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    Eigen::VectorXd grad = -opt.ridge * delta;
    Eigen::MatrixXd info = opt.ridge * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        if (!net.observed(k, t, i, j)) continue;
        const double p = inv_logit(delta[i] + delta[j]);
        const double r = net.value(k, t, i, j) - p;
        const double w = p * (1.0 - p);
        grad[i] += r;
        grad[j] += r;
        info(i, i) += w;
        info(j, j) += w;
        info(i, j) += w;
        info(j, i) += w;
      }
    if (grad.cwiseAbs().maxCoeff() < opt.grad_tol) break;
    const Eigen::VectorXd step = info.llt().solve(grad);
    double scale = 1.0;
    Eigen::VectorXd proposal = delta + step;
    double proposal_obj = detail::two_way_objective(net, k, t, proposal, opt.ridge);
    while (proposal_obj < obj && scale > 1e-8) {
      scale *= 0.5;
      proposal = delta + scale * step;
      proposal_obj = detail::two_way_objective(net, k, t, proposal, opt.ridge);
    }
    if (proposal_obj < obj) break;
    delta = std::move(proposal);
    obj = proposal_obj;
  }
  return delta;
}

}  // namespace eigenmodel
