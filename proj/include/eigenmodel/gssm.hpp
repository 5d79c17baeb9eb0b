#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "eigenmodel/errors.hpp"

namespace eigenmodel {

/// Expected natural parameters of a random-walk Gaussian state space model
///   x_1 ~ N(0, I/prec_init),  x_t | x_{t-1} ~ N(x_{t-1}, I/prec_step),
/// with observation terms exp(gamma1_t' x_t - x_t' gamma2_t x_t / 2).
struct GssmInput {
  std::vector<Eigen::VectorXd> gamma1;
  std::vector<Eigen::MatrixXd> gamma2;
  double prec_init = 1.0;
  double prec_step = 1.0;

  GssmInput() = default;
  GssmInput(std::size_t steps, std::size_t dim)
      : gamma1(steps, Eigen::VectorXd::Zero(dim)),
        gamma2(steps, Eigen::MatrixXd::Zero(dim, dim)) {}

  std::size_t steps() const { return gamma1.size(); }
  std::size_t dim() const { return gamma1.empty() ? 0 : gamma1[0].size(); }

  void validate() const {
    if (gamma1.empty() || gamma1.size() != gamma2.size())
      throw ValidationError("gssm input needs matching, nonempty gamma arrays");
    if (!(prec_init > 0.0) || !(prec_step > 0.0) || !std::isfinite(prec_init) ||
        !std::isfinite(prec_step))
      throw ValidationError("gssm precisions must be positive and finite");
    const auto d = static_cast<Eigen::Index>(dim());
    for (std::size_t t = 0; t < steps(); ++t) {
      const auto& g2 = gamma2[t];
      if (gamma1[t].size() != d || g2.rows() != d || g2.cols() != d)
        throw ValidationError("gssm input has inconsistent dimensions");
      if (!gamma1[t].allFinite() || !g2.allFinite())
        throw ValidationError("gssm input is not finite");
      if ((g2 - g2.transpose()).cwiseAbs().maxCoeff() >
          1e-10 * (1.0 + g2.cwiseAbs().maxCoeff()))
        throw ValidationError("gamma2 must be symmetric");
    }
  }
};

struct FilteredMoments {
  std::vector<Eigen::VectorXd> mean;       // mu_t
  std::vector<Eigen::MatrixXd> cov;        // Sigma_t
  std::vector<Eigen::MatrixXd> pred_cov;   // Sigma*_t, t < T
};

struct SmoothedMarginals {
  std::vector<Eigen::VectorXd> mean;       // nu_t
  std::vector<Eigen::MatrixXd> cov;        // Upsilon_t
  std::vector<Eigen::MatrixXd> cross_cov;  // Cov(x_t, x_{t+1}), t < T
};

namespace detail {

inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("information matrix is not positive definite");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

inline Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& m,
                                 const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("information matrix is not positive definite");
  return llt.solve(rhs);
}

}  // namespace detail

/// Forward pass: filtered moments and the one-step terms Sigma*_t.
inline FilteredMoments kalman_filter(const GssmInput& in) {
  in.validate();
  const std::size_t T = in.steps();
  const auto d = static_cast<Eigen::Index>(in.dim());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const double s = in.prec_step;

  FilteredMoments f;
  f.mean.resize(T);
  f.cov.resize(T);
  f.pred_cov.resize(T - 1);

  f.cov[0] = detail::spd_inverse(in.prec_init * I + in.gamma2[0]);
  f.mean[0] = f.cov[0] * in.gamma1[0];
  Eigen::MatrixXd prev_info = detail::spd_inverse(f.cov[0]);
  for (std::size_t t = 1; t < T; ++t) {
    const Eigen::MatrixXd& star = f.pred_cov[t - 1] =
        detail::spd_inverse(s * I + prev_info);
    f.cov[t] = detail::spd_inverse(s * I + in.gamma2[t] - s * s * star);
    f.mean[t] = f.cov[t] * (in.gamma1[t] + s * star * (prev_info * f.mean[t - 1]));
    prev_info = detail::spd_inverse(f.cov[t]);
  }
  return f;
}

/// Backward pass on top of the filter. Backward messages are carried in
/// information form, P_t = Psi_t^{-1} and h_t = Psi_t^{-1} eta_t, starting from
/// P_T = 0, so a flat message never needs an infinite covariance.
inline SmoothedMarginals kalman_smoother(const GssmInput& in) {
  const FilteredMoments f = kalman_filter(in);
  const std::size_t T = in.steps();
  const auto d = static_cast<Eigen::Index>(in.dim());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const double s = in.prec_step;

  SmoothedMarginals out;
  out.mean.resize(T);
  out.cov.resize(T);
  out.cross_cov.resize(T - 1);
  out.mean[T - 1] = f.mean[T - 1];
  out.cov[T - 1] = f.cov[T - 1];

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
  for (std::size_t t = T - 1; t >= 1; --t) {
    const Eigen::MatrixXd star_info = s * I + in.gamma2[t] + P;  // Psi*_t^{-1}
    const Eigen::MatrixXd star = detail::spd_inverse(star_info);
    const Eigen::VectorXd h_prev = s * (star * (in.gamma1[t] + h));
    Eigen::MatrixXd P_prev = s * I - s * s * star;
    P_prev = 0.5 * (P_prev + P_prev.transpose());

    const Eigen::MatrixXd filt_info = detail::spd_inverse(f.cov[t - 1]);
    out.cov[t - 1] = detail::spd_inverse(filt_info + P_prev);
    out.mean[t - 1] = out.cov[t - 1] * (filt_info * f.mean[t - 1] + h_prev);
    const Eigen::MatrixXd& pstar = f.pred_cov[t - 1];
    // s Sigma*_{t-1} (Psi*_t^{-1} - s^2 Sigma*_{t-1})^{-1}
    out.cross_cov[t - 1] =
        s * detail::spd_solve(star_info - s * s * pstar, pstar).transpose();

    P = std::move(P_prev);
    h = h_prev;
  }
  return out;
}

}  // namespace eigenmodel
