#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "eigenmodel/cavi.hpp"
#include "eigenmodel/eval.hpp"
#include "eigenmodel/postprocess.hpp"
#include "eigenmodel/posterior.hpp"

// Comma-separated tables with a header row; '#' lines carry metadata.
namespace eigenmodel::tables {

/// Text that reads back as the same double.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline std::string comment_block(const Metadata& meta) {
  std::string out;
  for (const auto& [key, value] : meta) {
    out += "# " + key + ": ";
    for (char c : value) out += (c == '\n' || c == '\r') ? ' ' : c;
    out += '\n';
  }
  return out;
}

/// One row per (restart, iteration); `selected` marks the returned restart.
inline void write_trace(std::ostream& out, const Metadata& meta, const FitResult& fit) {
  out << comment_block(meta);
  out << "# selected_restart: " << fit.restart << '\n';
  out << "restart,iteration,expected_loglik,converged,clamp_events\n";
  for (std::size_t r = 0; r < fit.restarts.size(); ++r) {
    const auto& run = fit.restarts[r];
    if (!run.error.empty()) out << "# restart " << r << " aborted: " << run.error << '\n';
    for (std::size_t s = 0; s < run.trace.size(); ++s)
      out << r << ',' << s + 1 << ',' << num(run.trace[s]) << ','
          << (run.converged ? 1 : 0) << ',' << run.clamp_events << '\n';
  }
}

/// k,t,i,j,probability for every dyad, indices 1-based.
inline void write_probabilities(std::ostream& out, const Metadata& meta,
                                const VariationalPosterior& q) {
  const auto p = plug_in_probabilities(q);
  out << comment_block(meta) << "k,t,i,j,probability\n";
  for (std::size_t k = 0; k < q.n_layers; ++k)
    for (std::size_t t = 0; t < q.n_steps; ++t)
      for (std::size_t i = 1; i < q.n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          out << k + 1 << ',' << t + 1 << ',' << i + 1 << ',' << j + 1 << ','
              << num(p[q.slice_offset(k, t) + pair_index(i, j)]) << '\n';
}

inline void write_branching(std::ostream& out, const Metadata& meta,
                            const BranchingSamples& s) {
  out << comment_block(meta);
  out << "# skipped_empty_draws: " << s.skipped << '\n';
  out << "# clamp_events: " << s.clamp_events << '\n';
  out << "draw,kappa\n";
  for (std::size_t m = 0; m < s.values.size(); ++m)
    out << s.draw_index[m] + 1 << ',' << num(s.values[m]) << '\n';
}

inline void write_eval(std::ostream& out, const Metadata& meta, const EvalReport& r) {
  out << comment_block(meta) << "statistic,value\n";
  out << "latent_rel_err," << num(r.latent_rel_err) << '\n';
  out << "social_rel_err," << num(r.social_rel_err) << '\n';
  out << "lambda_rel_err," << num(r.lambda_rel_err) << '\n';
  out << "proba_rel_err," << num(r.proba_rel_err) << '\n';
  out << "auc_in," << num(r.auc_in) << '\n';
  if (r.auc_holdout) out << "auc_holdout," << num(*r.auc_holdout) << '\n';
}

/// One row per (k, t, i) with the identified sociality mean and 95% interval.
inline void write_social_summary(std::ostream& out, const Metadata& meta,
                                 const TildeSocial& s) {
  out << comment_block(meta) << "k,t,i,mean,lower,upper\n";
  for (std::size_t k = 0; k < s.mean.size(); ++k)
    for (Eigen::Index t = 0; t < s.mean[k].cols(); ++t)
      for (Eigen::Index i = 0; i < s.mean[k].rows(); ++i)
        out << k + 1 << ',' << t + 1 << ',' << i + 1 << ',' << num(s.mean[k](i, t))
            << ',' << num(s.lower[k](i, t)) << ',' << num(s.upper[k](i, t)) << '\n';
}

/// One row per (t, i): centered mean, marginal 95% normal interval and the
/// full covariance of each coordinate.
inline void write_latent_summary(std::ostream& out, const Metadata& meta,
                                 const TildeLatent& s) {
  const std::size_t n = s.mean.size();
  const std::size_t T = n ? s.mean[0].size() : 0;
  const Eigen::Index d = (n && T) ? s.mean[0][0].size() : 0;
  out << comment_block(meta) << "t,i";
  for (Eigen::Index h = 0; h < d; ++h)
    out << ",mean" << h + 1 << ",lower" << h + 1 << ",upper" << h + 1;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = a; b < d; ++b) out << ",cov" << a + 1 << b + 1;
  out << '\n';
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      out << t + 1 << ',' << i + 1;
      const auto& m = s.mean[i][t];
      const auto& S = s.cov[i][t];
      for (Eigen::Index h = 0; h < d; ++h) {
        const double half = 1.959963984540054 * std::sqrt(std::max(S(h, h), 0.0));
        out << ',' << num(m[h]) << ',' << num(m[h] - half) << ',' << num(m[h] + half);
      }
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = a; b < d; ++b) out << ',' << num(S(a, b));
      out << '\n';
    }
}

}  // namespace eigenmodel::tables
