// Command-line front end: simulate, fit, eval, predict, branching, summarize.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eigenmodel/eigenmodel.hpp"

namespace em = eigenmodel;
using em::tables::Metadata;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::string g_command_line;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw em::IoError("cannot open '" + path + "' for reading");
  return in;
}

// Text is assembled in memory and written in one go so a failed run leaves
// no half-written file behind.
void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw em::IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw em::IoError("failed writing '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw em::ValidationError(path + ": " + e.what());
  }
}

Metadata provenance(std::initializer_list<std::pair<std::string, std::string>> extra) {
  Metadata meta{{"tool", std::string("eigenmodel ") + EIGENMODEL_VERSION},
                {"command", g_command_line}};
  meta.insert(meta.end(), extra.begin(), extra.end());
  return meta;
}

nlohmann::ordered_json provenance_json(const Metadata& meta) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

em::DynamicNetwork read_network(const std::string& edges, const std::string& meta_path) {
  auto meta_in = open_in(meta_path);
  const em::NetworkMeta meta = em::parse_meta(meta_in);
  if (meta.n_nodes < 2 || meta.n_layers < 1 || meta.n_steps < 1)
    throw em::ValidationError("metadata needs n_nodes >= 2, n_layers >= 1, n_steps >= 1");
  auto in = open_in(edges);
  try {
    return em::load_network(in, meta);
  } catch (const em::ParseError& e) {
    throw em::ParseError(e.line(), edges + ": " + e.what());
  }
}

em::VariationalPosterior read_posterior(const std::string& path) {
  return em::posterior_from_json(read_json(path));
}

std::string replicate_name(const std::string& prefix, std::size_t r, std::size_t count,
                           const std::string& suffix) {
  if (count == 1) return prefix + suffix;
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu", r + 1);
  return prefix + buf + suffix;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw em::ValidationError(what);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t n = 50, k = 5, t = 10, d = 2;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::string out = "sim";
};

void cmd_simulate(const SimulateArgs& a) {
  require(a.n >= 2, "--n must be >= 2");
  require(a.k >= 1 && a.t >= 1 && a.d >= 1, "--k, --t and --d must be >= 1");
  require(a.replicates >= 1, "--replicates must be >= 1");
  const em::Rng root(a.seed);
  for (std::size_t r = 0; r < a.replicates; ++r) {
    em::Rng rng = root.split(r);
    const std::uint64_t state_seed = rng.next_u64();
    const std::uint64_t network_seed = rng.next_u64();
    const Metadata meta = provenance({{"seed", std::to_string(a.seed)},
                                      {"replicate", std::to_string(r + 1)},
                                      {"state_seed", std::to_string(state_seed)},
                                      {"network_seed", std::to_string(network_seed)}});
    const em::LatentState state = em::simulate_state(a.n, a.k, a.t, a.d, state_seed);
    const em::DynamicNetwork net = em::simulate_network(state, network_seed);

    nlohmann::ordered_json sj = em::to_json(state);
    sj["run"] = provenance_json(meta);
    write_file(replicate_name(a.out, r, a.replicates, "_state.json"), sj.dump(1) + "\n");

    std::ostringstream edges;
    em::write_edges(edges, net, em::tables::comment_block(meta));
    write_file(replicate_name(a.out, r, a.replicates, "_edges.csv"), edges.str());

    std::ostringstream m;
    em::write_meta(m, net.meta());
    write_file(replicate_name(a.out, r, a.replicates, "_meta.json"), m.str());
  }
}

// ---------------------------------------------------------------------------

struct PriorArgs {
  double eps = 0.05, tau2 = 10.0, tau2_delta = 10.0;
  double c_sigma2 = 2.0, d_sigma2 = 2.0, c_sigma2_delta = 2.0, d_sigma2_delta = 2.0;
  double rho = 0.5, sigma2_lambda = 10.0;

  em::Priors build() const {
    require(eps > 0.0 && tau2 > 0.0 && tau2_delta > 0.0,
            "--eps, --tau2 and --tau2-delta must be positive");
    em::Priors p = em::Priors::flat(eps, tau2, tau2_delta);
    p.c_sigma2 = c_sigma2;
    p.d_sigma2 = d_sigma2;
    p.c_sigma2_delta = c_sigma2_delta;
    p.d_sigma2_delta = d_sigma2_delta;
    p.rho = rho;
    p.sigma2_lambda = sigma2_lambda;
    p.validate();
    return p;
  }
};

struct FitArgs {
  std::string edges, meta;
  std::size_t d = 2;
  double tol = 1e-2;
  std::size_t max_iter = 1000, restarts = 10, jobs = 1;
  std::uint64_t seed = 1;
  bool jacobi = false;
  std::optional<double> holdout;
  std::uint64_t holdout_seed = 1;
  std::string out = "fit";
  PriorArgs priors;
};

void cmd_fit(const FitArgs& a) {
  em::FitConfig cfg;
  cfg.dim = a.d;
  cfg.priors = a.priors.build();
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.n_restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  cfg.parallel_restarts = a.jobs > 1 && !a.jacobi;
  cfg.sweep.jacobi = a.jacobi;
  cfg.sweep.jobs = a.jobs;
  cfg.validate();
  if (a.holdout)
    require(*a.holdout > 0.0 && *a.holdout < 1.0, "--holdout must lie in (0, 1)");

  em::DynamicNetwork net = read_network(a.edges, a.meta);
  Metadata meta = provenance({{"seed", std::to_string(a.seed)}});
  if (a.holdout) {
    meta.emplace_back("holdout_seed", std::to_string(a.holdout_seed));
    em::HoldoutSplit split = em::make_holdout(net, *a.holdout, a.holdout_seed);
    std::ostringstream h;
    em::write_heldout(h, split.heldout, em::tables::comment_block(meta));
    write_file(a.out + "_heldout.csv", h.str());
    net = std::move(split.train);
  }

  const em::FitResult result = em::fit(net, cfg);
  nlohmann::ordered_json pj = em::to_json(result.posterior);
  pj["run"] = provenance_json(meta);
  pj["run"]["selected_restart"] = result.restart;
  pj["run"]["converged"] = result.converged;
  pj["run"]["iterations"] = result.trace.size();
  write_file(a.out + "_posterior.json", pj.dump(1) + "\n");

  std::ostringstream tr;
  em::tables::write_trace(tr, meta, result);
  write_file(a.out + "_trace.csv", tr.str());

  std::cerr << "selected restart " << result.restart << " after " << result.trace.size()
            << " sweeps, " << (result.converged ? "converged" : "hit max-iter")
            << ", final expected log-likelihood "
            << em::tables::num(result.trace.back()) << '\n';
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string posterior, truth, edges, meta, heldout, out = "eval.csv";
  std::size_t samples = 2500;
  std::uint64_t seed = 1;
};

void cmd_eval(const EvalArgs& a) {
  require(a.samples >= 100, "--samples must be >= 100");
  const em::VariationalPosterior q = read_posterior(a.posterior);
  const em::LatentState truth = em::latent_state_from_json(read_json(a.truth));
  em::DynamicNetwork net = read_network(a.edges, a.meta);
  std::vector<em::HeldoutDyad> heldout;
  if (!a.heldout.empty()) {
    auto in = open_in(a.heldout);
    heldout = em::read_heldout(in, net.meta());
    net = em::apply_holdout(net, heldout);
  }
  const em::EvalReport r =
      em::evaluate(q, truth, net, heldout.empty() ? nullptr : &heldout, a.samples, a.seed);
  std::ostringstream out;
  em::tables::write_eval(out, provenance({{"seed", std::to_string(a.seed)},
                                          {"samples", std::to_string(a.samples)}}),
                         r);
  write_file(a.out, out.str());
}

struct PredictArgs {
  std::string posterior, out = "probabilities.csv";
};

void cmd_predict(const PredictArgs& a) {
  const em::VariationalPosterior q = read_posterior(a.posterior);
  std::ostringstream out;
  em::tables::write_probabilities(out, provenance({}), q);
  write_file(a.out, out.str());
}

struct BranchingArgs {
  std::string posterior, out = "branching.csv";
  std::size_t layer = 1, time = 1, draws = 250;
  std::uint64_t seed = 1;
};

void cmd_branching(const BranchingArgs& a) {
  require(a.draws >= 1, "--draws must be >= 1");
  const em::VariationalPosterior q = read_posterior(a.posterior);
  require(a.layer >= 1 && a.layer <= q.n_layers, "--layer out of range");
  require(a.time >= 1 && a.time <= q.n_steps, "--time out of range");
  const em::BranchingSamples s =
      em::branching_factor_posterior(q, a.layer - 1, a.time - 1, a.draws, a.seed);
  std::ostringstream out;
  em::tables::write_branching(out, provenance({{"seed", std::to_string(a.seed)},
                                               {"layer", std::to_string(a.layer)},
                                               {"time", std::to_string(a.time)}}),
                              s);
  write_file(a.out, out.str());
}

struct SummarizeArgs {
  std::string posterior, out = "summary";
  std::size_t samples = 2500;
  std::uint64_t seed = 1;
};

void cmd_summarize(const SummarizeArgs& a) {
  require(a.samples >= 100, "--samples must be >= 100");
  const em::VariationalPosterior q = read_posterior(a.posterior);
  const em::IdentifiedSummary s = em::identified_summary(q, a.samples, a.seed);
  const Metadata meta = provenance({{"seed", std::to_string(a.seed)},
                                    {"samples", std::to_string(a.samples)}});
  std::ostringstream social, latent;
  em::tables::write_social_summary(social, meta, s.social);
  em::tables::write_latent_summary(latent, meta, s.latent);
  write_file(a.out + "_social.csv", social.str());
  write_file(a.out + "_latent.csv", latent.str());
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    if (i) g_command_line += ' ';
    g_command_line += i == 0 ? std::string("eigenmodel") : std::string(argv[i]);
  }

  CLI::App app{"Variational inference for the eigenmodel of dynamic multilayer networks"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Draw parameter settings and networks");
  s->add_option("--n", sim.n, "Number of nodes")->capture_default_str();
  s->add_option("--k", sim.k, "Number of layers")->capture_default_str();
  s->add_option("--t", sim.t, "Number of time steps")->capture_default_str();
  s->add_option("--d", sim.d, "Latent dimension")->capture_default_str();
  s->add_option("--seed", sim.seed, "Root seed")->capture_default_str();
  s->add_option("--replicates", sim.replicates, "Number of independent replicates")
      ->capture_default_str();
  s->add_option("--out", sim.out, "Output prefix")->capture_default_str();

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Fit the variational posterior");
  f->add_option("--edges", fa.edges, "Edge list (k,t,i,j, 1-based)")->required();
  f->add_option("--meta", fa.meta, "Network metadata JSON")->required();
  f->add_option("--d", fa.d, "Latent dimension")->capture_default_str();
  f->add_option("--tol", fa.tol, "Stop when the monitor changes by less than this")
      ->capture_default_str();
  f->add_option("--max-iter", fa.max_iter, "Maximum sweeps per restart")
      ->capture_default_str();
  f->add_option("--restarts", fa.restarts, "Random initializations")->capture_default_str();
  f->add_option("--seed", fa.seed, "Root seed for initializations")->capture_default_str();
  f->add_option("--jobs", fa.jobs, "Threads for restarts (or nodes with --jacobi)")
      ->capture_default_str();
  f->add_flag("--jacobi", fa.jacobi,
              "Update nodes from the state at the start of each step (changes results)");
  f->add_option("--holdout", fa.holdout, "Fraction of dyads per slice to hold out");
  f->add_option("--holdout-seed", fa.holdout_seed, "Seed for the hold-out mask")
      ->capture_default_str();
  f->add_option("--out", fa.out, "Output prefix")->capture_default_str();
  f->add_option("--eps", fa.priors.eps, "Flatness of the initial-variance priors")
      ->capture_default_str();
  f->add_option("--tau2", fa.priors.tau2, "Prior mean of the initial latent variance")
      ->capture_default_str();
  f->add_option("--tau2-delta", fa.priors.tau2_delta,
                "Prior mean of the initial sociality variance")
      ->capture_default_str();
  f->add_option("--c-sigma2", fa.priors.c_sigma2)->capture_default_str();
  f->add_option("--d-sigma2", fa.priors.d_sigma2)->capture_default_str();
  f->add_option("--c-sigma2-delta", fa.priors.c_sigma2_delta)->capture_default_str();
  f->add_option("--d-sigma2-delta", fa.priors.d_sigma2_delta)->capture_default_str();
  f->add_option("--rho", fa.priors.rho, "Prior P(reference homophily = +1)")
      ->capture_default_str();
  f->add_option("--sigma2-lambda", fa.priors.sigma2_lambda,
                "Prior variance of the other homophily coefficients")
      ->capture_default_str();

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Compare a fit with the true parameters");
  e->add_option("--posterior", ea.posterior)->required();
  e->add_option("--truth", ea.truth, "Latent state JSON")->required();
  e->add_option("--edges", ea.edges)->required();
  e->add_option("--meta", ea.meta)->required();
  e->add_option("--heldout", ea.heldout, "Held-out dyads written by fit");
  e->add_option("--samples", ea.samples, "Draws for identified socialities")
      ->capture_default_str();
  e->add_option("--seed", ea.seed)->capture_default_str();
  e->add_option("--out", ea.out)->capture_default_str();

  PredictArgs pa;
  auto* p = app.add_subcommand("predict", "Plug-in edge probabilities for every dyad");
  p->add_option("--posterior", pa.posterior)->required();
  p->add_option("--out", pa.out)->capture_default_str();

  BranchingArgs ba;
  auto* b = app.add_subcommand("branching", "Posterior-predictive branching factors");
  b->add_option("--posterior", ba.posterior)->required();
  b->add_option("--layer", ba.layer, "Layer (1-based)")->capture_default_str();
  b->add_option("--time", ba.time, "Time step (1-based)")->capture_default_str();
  b->add_option("--draws", ba.draws, "Sampled networks")->capture_default_str();
  b->add_option("--seed", ba.seed)->capture_default_str();
  b->add_option("--out", ba.out)->capture_default_str();

  SummarizeArgs sa;
  auto* m = app.add_subcommand("summarize", "Identified positions and socialities");
  m->add_option("--posterior", sa.posterior)->required();
  m->add_option("--samples", sa.samples)->capture_default_str();
  m->add_option("--seed", sa.seed)->capture_default_str();
  m->add_option("--out", sa.out, "Output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitValidation;
  }

  try {
    if (*s) cmd_simulate(sim);
    if (*f) cmd_fit(fa);
    if (*e) cmd_eval(ea);
    if (*p) cmd_predict(pa);
    if (*b) cmd_branching(ba);
    if (*m) cmd_summarize(sa);
  } catch (const em::ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitValidation;
  } catch (const em::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const em::IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  }
  return 0;
}
