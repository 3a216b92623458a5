#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "wpcn/baselines.hpp"
#include "wpcn/error.hpp"
#include "wpcn/harness.hpp"

namespace {

using namespace wpcn;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

std::string describe(const SolveReport& rep, const TrialInstance& inst, std::size_t ch,
                     const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "scheme: " << to_string(rep.scheme) << '\n'
     << "status: " << to_string(rep.status) << '\n'
     << "wds: " << inst.positions.size() << "  antennas: " << inst.phy.antennas
     << "  d: " << fmt(cfg.distance) << "  r: " << fmt(cfg.radius) << '\n';
  if (rep.scheme != SchemeId::independent_eb) os << "cluster_head: " << ch << '\n';
  os << "max_min_rate: " << fmt(rep.sbar_star) << '\n'
     << "evaluated_min_rate: " << fmt(rep.rates.min_rate) << '\n'
     << "sum_rate: " << fmt(rep.rates.sum_rate) << '\n'
     << "rates: " << join(rep.rates.rates) << '\n';

  const Eigen::MatrixXcd* q = nullptr;
  if (rep.scheme == SchemeId::independent_eb) {
    os << "tau1: " << fmt(rep.independent.tau1) << '\n'
       << "tau2: " << join(rep.independent.tau2) << '\n';
    q = &rep.independent.Q;
  } else {
    const Allocation& a = rep.allocation;
    os << "tau1: " << fmt(a.tau1) << '\n'
       << "tau2: " << join(a.tau2) << '\n'
       << "tau3: " << join(a.tau3) << '\n'
       << "p3_watts: " << join(a.p3) << '\n';
    q = &a.Q;
  }
  if (q->size() > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(*q, Eigen::EigenvaluesOnly);
    std::vector<double> ev(eig.eigenvalues().data(),
                           eig.eigenvalues().data() + eig.eigenvalues().size());
    os << "Q_eigenvalues: " << join(ev) << '\n';
  }
  os << "newton_iterations: " << rep.newton_iterations << '\n'
     << "outer_iterations: " << rep.outer_iterations << '\n'
     << "gap_bound: " << fmt(rep.gap_bound) << '\n';
  if (!rep.message.empty()) os << "note: " << rep.message << '\n';
  return os.str();
}

std::string table_text(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %8s  %-24s %-18s %12s %12s %7s %5s\n", "var", "value",
                "scheme", "strategy", "maxmin", "sum", "trials", "fail");
  os << line;
  for (const ResultRow& r : rows) {
    std::snprintf(line, sizeof line, "%-4s %8.4g  %-24s %-18s %12.6g %12.6g %7zu %5zu\n",
                  std::string(to_string(r.sweep_var)).c_str(), r.sweep_value,
                  std::string(to_string(r.scheme)).c_str(), r.strategy.c_str(), r.mean_maxmin,
                  r.mean_sum, r.n_trials, r.n_failures);
    os << line;
  }
  return os.str();
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  bool quiet = false;
  int threads = 0;
};

ExperimentConfig base_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  return cfg;
}

int cmd_solve(const Common& c, const std::string& scheme_name, const std::string& strategy_name) {
  ExperimentConfig cfg = base_config(c);
  const SchemeId scheme = parse_scheme(scheme_name);
  const ChStrategy strategy = parse_ch_strategy(strategy_name);
  const TrialInstance inst = place_trial(cfg, 0, cfg.num_wds, cfg.distance, cfg.radius);
  std::size_t ch = 0;
  if (scheme != SchemeId::independent_eb) {
    Rng rng(trial_seed(cfg.seed, 0), streams::cluster_head);
    ch = select_ch(inst.positions, strategy, rng);
  }
  const ChannelRealization chan = trial_channels(cfg, 0, inst, ch);
  const SolveReport rep = solve_scheme(scheme, chan, cfg.phy, cfg.solver);
  const std::string text = describe(rep, inst, ch, cfg);
  if (!c.out.empty()) write_text(text, c.out);
  if (!c.quiet) std::cout << text;
  return rep.status == SolveStatus::optimal ? 0 : 2;
}

int run_table(const Common& c, const ExperimentConfig& cfg) {
  RunOptions opts;
  opts.threads = c.threads;
  const std::vector<ResultRow> rows = run_experiment(cfg, opts);
  if (!cfg.output.empty()) emit_csv(rows, cfg.output);
  if (!c.quiet) std::cout << table_text(rows);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& strategy_name) {
  if (c.config.empty()) throw Error(ErrorCode::config_error, "sweep needs --config");
  ExperimentConfig cfg = base_config(c);
  if (!strategy_name.empty()) cfg.strategies = {parse_ch_strategy(strategy_name)};
  if (cfg.output.empty()) throw Error(ErrorCode::config_error, "sweep needs --out or 'output'");
  return run_table(c, cfg);
}

int cmd_ch_compare(const Common& c, const std::string& vary) {
  ExperimentConfig cfg = base_config(c);
  if (c.config.empty()) {
    cfg.sweep_var = parse_sweep_var(vary);
    cfg.sweep_values = cfg.sweep_var == SweepVar::d ? std::vector<double>{4, 5, 6, 7, 8}
                                                    : std::vector<double>{1, 1.5, 2, 2.5, 3};
  }
  cfg.schemes = {SchemeId::proposed_eb_cooperation, SchemeId::cooperation_no_eb};
  cfg.strategies = {ChStrategy::closest_to_center, ChStrategy::closest_to_hap,
                    ChStrategy::random};
  return run_table(c, cfg);
}

int cmd_verify(const Common& c, int instances, int points) {
  VerifyOptions opts;
  opts.seed = c.seed.value_or(1);
  opts.quiet = c.quiet;
  opts.oracle_instances = instances;
  opts.hessian_points = points;
  const VerifyReport rep = run_verify(opts, std::cout);
  std::cout << (rep.passed() ? "verify: PASS" : "verify: FAIL") << " (oracle "
            << rep.oracle_checked - rep.oracle_failed << '/' << rep.oracle_checked
            << ", worst relative gap " << fmt(rep.worst_relative_gap) << "; hessian "
            << rep.hessian_checked - rep.hessian_failed << '/' << rep.hessian_checked << ")\n";
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min throughput of cluster-based cooperation in a wireless-powered network"};
  app.require_subcommand(1);

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Base random seed");
    sub->add_option("--config", common.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output path");
    sub->add_flag("--quiet", common.quiet, "Suppress stdout output");
    sub->add_option("--threads", common.threads, "OpenMP threads (0 = default)")
        ->check(CLI::NonNegativeNumber);
  };

  std::string scheme = "proposed-eb-cooperation";
  std::string strategy = "closest-to-center";
  auto* solve = app.add_subcommand("solve", "Solve one seeded instance and print the report");
  add_common(solve);
  solve->add_option("--scheme", scheme, "proposed-eb-cooperation | cooperation-no-eb | independent-eb");
  solve->add_option("--strategy", strategy, "closest-to-center | closest-to-hap | random");

  std::string sweep_strategy;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment config and write CSV");
  add_common(sweep);
  sweep->add_option("--strategy", sweep_strategy, "Override the config's CH strategies");

  std::string vary = "r";
  auto* compare = app.add_subcommand("ch-compare", "Compare CH selection strategies");
  add_common(compare);
  compare->add_option("--vary", vary, "Sweep variable when no config is given")
      ->check(CLI::IsMember({"r", "d"}));

  int instances = 12;
  int points = 1000;
  auto* verify = app.add_subcommand("verify", "Solver against the grid oracle, Hessian checks");
  add_common(verify);
  verify->add_option("--instances", instances, "Oracle instances")->check(CLI::PositiveNumber);
  verify->add_option("--hessian-points", points, "Hessian sample points")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) return cmd_solve(common, scheme, strategy);
    if (*sweep) return cmd_sweep(common, sweep_strategy);
    if (*compare) return cmd_ch_compare(common, vary);
    if (*verify) return cmd_verify(common, instances, points);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  }
  return 1;
}
