// Command-line front end: coverage experiments, exact Q*, kappa quantiles,
// and stationary-mean estimates, all driven by the plain-text config format
// documented in the README.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "qinfer/errors.hpp"
#include "qinfer/harness.hpp"
#include "qinfer/oracle.hpp"
#include "qinfer/rsinfer.hpp"

namespace {

using qinfer::ReportFormat;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes either to the given path or to stdout.
void deliver(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw qinfer::IoError("cannot open '" + out_path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw qinfer::IoError("failed while writing '" + out_path + "'");
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw qinfer::ConfigError("unknown format '" + name + "' (csv | json)");
}

int run_coverage_cmd(const std::string& config_path, const std::string& format,
                     const std::string& out_path, long seed, bool seed_set,
                     int jobs) {
  qinfer::ExperimentSpec spec = qinfer::parse_config_file(config_path);
  if (seed_set) spec.base_seed = static_cast<std::uint64_t>(seed);
  const qinfer::CoverageReport report =
      spec.batch_size > 1 ? qinfer::compare_methods(spec, jobs)
                          : qinfer::run_coverage(spec, jobs);
  const ReportFormat fmt_kind = parse_format(format);
  if (out_path.empty()) {
    qinfer::emit_report(report, fmt_kind, std::cout);
  } else {
    qinfer::write_report(report, fmt_kind, out_path);
  }
  return 0;
}

int run_qstar_cmd(const std::string& config_path, const std::string& out_path) {
  const qinfer::ExperimentSpec spec = qinfer::parse_config_file(config_path);
  const auto env = spec.build_env();
  const qinfer::QTable q = qinfer::value_iteration(*env, spec.gamma, 1e-10);
  std::string text = "state,action,q_star\n";
  for (int s = 0; s < q.num_states; ++s) {
    for (int a = 0; a < q.num_actions; ++a) {
      text += std::to_string(s) + ',' + std::to_string(a) + ',' + fmt(q(s, a)) + '\n';
    }
  }
  deliver(text, out_path);
  return 0;
}

int run_kappa_cmd(long paths, int grid, long seed, const std::string& format,
                  const std::string& out_path, int jobs) {
  const qinfer::KappaTable table =
      qinfer::kappa_mc(paths, grid, static_cast<std::uint64_t>(seed), jobs);
  auto label = [](double alpha_half) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alpha_half);
    return std::string(buf);
  };
  std::string text;
  if (parse_format(format) == ReportFormat::kCsv) {
    text = "alpha_half,quantile,mc_stderr\n";
    for (const auto& [alpha_half, est] : table.by_alpha_half) {
      text += label(alpha_half) + ',' + fmt(est.quantile) + ',' +
              fmt(est.stderr_boot) + '\n';
    }
  } else {
    text = "{\n  \"n_paths\": " + std::to_string(table.n_paths) +
           ",\n  \"n_grid\": " + std::to_string(table.n_grid) + ",\n  \"quantiles\": [\n";
    bool first = true;
    for (const auto& [alpha_half, est] : table.by_alpha_half) {
      if (!first) text += ",\n";
      first = false;
      text += "    {\"alpha_half\": " + label(alpha_half) +
              ", \"quantile\": " + fmt(est.quantile) +
              ", \"mc_stderr\": " + fmt(est.stderr_boot) + "}";
    }
    text += "\n  ]\n}\n";
  }
  deliver(text, out_path);
  return 0;
}

int run_stationary_cmd(const std::string& config_path, int sims, bool sims_set,
                       long seed, bool seed_set, const std::string& out_path,
                       int jobs) {
  qinfer::ExperimentSpec spec = qinfer::parse_config_file(config_path);
  if (seed_set) spec.base_seed = static_cast<std::uint64_t>(seed);
  const int n_sims = sims_set ? sims : spec.stationary_sims;
  if (n_sims < 1) throw qinfer::ConfigError("--sims must be >= 1");
  const auto env = spec.build_env();
  qinfer::ChainConfig cfg;
  cfg.eta = spec.eta;
  cfg.gamma = spec.gamma;
  cfg.batch = qinfer::BatchSchedule::constant(spec.batch_size);
  cfg.horizon = spec.horizon;
  const qinfer::StationaryEstimate est =
      qinfer::mc_stationary_mean(*env, cfg, n_sims, spec.base_seed, jobs);
  std::string text = "state,action,mean,stderr\n";
  for (int s = 0; s < est.mean.num_states; ++s) {
    for (int a = 0; a < est.mean.num_actions; ++a) {
      text += std::to_string(s) + ',' + std::to_string(a) + ',' +
              fmt(est.mean(s, a)) + ',' + fmt(est.stderr_of_mean(s, a)) + '\n';
    }
  }
  deliver(text, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-averaged synchronous Q-learning with online "
               "random-scaling confidence intervals"};
  app.require_subcommand(1);

  std::string config_path;
  std::string format = "csv";
  std::string out_path;
  long seed = 0;
  int jobs = 1;

  auto* coverage = app.add_subcommand(
      "coverage", "Run the replicated coverage experiment from a config file");
  coverage->add_option("--config", config_path, "experiment config file")->required();
  coverage->add_option("--format", format, "csv | json");
  coverage->add_option("--out", out_path, "output path (default stdout)");
  auto* cov_seed = coverage->add_option("--seed", seed, "override exp.seed");
  coverage->add_option("--jobs", jobs, "worker threads (output is identical for any value)");

  auto* qstar = app.add_subcommand("q-star", "Exact Q* by value iteration");
  qstar->add_option("--config", config_path, "experiment config file")->required();
  qstar->add_option("--out", out_path, "output path (default stdout)");

  long paths = 200000;
  int grid = 1000;
  long kappa_seed = 12345;
  auto* kappa = app.add_subcommand(
      "kappa-table", "Monte-Carlo quantiles of the random-scaling pivot");
  kappa->add_option("--paths", paths, "number of Brownian paths");
  kappa->add_option("--grid", grid, "time-grid points per path");
  kappa->add_option("--seed", kappa_seed, "simulation seed");
  kappa->add_option("--format", format, "csv | json");
  kappa->add_option("--out", out_path, "output path (default stdout)");
  kappa->add_option("--jobs", jobs, "worker threads");

  int sims = 0;
  auto* stationary = app.add_subcommand(
      "stationary-mean", "Monte-Carlo estimate of the stationary mean E[Q]");
  stationary->add_option("--config", config_path, "experiment config file")->required();
  auto* sims_opt = stationary->add_option("--sims", sims, "number of chains");
  auto* stat_seed = stationary->add_option("--seed", seed, "override exp.seed");
  stationary->add_option("--out", out_path, "output path (default stdout)");
  stationary->add_option("--jobs", jobs, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (coverage->parsed()) {
      return run_coverage_cmd(config_path, format, out_path, seed,
                              cov_seed->count() > 0, jobs);
    }
    if (qstar->parsed()) return run_qstar_cmd(config_path, out_path);
    if (kappa->parsed()) {
      return run_kappa_cmd(paths, grid, kappa_seed, format, out_path, jobs);
    }
    if (stationary->parsed()) {
      return run_stationary_cmd(config_path, sims, sims_opt->count() > 0, seed,
                                stat_seed->count() > 0, out_path, jobs);
    }
  } catch (const qinfer::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const qinfer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
