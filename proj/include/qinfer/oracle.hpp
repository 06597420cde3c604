#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qinfer/env.hpp"
#include "qinfer/qlearn.hpp"
#include "qinfer/qtable.hpp"

namespace qinfer {

// Exact Bellman operator using the environment's transition/reward
// description. Terminal continuation values are 0 and terminal rows of the
// result are 0.
QTable bellman_apply(const EnvModel& env, double gamma, const QTable& q);

// Fixed point of the exact Bellman operator: iterates from zero until the
// sup-norm residual is at most tol.
QTable value_iteration(const EnvModel& env, double gamma, double tol,
                       long max_sweeps = 1000000);

struct StationaryEstimate {
  QTable mean;
  QTable stderr_of_mean;
  int n_sims = 0;
};

// Mean of the final iterate Q_T over n_sims independent chains, with
// entrywise Monte-Carlo standard errors. Chain i draws from
// substream(seed, kStationaryStream, i).
StationaryEstimate mc_stationary_mean(const EnvModel& env,
                                      const ChainConfig& cfg, int n_sims,
                                      std::uint64_t seed, int jobs = 1);

// Literal two-pass evaluation of the random-scaling diagonal: computes the
// stream mean, then the partial-sum deviations, in extended precision.
// Time order matters; reversing a non-constant stream changes the result.
std::vector<double> dhat_bruteforce(
    const std::vector<std::vector<double>>& iterates,
    const std::vector<int>& batch_sizes);

struct KappaEstimate {
  double quantile = 0.0;
  double stderr_boot = 0.0;
};

struct KappaTable {
  std::map<double, KappaEstimate> by_alpha_half;
  double median = 0.0;
  double median_stderr = 0.0;
  long n_paths = 0;
  int n_grid = 0;
};

// Monte-Carlo upper quantiles of the pivot
//   kappa = W(1) / sqrt(int_0^1 (W(r) - r W(1))^2 dr)
// from discretized Brownian paths on an n_grid uniform partition of [0,1]
// (left-Riemann integral), with bootstrap standard errors.
// Requires n_paths >= 10000 and n_grid >= 100.
KappaTable kappa_mc(long n_paths, int n_grid, std::uint64_t seed, int jobs = 1);

}  // namespace qinfer
