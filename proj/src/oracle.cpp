#include "qinfer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qinfer/parallel.hpp"
#include "qinfer/rng.hpp"

namespace qinfer {

QTable bellman_apply(const EnvModel& env, double gamma, const QTable& q) {
  const int ns = env.num_states();
  const int na = env.num_actions();
  if (q.num_states != ns || q.num_actions != na) {
    throw std::invalid_argument("Q-table shape does not match the environment");
  }

  std::vector<double> v(static_cast<std::size_t>(ns), 0.0);
  for (int s = 0; s < ns; ++s) {
    v[static_cast<std::size_t>(s)] = env.is_terminal(s) ? 0.0 : q.row_max(s);
  }

  QTable out(ns, na, 0.0);
  for (int s = 0; s < ns; ++s) {
    if (env.is_terminal(s)) continue;
    for (int a = 0; a < na; ++a) {
      out(s, a) =
          env.expected_reward(s, a) + gamma * env.expected_next_value(s, a, v);
    }
  }
  return out;
}

QTable value_iteration(const EnvModel& env, double gamma, double tol,
                       long max_sweeps) {
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("discount factor must lie in [0, 1)");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  QTable q(env.num_states(), env.num_actions(), 0.0);
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    QTable next = bellman_apply(env, gamma, q);
    const double residual = next.sup_distance(q);
    q = std::move(next);
    if (residual <= tol) return q;
  }
  throw std::runtime_error("value iteration did not converge");
}

StationaryEstimate mc_stationary_mean(const EnvModel& env,
                                      const ChainConfig& cfg, int n_sims,
                                      std::uint64_t seed, int jobs) {
  if (n_sims < 1) throw std::invalid_argument("n_sims must be >= 1");
  cfg.validate(env);

  const int dim = env.num_states() * env.num_actions();
  // Bounded scratch: run chains in chunks, fold each chunk into the Welford
  // state in simulation order so the result is independent of jobs.
  const long per_chunk = std::clamp<long>(
      (32L << 20) / (static_cast<long>(dim) * 8L), std::max(jobs, 1), 1024L);

  std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> m2(static_cast<std::size_t>(dim), 0.0);
  long seen = 0;

  std::vector<std::vector<double>> slots(static_cast<std::size_t>(per_chunk));
  for (long start = 0; start < n_sims; start += per_chunk) {
    const long chunk = std::min<long>(per_chunk, n_sims - start);
    parallel_for(chunk, jobs, [&](long i) {
      const std::uint64_t chain_seed =
          substream(seed, kStationaryStream, static_cast<std::uint64_t>(start + i));
      ChainResult r = run_chain(env, cfg, chain_seed, nullptr);
      slots[static_cast<std::size_t>(i)] = std::move(r.final_q.values);
    });
    for (long i = 0; i < chunk; ++i) {
      const std::vector<double>& x = slots[static_cast<std::size_t>(i)];
      ++seen;
      const double n = static_cast<double>(seen);
      for (int j = 0; j < dim; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const double delta = x[idx] - mean[idx];
        mean[idx] += delta / n;
        m2[idx] += delta * (x[idx] - mean[idx]);
      }
      slots[static_cast<std::size_t>(i)].clear();
    }
  }

  StationaryEstimate est;
  est.n_sims = n_sims;
  est.mean = QTable(env.num_states(), env.num_actions(), 0.0);
  est.stderr_of_mean = QTable(env.num_states(), env.num_actions(), 0.0);
  est.mean.values = mean;
  for (int j = 0; j < dim; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    est.stderr_of_mean.values[idx] =
        n_sims > 1 ? std::sqrt(m2[idx] / (static_cast<double>(n_sims) - 1.0) /
                               static_cast<double>(n_sims))
                   : 0.0;
  }
  return est;
}

std::vector<double> dhat_bruteforce(
    const std::vector<std::vector<double>>& iterates,
    const std::vector<int>& batch_sizes) {
  if (iterates.empty()) throw std::invalid_argument("no iterates");
  if (batch_sizes.size() != iterates.size()) {
    throw std::invalid_argument("batch schedule length mismatch");
  }
  const std::size_t horizon = iterates.size();
  const std::size_t dim = iterates.front().size();
  for (const auto& q : iterates) {
    if (q.size() != dim) throw std::invalid_argument("iterate dimension mismatch");
  }

  long double inv_batch = 0.0L;
  for (int b : batch_sizes) {
    if (b < 1) throw std::invalid_argument("batch size must be >= 1");
    inv_batch += 1.0L / b;
  }

  std::vector<double> out(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    long double total = 0.0L;
    for (std::size_t t = 0; t < horizon; ++t) total += iterates[t][j];
    const long double qbar = total / static_cast<long double>(horizon);

    long double partial = 0.0L;
    long double acc = 0.0L;
    for (std::size_t s = 0; s < horizon; ++s) {
      partial += iterates[s][j] - qbar;
      acc += partial * partial;
    }
    out[j] = static_cast<double>(
        acc / (static_cast<long double>(horizon) * inv_batch));
  }
  return out;
}

namespace {

double order_quantile(const std::vector<double>& sorted, double upper_tail) {
  const auto n = static_cast<long>(sorted.size());
  long rank = static_cast<long>(
      std::ceil((1.0 - upper_tail) * static_cast<double>(n)));
  rank = std::clamp<long>(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

KappaTable kappa_mc(long n_paths, int n_grid, std::uint64_t seed, int jobs) {
  if (n_paths < 10000) throw std::invalid_argument("kappa_mc needs >= 1e4 paths");
  if (n_grid < 100) throw std::invalid_argument("kappa_mc needs >= 100 grid points");

  const double dt = 1.0 / n_grid;
  const double sqrt_dt = std::sqrt(dt);
  // sum_{k=1}^{n-1} k^2, for the expanded bridge integral
  const long double n_ld = n_grid;
  const long double sum_k2 =
      (n_ld - 1.0L) * n_ld * (2.0L * n_ld - 1.0L) / 6.0L;

  std::vector<double> kappas(static_cast<std::size_t>(n_paths), 0.0);
  parallel_for(n_paths, jobs, [&](long p) {
    RngStream rng(substream(seed, 0xB20, static_cast<std::uint64_t>(p)));
    long double w = 0.0L;
    long double sum_w2 = 0.0L;   // sum_{k=1}^{n-1} W_k^2
    long double sum_kw = 0.0L;   // sum_{k=1}^{n-1} k W_k
    for (int k = 1; k < n_grid; ++k) {
      w += sqrt_dt * rng.normal();
      sum_w2 += w * w;
      sum_kw += static_cast<long double>(k) * w;
    }
    w += sqrt_dt * rng.normal();  // W(1)
    // int_0^1 (W(r) - r W(1))^2 dr by left-Riemann sum (the k = 0 term is 0)
    const long double scaled = w / n_ld;
    const long double integral =
        (sum_w2 - 2.0L * scaled * sum_kw + scaled * scaled * sum_k2) / n_ld;
    kappas[static_cast<std::size_t>(p)] =
        integral > 0.0L
            ? static_cast<double>(w / std::sqrt(static_cast<double>(integral)))
            : 0.0;
  });

  std::vector<double> sorted = kappas;
  std::sort(sorted.begin(), sorted.end());

  constexpr double kLevels[] = {0.005, 0.01, 0.025, 0.05};
  KappaTable table;
  table.n_paths = n_paths;
  table.n_grid = n_grid;
  for (double a : kLevels) {
    table.by_alpha_half[a] = {order_quantile(sorted, a), 0.0};
  }
  table.median = order_quantile(sorted, 0.5);

  // Bootstrap standard errors of the order statistics.
  constexpr int kBoot = 200;
  std::map<double, std::vector<double>> boot_q;
  std::vector<double> boot_med(kBoot, 0.0);
  for (double a : kLevels) boot_q[a].assign(kBoot, 0.0);

  std::vector<std::vector<double>> boot_results(
      kBoot, std::vector<double>(5, 0.0));
  parallel_for(kBoot, jobs, [&](long b) {
    RngStream rng(substream(seed, 0xB007, static_cast<std::uint64_t>(b)));
    std::vector<double> resample(static_cast<std::size_t>(n_paths));
    for (long i = 0; i < n_paths; ++i) {
      const auto pick = static_cast<std::size_t>(rng.bits() %
                                                 static_cast<std::uint64_t>(n_paths));
      resample[static_cast<std::size_t>(i)] = kappas[pick];
    }
    auto upper = [&](double tail) {
      long rank = static_cast<long>(
          std::ceil((1.0 - tail) * static_cast<double>(n_paths)));
      rank = std::clamp<long>(rank, 1, n_paths);
      std::nth_element(resample.begin(), resample.begin() + (rank - 1),
                       resample.end());
      return resample[static_cast<std::size_t>(rank - 1)];
    };
    for (int li = 0; li < 4; ++li) boot_results[static_cast<std::size_t>(b)][li] = upper(kLevels[li]);
    boot_results[static_cast<std::size_t>(b)][4] = upper(0.5);
  });
  for (int b = 0; b < kBoot; ++b) {
    for (int li = 0; li < 4; ++li) {
      boot_q[kLevels[li]][static_cast<std::size_t>(b)] =
          boot_results[static_cast<std::size_t>(b)][static_cast<std::size_t>(li)];
    }
    boot_med[static_cast<std::size_t>(b)] = boot_results[static_cast<std::size_t>(b)][4];
  }

  auto sd = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / (static_cast<double>(xs.size()) - 1.0));
  };
  for (double a : kLevels) table.by_alpha_half[a].stderr_boot = sd(boot_q[a]);
  table.median_stderr = sd(boot_med);
  return table;
}

}  // namespace qinfer
