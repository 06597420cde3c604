#include "qinfer/qlearn.hpp"

#include <cmath>
#include <stdexcept>

#include "qinfer/kahan.hpp"

namespace qinfer {

BatchSchedule BatchSchedule::constant(int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  BatchSchedule s;
  s.constant_ = batch_size;
  return s;
}

BatchSchedule BatchSchedule::fixed(std::vector<int> batch_sizes) {
  if (batch_sizes.empty()) throw std::invalid_argument("empty batch schedule");
  for (int b : batch_sizes) {
    if (b < 1) throw std::invalid_argument("batch size must be >= 1");
  }
  BatchSchedule s;
  s.fixed_ = std::move(batch_sizes);
  return s;
}

int BatchSchedule::at(long t) const {
  if (t < 1) throw std::out_of_range("iteration index is 1-based");
  if (fixed_.empty()) return constant_;
  if (t > static_cast<long>(fixed_.size())) {
    throw std::out_of_range("iteration beyond the fixed batch schedule");
  }
  return fixed_[static_cast<std::size_t>(t - 1)];
}

void ChainConfig::validate(const EnvModel& env) const {
  if (!(eta > 0.0) || eta > 1.0) {
    throw std::invalid_argument("step size must lie in (0, 1]");
  }
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("discount factor must lie in [0, 1)");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  batch.at(horizon);  // fixed schedules must cover the horizon
  if (q_init) {
    if (q_init->num_states != env.num_states() ||
        q_init->num_actions != env.num_actions()) {
      throw std::invalid_argument("q_init shape does not match the environment");
    }
    for (int s = 0; s < env.num_states(); ++s) {
      if (!env.is_terminal(s)) continue;
      for (int a = 0; a < env.num_actions(); ++a) {
        if ((*q_init)(s, a) != 0.0) {
          throw std::invalid_argument("q_init must be 0 at terminal states");
        }
      }
    }
  }
}

double empirical_bellman(const QTable& q, const EnvModel& env, double gamma,
                         int state, int action, int batch_size,
                         RngStream& rng) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  double sum_reward = 0.0;
  double sum_max = 0.0;
  for (int i = 0; i < batch_size; ++i) {
    const Draw d = env.sample(state, action, rng);
    sum_reward += d.reward;
    if (!d.terminal) sum_max += q.row_max(d.next_state);
  }
  return sum_reward / batch_size + gamma * (sum_max / batch_size);
}

namespace {

// Shared sweep body. row_max holds max_a q(s, a) of the input table; chain
// tables are identically 0 at terminal states, so successor lookups need no
// terminal branch and agree bitwise with empirical_bellman.
void sweep(QTable& q, const EnvModel& env, const std::vector<char>& terminal,
           std::vector<double>& row_max, double eta, double gamma,
           int batch_size, std::uint64_t chain_seed, long t) {
  const int ns = q.num_states;
  const int na = q.num_actions;
  for (int s = 0; s < ns; ++s) row_max[s] = q.row_max(s);

  for (int s = 0; s < ns; ++s) {
    if (terminal[s]) continue;
    for (int a = 0; a < na; ++a) {
      const int idx = s * na + a;
      RngStream rng(substream(chain_seed, static_cast<std::uint64_t>(t),
                              static_cast<std::uint64_t>(idx)));
      double sum_reward = 0.0;
      double sum_max = 0.0;
      for (int i = 0; i < batch_size; ++i) {
        const Draw d = env.sample(s, a, rng);
        sum_reward += d.reward;
        sum_max += row_max[d.next_state];
      }
      const double target =
          sum_reward / batch_size + gamma * (sum_max / batch_size);
      q.values[idx] -= eta * (q.values[idx] - target);
    }
  }
}

std::vector<char> terminal_mask(const EnvModel& env) {
  std::vector<char> mask(static_cast<std::size_t>(env.num_states()));
  for (int s = 0; s < env.num_states(); ++s) mask[s] = env.is_terminal(s) ? 1 : 0;
  return mask;
}

}  // namespace

void sync_update(QTable& q, const EnvModel& env, double eta, double gamma,
                 int batch_size, std::uint64_t chain_seed, long t) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  const std::vector<char> terminal = terminal_mask(env);
  std::vector<double> row_max(static_cast<std::size_t>(q.num_states));
  sweep(q, env, terminal, row_max, eta, gamma, batch_size, chain_seed, t);
}

ChainResult run_chain(const EnvModel& env, const ChainConfig& cfg,
                      std::uint64_t chain_seed, IterateSink* sink) {
  cfg.validate(env);
  const int ns = env.num_states();
  const int na = env.num_actions();

  QTable q = cfg.q_init ? *cfg.q_init : QTable(ns, na, 0.0);
  const std::vector<char> terminal = terminal_mask(env);
  std::vector<double> row_max(static_cast<std::size_t>(ns));
  KahanVector sum(static_cast<std::size_t>(q.size()));

  for (long t = 1; t <= cfg.horizon; ++t) {
    const int batch = cfg.batch.at(t);
    sweep(q, env, terminal, row_max, cfg.eta, cfg.gamma, batch, chain_seed, t);
    for (std::size_t i = 0; i < q.values.size(); ++i) sum.add(i, q.values[i]);
    if (sink != nullptr) sink->observe(t, q, batch);
  }

  ChainResult result;
  result.horizon = cfg.horizon;
  result.final_q = q;
  result.mean_q = QTable(ns, na, 0.0);
  for (std::size_t i = 0; i < result.mean_q.values.size(); ++i) {
    result.mean_q.values[i] = sum[i] / static_cast<double>(cfg.horizon);
  }
  return result;
}

}  // namespace qinfer
