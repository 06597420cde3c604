#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qinfer/env.hpp"
#include "qinfer/qtable.hpp"

namespace qinfer {

// Per-iteration batch sizes B_t. Constant schedules are the supported
// regime; explicit fixed schedules exist for the estimator diagnostics.
class BatchSchedule {
 public:
  static BatchSchedule constant(int batch_size);
  static BatchSchedule fixed(std::vector<int> batch_sizes);

  // 1-based iteration index.
  int at(long t) const;
  bool is_constant() const { return fixed_.empty(); }
  int constant_value() const { return constant_; }

 private:
  BatchSchedule() = default;
  int constant_ = 1;
  std::vector<int> fixed_;
};

struct ChainConfig {
  double eta = 0.1;
  double gamma = 0.9;
  BatchSchedule batch = BatchSchedule::constant(1);
  long horizon = 1;
  std::optional<QTable> q_init;  // zeros when absent

  // Throws std::invalid_argument on violated preconditions. A step size
  // with eta * (1 + gamma) >= 1 is legal but outside the contractive
  // regime; callers can check step_size_contractive() and warn.
  void validate(const EnvModel& env) const;
  bool step_size_contractive() const { return eta * (1.0 + gamma) < 1.0; }
};

// Receives every iterate exactly once, in order t = 1..T.
class IterateSink {
 public:
  virtual ~IterateSink() = default;
  virtual void observe(long t, const QTable& q, int batch_size) = 0;
};

struct ChainResult {
  QTable final_q;
  QTable mean_q;  // (1/T) sum of all iterates
  long horizon = 0;
};

// Monte-Carlo estimate of the Bellman operator applied to q at (s, a):
// (1/B) sum of rewards + (gamma/B) sum of max_a' q(S', a') over B
// independent generative draws. Terminal successors contribute 0.
double empirical_bellman(const QTable& q, const EnvModel& env, double gamma,
                         int state, int action, int batch_size, RngStream& rng);

// One synchronous sweep: every non-terminal entry moves toward its own
// empirical Bellman target computed from the same input table. Entry
// (s, a) draws from substream(chain_seed, t, s * num_actions + a), so the
// result does not depend on update order.
void sync_update(QTable& q, const EnvModel& env, double eta, double gamma,
                 int batch_size, std::uint64_t chain_seed, long t);

// Runs cfg.horizon synchronous updates from cfg.q_init, invoking the sink
// after each iteration.
ChainResult run_chain(const EnvModel& env, const ChainConfig& cfg,
                      std::uint64_t chain_seed, IterateSink* sink = nullptr);

}  // namespace qinfer
