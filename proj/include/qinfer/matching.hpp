#pragma once

#include <array>
#include <memory>
#include <vector>

#include "qinfer/env.hpp"

namespace qinfer {

using Match2x2 = std::array<std::array<int, 2>, 2>;

struct MatchingConfig {
  std::array<std::array<double, 2>, 2> reward_matrix = {{{8.0, 5.0}, {7.0, 3.0}}};
  // Arrival quantities 0..3 per period, one draw per type.
  std::array<double, 4> demand_pmf = {0.5, 0.5, 0.0, 0.0};
  std::array<double, 4> supply_pmf = {0.5, 0.5, 0.0, 0.0};
  int queue_cap = 3;
  int action_cap = 3;
  double noise_sigma = 0.0;

  void validate() const;  // throws std::invalid_argument
};

// Feasibility projection: reduce x entrywise, in the fixed order
// (1,1),(1,2),(2,1),(2,2), until row sums fit the demand queues and column
// sums fit the supply queues.
Match2x2 clip_matching(const Match2x2& x, std::array<int, 2> demand,
                       std::array<int, 2> supply);

// Two-type dynamic matching MDP. A state is the carried-over queue vector
// (d1, d2, s1, s2), each component in 0..queue_cap; an action is a 2x2
// integer matching matrix with entries in 0..action_cap, clipped to
// feasibility before it is applied. Reward is <x_clipped, R> plus Gaussian
// noise; leftover queues plus fresh i.i.d. arrivals (capped at queue_cap)
// form the next state. There are no terminal states.
class MatchingEnv final : public EnvModel {
 public:
  explicit MatchingEnv(MatchingConfig config);

  using EnvModel::transition_pmf;

  int num_states() const override { return num_states_; }
  int num_actions() const override { return num_actions_; }
  bool is_terminal(int) const override { return false; }
  Draw sample(int state, int action, RngStream& rng) const override;
  double expected_reward(int state, int action) const override;
  void transition_pmf(int state, int action, std::span<double> out) const override;
  double expected_next_value(int state, int action,
                             std::span<const double> v) const override;

  const MatchingConfig& config() const { return config_; }

  // Dense index <-> component encodings (most-significant component first:
  // d1, d2, s1, s2 for states; x11, x12, x21, x22 for actions).
  int state_index(const std::array<int, 4>& queues) const;
  std::array<int, 4> state_queues(int state) const;
  int action_index(const Match2x2& x) const;
  Match2x2 action_matrix(int action) const;

 private:
  struct Outcome {
    double reward = 0.0;   // pre-noise, deterministic
    int leftover = 0;      // leftover queues encoded as a state index
  };

  MatchingConfig config_;
  int side_ = 0;         // queue_cap + 1
  int action_side_ = 0;  // action_cap + 1
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<Outcome> outcomes_;  // [state * num_actions + action]

  // Next-component distributions given a leftover component value:
  // component_cdf_[type][leftover][v], type 0 = demand, 1 = supply.
  std::vector<std::vector<std::vector<double>>> component_pmf_;
  std::vector<std::vector<std::vector<double>>> component_cdf_;

  // Full next-state rows keyed by the leftover encoding.
  std::vector<std::vector<double>> rows_;
};

std::unique_ptr<EnvModel> build_matching(const MatchingConfig& config);

}  // namespace qinfer
