#include "qinfer/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qinfer {

namespace {

void check_pmf(const std::array<double, 4>& pmf, const char* what) {
  double sum = 0.0;
  for (double p : pmf) {
    if (p < 0.0) throw std::invalid_argument(std::string(what) + " has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
  }
}

}  // namespace

void MatchingConfig::validate() const {
  if (queue_cap < 1 || action_cap < 1) {
    throw std::invalid_argument("queue_cap and action_cap must be at least 1");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("noise sigma must be nonnegative");
  }
  check_pmf(demand_pmf, "demand pmf");
  check_pmf(supply_pmf, "supply pmf");
}

Match2x2 clip_matching(const Match2x2& x, std::array<int, 2> demand,
                       std::array<int, 2> supply) {
  Match2x2 out{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (x[i][j] < 0) throw std::invalid_argument("matching entries must be >= 0");
      const int take = std::min({x[i][j], demand[i], supply[j]});
      out[i][j] = take;
      demand[i] -= take;
      supply[j] -= take;
    }
  }
  return out;
}

MatchingEnv::MatchingEnv(MatchingConfig config) : config_(config) {
  config_.validate();
  side_ = config_.queue_cap + 1;
  action_side_ = config_.action_cap + 1;
  num_states_ = side_ * side_ * side_ * side_;
  num_actions_ = action_side_ * action_side_ * action_side_ * action_side_;

  // Per-component next-queue distributions: next = min(leftover + arrival, cap).
  component_pmf_.assign(2, {});
  component_cdf_.assign(2, {});
  for (int type = 0; type < 2; ++type) {
    const auto& arrivals = type == 0 ? config_.demand_pmf : config_.supply_pmf;
    component_pmf_[type].assign(side_, std::vector<double>(side_, 0.0));
    component_cdf_[type].assign(side_, std::vector<double>(side_, 0.0));
    for (int left = 0; left < side_; ++left) {
      auto& pmf = component_pmf_[type][left];
      for (int arr = 0; arr < 4; ++arr) {
        const int next = std::min(left + arr, config_.queue_cap);
        pmf[next] += arrivals[arr];
      }
      double c = 0.0;
      for (int v = 0; v < side_; ++v) {
        c += pmf[v];
        component_cdf_[type][left][v] = c;
      }
      component_cdf_[type][left][side_ - 1] = 1.0;
    }
  }

  // Deterministic part of every (state, action): clipped reward and the
  // leftover queues the arrivals land on.
  outcomes_.resize(static_cast<std::size_t>(num_states_) * num_actions_);
  for (int s = 0; s < num_states_; ++s) {
    const std::array<int, 4> q = state_queues(s);
    for (int a = 0; a < num_actions_; ++a) {
      const Match2x2 x =
          clip_matching(action_matrix(a), {q[0], q[1]}, {q[2], q[3]});
      double reward = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) reward += x[i][j] * config_.reward_matrix[i][j];
      }
      const std::array<int, 4> leftover = {
          q[0] - x[0][0] - x[0][1], q[1] - x[1][0] - x[1][1],
          q[2] - x[0][0] - x[1][0], q[3] - x[0][1] - x[1][1]};
      outcomes_[static_cast<std::size_t>(s) * num_actions_ + a] = {
          reward, state_index(leftover)};
    }
  }

  // Transition rows, one per distinct leftover vector (product of the four
  // component distributions).
  rows_.assign(num_states_, {});
  for (int left = 0; left < num_states_; ++left) {
    const std::array<int, 4> l = state_queues(left);
    auto& row = rows_[left];
    row.assign(num_states_, 0.0);
    for (int v0 = 0; v0 < side_; ++v0) {
      const double p0 = component_pmf_[0][l[0]][v0];
      if (p0 == 0.0) continue;
      for (int v1 = 0; v1 < side_; ++v1) {
        const double p1 = p0 * component_pmf_[0][l[1]][v1];
        if (p1 == 0.0) continue;
        for (int v2 = 0; v2 < side_; ++v2) {
          const double p2 = p1 * component_pmf_[1][l[2]][v2];
          if (p2 == 0.0) continue;
          for (int v3 = 0; v3 < side_; ++v3) {
            const double p3 = p2 * component_pmf_[1][l[3]][v3];
            if (p3 == 0.0) continue;
            row[state_index({v0, v1, v2, v3})] += p3;
          }
        }
      }
    }
  }
}

int MatchingEnv::state_index(const std::array<int, 4>& queues) const {
  return ((queues[0] * side_ + queues[1]) * side_ + queues[2]) * side_ + queues[3];
}

std::array<int, 4> MatchingEnv::state_queues(int state) const {
  std::array<int, 4> q;
  q[3] = state % side_;
  state /= side_;
  q[2] = state % side_;
  state /= side_;
  q[1] = state % side_;
  q[0] = state / side_;
  return q;
}

int MatchingEnv::action_index(const Match2x2& x) const {
  return ((x[0][0] * action_side_ + x[0][1]) * action_side_ + x[1][0]) *
             action_side_ +
         x[1][1];
}

Match2x2 MatchingEnv::action_matrix(int action) const {
  Match2x2 x;
  x[1][1] = action % action_side_;
  action /= action_side_;
  x[1][0] = action % action_side_;
  action /= action_side_;
  x[0][1] = action % action_side_;
  x[0][0] = action / action_side_;
  return x;
}

Draw MatchingEnv::sample(int state, int action, RngStream& rng) const {
  const Outcome& o = outcomes_[static_cast<std::size_t>(state) * num_actions_ + action];
  const double reward = o.reward + config_.noise_sigma * rng.normal();
  const std::array<int, 4> l = state_queues(o.leftover);
  const int n0 = rng.categorical(component_cdf_[0][l[0]]);
  const int n1 = rng.categorical(component_cdf_[0][l[1]]);
  const int n2 = rng.categorical(component_cdf_[1][l[2]]);
  const int n3 = rng.categorical(component_cdf_[1][l[3]]);
  return {reward, state_index({n0, n1, n2, n3}), false};
}

double MatchingEnv::expected_reward(int state, int action) const {
  return outcomes_[static_cast<std::size_t>(state) * num_actions_ + action].reward;
}

void MatchingEnv::transition_pmf(int state, int action,
                                 std::span<double> out) const {
  const Outcome& o = outcomes_[static_cast<std::size_t>(state) * num_actions_ + action];
  const auto& row = rows_[o.leftover];
  std::copy(row.begin(), row.end(), out.begin());
}

double MatchingEnv::expected_next_value(int state, int action,
                                        std::span<const double> v) const {
  const Outcome& o = outcomes_[static_cast<std::size_t>(state) * num_actions_ + action];
  const auto& row = rows_[o.leftover];
  double e = 0.0;
  for (int i = 0; i < num_states_; ++i) e += row[i] * v[i];
  return e;
}

std::unique_ptr<EnvModel> build_matching(const MatchingConfig& config) {
  return std::make_unique<MatchingEnv>(config);
}

}  // namespace qinfer
