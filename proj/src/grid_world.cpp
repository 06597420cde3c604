#include "qinfer/grid_world.hpp"

#include <algorithm>
#include <stdexcept>

namespace qinfer {

void GridWorldConfig::validate() const {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("noise sigma must be nonnegative");
  }
  auto in_bounds = [&](GridCell c) {
    return c.row >= 1 && c.row <= rows && c.col >= 1 && c.col <= cols;
  };
  for (const GridCell& c : blocked) {
    if (!in_bounds(c)) throw std::invalid_argument("blocked cell out of bounds");
  }
  if (terminals.empty()) {
    throw std::invalid_argument("grid world needs at least one terminal cell");
  }
  for (const auto& [cell, reward] : terminals) {
    (void)reward;
    if (!in_bounds(cell)) {
      throw std::invalid_argument("terminal cell out of bounds");
    }
    if (std::find(blocked.begin(), blocked.end(), cell) != blocked.end()) {
      throw std::invalid_argument("terminal placed on a blocked cell");
    }
  }
}

GridWorldEnv::GridWorldEnv(GridWorldConfig config) : config_(std::move(config)) {
  config_.validate();
  const int n = num_states();
  absorbing_.assign(n, 0);
  for (const GridCell& c : config_.blocked) absorbing_[state_of(c)] = 1;
  for (const auto& [cell, reward] : config_.terminals) {
    (void)reward;
    absorbing_[state_of(cell)] = 1;
  }

  auto blocked_at = [&](GridCell c) {
    return std::find(config_.blocked.begin(), config_.blocked.end(), c) !=
           config_.blocked.end();
  };

  moves_.resize(static_cast<std::size_t>(n) * 4);
  constexpr int kDRow[4] = {-1, 1, 0, 0};
  constexpr int kDCol[4] = {0, 0, -1, 1};
  for (int s = 0; s < n; ++s) {
    const GridCell from = cell_of(s);
    for (int a = 0; a < 4; ++a) {
      GridCell to{from.row + kDRow[a], from.col + kDCol[a]};
      const bool off = to.row < 1 || to.row > config_.rows || to.col < 1 ||
                       to.col > config_.cols;
      if (off || blocked_at(to)) to = from;  // stays still

      Move m;
      m.dest = state_of(to);
      if (auto it = config_.terminals.find(to); it != config_.terminals.end()) {
        m.reward = it->second;
        m.enters_terminal = true;
      } else {
        m.reward = config_.step_reward;
      }
      moves_[static_cast<std::size_t>(s) * 4 + a] = m;
    }
  }
}

void GridWorldEnv::check_sampleable(int state) const {
  if (state < 0 || state >= num_states()) {
    throw std::invalid_argument("state index out of range");
  }
  if (absorbing_[state]) {
    throw std::invalid_argument("cannot sample from a terminal or blocked cell");
  }
}

Draw GridWorldEnv::sample(int state, int action, RngStream& rng) const {
  check_sampleable(state);
  const Move& m = moves_[static_cast<std::size_t>(state) * 4 + action];
  return {m.reward + config_.noise_sigma * rng.normal(), m.dest,
          m.enters_terminal};
}

double GridWorldEnv::expected_reward(int state, int action) const {
  if (absorbing_[state]) return 0.0;
  return moves_[static_cast<std::size_t>(state) * 4 + action].reward;
}

void GridWorldEnv::transition_pmf(int state, int action,
                                  std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (absorbing_[state]) {
    out[state] = 1.0;  // absorbing
    return;
  }
  out[moves_[static_cast<std::size_t>(state) * 4 + action].dest] = 1.0;
}

double GridWorldEnv::expected_next_value(int state, int action,
                                         std::span<const double> v) const {
  if (absorbing_[state]) return v[state];
  return v[moves_[static_cast<std::size_t>(state) * 4 + action].dest];
}

std::unique_ptr<EnvModel> build_grid_world(const GridWorldConfig& config) {
  return std::make_unique<GridWorldEnv>(config);
}

}  // namespace qinfer
