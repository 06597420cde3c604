#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "qinfer/env.hpp"

namespace qinfer {

// 1-based cell coordinates, (1,1) at the top-left.
struct GridCell {
  int row = 0;
  int col = 0;

  friend bool operator<(const GridCell& a, const GridCell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  }
  friend bool operator==(const GridCell& a, const GridCell& b) {
    return a.row == b.row && a.col == b.col;
  }
};

struct GridWorldConfig {
  int rows = 3;
  int cols = 4;
  std::vector<GridCell> blocked = {{2, 2}};
  std::map<GridCell, double> terminals = {{{1, 4}, 10.0}, {{2, 4}, -10.0}};
  double step_reward = -1.0;
  double noise_sigma = 0.0;

  // Throws std::invalid_argument on out-of-bounds cells, a terminal placed
  // on a blocked cell, or an empty terminal set.
  void validate() const;
};

// Deterministic-motion grid world. Actions are up/down/left/right; a move
// into the edge or a blocked cell stays still. Reward is a function of the
// destination cell: the terminal's reward when entering a terminal, the step
// reward otherwise, plus N(0, sigma^2) noise on every sampled reward.
// Blocked cells keep their state index but are absorbing and never updated,
// exactly like terminals.
class GridWorldEnv final : public EnvModel {
 public:
  enum Action { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

  explicit GridWorldEnv(GridWorldConfig config);

  using EnvModel::transition_pmf;

  int num_states() const override { return config_.rows * config_.cols; }
  int num_actions() const override { return 4; }
  bool is_terminal(int state) const override { return absorbing_[state] != 0; }
  Draw sample(int state, int action, RngStream& rng) const override;
  double expected_reward(int state, int action) const override;
  void transition_pmf(int state, int action, std::span<double> out) const override;
  double expected_next_value(int state, int action,
                             std::span<const double> v) const override;

  const GridWorldConfig& config() const { return config_; }

  int state_of(GridCell cell) const {
    return (cell.row - 1) * config_.cols + (cell.col - 1);
  }
  GridCell cell_of(int state) const {
    return {state / config_.cols + 1, state % config_.cols + 1};
  }

 private:
  struct Move {
    int dest = 0;
    double reward = 0.0;
    bool enters_terminal = false;
  };

  void check_sampleable(int state) const;

  GridWorldConfig config_;
  std::vector<char> absorbing_;       // terminal or blocked
  std::vector<Move> moves_;           // [state * 4 + action]
};

std::unique_ptr<EnvModel> build_grid_world(const GridWorldConfig& config);

}  // namespace qinfer
