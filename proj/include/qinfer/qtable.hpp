#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qinfer {

// Dense |S| x |A| action-value table, row-major by state.
struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(int states, int actions, double init = 0.0)
      : num_states(states),
        num_actions(actions),
        values(static_cast<std::size_t>(states) * actions, init) {
    if (states <= 0 || actions <= 0) {
      throw std::invalid_argument("QTable dimensions must be positive");
    }
  }

  int size() const { return num_states * num_actions; }

  double& operator()(int s, int a) {
    return values[static_cast<std::size_t>(s) * num_actions + a];
  }
  double operator()(int s, int a) const {
    return values[static_cast<std::size_t>(s) * num_actions + a];
  }

  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }

  double row_max(int s) const {
    const double* p = values.data() + static_cast<std::size_t>(s) * num_actions;
    double m = p[0];
    for (int a = 1; a < num_actions; ++a) m = std::max(m, p[a]);
    return m;
  }

  bool same_shape(const QTable& other) const {
    return num_states == other.num_states && num_actions == other.num_actions;
  }

  double sup_distance(const QTable& other) const {
    if (!same_shape(other)) {
      throw std::invalid_argument("QTable shape mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      d = std::max(d, std::abs(values[i] - other.values[i]));
    }
    return d;
  }

  double sup_norm() const {
    double d = 0.0;
    for (double v : values) d = std::max(d, std::abs(v));
    return d;
  }
};

}  // namespace qinfer
