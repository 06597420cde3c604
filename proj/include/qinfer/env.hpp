#pragma once

#include <memory>
#include <span>
#include <vector>

#include "qinfer/rng.hpp"

namespace qinfer {

// One generative-model draw for a state-action pair.
struct Draw {
  double reward = 0.0;
  int next_state = 0;
  bool terminal = false;
};

// Finite tabular MDP exposed through a generative model plus its exact
// description (used by the oracles). Implementations are immutable after
// construction; all randomness comes through the caller's RngStream, so
// one environment can serve any number of concurrent chains.
class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;

  // Terminal states are absorbing with value 0; they are never updated and
  // may not be sampled from.
  virtual bool is_terminal(int state) const = 0;

  virtual Draw sample(int state, int action, RngStream& rng) const = 0;

  // Mean of the sampled reward (reward noise has mean zero).
  virtual double expected_reward(int state, int action) const = 0;

  // Writes the exact next-state distribution into out (size num_states()).
  virtual void transition_pmf(int state, int action,
                              std::span<double> out) const = 0;

  std::vector<double> transition_pmf(int state, int action) const {
    std::vector<double> p(static_cast<std::size_t>(num_states()), 0.0);
    transition_pmf(state, action, p);
    return p;
  }

  // E[v(S') | s, a]. The default routes through transition_pmf; environments
  // with structured transitions override it so value iteration does not have
  // to materialize full rows.
  virtual double expected_next_value(int state, int action,
                                     std::span<const double> v) const {
    std::vector<double> p(static_cast<std::size_t>(num_states()), 0.0);
    transition_pmf(state, action, p);
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) e += p[i] * v[i];
    return e;
  }

  int num_entries() const { return num_states() * num_actions(); }

  int num_active_states() const {
    int n = 0;
    for (int s = 0; s < num_states(); ++s) {
      if (!is_terminal(s)) ++n;
    }
    return n;
  }
};

}  // namespace qinfer
