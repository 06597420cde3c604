#pragma once

// Shared fixtures for the test suites: a small dense MDP with an explicit
// transition tensor, an independently written single-sample Q-learning
// sweep, and a chi-square quantile approximation for frequency tests.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qinfer/env.hpp"
#include "qinfer/qtable.hpp"
#include "qinfer/rng.hpp"

namespace qinfer::test {

// Dense tabular MDP: transitions[(s * na + a) * ns + s'], deterministic
// rewards plus optional Gaussian noise.
class TestMdpEnv final : public EnvModel {
 public:
  TestMdpEnv(int ns, int na, std::vector<double> transitions,
             std::vector<double> rewards, std::vector<char> terminal,
             double sigma)
      : ns_(ns),
        na_(na),
        transitions_(std::move(transitions)),
        rewards_(std::move(rewards)),
        terminal_(std::move(terminal)),
        sigma_(sigma) {
    if (static_cast<int>(transitions_.size()) != ns_ * na_ * ns_ ||
        static_cast<int>(rewards_.size()) != ns_ * na_ ||
        static_cast<int>(terminal_.size()) != ns_) {
      throw std::invalid_argument("TestMdpEnv dimension mismatch");
    }
    cdf_.resize(transitions_.size());
    for (int row = 0; row < ns_ * na_; ++row) {
      double c = 0.0;
      for (int sp = 0; sp < ns_; ++sp) {
        c += transitions_[static_cast<std::size_t>(row) * ns_ + sp];
        cdf_[static_cast<std::size_t>(row) * ns_ + sp] = c;
      }
      cdf_[static_cast<std::size_t>(row) * ns_ + ns_ - 1] = 1.0;
    }
  }

  using EnvModel::transition_pmf;

  int num_states() const override { return ns_; }
  int num_actions() const override { return na_; }
  bool is_terminal(int s) const override { return terminal_[static_cast<std::size_t>(s)] != 0; }

  Draw sample(int s, int a, RngStream& rng) const override {
    if (is_terminal(s)) throw std::invalid_argument("sample at terminal state");
    const auto row = static_cast<std::size_t>(s * na_ + a);
    const double reward =
        rewards_[row] + (sigma_ > 0.0 ? sigma_ * rng.normal() : 0.0);
    const int next = rng.categorical(
        {cdf_.data() + row * static_cast<std::size_t>(ns_), static_cast<std::size_t>(ns_)});
    return {reward, next, is_terminal(next)};
  }

  double expected_reward(int s, int a) const override {
    if (is_terminal(s)) return 0.0;
    return rewards_[static_cast<std::size_t>(s * na_ + a)];
  }

  void transition_pmf(int s, int a, std::span<double> out) const override {
    for (int sp = 0; sp < ns_; ++sp) out[static_cast<std::size_t>(sp)] = 0.0;
    if (is_terminal(s)) {
      out[static_cast<std::size_t>(s)] = 1.0;
      return;
    }
    const auto row = static_cast<std::size_t>(s * na_ + a);
    for (int sp = 0; sp < ns_; ++sp) {
      out[static_cast<std::size_t>(sp)] = transitions_[row * static_cast<std::size_t>(ns_) + sp];
    }
  }

 private:
  int ns_;
  int na_;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
  std::vector<char> terminal_;
  double sigma_;
  std::vector<double> cdf_;
};

// Two states, two actions, no terminals; rows of P sum to 1.
inline TestMdpEnv two_state_env(double sigma) {
  const std::vector<double> p = {
      0.7, 0.3,   // s0 a0
      0.4, 0.6,   // s0 a1
      0.2, 0.8,   // s1 a0
      0.9, 0.1,   // s1 a1
  };
  const std::vector<double> r = {1.0, 2.0, 0.5, 1.5};
  return TestMdpEnv(2, 2, p, r, {0, 0}, sigma);
}

// Classic one-draw Q-learning sweep, written independently of the engine but
// on the same per-entry substream discipline, so a shared seed makes the two
// paths comparable draw for draw.
inline void reference_vanilla_sweep(QTable& q, const EnvModel& env, double eta,
                                    double gamma, std::uint64_t chain_seed,
                                    long t) {
  const QTable prev = q;
  const int na = env.num_actions();
  for (int s = 0; s < env.num_states(); ++s) {
    if (env.is_terminal(s)) continue;
    for (int a = 0; a < na; ++a) {
      RngStream rng(substream(chain_seed, static_cast<std::uint64_t>(t),
                              static_cast<std::uint64_t>(s * na + a)));
      const Draw d = env.sample(s, a, rng);
      const double next_max = d.terminal ? 0.0 : prev.row_max(d.next_state);
      q(s, a) += eta * (d.reward + gamma * next_max - q(s, a));
    }
  }
}

// Wilson-Hilferty chi-square upper quantile; good to a few percent, which is
// plenty for a 1e-4-level gate.
inline double chi2_upper_quantile(int dof, double z_upper) {
  const double k = dof;
  const double c = 1.0 - 2.0 / (9.0 * k) + z_upper * std::sqrt(2.0 / (9.0 * k));
  return k * c * c * c;
}

// z for upper tail 1e-4
inline constexpr double kZ1em4 = 3.7190164854557084;

}  // namespace qinfer::test
