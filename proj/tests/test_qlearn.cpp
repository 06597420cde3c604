#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "qinfer/grid_world.hpp"
#include "qinfer/oracle.hpp"
#include "qinfer/qlearn.hpp"
#include "support.hpp"

using namespace qinfer;

TEST_CASE("empirical bellman trivial cases") {
  // One state, one action, deterministic reward 1, self loop.
  test::TestMdpEnv env(1, 1, {1.0}, {1.0}, {0}, 0.0);
  QTable q(1, 1, 0.0);
  RngStream rng(5);
  for (int b : {1, 2, 7}) {
    CHECK(empirical_bellman(q, env, 0.0, 0, 0, b, rng) == 1.0);
  }
  CHECK_THROWS_AS(empirical_bellman(q, env, 0.0, 0, 0, 0, rng),
                  std::invalid_argument);

  // With q = 0 the max term vanishes: result is the mean of the rewards,
  // draw for draw.
  test::TestMdpEnv noisy = test::two_state_env(1.5);
  QTable zero(2, 2, 0.0);
  RngStream a(77);
  RngStream b(77);
  const double got = empirical_bellman(zero, noisy, 0.9, 0, 1, 4, a);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += noisy.sample(0, 1, b).reward;
  CHECK(got == sum / 4);
}

TEST_CASE("empirical bellman is unbiased for the exact operator") {
  const test::TestMdpEnv env = test::two_state_env(0.5);
  RngStream table_rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    QTable q(2, 2, 0.0);
    for (double& v : q.values) v = 10.0 * table_rng.uniform01() - 5.0;

    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        // Closed form: r + gamma * sum_s' P(s'|s,a) max_a' q(s',a').
        const std::vector<double> p = env.transition_pmf(s, a);
        const double expect =
            env.expected_reward(s, a) +
            0.9 * (p[0] * q.row_max(0) + p[1] * q.row_max(1));

        RngStream rng(substream(123, static_cast<std::uint64_t>(trial),
                                static_cast<std::uint64_t>(s * 2 + a)));
        const int n = 20000;
        double sum = 0.0;
        double sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
          const double x = empirical_bellman(q, env, 0.9, s, a, 2, rng);
          sum += x;
          sum2 += x * x;
        }
        const double mean = sum / n;
        const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
        CHECK(std::abs(mean - expect) <= 5.0 * sd / std::sqrt(double(n)));
      }
    }
  }
}

TEST_CASE("sync_update edge steps") {
  GridWorldConfig cfg;
  cfg.noise_sigma = 2.0;
  GridWorldEnv env{cfg};

  QTable q(env.num_states(), env.num_actions(), 0.0);
  RngStream init(9);
  for (int s = 0; s < env.num_states(); ++s) {
    if (env.is_terminal(s)) continue;
    for (int a = 0; a < 4; ++a) q(s, a) = init.uniform01();
  }

  // eta = 0 is a no-op.
  QTable q0 = q;
  sync_update(q0, env, 0.0, 0.9, 1, 321, 1);
  CHECK(q0.values == q.values);

  // eta = 1, gamma = 0, sigma = 0: full replacement by the rewards.
  GridWorldEnv det{GridWorldConfig{}};
  QTable q1(det.num_states(), det.num_actions(), 0.0);
  sync_update(q1, det, 1.0, 0.0, 1, 321, 1);
  for (int s = 0; s < det.num_states(); ++s) {
    for (int a = 0; a < 4; ++a) {
      CHECK(q1(s, a) == det.expected_reward(s, a));
    }
  }
}

TEST_CASE("sync_update is order independent") {
  GridWorldConfig cfg;
  cfg.noise_sigma = 2.0;
  GridWorldEnv env{cfg};
  const std::uint64_t seed = 777;
  const long t = 3;
  const double eta = 0.1;
  const double gamma = 0.9;
  const int batch = 2;

  QTable prev(env.num_states(), env.num_actions(), 0.0);
  RngStream init(15);
  for (double& v : prev.values) v = 4.0 * init.uniform01();
  for (int s = 0; s < env.num_states(); ++s) {
    if (!env.is_terminal(s)) continue;
    for (int a = 0; a < 4; ++a) prev(s, a) = 0.0;
  }

  QTable engine = prev;
  sync_update(engine, env, eta, gamma, batch, seed, t);

  // Same sweep, entries visited in a shuffled order through the public
  // empirical_bellman path.
  std::vector<int> order;
  for (int s = 0; s < env.num_states(); ++s) {
    if (env.is_terminal(s)) continue;
    for (int a = 0; a < 4; ++a) order.push_back(s * 4 + a);
  }
  std::shuffle(order.begin(), order.end(), std::mt19937(99));

  QTable manual = prev;
  for (int idx : order) {
    const int s = idx / 4;
    const int a = idx % 4;
    RngStream rng(substream(seed, static_cast<std::uint64_t>(t),
                            static_cast<std::uint64_t>(idx)));
    const double target = empirical_bellman(prev, env, gamma, s, a, batch, rng);
    manual.values[static_cast<std::size_t>(idx)] -=
        eta * (manual.values[static_cast<std::size_t>(idx)] - target);
  }
  CHECK(engine.values == manual.values);
}

TEST_CASE("batch size one reduces to vanilla Q-learning bit for bit") {
  GridWorldConfig cfg;
  cfg.noise_sigma = 2.0;
  GridWorldEnv env{cfg};
  const std::uint64_t seed = 4242;
  const long horizon = 60;

  ChainConfig chain;
  chain.eta = 0.1;
  chain.gamma = 0.9;
  chain.batch = BatchSchedule::constant(1);
  chain.horizon = horizon;
  const ChainResult engine = run_chain(env, chain, seed, nullptr);

  QTable reference(env.num_states(), env.num_actions(), 0.0);
  for (long t = 1; t <= horizon; ++t) {
    test::reference_vanilla_sweep(reference, env, 0.1, 0.9, seed, t);
  }
  CHECK(engine.final_q.values == reference.values);
}

TEST_CASE("deterministic chain reaches the value-iteration fixed point") {
  GridWorldEnv env{GridWorldConfig{}};  // sigma = 0
  ChainConfig chain;
  chain.eta = 0.1;
  chain.gamma = 0.9;
  chain.horizon = 2000;
  const ChainResult r = run_chain(env, chain, 1, nullptr);
  const QTable qstar = value_iteration(env, 0.9, 1e-10);
  CHECK(r.final_q.sup_distance(qstar) <= 1e-6);
}

TEST_CASE("iterates stay bounded with rewards in [0,1]") {
  // Noiseless rewards inside [0,1]; bound from the reward range.
  const std::vector<double> p = {0.6, 0.4, 0.3, 0.7, 0.5, 0.5, 0.8, 0.2};
  const std::vector<double> r = {0.3, 0.9, 0.0, 1.0};
  test::TestMdpEnv env(2, 2, p, r, {0, 0}, 0.0);

  const double gamma = 0.9;
  QTable q0(2, 2, 0.0);
  RngStream init(3);
  for (double& v : q0.values) v = 30.0 * init.uniform01() - 15.0;
  const double bound = std::max(q0.sup_norm(), 1.0 / (1.0 - gamma)) + 1e-9;

  struct BoundSink final : IterateSink {
    double bound;
    bool ok = true;
    explicit BoundSink(double b) : bound(b) {}
    void observe(long, const QTable& q, int) override {
      if (q.sup_norm() > bound) ok = false;
    }
  } sink(bound);

  ChainConfig chain;
  chain.eta = 0.35;
  chain.gamma = gamma;
  chain.batch = BatchSchedule::constant(2);
  chain.horizon = 400;
  chain.q_init = q0;
  run_chain(env, chain, 5150, &sink);
  CHECK(sink.ok);
}

TEST_CASE("expected update contracts toward the fixed point") {
  const test::TestMdpEnv env = test::two_state_env(0.5);
  const double eta = 0.2;
  const double gamma = 0.9;
  const QTable qstar = value_iteration(env, gamma, 1e-12);

  QTable q(2, 2, 0.0);
  RngStream init(8);
  for (double& v : q.values) v = 6.0 * init.uniform01() - 3.0;

  const int reps = 10000;
  std::vector<double> mean(4, 0.0);
  std::vector<double> m2(4, 0.0);
  for (int rep = 1; rep <= reps; ++rep) {
    QTable step = q;
    sync_update(step, env, eta, gamma, 1, 1000, rep);
    for (int j = 0; j < 4; ++j) {
      const double delta = step.values[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)];
      mean[static_cast<std::size_t>(j)] += delta / rep;
      m2[static_cast<std::size_t>(j)] +=
          delta * (step.values[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]);
    }
  }
  double err = 0.0;
  double max_se = 0.0;
  for (int j = 0; j < 4; ++j) {
    err = std::max(err, std::abs(mean[static_cast<std::size_t>(j)] - qstar.values[static_cast<std::size_t>(j)]));
    max_se = std::max(max_se, std::sqrt(m2[static_cast<std::size_t>(j)] / (reps - 1.0) / reps));
  }
  const double before = q.sup_distance(qstar);
  CHECK(err <= (1.0 - eta * (1.0 - gamma)) * before + 5.0 * max_se);
}

TEST_CASE("run_chain averaging identity and sink contract") {
  GridWorldConfig cfg;
  cfg.noise_sigma = 2.0;
  GridWorldEnv env{cfg};

  struct SumSink final : IterateSink {
    std::vector<long double> sum;
    long last_t = 0;
    bool ordered = true;
    void observe(long t, const QTable& q, int) override {
      if (t != last_t + 1) ordered = false;
      last_t = t;
      if (sum.empty()) sum.assign(q.values.size(), 0.0L);
      for (std::size_t i = 0; i < q.values.size(); ++i) sum[i] += q.values[i];
    }
  } sink;

  ChainConfig chain;
  chain.eta = 0.1;
  chain.gamma = 0.9;
  chain.horizon = 500;
  const ChainResult r = run_chain(env, chain, 99, &sink);
  CHECK(sink.ordered);
  CHECK(sink.last_t == 500);
  for (std::size_t i = 0; i < r.mean_q.values.size(); ++i) {
    const double lhs = 500.0 * r.mean_q.values[i];
    const double rhs = static_cast<double>(sink.sum[i]);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }

  // T = 1: the mean is the single iterate.
  chain.horizon = 1;
  const ChainResult one = run_chain(env, chain, 99, nullptr);
  CHECK(one.mean_q.values == one.final_q.values);
}

TEST_CASE("chain config validation") {
  GridWorldEnv env{GridWorldConfig{}};
  ChainConfig chain;
  chain.horizon = 10;

  chain.eta = 0.0;
  CHECK_THROWS_AS(chain.validate(env), std::invalid_argument);
  chain.eta = 1.5;
  CHECK_THROWS_AS(chain.validate(env), std::invalid_argument);
  chain.eta = 0.1;

  chain.gamma = 1.0;
  CHECK_THROWS_AS(chain.validate(env), std::invalid_argument);
  chain.gamma = 0.9;

  chain.batch = BatchSchedule::fixed({1, 2, 3});  // shorter than horizon
  CHECK_THROWS_AS(chain.validate(env), std::out_of_range);
  chain.batch = BatchSchedule::constant(1);

  chain.q_init = QTable(3, 3, 0.0);
  CHECK_THROWS_AS(chain.validate(env), std::invalid_argument);

  QTable bad_terminal(env.num_states(), env.num_actions(), 0.0);
  bad_terminal(env.state_of({1, 4}), 0) = 1.0;
  chain.q_init = bad_terminal;
  CHECK_THROWS_AS(chain.validate(env), std::invalid_argument);

  chain.q_init.reset();
  CHECK_NOTHROW(chain.validate(env));
  CHECK(chain.step_size_contractive());
  chain.eta = 0.6;
  CHECK_FALSE(chain.step_size_contractive());

  CHECK_THROWS_AS(BatchSchedule::constant(0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule::fixed({}), std::invalid_argument);
}
