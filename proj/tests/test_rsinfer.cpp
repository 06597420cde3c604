#include <doctest.h>

#include <cmath>
#include <vector>

#include "qinfer/oracle.hpp"
#include "qinfer/rng.hpp"
#include "qinfer/rsinfer.hpp"

using namespace qinfer;

namespace {

// Random iterate stream with a chosen scale, plus its batch schedule.
struct Stream {
  std::vector<std::vector<double>> iterates;
  std::vector<int> batches;
};

Stream random_stream(int dim, int horizon, double center, double spread,
                     std::uint64_t seed, int max_batch = 5) {
  Stream s;
  RngStream rng(seed);
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> q(static_cast<std::size_t>(dim));
    for (double& v : q) v = center + spread * rng.normal();
    s.iterates.push_back(std::move(q));
    s.batches.push_back(1 + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(max_batch)));
  }
  return s;
}

RsAccumulator feed(const Stream& s, bool full = false) {
  RsAccumulator acc(static_cast<int>(s.iterates.front().size()), full);
  for (std::size_t t = 0; t < s.iterates.size(); ++t) {
    acc.update(s.iterates[t], s.batches[t]);
  }
  return acc;
}

}  // namespace

TEST_CASE("m_T closed forms") {
  RsAccumulator a(1);
  for (int t = 0; t < 4; ++t) a.update(std::vector<double>{1.0}, 1);
  CHECK(a.m_T() == doctest::Approx(2.0).epsilon(1e-15));

  RsAccumulator b(1);
  for (int t = 0; t < 2000; ++t) b.update(std::vector<double>{0.5}, 5);
  CHECK(b.m_T() == doctest::Approx(20.0).epsilon(1e-12));

  RsAccumulator c(1);
  double last = 0.0;
  for (int batch : {1, 2, 4}) {
    c.update(std::vector<double>{1.0}, batch);
    CHECK(c.m_T() > last);  // strictly increasing in T
    last = c.m_T();
  }
  CHECK(c.m_T() == doctest::Approx(std::sqrt(1.75)).epsilon(1e-15));

  CHECK_THROWS_AS(c.update(std::vector<double>{1.0}, 0), std::invalid_argument);
}

TEST_CASE("scalar worked example (1, 2, 3)") {
  RsAccumulator acc(1);
  for (double v : {1.0, 2.0, 3.0}) acc.update(std::vector<double>{v}, 1);
  CHECK(acc.mean(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(acc.dhat_diag(0) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));

  const auto brute = dhat_bruteforce({{1.0}, {2.0}, {3.0}}, {1, 1, 1});
  CHECK(brute[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("constant stream is exactly degenerate") {
  RsAccumulator acc(2);
  for (int t = 0; t < 50; ++t) acc.update(std::vector<double>{3.7, -1.25}, 2);
  CHECK(acc.dhat_diag(0) == 0.0);
  CHECK(acc.dhat_diag(1) == 0.0);
  CHECK(acc.degenerate(0));
  CHECK(acc.mean(0) == 3.7);
  CHECK(acc.mean(1) == -1.25);

  const auto intervals = acc.confidence_intervals(0.05);
  CHECK(intervals[0].degenerate);
  CHECK(intervals[0].half_width == 0.0);
  CHECK(intervals[0].contains(3.7));
  CHECK_FALSE(intervals[0].contains(3.7000001));

  const auto pivots = acc.pivot_stats(std::vector<double>{0.0, 0.0});
  CHECK_FALSE(pivots[0].has_value());
}

TEST_CASE("online estimator matches the brute-force recomputation") {
  for (int dim : {1, 36, 256}) {
    for (int horizon : {10, 1000}) {
      const Stream s = random_stream(dim, horizon, 5.0, 2.0,
                                     substream(2024, static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(horizon)));
      const RsAccumulator acc = feed(s);
      const std::vector<double> brute = dhat_bruteforce(s.iterates, s.batches);

      long double inv = 0.0L;
      for (int b : s.batches) inv += 1.0L / b;
      CHECK(std::abs(acc.m_T() - std::sqrt(static_cast<double>(inv))) <=
            1e-12 * acc.m_T());

      for (int j = 0; j < dim; ++j) {
        long double total = 0.0L;
        for (const auto& q : s.iterates) total += q[static_cast<std::size_t>(j)];
        const double qbar = static_cast<double>(total / horizon);
        CHECK(std::abs(acc.mean(j) - qbar) <= 1e-10 * std::max(1.0, std::abs(qbar)));
        CHECK(std::abs(acc.dhat_diag(j) - brute[static_cast<std::size_t>(j)]) <=
              1e-10 * std::max(1e-12, std::abs(brute[static_cast<std::size_t>(j)])));
      }
    }
  }
}

TEST_CASE("shift leaves the diagonal unchanged and moves the mean") {
  const Stream s = random_stream(4, 300, 0.0, 1.0, 51);
  Stream shifted = s;
  const double c = 7.25;
  for (auto& q : shifted.iterates) {
    for (double& v : q) v += c;
  }
  const RsAccumulator a = feed(s);
  const RsAccumulator b = feed(shifted);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(b.mean(j) - (a.mean(j) + c)) <= 1e-10);
    CHECK(std::abs(b.dhat_diag(j) - a.dhat_diag(j)) <=
          1e-10 * std::max(1e-12, a.dhat_diag(j)));
  }
}

TEST_CASE("scaling the stream scales widths by |lambda|") {
  const Stream s = random_stream(3, 200, 1.0, 0.5, 77);
  Stream scaled = s;
  const double lambda = -3.5;
  for (auto& q : scaled.iterates) {
    for (double& v : q) v *= lambda;
  }
  const RsAccumulator a = feed(s);
  const RsAccumulator b = feed(scaled);
  const auto ia = a.confidence_intervals(0.05);
  const auto ib = b.confidence_intervals(0.05);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(std::sqrt(b.dhat_diag(j)) -
                   std::abs(lambda) * std::sqrt(a.dhat_diag(j))) <=
          1e-10 * std::sqrt(a.dhat_diag(j)));
    CHECK(std::abs(ib[static_cast<std::size_t>(j)].half_width -
                   std::abs(lambda) * ia[static_cast<std::size_t>(j)].half_width) <=
          1e-10 * ia[static_cast<std::size_t>(j)].half_width);
  }
}

TEST_CASE("confidence interval arithmetic") {
  CHECK(kappa_quantile(0.025) == 6.747);
  CHECK(kappa_quantile(0.05) == 5.323);
  CHECK(kappa_quantile(0.01) == 8.613);
  CHECK(kappa_quantile(0.005) == 10.02);
  CHECK(kappa_supported(0.025));
  CHECK_FALSE(kappa_supported(0.3));
  CHECK_THROWS_AS(kappa_quantile(0.3), std::invalid_argument);

  // Qbar = 5.0, m_T / T = 0.1, dhat = 4.0 at the 95% level.
  const double half = kappa_quantile(0.025) * 0.1 * std::sqrt(4.0);
  CHECK(5.0 - half == doctest::Approx(3.6506).epsilon(1e-12));
  CHECK(5.0 + half == doctest::Approx(6.3494).epsilon(1e-12));
}

TEST_CASE("interval needs at least two iterates") {
  RsAccumulator acc(1);
  acc.update(std::vector<double>{1.0}, 1);
  CHECK_THROWS_AS(acc.confidence_intervals(0.05), std::logic_error);
  acc.update(std::vector<double>{2.0}, 1);
  CHECK_NOTHROW(acc.confidence_intervals(0.05));
  CHECK_THROWS_AS(acc.confidence_intervals(0.6), std::invalid_argument);
}

TEST_CASE("pivot is zero at the mean and dual to the interval") {
  const Stream s = random_stream(3, 40, 2.0, 1.0, 404);
  const RsAccumulator acc = feed(s);

  const auto at_mean = acc.pivot_stats(acc.mean());
  for (const auto& k : at_mean) {
    REQUIRE(k.has_value());
    CHECK(std::abs(*k) <= 1e-9);
  }

  RngStream rng(505);
  const double kappa = kappa_quantile(0.025);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ref(3);
    for (int j = 0; j < 3; ++j) {
      ref[static_cast<std::size_t>(j)] = acc.mean(j) + 0.4 * rng.normal();
    }
    const auto pivots = acc.pivot_stats(ref);
    const auto intervals = acc.confidence_intervals(0.05);
    for (int j = 0; j < 3; ++j) {
      REQUIRE(pivots[static_cast<std::size_t>(j)].has_value());
      const bool by_pivot = std::abs(*pivots[static_cast<std::size_t>(j)]) <= kappa;
      const bool by_interval =
          intervals[static_cast<std::size_t>(j)].contains(ref[static_cast<std::size_t>(j)]);
      CHECK(by_pivot == by_interval);
    }
  }
}

TEST_CASE("iterates must arrive in order") {
  RsAccumulator acc(1);
  QTable q(1, 1, 0.0);
  acc.observe(1, q, 1);
  CHECK_THROWS_AS(acc.observe(3, q, 1), std::logic_error);
}

TEST_CASE("full-matrix mode") {
  CHECK_THROWS_AS(RsAccumulator(65, true), std::invalid_argument);

  const Stream s = random_stream(6, 120, 0.0, 1.0, 606);
  const RsAccumulator acc = feed(s, true);
  const auto full = acc.dhat_full();

  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(full[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] - acc.dhat_diag(j)) <=
          1e-12 * std::max(1e-12, acc.dhat_diag(j)));
    for (int k = 0; k < 6; ++k) {
      CHECK(full[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] ==
            doctest::Approx(full[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]).epsilon(1e-10));
    }
  }

  // Positive semidefinite: random quadratic forms are nonnegative.
  RngStream rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.normal();
    double quad = 0.0;
    for (int j = 0; j < 6; ++j) {
      for (int k = 0; k < 6; ++k) {
        quad += x[static_cast<std::size_t>(j)] * full[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
      }
    }
    CHECK(quad >= -1e-9);
  }

  RsAccumulator diag_only(6);
  CHECK_THROWS_AS(diag_only.dhat_full(), std::logic_error);
}

TEST_CASE("efficiency factor") {
  CHECK(efficiency_factor(BatchSchedule::constant(1), 100) == 1.0);
  CHECK(efficiency_factor(BatchSchedule::constant(7), 12345) == 1.0);

  std::vector<int> linear(10);
  for (int t = 0; t < 10; ++t) linear[static_cast<std::size_t>(t)] = t + 1;
  CHECK(efficiency_factor(BatchSchedule::fixed(linear), 10) ==
        doctest::Approx(1.6109325396825396).epsilon(1e-12));

  RngStream rng(808);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> sched(20);
    for (int& b : sched) b = 1 + static_cast<int>(rng.bits() % 6);
    CHECK(efficiency_factor(BatchSchedule::fixed(sched), 20) >= 1.0);
  }
}
