#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qinfer/kahan.hpp"
#include "qinfer/qlearn.hpp"

namespace qinfer {

struct EntryInterval {
  int index = 0;
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.0;        // 1 - alpha
  bool degenerate = false;   // zero partial-sum variance

  bool contains(double x) const {
    return x >= center - half_width && x <= center + half_width;
  }
};

// Tabulated upper quantiles of the random-scaling pivot distribution
// W(1) / sqrt(int_0^1 (W(r) - r W(1))^2 dr), W a standard Brownian motion.
// Supported alpha/2 values: 0.005, 0.01, 0.025, 0.05. The constants are
// cross-checked against the Monte-Carlo oracle in the test suite.
double kappa_quantile(double alpha_half);
bool kappa_supported(double alpha_half);

// Single-pass accumulator over the iterate stream Q_1, Q_2, ... of one
// chain. After T updates it reproduces, entry by entry,
//
//   mean      Qbar_T     = (1/T) sum_t Q_t
//   m_T                  = sqrt(sum_t 1/B_t)
//   dhat_diag D_T[j]     = (1/(T m_T^2)) sum_s (S_s[j] - s Qbar_T[j])^2,
//                          S_s = sum_{t<=s} Q_t
//
// in O(d) memory and O(d) work per update. Internally the partial sums are
// anchored at the first iterate, which keeps the cancellation in the
// quadratic terms at the level of the iterates' spread rather than their
// magnitude and makes the diagonal exactly zero for a constant stream.
class RsAccumulator : public IterateSink {
 public:
  explicit RsAccumulator(int dim, bool full_matrix = false);

  void update(std::span<const double> iterate, int batch_size);
  void observe(long t, const QTable& q, int batch_size) override;

  long count() const { return count_; }
  int dim() const { return dim_; }

  double m_T() const;
  double inv_batch_sum() const { return inv_batch_.sum; }

  double mean(int j) const;
  std::vector<double> mean() const;

  // Raw running sum of iterates (sum_t Q_t[j]).
  double total(int j) const { return raw_sum_[static_cast<std::size_t>(j)]; }

  double dhat_diag(int j) const;
  std::vector<double> dhat_diag() const;
  bool degenerate(int j) const;

  // Full d x d matrix; only available when constructed with full_matrix.
  std::vector<std::vector<double>> dhat_full() const;

  // Per-entry (1-alpha) confidence intervals
  //   mean_j +- kappa_{alpha/2} (m_T / T) sqrt(dhat_jj).
  // Requires count() >= 2 and a tabulated alpha.
  std::vector<EntryInterval> confidence_intervals(double alpha) const;

  // Pivot statistics T (mean_j - ref_j) / (m_T sqrt(dhat_jj)); entries with
  // a degenerate dhat carry no value.
  std::vector<std::optional<double>> pivot_stats(
      std::span<const double> reference) const;

 private:
  double dhat_raw(int j) const;

  int dim_ = 0;
  bool full_ = false;
  long count_ = 0;

  std::vector<double> anchor_;   // first iterate
  KahanVector raw_sum_;          // sum_t Q_t
  KahanVector partial_;          // S~_t = sum_{u<=t} (Q_u - anchor)
  KahanVector partial_total_;    // sum_s S~_s
  KahanVector weighted_;         // sum_s s S~_s
  KahanVector quadratic_;        // sum_s S~_s^2
  std::vector<KahanVector> cross_;  // sum_s S~_s S~_s^T (full mode)
  KahanScalar inv_batch_;        // sum_t 1/B_t
  unsigned long long sum_s_ = 0;
  unsigned long long sum_s2_ = 0;
};

// (sum_t B_t)(sum_t 1/B_t) / T^2: the covariance inflation of the averaged
// estimator relative to a constant batch schedule. Equals 1 exactly for
// constant schedules, > 1 otherwise.
double efficiency_factor(const BatchSchedule& schedule, long horizon);

}  // namespace qinfer
