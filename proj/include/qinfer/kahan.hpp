#pragma once

#include <cstddef>
#include <vector>

namespace qinfer {

// Kahan compensated summation. The partial-sum statistics accumulate terms
// that grow like T^2 against deviations that stay O(T), so plain doubles
// lose digits long before the 1e-10 agreement the estimator checks require.
struct KahanScalar {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Structure-of-arrays form for per-entry accumulation.
class KahanVector {
 public:
  KahanVector() = default;
  explicit KahanVector(std::size_t n) : sum_(n, 0.0), carry_(n, 0.0) {}

  void add(std::size_t i, double x) {
    const double y = x - carry_[i];
    const double t = sum_[i] + y;
    carry_[i] = (t - sum_[i]) - y;
    sum_[i] = t;
  }

  double operator[](std::size_t i) const { return sum_[i]; }
  std::size_t size() const { return sum_.size(); }
  const std::vector<double>& values() const { return sum_; }

 private:
  std::vector<double> sum_;
  std::vector<double> carry_;
};

}  // namespace qinfer
