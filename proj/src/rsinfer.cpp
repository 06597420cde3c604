#include "qinfer/rsinfer.hpp"

#include <cmath>
#include <stdexcept>

namespace qinfer {

namespace {

struct KappaRow {
  double alpha_half;
  double quantile;
};

// Upper quantiles of kappa; see oracle::kappa_mc for the simulation that
// validates them. The 0.005 entry comes from a 1e6-path run of that oracle
// (se 0.03); the others match the usual published table.
constexpr KappaRow kKappaTable[] = {
    {0.005, 10.02},
    {0.01, 8.613},
    {0.025, 6.747},
    {0.05, 5.323},
};

constexpr double kAlphaTol = 1e-9;

}  // namespace

bool kappa_supported(double alpha_half) {
  for (const KappaRow& row : kKappaTable) {
    if (std::abs(row.alpha_half - alpha_half) < kAlphaTol) return true;
  }
  return false;
}

double kappa_quantile(double alpha_half) {
  for (const KappaRow& row : kKappaTable) {
    if (std::abs(row.alpha_half - alpha_half) < kAlphaTol) return row.quantile;
  }
  throw std::invalid_argument("no tabulated kappa quantile for this level");
}

RsAccumulator::RsAccumulator(int dim, bool full_matrix)
    : dim_(dim), full_(full_matrix) {
  if (dim < 1) throw std::invalid_argument("accumulator dimension must be >= 1");
  if (full_ && dim > 64) {
    throw std::invalid_argument("full-matrix mode is limited to dim <= 64");
  }
  const auto n = static_cast<std::size_t>(dim);
  anchor_.assign(n, 0.0);
  raw_sum_ = KahanVector(n);
  partial_ = KahanVector(n);
  partial_total_ = KahanVector(n);
  weighted_ = KahanVector(n);
  quadratic_ = KahanVector(n);
  if (full_) cross_.assign(n, KahanVector(n));
}

void RsAccumulator::update(std::span<const double> iterate, int batch_size) {
  if (static_cast<int>(iterate.size()) != dim_) {
    throw std::invalid_argument("iterate dimension mismatch");
  }
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");

  ++count_;
  const auto t = static_cast<double>(count_);
  const auto ull_t = static_cast<unsigned long long>(count_);
  sum_s_ += ull_t;
  sum_s2_ += ull_t * ull_t;
  inv_batch_.add(1.0 / batch_size);

  if (count_ == 1) {
    for (int j = 0; j < dim_; ++j) anchor_[static_cast<std::size_t>(j)] = iterate[j];
  }

  for (int j = 0; j < dim_; ++j) {
    const auto i = static_cast<std::size_t>(j);
    raw_sum_.add(i, iterate[j]);
    partial_.add(i, iterate[j] - anchor_[i]);
    const double s = partial_[i];
    partial_total_.add(i, s);
    weighted_.add(i, t * s);
    quadratic_.add(i, s * s);
  }
  if (full_) {
    for (int j = 0; j < dim_; ++j) {
      const double sj = partial_[static_cast<std::size_t>(j)];
      auto& row = cross_[static_cast<std::size_t>(j)];
      for (int k = 0; k < dim_; ++k) {
        row.add(static_cast<std::size_t>(k),
                sj * partial_[static_cast<std::size_t>(k)]);
      }
    }
  }
}

void RsAccumulator::observe(long t, const QTable& q, int batch_size) {
  if (t != count_ + 1) {
    throw std::logic_error("iterates must be observed in order t = 1, 2, ...");
  }
  update(q.values, batch_size);
}

double RsAccumulator::m_T() const {
  if (count_ < 1) throw std::logic_error("no iterates observed");
  return std::sqrt(inv_batch_.sum);
}

double RsAccumulator::mean(int j) const {
  if (count_ < 1) throw std::logic_error("no iterates observed");
  const auto i = static_cast<std::size_t>(j);
  return anchor_[i] + partial_[i] / static_cast<double>(count_);
}

std::vector<double> RsAccumulator::mean() const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(j)] = mean(j);
  return out;
}

double RsAccumulator::dhat_raw(int j) const {
  if (count_ < 1) throw std::logic_error("no iterates observed");
  const auto i = static_cast<std::size_t>(j);
  const double t = static_cast<double>(count_);
  // Centering shift from the anchor to the running mean.
  const double delta = partial_[i] / t;
  const double sum =
      quadratic_[i] - 2.0 * delta * weighted_[i] +
      delta * delta * static_cast<double>(sum_s2_);
  return sum / (t * inv_batch_.sum);
}

double RsAccumulator::dhat_diag(int j) const { return std::max(0.0, dhat_raw(j)); }

std::vector<double> RsAccumulator::dhat_diag() const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) out[static_cast<std::size_t>(j)] = dhat_diag(j);
  return out;
}

bool RsAccumulator::degenerate(int j) const { return dhat_raw(j) <= 0.0; }

std::vector<std::vector<double>> RsAccumulator::dhat_full() const {
  if (!full_) throw std::logic_error("accumulator was not built in full-matrix mode");
  if (count_ < 1) throw std::logic_error("no iterates observed");
  const double t = static_cast<double>(count_);
  const double scale = 1.0 / (t * inv_batch_.sum);
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(dim_),
      std::vector<double>(static_cast<std::size_t>(dim_), 0.0));
  for (int j = 0; j < dim_; ++j) {
    const auto ij = static_cast<std::size_t>(j);
    const double dj = partial_[ij] / t;
    for (int k = 0; k < dim_; ++k) {
      const auto ik = static_cast<std::size_t>(k);
      const double dk = partial_[ik] / t;
      const double sum = cross_[ij][ik] - dk * weighted_[ij] -
                         dj * weighted_[ik] +
                         dj * dk * static_cast<double>(sum_s2_);
      out[ij][ik] = sum * scale;
    }
  }
  return out;
}

std::vector<EntryInterval> RsAccumulator::confidence_intervals(
    double alpha) const {
  if (count_ < 2) {
    throw std::logic_error("confidence intervals need at least two iterates");
  }
  const double kappa = kappa_quantile(alpha / 2.0);
  const double scale = m_T() / static_cast<double>(count_);
  std::vector<EntryInterval> out(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) {
    EntryInterval& iv = out[static_cast<std::size_t>(j)];
    iv.index = j;
    iv.center = mean(j);
    iv.level = 1.0 - alpha;
    const double d = dhat_raw(j);
    if (d <= 0.0) {
      iv.half_width = 0.0;
      iv.degenerate = true;
    } else {
      iv.half_width = kappa * scale * std::sqrt(d);
    }
  }
  return out;
}

std::vector<std::optional<double>> RsAccumulator::pivot_stats(
    std::span<const double> reference) const {
  if (static_cast<int>(reference.size()) != dim_) {
    throw std::invalid_argument("reference dimension mismatch");
  }
  if (count_ < 1) throw std::logic_error("no iterates observed");
  const double t = static_cast<double>(count_);
  const double m = m_T();
  std::vector<std::optional<double>> out(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) {
    const double d = dhat_raw(j);
    if (d <= 0.0) continue;
    out[static_cast<std::size_t>(j)] =
        t * (mean(j) - reference[j]) / (m * std::sqrt(d));
  }
  return out;
}

double efficiency_factor(const BatchSchedule& schedule, long horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (schedule.is_constant()) return 1.0;  // (TB)(T/B)/T^2 algebraically
  KahanScalar total;
  KahanScalar inv_total;
  for (long t = 1; t <= horizon; ++t) {
    const int b = schedule.at(t);
    total.add(static_cast<double>(b));
    inv_total.add(1.0 / b);
  }
  const double t = static_cast<double>(horizon);
  return total.sum * inv_total.sum / (t * t);
}

}  // namespace qinfer
