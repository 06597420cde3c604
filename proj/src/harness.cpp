#include "qinfer/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qinfer/errors.hpp"
#include "qinfer/oracle.hpp"
#include "qinfer/parallel.hpp"
#include "qinfer/rsinfer.hpp"

namespace qinfer {

namespace {

struct CheckpointStats {
  long covered_qstar = 0;
  long covered_stationary = 0;
  double length_sum = 0.0;
};

// Feeds a chain's iterates into the accumulator and scores the confidence
// intervals at each checkpoint.
class CheckpointEvaluator final : public IterateSink {
 public:
  CheckpointEvaluator(int dim, const std::vector<long>& checkpoints,
                      double alpha, const std::vector<int>& active,
                      const std::vector<double>& qstar,
                      const std::vector<std::vector<double>>* stationary)
      : acc_(dim),
        checkpoints_(checkpoints),
        alpha_(alpha),
        active_(active),
        qstar_(qstar),
        stationary_(stationary),
        stats_(checkpoints.size()) {}

  void observe(long t, const QTable& q, int batch_size) override {
    acc_.observe(t, q, batch_size);
    if (next_ < checkpoints_.size() && t == checkpoints_[next_]) {
      score(next_);
      ++next_;
    }
  }

  const std::vector<CheckpointStats>& stats() const { return stats_; }

 private:
  void score(std::size_t ck) {
    const std::vector<EntryInterval> intervals = acc_.confidence_intervals(alpha_);
    CheckpointStats& st = stats_[ck];
    for (int j : active_) {
      const EntryInterval& iv = intervals[static_cast<std::size_t>(j)];
      st.length_sum += 2.0 * iv.half_width;
      if (iv.contains(qstar_[static_cast<std::size_t>(j)])) ++st.covered_qstar;
      if (stationary_ != nullptr &&
          iv.contains((*stationary_)[ck][static_cast<std::size_t>(j)])) {
        ++st.covered_stationary;
      }
    }
  }

  RsAccumulator acc_;
  const std::vector<long>& checkpoints_;
  double alpha_;
  const std::vector<int>& active_;
  const std::vector<double>& qstar_;
  const std::vector<std::vector<double>>* stationary_;
  std::vector<CheckpointStats> stats_;
  std::size_t next_ = 0;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CoverageReport run_coverage(const ExperimentSpec& spec, int jobs) {
  spec.validate();
  const std::unique_ptr<EnvModel> env = spec.build_env();
  const int dim = env->num_entries();

  ChainConfig cfg;
  cfg.eta = spec.eta;
  cfg.gamma = spec.gamma;
  cfg.batch = BatchSchedule::constant(spec.batch_size);
  cfg.horizon = spec.horizon;
  if (!cfg.step_size_contractive()) {
    std::cerr << "warning: eta * (1 + gamma) >= 1; updates are outside the "
                 "contractive step-size regime\n";
  }

  const QTable qstar = value_iteration(*env, spec.gamma, 1e-10);

  std::vector<int> active;
  for (int s = 0; s < env->num_states(); ++s) {
    if (env->is_terminal(s)) continue;
    for (int a = 0; a < env->num_actions(); ++a) {
      active.push_back(s * env->num_actions() + a);
    }
  }

  // Stationary-mean target, one estimate per checkpoint horizon.
  std::vector<std::vector<double>> stationary;
  if (spec.stationary_sims > 0) {
    stationary.resize(spec.checkpoints.size());
    for (std::size_t ck = 0; ck < spec.checkpoints.size(); ++ck) {
      ChainConfig stat_cfg = cfg;
      stat_cfg.horizon = spec.checkpoints[ck];
      const StationaryEstimate est = mc_stationary_mean(
          *env, stat_cfg, spec.stationary_sims,
          substream(spec.base_seed, kStationaryStream, ck), jobs);
      stationary[ck] = est.mean.values;
    }
  }

  // Replicated chains; each replication owns its stats slot, so aggregation
  // order (and therefore the report) does not depend on jobs.
  const int reps = spec.replications;
  std::vector<std::vector<CheckpointStats>> per_rep(static_cast<std::size_t>(reps));
  parallel_for(reps, jobs, [&](long r) {
    CheckpointEvaluator eval(dim, spec.checkpoints, spec.alpha, active,
                             qstar.values,
                             spec.stationary_sims > 0 ? &stationary : nullptr);
    run_chain(*env, cfg, substream(spec.base_seed, kChainStream,
                                   static_cast<std::uint64_t>(r)),
              &eval);
    per_rep[static_cast<std::size_t>(r)] = eval.stats();
  });

  const double n_active = static_cast<double>(active.size());
  CoverageReport report;
  report.spec_hash = spec_hash(spec);
  report.base_seed = spec.base_seed;
  report.version = kVersion;

  for (std::size_t ck = 0; ck < spec.checkpoints.size(); ++ck) {
    CheckpointRow row;
    row.method = spec.batch_size == 1 ? "vanilla" : "batch";
    row.n = spec.checkpoints[ck];

    double cov_q = 0.0;
    double cov_s = 0.0;
    double len = 0.0;
    for (int r = 0; r < reps; ++r) {
      const CheckpointStats& st = per_rep[static_cast<std::size_t>(r)][ck];
      cov_q += static_cast<double>(st.covered_qstar);
      cov_s += static_cast<double>(st.covered_stationary);
      len += st.length_sum;
    }
    const double denom = n_active * reps;
    row.coverage_qstar_pct = 100.0 * cov_q / denom;
    row.coverage_stationary_pct =
        spec.stationary_sims > 0 ? 100.0 * cov_s / denom
                                 : std::numeric_limits<double>::quiet_NaN();
    row.mean_length = len / denom;

    // Monte-Carlo error of the Q* coverage: replication-level spread (entries
    // within one replication are correlated).
    if (reps > 1) {
      const double mean_p = cov_q / denom;
      double var = 0.0;
      for (int r = 0; r < reps; ++r) {
        const double p =
            static_cast<double>(per_rep[static_cast<std::size_t>(r)][ck].covered_qstar) /
            n_active;
        var += (p - mean_p) * (p - mean_p);
      }
      var /= static_cast<double>(reps - 1);
      row.mc_stderr = 100.0 * std::sqrt(var / static_cast<double>(reps));
    }
    report.rows.push_back(row);
  }

  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].mean_length > report.rows[i - 1].mean_length) {
      std::cerr << "warning: mean interval length increased from n="
                << report.rows[i - 1].n << " to n=" << report.rows[i].n << "\n";
    }
  }
  return report;
}

CoverageReport compare_methods(const ExperimentSpec& spec, int jobs) {
  if (spec.batch_size <= 1) {
    throw ConfigError("compare_methods needs chain.batch_size > 1");
  }
  ExperimentSpec vanilla = spec;
  vanilla.batch_size = 1;
  vanilla.base_seed = substream(spec.base_seed, kMethodStream, 0);
  ExperimentSpec batch = spec;
  batch.base_seed = substream(spec.base_seed, kMethodStream, 1);

  const CoverageReport a = run_coverage(vanilla, jobs);
  const CoverageReport b = run_coverage(batch, jobs);

  CoverageReport out;
  out.spec_hash = spec_hash(spec);
  out.base_seed = spec.base_seed;
  out.version = kVersion;
  out.rows = a.rows;
  out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
  return out;
}

void emit_report(const CoverageReport& report, ReportFormat format,
                 std::ostream& out) {
  if (format == ReportFormat::kCsv) {
    out << "method,n,coverage_qstar_pct,coverage_stationary_pct,mean_length,"
           "mc_stderr\n";
    for (const CheckpointRow& row : report.rows) {
      out << row.method << ',' << row.n << ',' << fmt_double(row.coverage_qstar_pct)
          << ',' << fmt_double(row.coverage_stationary_pct) << ','
          << fmt_double(row.mean_length) << ',' << fmt_double(row.mc_stderr)
          << '\n';
    }
    return;
  }

  nlohmann::ordered_json j;
  j["metadata"] = {{"spec_hash", report.spec_hash},
                   {"seed", report.base_seed},
                   {"version", report.version}};
  j["rows"] = nlohmann::ordered_json::array();
  for (const CheckpointRow& row : report.rows) {
    nlohmann::ordered_json r;
    r["method"] = row.method;
    r["n"] = row.n;
    r["coverage_qstar_pct"] = row.coverage_qstar_pct;
    if (std::isnan(row.coverage_stationary_pct)) {
      r["coverage_stationary_pct"] = nullptr;
    } else {
      r["coverage_stationary_pct"] = row.coverage_stationary_pct;
    }
    r["mean_length"] = row.mean_length;
    r["mc_stderr"] = row.mc_stderr;
    j["rows"].push_back(r);
  }
  out << j.dump(2) << '\n';
}

void write_report(const CoverageReport& report, ReportFormat format,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  emit_report(report, format, out);
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

CoverageReport parse_report_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad report JSON: ") + e.what());
  }
  CoverageReport report;
  report.spec_hash = j.at("metadata").at("spec_hash").get<std::string>();
  report.base_seed = j.at("metadata").at("seed").get<std::uint64_t>();
  report.version = j.at("metadata").at("version").get<std::string>();
  for (const auto& r : j.at("rows")) {
    CheckpointRow row;
    row.method = r.at("method").get<std::string>();
    row.n = r.at("n").get<long>();
    row.coverage_qstar_pct = r.at("coverage_qstar_pct").get<double>();
    const auto& cs = r.at("coverage_stationary_pct");
    row.coverage_stationary_pct =
        cs.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : cs.get<double>();
    row.mean_length = r.at("mean_length").get<double>();
    row.mc_stderr = r.at("mc_stderr").get<double>();
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace qinfer
