#include "qinfer/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qinfer/errors.hpp"
#include "qinfer/rsinfer.hpp"

namespace qinfer {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_any(const std::string& s, const char* seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::strchr(seps, c) != nullptr) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "' for " + key);
  }
}

long to_long(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value '" + s + "' for " + key);
  }
}

// "(r,c)" with 1-based coordinates.
GridCell to_cell(const std::string& tok, const std::string& key) {
  int r = 0;
  int c = 0;
  char tail = 0;
  if (std::sscanf(tok.c_str(), " ( %d , %d )%c", &r, &c, &tail) != 2) {
    throw ConfigError("bad cell '" + tok + "' for " + key + ", expected (row,col)");
  }
  return {r, c};
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": empty key or value");
      }
      if (!values_.emplace(key, value).second) {
        throw ConfigError("duplicate key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    seen_.insert(key);
    return it->second;
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : values_) {
      (void)value;
      if (seen_.count(key) == 0) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> seen_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentSpec::validate() const {
  try {
    std::visit([](const auto& cfg) { cfg.validate(); }, env);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(eta > 0.0) || eta > 1.0) throw ConfigError("chain.eta must lie in (0, 1]");
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("chain.gamma must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("chain.batch_size must be >= 1");
  if (horizon < 2) throw ConfigError("chain.horizon must be >= 2");
  if (checkpoints.empty()) throw ConfigError("exp.checkpoints must be nonempty");
  long prev = 1;  // confidence intervals need at least two iterates
  for (long ck : checkpoints) {
    if (ck <= prev) {
      throw ConfigError("exp.checkpoints must be ascending and >= 2");
    }
    if (ck > horizon) throw ConfigError("checkpoint beyond chain.horizon");
    prev = ck;
  }
  if (replications < 1) throw ConfigError("exp.replications must be >= 1");
  if (!kappa_supported(alpha / 2.0)) {
    throw ConfigError("exp.alpha has no tabulated kappa quantile");
  }
  if (stationary_sims < 0) throw ConfigError("exp.stationary_sims must be >= 0");
}

std::unique_ptr<EnvModel> ExperimentSpec::build_env() const {
  if (std::holds_alternative<GridWorldConfig>(env)) {
    return build_grid_world(std::get<GridWorldConfig>(env));
  }
  return build_matching(std::get<MatchingConfig>(env));
}

double ExperimentSpec::noise_sigma() const {
  return std::visit([](const auto& cfg) { return cfg.noise_sigma; }, env);
}

std::string ExperimentSpec::canonical() const {
  std::ostringstream out;
  if (std::holds_alternative<GridWorldConfig>(env)) {
    const auto& g = std::get<GridWorldConfig>(env);
    out << "env=grid;rows=" << g.rows << ";cols=" << g.cols << ";blocked=";
    std::vector<GridCell> blocked = g.blocked;
    std::sort(blocked.begin(), blocked.end());
    for (const GridCell& c : blocked) out << "(" << c.row << "," << c.col << ")";
    out << ";terminals=";
    for (const auto& [cell, reward] : g.terminals) {
      out << "(" << cell.row << "," << cell.col << "):" << fmt(reward);
    }
    out << ";step_reward=" << fmt(g.step_reward) << ";sigma=" << fmt(g.noise_sigma);
  } else {
    const auto& m = std::get<MatchingConfig>(env);
    out << "env=matching;reward=";
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out << fmt(m.reward_matrix[i][j]) << ",";
    }
    out << ";demand=";
    for (double p : m.demand_pmf) out << fmt(p) << ",";
    out << ";supply=";
    for (double p : m.supply_pmf) out << fmt(p) << ",";
    out << ";queue_cap=" << m.queue_cap << ";action_cap=" << m.action_cap
        << ";sigma=" << fmt(m.noise_sigma);
  }
  out << "|eta=" << fmt(eta) << ";gamma=" << fmt(gamma)
      << ";batch=" << batch_size << ";horizon=" << horizon << ";checkpoints=";
  for (long ck : checkpoints) out << ck << ",";
  out << ";replications=" << replications << ";alpha=" << fmt(alpha)
      << ";stationary_sims=" << stationary_sims;
  return out.str();
}

ExperimentSpec parse_config(const std::string& text) {
  KeyValues kv(text);
  ExperimentSpec spec;

  const std::string kind = kv.take("env.kind", "");
  if (kind == "grid") {
    GridWorldConfig g;
    g.rows = static_cast<int>(to_long(kv.take("grid.rows", "3"), "grid.rows"));
    g.cols = static_cast<int>(to_long(kv.take("grid.cols", "4"), "grid.cols"));
    if (kv.has("grid.blocked")) {
      g.blocked.clear();
      for (const std::string& tok : split_any(kv.take("grid.blocked", ""), " ;\t")) {
        g.blocked.push_back(to_cell(tok, "grid.blocked"));
      }
    }
    if (kv.has("grid.terminals")) {
      g.terminals.clear();
      for (const std::string& tok : split_any(kv.take("grid.terminals", ""), " ;\t")) {
        const auto colon = tok.rfind(':');
        if (colon == std::string::npos) {
          throw ConfigError("bad terminal '" + tok + "', expected (row,col):reward");
        }
        const GridCell cell = to_cell(tok.substr(0, colon), "grid.terminals");
        g.terminals[cell] = to_double(tok.substr(colon + 1), "grid.terminals");
      }
    }
    g.step_reward = to_double(kv.take("grid.step_reward", "-1"), "grid.step_reward");
    g.noise_sigma = to_double(kv.take("noise.sigma", "0"), "noise.sigma");
    spec.env = g;
  } else if (kind == "matching") {
    MatchingConfig m;
    if (kv.has("match.reward_matrix")) {
      const auto rows = split_any(kv.take("match.reward_matrix", ""), ";");
      if (rows.size() != 2) {
        throw ConfigError("match.reward_matrix needs two ';'-separated rows");
      }
      for (int i = 0; i < 2; ++i) {
        const auto cols = split_any(rows[static_cast<std::size_t>(i)], " \t,");
        if (cols.size() != 2) {
          throw ConfigError("match.reward_matrix rows need two entries");
        }
        for (int j = 0; j < 2; ++j) {
          m.reward_matrix[i][j] =
              to_double(cols[static_cast<std::size_t>(j)], "match.reward_matrix");
        }
      }
    }
    auto read_pmf = [&](const char* key, std::array<double, 4>& pmf) {
      if (!kv.has(key)) return;
      const auto toks = split_any(kv.take(key, ""), " \t,");
      if (toks.size() != 4) {
        throw ConfigError(std::string(key) + " needs four probabilities");
      }
      for (int i = 0; i < 4; ++i) {
        pmf[static_cast<std::size_t>(i)] =
            to_double(toks[static_cast<std::size_t>(i)], key);
      }
    };
    read_pmf("match.demand_pmf", m.demand_pmf);
    read_pmf("match.supply_pmf", m.supply_pmf);
    m.queue_cap =
        static_cast<int>(to_long(kv.take("match.queue_cap", "3"), "match.queue_cap"));
    m.action_cap = static_cast<int>(
        to_long(kv.take("match.action_cap", "3"), "match.action_cap"));
    m.noise_sigma = to_double(kv.take("noise.sigma", "0"), "noise.sigma");
    spec.env = m;
  } else if (kind.empty()) {
    throw ConfigError("missing required key env.kind (grid | matching)");
  } else {
    throw ConfigError("unknown env.kind '" + kind + "'");
  }

  spec.eta = to_double(kv.take("chain.eta", "0.1"), "chain.eta");
  spec.gamma = to_double(kv.take("chain.gamma", "0.9"), "chain.gamma");
  spec.batch_size =
      static_cast<int>(to_long(kv.take("chain.batch_size", "1"), "chain.batch_size"));
  spec.horizon = to_long(kv.take("chain.horizon", "10000"), "chain.horizon");
  const std::string q_init = kv.take("chain.q_init", "zero");
  if (q_init != "zero") {
    throw ConfigError("chain.q_init supports only 'zero'");
  }

  if (kv.has("exp.checkpoints")) {
    for (const std::string& tok : split_any(kv.take("exp.checkpoints", ""), " \t,")) {
      spec.checkpoints.push_back(to_long(tok, "exp.checkpoints"));
    }
  } else {
    spec.checkpoints = {spec.horizon};
  }
  spec.replications = static_cast<int>(
      to_long(kv.take("exp.replications", "200"), "exp.replications"));
  spec.alpha = to_double(kv.take("exp.alpha", "0.05"), "exp.alpha");
  spec.base_seed = static_cast<std::uint64_t>(
      to_long(kv.take("exp.seed", "12345"), "exp.seed"));
  spec.stationary_sims = static_cast<int>(
      to_long(kv.take("exp.stationary_sims", "10000"), "exp.stationary_sims"));

  kv.check_all_consumed();
  spec.validate();
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string spec_hash(const ExperimentSpec& spec) {
  // FNV-1a 64 over the canonical serialization.
  const std::string text = spec.canonical();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qinfer
