#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qinfer/grid_world.hpp"
#include "qinfer/matching.hpp"

namespace qinfer {

// Full description of one coverage experiment. Reward-noise sigma lives in
// the environment config (noise.sigma).
struct ExperimentSpec {
  std::variant<GridWorldConfig, MatchingConfig> env = GridWorldConfig{};
  double eta = 0.1;
  double gamma = 0.9;
  int batch_size = 1;
  long horizon = 10000;
  std::vector<long> checkpoints;  // defaults to {horizon}
  int replications = 200;
  double alpha = 0.05;
  std::uint64_t base_seed = 12345;
  int stationary_sims = 10000;  // 0 skips the stationary-mean target

  void validate() const;  // throws ConfigError
  std::unique_ptr<EnvModel> build_env() const;
  double noise_sigma() const;

  // Canonical key=value serialization (hashed into report metadata).
  std::string canonical() const;
};

// Parses the plain-text `key = value` config format described in the README.
// Unknown or duplicate keys are errors.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

std::string spec_hash(const ExperimentSpec& spec);

}  // namespace qinfer
