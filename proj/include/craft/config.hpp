#pragma once

// Flat INI-style run configuration with sections [env], [agents], [algo] and
// [run]. Unknown sections or keys are rejected with the offending line.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "craft/algorithm.hpp"
#include "craft/exbmdp.hpp"

namespace craft {

struct PolicyConfig {
  std::string kind = "uniform";  // uniform | sticky | constant
  double stay = 0.75;            // sticky: Pr(a_h = s_h)
  int action = 0;                // constant: the action taken
};

struct RunConfig {
  // [env]
  std::string env_kind = "toy";
  int horizon = 30;
  std::size_t width = 128;
  std::uint64_t env_seed = 0;
  // [agents]
  PolicyConfig policy_a{"uniform", 0.75, 0};
  PolicyConfig policy_b{"sticky", 0.75, 1};
  std::size_t n = 500;  // trajectories per agent
  // [algo]
  std::string algorithm = "craft";  // craft | draft | single-obs | paired-obs
  CraftConfig craft{1.0986122886681098, 0.2, 0.15625, 8};
  // [run]
  std::uint64_t data_seed = 0;
  int seeds = 20;
  std::vector<std::size_t> sizes{500, 1000, 5000};
  unsigned threads = 1;
};

/// Parses `in`; errors are ConfigError("<source>:<line>: <message>").
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical INI text; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

/// FNV-1a 64 of to_ini(config), as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::shared_ptr<const Policy> make_policy(const PolicyConfig& p, int num_actions);

}  // namespace craft
