#pragma once

// Toy-environment experiment harness shared by the CLI and the acceptance
// suite: data generation, algorithm dispatch, accuracy rows and the
// multi-seed comparison table.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "craft/algorithm.hpp"
#include "craft/config.hpp"
#include "craft/exbmdp.hpp"
#include "craft/toy_env.hpp"
#include "json.hpp"

namespace craft {

struct ToyData {
  ToyEnvironment env;
  TrajectoryDataset a;
  TrajectoryDataset b;
};

/// n labelled trajectories per agent. Agent streams are derived from data_seed.
ToyData generate_toy_data(const RunConfig& config, std::size_t n, std::uint64_t env_seed, std::uint64_t data_seed,
                          unsigned threads = 1);

struct AlgorithmResult {
  std::string algorithm;
  std::vector<std::vector<double>> per_h;  // population accuracy per timestep (two values for paired interiors)
  double average = 0.0;
  std::vector<std::string> warnings;
  std::string error;      // set when the algorithm stopped on a precondition failure
  nlohmann::json details;  // learned encoders and algorithm diagnostics
};

/// Runs `algorithm` (craft | draft | single-obs | paired-obs) on toy data.
/// A CRAFT run that exceeds max_states is reported with `error` set and
/// chance accuracy (1/2) at every timestep after the first.
AlgorithmResult run_toy_algorithm(const std::string& algorithm, const ToyData& data, const RunConfig& config,
                                  unsigned threads = 1);

nlohmann::json craft_output_json(const CraftOutput& out, const HypothesisFamily& family);

/// Per-timestep misassigned trajectory counts of a CRAFT assignment.
std::vector<std::size_t> misassignment_profile(const CraftOutput& out, const TrajectoryDataset& a,
                                               const TrajectoryDataset& b);

struct TableCell {
  std::string algorithm;
  std::size_t n = 0;
  std::vector<double> per_seed;
  double mean = 0.0;
  double std_error = 0.0;
  int failures = 0;
};

struct ComparisonTable {
  RunConfig config;
  std::vector<TableCell> cells;  // algorithm-major, then size
  std::vector<nlohmann::json> runs;
  bool low_confidence = false;
};

inline const std::vector<std::string>& table_algorithms() {
  static const std::vector<std::string> names{"craft", "single-obs", "paired-obs"};
  return names;
}

/// Seed k uses env seed config.env_seed + k and data seed config.data_seed + k.
/// Seeds run in parallel; results are ordered by seed.
ComparisonTable reproduce_table1(const RunConfig& config, unsigned threads = 1,
                                 const std::function<void(const std::string&)>& progress = {});

std::string table_csv(const ComparisonTable& table);
nlohmann::json table_json(const ComparisonTable& table);

nlohmann::json config_json(const RunConfig& config);
nlohmann::json params_json(const PreprocessedParams& p);

}  // namespace craft
