#pragma once

// Exogenous Block MDP generative model, trajectory simulation and
// dataset-level diagnostics computed against ground-truth labels.
//
// Timesteps are 0-based throughout the library: h = 0 is the fixed initial
// latent state and transitions go from h to h + 1 for h in [0, H - 1).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "craft/bitvector.hpp"
#include "craft/random.hpp"

namespace craft {

enum class Agent { A, B };

char agent_tag(Agent agent) noexcept;
/// Accepts "A" or "B"; throws std::invalid_argument otherwise.
Agent parse_agent(std::string_view text);

using Matrix = std::vector<std::vector<double>>;

/// One exogenous Markov chain factor. `transitions[h]` maps e_h to the law of e_{h+1}.
struct ExogenousFactor {
  std::vector<double> initial;
  std::vector<Matrix> transitions;
};

struct ExogenousChainSpec {
  std::vector<ExogenousFactor> factors;

  /// Throws std::invalid_argument unless every factor carries H - 1 row-stochastic
  /// matrices (rows sum to 1 within 1e-12) of matching shape.
  void validate(int horizon) const;
};

/// Observation constructor Q_h(s, e) together with its exact inverses.
class Emission {
 public:
  virtual ~Emission() = default;
  virtual std::size_t observation_length() const = 0;
  virtual BitVector emit(int h, int state, std::span<const int> exogenous, Rng& rng) const = 0;
  virtual int decode_state(int h, const BitVector& x) const = 0;
  virtual std::vector<int> decode_exogenous(int h, const BitVector& x) const = 0;
};

struct ExBmdpSpec {
  int horizon = 0;
  int num_actions = 0;
  std::vector<int> state_counts;                    // |S*_h|, state_counts[0] == 1
  std::vector<std::vector<std::vector<int>>> transition;  // [h][s][a] -> state at h + 1
  ExogenousChainSpec exogenous;
  std::shared_ptr<const Emission> emission;

  void validate() const;
  int next_state(int h, int state, int action) const { return transition[h][state][action]; }
};

/// Behaviour policy. It sees only the latent-state history and its own random
/// stream, never observations, so noise-independent collection holds by construction.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(int h, std::span<const int> latent_history, Rng& rng) const = 0;
  virtual std::string describe() const = 0;
};

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(int num_actions) : num_actions_(num_actions) {}
  int act(int h, std::span<const int> history, Rng& rng) const override;
  std::string describe() const override;

 private:
  int num_actions_;
};

/// Repeats the current latent state as the action with probability `stay`,
/// otherwise picks uniformly among the remaining actions.
class StickyPolicy final : public Policy {
 public:
  StickyPolicy(int num_actions, double stay);
  int act(int h, std::span<const int> history, Rng& rng) const override;
  std::string describe() const override;
  double stay() const noexcept { return stay_; }

 private:
  int num_actions_;
  double stay_;
};

class ConstantPolicy final : public Policy {
 public:
  explicit ConstantPolicy(int action) : action_(action) {}
  int act(int, std::span<const int>, Rng&) const override { return action_; }
  std::string describe() const override;

 private:
  int action_;
};

/// Markovian adapter: action law indexed by (h, s*_h).
class MarkovPolicy final : public Policy {
 public:
  explicit MarkovPolicy(std::vector<std::vector<std::vector<double>>> table) : table_(std::move(table)) {}
  int act(int h, std::span<const int> history, Rng& rng) const override;
  std::string describe() const override { return "markov"; }

 private:
  std::vector<std::vector<std::vector<double>>> table_;
};

/// History-dependent adapter over an arbitrary callable.
class HistoryPolicy final : public Policy {
 public:
  using Fn = std::function<int(int, std::span<const int>, Rng&)>;
  HistoryPolicy(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}
  int act(int h, std::span<const int> history, Rng& rng) const override { return fn_(h, history, rng); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct Trajectory {
  std::vector<BitVector> observations;
  std::optional<std::vector<int>> labels;  // ground truth, generation time only
};

struct TrajectoryDataset {
  Agent agent = Agent::A;
  int horizon = 0;
  std::size_t obs_length = 0;
  std::vector<Trajectory> trajectories;

  std::size_t size() const noexcept { return trajectories.size(); }
  bool labeled() const noexcept;
  /// Copy with every latent label removed.
  TrajectoryDataset without_labels() const;
  /// Throws DataError on inconsistent shape.
  void validate() const;
};

/// Independent randomness per trajectory: actions, exogenous chain, emission.
struct TrajectorySeeds {
  std::uint64_t policy = 0;
  std::uint64_t exogenous = 0;
  std::uint64_t emission = 0;
};

TrajectorySeeds trajectory_seeds(std::uint64_t dataset_seed, std::size_t index);

Trajectory simulate_trajectory(const ExBmdpSpec& spec, const Policy& policy, const TrajectorySeeds& seeds);

/// n >= 1 trajectories; trajectory i uses trajectory_seeds(seed, i) so the
/// result is independent of `threads`.
TrajectoryDataset generate_dataset(const ExBmdpSpec& spec, const Policy& policy, std::size_t n, Agent agent,
                                   std::uint64_t seed, unsigned threads = 1);

/// Empirical transition law pi_emp(s' | h, s) of one agent.
struct EmpiricalPolicyTable {
  Agent agent = Agent::A;
  std::map<std::tuple<int, int, int>, double> probability;  // (h, s, s') -> pi
  std::vector<std::pair<int, int>> unvisited;               // (h, s) rows with no data

  std::optional<double> at(int h, int s, int s_next) const;
};

/// Requires labels. `state_counts` (optional) lets unvisited rows be flagged
/// for states that never occur at all.
EmpiricalPolicyTable empirical_policy(const TrajectoryDataset& dataset, std::span<const int> state_counts = {});

struct AssumptionBounds {
  std::optional<double> alpha;
  std::optional<double> nu;
  std::optional<double> eta;
};

struct AssumptionViolation {
  int h = 0;
  std::vector<int> states;
  std::string inequality;  // "pair_coverage", "alpha_separation" or "agent_share"
  double value = 0.0;
  double bound = 0.0;
};

struct AssumptionReport {
  double nu_hat = 1.0;
  double nu_prime_hat = 1.0;
  double eta_hat = 0.5;
  /// +inf when no latent state has two observed successors.
  double alpha_hat = std::numeric_limits<double>::infinity();
  std::vector<AssumptionViolation> violations;
};

/// Empirical coverage / separation quantities over the observed (reachable)
/// latent pairs. Throws DataError on missing labels or mismatched H.
AssumptionReport check_assumptions(const TrajectoryDataset& a, const TrajectoryDataset& b,
                                   const AssumptionBounds& bounds = {});

}  // namespace craft
