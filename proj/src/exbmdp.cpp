#include "craft/exbmdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "craft/errors.hpp"
#include "craft/parallel.hpp"

namespace craft {

char agent_tag(Agent agent) noexcept { return agent == Agent::A ? 'A' : 'B'; }

Agent parse_agent(std::string_view text) {
  if (text == "A") return Agent::A;
  if (text == "B") return Agent::B;
  throw std::invalid_argument("agent must be A or B, got '" + std::string(text) + "'");
}

namespace {

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(what + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument(what + ": does not sum to 1");
}

}  // namespace

void ExogenousChainSpec::validate(int horizon) const {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    const std::string name = "exogenous factor " + std::to_string(i);
    if (f.initial.empty()) throw std::invalid_argument(name + ": empty initial distribution");
    check_distribution(f.initial, name + " initial");
    if (static_cast<int>(f.transitions.size()) != horizon - 1) {
      throw std::invalid_argument(name + ": expected " + std::to_string(horizon - 1) + " transition matrices");
    }
    std::size_t width = f.initial.size();
    for (std::size_t h = 0; h < f.transitions.size(); ++h) {
      const Matrix& m = f.transitions[h];
      if (m.size() != width) throw std::invalid_argument(name + ": transition row count mismatch at h=" + std::to_string(h));
      const std::size_t next_width = m.empty() ? 0 : m.front().size();
      for (const auto& row : m) {
        if (row.size() != next_width) throw std::invalid_argument(name + ": ragged transition matrix");
        check_distribution(row, name + " transition row at h=" + std::to_string(h));
      }
      width = next_width;
    }
  }
}

void ExBmdpSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (num_actions < 1) throw std::invalid_argument("action count must be positive");
  if (static_cast<int>(state_counts.size()) != horizon) throw std::invalid_argument("state_counts length must equal H");
  if (state_counts[0] != 1) throw std::invalid_argument("the initial timestep must have exactly one latent state");
  for (int c : state_counts) {
    if (c < 1) throw std::invalid_argument("latent state counts must be positive");
  }
  if (static_cast<int>(transition.size()) != horizon - 1) throw std::invalid_argument("transition table must cover H-1 steps");
  for (int h = 0; h + 1 < horizon; ++h) {
    if (static_cast<int>(transition[h].size()) != state_counts[h]) {
      throw std::invalid_argument("transition table at h=" + std::to_string(h) + " is not total over states");
    }
    for (const auto& row : transition[h]) {
      if (static_cast<int>(row.size()) != num_actions) {
        throw std::invalid_argument("transition table at h=" + std::to_string(h) + " is not total over actions");
      }
      for (int next : row) {
        if (next < 0 || next >= state_counts[h + 1]) {
          throw std::invalid_argument("transition at h=" + std::to_string(h) + " leaves the state space");
        }
      }
    }
  }
  exogenous.validate(horizon);
  if (!emission) throw std::invalid_argument("emission is missing");
}

int UniformPolicy::act(int, std::span<const int>, Rng& rng) const {
  return static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_actions_)));
}

std::string UniformPolicy::describe() const { return "uniform"; }

StickyPolicy::StickyPolicy(int num_actions, double stay) : num_actions_(num_actions), stay_(stay) {
  if (num_actions < 2) throw std::invalid_argument("sticky policy needs at least two actions");
  if (!(stay >= 0.0 && stay <= 1.0)) throw std::invalid_argument("stay probability must lie in [0,1]");
}

int StickyPolicy::act(int, std::span<const int> history, Rng& rng) const {
  const int current = history.back();
  if (bernoulli(rng, stay_)) return current;
  int other = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_actions_ - 1)));
  if (other >= current) ++other;
  return other;
}

std::string StickyPolicy::describe() const { return "sticky:" + std::to_string(stay_); }

std::string ConstantPolicy::describe() const { return "constant:" + std::to_string(action_); }

int MarkovPolicy::act(int h, std::span<const int> history, Rng& rng) const {
  return sample_categorical(rng, table_.at(static_cast<std::size_t>(h)).at(static_cast<std::size_t>(history.back())));
}

bool TrajectoryDataset::labeled() const noexcept {
  return !trajectories.empty() &&
         std::all_of(trajectories.begin(), trajectories.end(), [](const Trajectory& t) { return t.labels.has_value(); });
}

TrajectoryDataset TrajectoryDataset::without_labels() const {
  TrajectoryDataset out{agent, horizon, obs_length, {}};
  out.trajectories.reserve(trajectories.size());
  for (const auto& t : trajectories) out.trajectories.push_back(Trajectory{t.observations, std::nullopt});
  return out;
}

void TrajectoryDataset::validate() const {
  if (horizon < 1) throw DataError("dataset horizon must be positive");
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    const std::string where = "trajectory " + std::to_string(i);
    if (static_cast<int>(t.observations.size()) != horizon) throw DataError(where + ": length differs from H");
    for (const auto& x : t.observations) {
      if (x.size() != obs_length) throw DataError(where + ": observation width differs from obslen");
    }
    if (t.labels) {
      if (static_cast<int>(t.labels->size()) != horizon) throw DataError(where + ": label count differs from H");
      if (t.labels->front() != 0) throw DataError(where + ": first latent label must be the initial state 0");
      for (int s : *t.labels) {
        if (s < 0) throw DataError(where + ": negative latent label");
      }
    }
  }
}

TrajectorySeeds trajectory_seeds(std::uint64_t dataset_seed, std::size_t index) {
  return {derive_seed(dataset_seed, {index, 1}), derive_seed(dataset_seed, {index, 2}),
          derive_seed(dataset_seed, {index, 3})};
}

Trajectory simulate_trajectory(const ExBmdpSpec& spec, const Policy& policy, const TrajectorySeeds& seeds) {
  Rng policy_rng(seeds.policy);
  Rng exo_rng(seeds.exogenous);
  Rng emit_rng(seeds.emission);

  const auto& factors = spec.exogenous.factors;
  std::vector<int> exo(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) exo[i] = sample_categorical(exo_rng, factors[i].initial);

  Trajectory traj;
  traj.observations.reserve(static_cast<std::size_t>(spec.horizon));
  std::vector<int> history;
  history.reserve(static_cast<std::size_t>(spec.horizon));
  history.push_back(0);

  for (int h = 0; h < spec.horizon; ++h) {
    const int state = history.back();
    traj.observations.push_back(spec.emission->emit(h, state, exo, emit_rng));
    if (h + 1 == spec.horizon) break;
    const int action = policy.act(h, history, policy_rng);
    if (action < 0 || action >= spec.num_actions) {
      throw std::logic_error("policy '" + policy.describe() + "' produced an out-of-range action");
    }
    history.push_back(spec.next_state(h, state, action));
    for (std::size_t i = 0; i < factors.size(); ++i) {
      exo[i] = sample_categorical(exo_rng, factors[i].transitions[static_cast<std::size_t>(h)][static_cast<std::size_t>(exo[i])]);
    }
  }
  traj.labels = std::move(history);
  return traj;
}

TrajectoryDataset generate_dataset(const ExBmdpSpec& spec, const Policy& policy, std::size_t n, Agent agent,
                                   std::uint64_t seed, unsigned threads) {
  if (n == 0) throw PreconditionError("generate_dataset: n must be at least 1");
  TrajectoryDataset ds{agent, spec.horizon, spec.emission->observation_length(), {}};
  ds.trajectories.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    ds.trajectories[i] = simulate_trajectory(spec, policy, trajectory_seeds(seed, i));
  });
  return ds;
}

std::optional<double> EmpiricalPolicyTable::at(int h, int s, int s_next) const {
  auto it = probability.find({h, s, s_next});
  if (it == probability.end()) return std::nullopt;
  return it->second;
}

namespace {

using PairCounts = std::vector<std::map<std::pair<int, int>, std::size_t>>;  // [h] (s, s') -> count

PairCounts count_pairs(const TrajectoryDataset& ds) {
  PairCounts counts(static_cast<std::size_t>(std::max(ds.horizon - 1, 0)));
  for (const auto& t : ds.trajectories) {
    const auto& y = *t.labels;
    for (int h = 0; h + 1 < ds.horizon; ++h) ++counts[static_cast<std::size_t>(h)][{y[h], y[h + 1]}];
  }
  return counts;
}

void require_labels(const TrajectoryDataset& ds) {
  if (!ds.labeled()) throw DataError(std::string("dataset for agent ") + agent_tag(ds.agent) + " carries no latent labels");
}

}  // namespace

EmpiricalPolicyTable empirical_policy(const TrajectoryDataset& dataset, std::span<const int> state_counts) {
  require_labels(dataset);
  const PairCounts counts = count_pairs(dataset);
  EmpiricalPolicyTable table;
  table.agent = dataset.agent;
  for (int h = 0; h + 1 < dataset.horizon; ++h) {
    std::map<int, std::size_t> row_total;
    int max_state = 0;
    for (const auto& [pair, c] : counts[static_cast<std::size_t>(h)]) {
      row_total[pair.first] += c;
      max_state = std::max(max_state, pair.first);
    }
    for (const auto& [pair, c] : counts[static_cast<std::size_t>(h)]) {
      table.probability[{h, pair.first, pair.second}] =
          static_cast<double>(c) / static_cast<double>(row_total[pair.first]);
    }
    const int n_states = static_cast<std::size_t>(h) < state_counts.size() ? state_counts[static_cast<std::size_t>(h)]
                                                                             : max_state + 1;
    for (int s = 0; s < n_states; ++s) {
      if (!row_total.contains(s)) table.unvisited.emplace_back(h, s);
    }
  }
  return table;
}

AssumptionReport check_assumptions(const TrajectoryDataset& a, const TrajectoryDataset& b,
                                   const AssumptionBounds& bounds) {
  if (a.horizon != b.horizon) throw DataError("check_assumptions: datasets have different horizons");
  require_labels(a);
  require_labels(b);
  const PairCounts ca = count_pairs(a);
  const PairCounts cb = count_pairs(b);
  const double total = static_cast<double>(a.size() + b.size());

  AssumptionReport report;
  for (int h = 0; h + 1 < a.horizon; ++h) {
    const auto& ma = ca[static_cast<std::size_t>(h)];
    const auto& mb = cb[static_cast<std::size_t>(h)];
    auto lookup = [](const auto& m, std::pair<int, int> key) -> double {
      auto it = m.find(key);
      return it == m.end() ? 0.0 : static_cast<double>(it->second);
    };
    std::set<std::pair<int, int>> pairs;
    for (const auto& [k, v] : ma) pairs.insert(k);
    for (const auto& [k, v] : mb) pairs.insert(k);

    std::map<int, std::vector<int>> successors;
    for (const auto& key : pairs) {
      const double na = lookup(ma, key);
      const double nb = lookup(mb, key);
      const double coverage = (na + nb) / total;
      const double share = std::min(na, nb) / (na + nb);
      report.nu_hat = std::min(report.nu_hat, coverage);
      report.eta_hat = std::min(report.eta_hat, share);
      successors[key.first].push_back(key.second);
      const std::vector<int> states{key.first, key.second};
      if (bounds.nu && coverage < *bounds.nu) report.violations.push_back({h, states, "pair_coverage", coverage, *bounds.nu});
      if (bounds.eta && share < *bounds.eta) report.violations.push_back({h, states, "agent_share", share, *bounds.eta});
    }

    for (const auto& [s, succ] : successors) {
      for (std::size_t i = 0; i < succ.size(); ++i) {
        for (std::size_t j = i + 1; j < succ.size(); ++j) {
          const double la = std::log(lookup(ma, {s, succ[j]})) - std::log(lookup(ma, {s, succ[i]}));
          const double lb = std::log(lookup(mb, {s, succ[j]})) - std::log(lookup(mb, {s, succ[i]}));
          if (std::isnan(la) || std::isnan(lb)) continue;  // one agent never visits s
          double gap = std::abs(la - lb);
          if (std::isnan(gap)) gap = std::numeric_limits<double>::infinity();
          report.alpha_hat = std::min(report.alpha_hat, gap);
          if (bounds.alpha && gap < *bounds.alpha) {
            report.violations.push_back({h, {s, succ[i], succ[j]}, "alpha_separation", gap, *bounds.alpha});
          }
        }
      }
    }
  }

  for (int h = 0; h < a.horizon; ++h) {
    std::map<int, std::size_t> visits;
    for (const auto* ds : {&a, &b}) {
      for (const auto& t : ds->trajectories) ++visits[(*t.labels)[static_cast<std::size_t>(h)]];
    }
    for (const auto& [s, c] : visits) report.nu_prime_hat = std::min(report.nu_prime_hat, static_cast<double>(c) / total);
  }
  return report;
}

}  // namespace craft
