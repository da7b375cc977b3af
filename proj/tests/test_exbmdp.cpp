#include <cmath>
#include <sstream>

#include "craft/dataset_io.hpp"
#include "craft/errors.hpp"
#include "craft/exbmdp.hpp"
#include "craft/toy_env.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace craft;

namespace {

// Observation = one-hot latent state (width `states`) followed by the raw exogenous bits.
class ConcatEmission final : public Emission {
 public:
  ConcatEmission(int states, std::size_t factors) : states_(states), factors_(factors) {}
  std::size_t observation_length() const override { return static_cast<std::size_t>(states_) + factors_; }
  BitVector emit(int, int state, std::span<const int> e, Rng&) const override {
    BitVector x(observation_length());
    x.set(static_cast<std::size_t>(state), true);
    for (std::size_t i = 0; i < factors_; ++i) x.set(static_cast<std::size_t>(states_) + i, e[i] != 0);
    return x;
  }
  int decode_state(int, const BitVector& x) const override {
    for (int s = 0; s < states_; ++s) {
      if (x.get(static_cast<std::size_t>(s))) return s;
    }
    return -1;
  }
  std::vector<int> decode_exogenous(int, const BitVector& x) const override {
    std::vector<int> e(factors_);
    for (std::size_t i = 0; i < factors_; ++i) e[i] = x.get(static_cast<std::size_t>(states_) + i) ? 1 : 0;
    return e;
  }

 private:
  int states_;
  std::size_t factors_;
};

ExBmdpSpec small_spec(int horizon, int actions, bool identity_exogenous) {
  ExBmdpSpec m;
  m.horizon = horizon;
  m.num_actions = actions;
  m.state_counts.assign(static_cast<std::size_t>(horizon), 3);
  m.state_counts[0] = 1;
  for (int h = 0; h + 1 < horizon; ++h) {
    std::vector<std::vector<int>> t(static_cast<std::size_t>(m.state_counts[static_cast<std::size_t>(h)]));
    for (std::size_t s = 0; s < t.size(); ++s) {
      for (int a = 0; a < actions; ++a) t[s].push_back(static_cast<int>((s + 1 + static_cast<std::size_t>(a)) % 3));
    }
    m.transition.push_back(t);
  }
  for (int f = 0; f < 2; ++f) {
    ExogenousFactor ef;
    ef.initial = {0.5, 0.5};
    const Matrix mix = identity_exogenous ? Matrix{{1.0, 0.0}, {0.0, 1.0}} : Matrix{{0.7, 0.3}, {0.4, 0.6}};
    ef.transitions.assign(static_cast<std::size_t>(horizon - 1), mix);
    m.exogenous.factors.push_back(ef);
  }
  m.emission = std::make_shared<ConcatEmission>(3, 2);
  m.validate();
  return m;
}

Trajectory labeled(std::vector<int> labels, std::size_t width = 2) {
  Trajectory t;
  for (std::size_t h = 0; h < labels.size(); ++h) t.observations.emplace_back(width);
  t.labels = std::move(labels);
  return t;
}

TrajectoryDataset hand_dataset(Agent agent, std::vector<std::vector<int>> paths) {
  TrajectoryDataset d;
  d.agent = agent;
  d.horizon = static_cast<int>(paths[0].size());
  d.obs_length = 2;
  for (auto& p : paths) d.trajectories.push_back(labeled(p));
  return d;
}

}  // namespace

TEST_CASE("a single action forces the deterministic latent path") {
  const ExBmdpSpec m = small_spec(6, 1, false);
  const UniformPolicy pi(1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Trajectory t = simulate_trajectory(m, pi, trajectory_seeds(seed, 0));
    REQUIRE(t.labels);
    int s = 0;
    for (int h = 0; h < m.horizon; ++h) {
      CHECK((*t.labels)[static_cast<std::size_t>(h)] == s);
      if (h + 1 < m.horizon) s = m.next_state(h, s, 0);
    }
  }
}

TEST_CASE("toy trajectories follow the sampled actions") {
  const ToyEnvironment env = build_toy_env(30, 16, 4);
  const UniformPolicy pi(2);
  const TrajectorySeeds seeds = trajectory_seeds(99, 3);
  const Trajectory t = simulate_trajectory(env.model, pi, seeds);
  CHECK(t.observations.size() == 30);
  // replay the policy stream: the latent state at h + 1 is the action taken at h
  Rng rng(seeds.policy);
  std::vector<int> history{0};
  for (int h = 0; h + 1 < 30; ++h) {
    const int a = pi.act(h, history, rng);
    CHECK((*t.labels)[static_cast<std::size_t>(h + 1)] == a);
    history.push_back(a);
  }
}

TEST_CASE("identity exogenous chains keep the decoded noise constant") {
  const ExBmdpSpec m = small_spec(5, 2, true);
  const UniformPolicy pi(2);
  for (std::size_t i = 0; i < 20; ++i) {
    const Trajectory t = simulate_trajectory(m, pi, trajectory_seeds(5, i));
    const auto e0 = m.emission->decode_exogenous(0, t.observations[0]);
    for (int h = 1; h < 5; ++h) CHECK(m.emission->decode_exogenous(h, t.observations[static_cast<std::size_t>(h)]) == e0);
  }
}

TEST_CASE("generate_dataset basics") {
  const ExBmdpSpec m = small_spec(4, 2, false);
  const UniformPolicy pi(2);
  CHECK_THROWS_AS(generate_dataset(m, pi, 0, Agent::A, 1), PreconditionError);
  const TrajectoryDataset d = generate_dataset(m, pi, 3, Agent::B, 1);
  CHECK(d.size() == 3);
  CHECK(d.agent == Agent::B);
  d.validate();
}

TEST_CASE("same seed gives bit-identical datasets regardless of threads") {
  const ToyEnvironment env = build_toy_env(10, 40, 12);
  const StickyPolicy pi(2, 0.75);
  const TrajectoryDataset one = generate_dataset(env.model, pi, 300, Agent::B, 77, 1);
  const TrajectoryDataset four = generate_dataset(env.model, pi, 300, Agent::B, 77, 4);
  std::ostringstream s1, s4;
  write_dataset(s1, one);
  write_dataset(s4, four);
  CHECK(s1.str() == s4.str());
  const TrajectoryDataset other = generate_dataset(env.model, pi, 300, Agent::B, 78, 1);
  std::ostringstream so;
  write_dataset(so, other);
  CHECK(so.str() != s1.str());
}

TEST_CASE("latent paths do not depend on the exogenous or emission streams") {
  const ToyEnvironment env = build_toy_env(12, 20, 2);
  const StickyPolicy pi(2, 0.75);
  for (std::size_t i = 0; i < 200; ++i) {
    TrajectorySeeds s = trajectory_seeds(31, i);
    const Trajectory base = simulate_trajectory(env.model, pi, s);
    s.exogenous ^= 0x5555;
    s.emission ^= 0x1234;
    const Trajectory moved = simulate_trajectory(env.model, pi, s);
    CHECK(*base.labels == *moved.labels);
  }
}

TEST_CASE("uniform policy visits each toy state half the time at h=5") {
  const UniformPolicy pi(2);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ToyEnvironment env = build_toy_env(8, 4, seed);
    const TrajectoryDataset d = generate_dataset(env.model, pi, 500, Agent::A, seed);
    std::size_t ones = 0;
    for (const auto& t : d.trajectories) ones += (*t.labels)[5];
    const double rate = static_cast<double>(ones) / 500.0;
    CHECK(std::abs(rate - 0.5) < 0.1);
    total += rate;
  }
  CHECK(std::abs(total / 20.0 - 0.5) < 0.05);
}

TEST_CASE("empirical policy on hand-built data") {
  const auto d = hand_dataset(Agent::A, {{0, 1, 1}, {0, 1, 2}, {0, 2, 1}, {0, 2, 1}});
  const auto t = empirical_policy(d);
  CHECK(*t.at(0, 0, 1) == doctest::Approx(0.5));
  CHECK(*t.at(0, 0, 2) == doctest::Approx(0.5));
  CHECK(*t.at(1, 1, 1) == doctest::Approx(0.5));
  CHECK(*t.at(1, 2, 1) == doctest::Approx(1.0));
  CHECK_FALSE(t.at(1, 0, 0).has_value());
  const std::vector<int> counts{1, 3, 3};
  const auto flagged = empirical_policy(d, counts);
  CHECK(std::find(flagged.unvisited.begin(), flagged.unvisited.end(), std::make_pair(1, 0)) != flagged.unvisited.end());
}

TEST_CASE("empirical policy of a deterministic transition is 1") {
  const auto d = hand_dataset(Agent::A, {{0, 1}, {0, 1}, {0, 1}});
  CHECK(*empirical_policy(d).at(0, 0, 1) == 1.0);
}

TEST_CASE("empirical policy requires labels") {
  auto d = hand_dataset(Agent::A, {{0, 1}});
  CHECK_THROWS_AS(empirical_policy(d.without_labels()), DataError);
}

TEST_CASE("empirical policy rows are normalised and agent B stays 3/4 of the time") {
  const ToyEnvironment env = build_toy_env(6, 8, 3);
  const StickyPolicy pi(2, 0.75);
  const TrajectoryDataset d = generate_dataset(env.model, pi, 5000, Agent::B, 4);
  const auto t = empirical_policy(d);
  std::map<std::pair<int, int>, double> rows;
  for (const auto& [key, p] : t.probability) rows[{std::get<0>(key), std::get<1>(key)}] += p;
  for (const auto& [row, sum] : rows) CHECK(std::abs(sum - 1.0) < 1e-12);
  for (int h = 1; h < 5; ++h) {
    for (int s = 0; s < 2; ++s) CHECK(std::abs(*t.at(h, s, s) - 0.75) < 0.03);
  }
}

TEST_CASE("identical agents give eta 1/2 and alpha 0") {
  const ToyEnvironment env = build_toy_env(6, 8, 3);
  const UniformPolicy pi(2);
  const TrajectoryDataset d = generate_dataset(env.model, pi, 400, Agent::A, 4);
  const auto rep = check_assumptions(d, d);
  CHECK(rep.eta_hat == 0.5);
  CHECK(rep.alpha_hat == 0.0);
}

TEST_CASE("toy assumption quantities approach their population values") {
  const ToyEnvironment env = build_toy_env(8, 8, 3);
  const auto [pa, pb] = toy_policies();
  const TrajectoryDataset a = generate_dataset(env.model, *pa, 200000, Agent::A, 1);
  const TrajectoryDataset b = generate_dataset(env.model, *pb, 200000, Agent::B, 2);
  const auto rep = check_assumptions(a, b, AssumptionBounds{std::log(3.0) * 0.9, 5.0 / 32.0 * 0.9, 0.2 * 0.9});
  CHECK(std::abs(rep.alpha_hat - std::log(3.0)) < 0.05);
  CHECK(std::abs(rep.nu_hat - 5.0 / 32.0) < 0.005);
  CHECK(std::abs(rep.eta_hat - 0.2) < 0.01);
  CHECK(rep.violations.empty());
}

TEST_CASE("two-trajectory datasets give the hand-counted report") {
  // A: 0->1->1, 0->0->1 ; B: 0->1->0, 0->1->1
  const auto a = hand_dataset(Agent::A, {{0, 1, 1}, {0, 0, 1}});
  const auto b = hand_dataset(Agent::B, {{0, 1, 0}, {0, 1, 1}});
  const auto rep = check_assumptions(a, b, AssumptionBounds{0.1, 0.3, 0.3});
  // pairs at h=0: (0,0): A1 B0, (0,1): A1 B2 ; h=1: (0,1): A1, (1,0): B1, (1,1): A1 B1
  CHECK(rep.nu_hat == doctest::Approx(0.25));
  CHECK(rep.eta_hat == 0.0);
  // only s=0 at h=0 has both successors seen by both agents? A sees both, B only 1 -> skipped; h=1 s=1: A {1}, B {0,1}
  CHECK(rep.nu_prime_hat == doctest::Approx(0.25));
  CHECK_FALSE(rep.violations.empty());
}

TEST_CASE("mismatched horizons are rejected") {
  const auto a = hand_dataset(Agent::A, {{0, 1, 1}});
  const auto b = hand_dataset(Agent::B, {{0, 1}});
  CHECK_THROWS_AS(check_assumptions(a, b), DataError);
}

TEST_CASE("exogenous chain validation") {
  ExogenousChainSpec c;
  c.factors.push_back({{0.5, 0.5}, {Matrix{{0.5, 0.6}, {0.5, 0.5}}}});
  CHECK_THROWS(c.validate(2));
  c.factors[0].transitions[0] = Matrix{{0.5, 0.5}, {1.0, 0.0}};
  CHECK_NOTHROW(c.validate(2));
}
