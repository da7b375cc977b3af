#include <cmath>
#include <set>

#include "craft/algorithm.hpp"
#include "craft/errors.hpp"
#include "craft/eval.hpp"
#include "craft/experiment.hpp"
#include "craft/toy_env.hpp"
#include "doctest.h"

using namespace craft;

namespace {

CraftConfig toy_config(int max_states = 8) { return CraftConfig{std::log(3.0), 0.2, 5.0 / 32.0, max_states}; }

struct Fixture {
  ToyEnvironment env;
  TrajectoryDataset a;
  TrajectoryDataset b;
  HypothesisFamily family;
};

Fixture toy_fixture(int horizon, std::size_t width, std::size_t n, std::uint64_t seed,
                    std::shared_ptr<const Policy> pa = nullptr, std::shared_ptr<const Policy> pb = nullptr) {
  Fixture f;
  f.env = build_toy_env(horizon, width, seed);
  const auto defaults = toy_policies();
  if (!pa) pa = defaults.first;
  if (!pb) pb = defaults.second;
  f.a = generate_dataset(f.env.model, *pa, n, Agent::A, seed * 2 + 1);
  f.b = generate_dataset(f.env.model, *pb, n, Agent::B, seed * 2 + 2);
  f.family = HypothesisFamily::repeated(horizon, toy_encoder_class(*f.env.params), toy_classifier_class(*f.env.params));
  return f;
}

}  // namespace

TEST_CASE("preprocessing with the toy bounds") {
  const auto p = preprocess(toy_config());
  CHECK(p.alpha_clipped == 1.0);
  CHECK(p.n_xi == 12);
  CHECK(p.xi == 0.25);
  CHECK(p.eta_effective == doctest::Approx(1.0 / (1.0 + std::exp(1.5))));
  CHECK(std::abs(p.eta_effective - 0.18243) < 1e-5);
  CHECK(p.grid.count() == 13);
  CHECK(p.grid.min() == -1.5);
  CHECK(p.grid.max() == 1.5);
  CHECK(p.eta_effective <= 0.2);
}

TEST_CASE("preprocessing clips alpha and handles eta = 1/2") {
  CHECK(preprocess(CraftConfig{4.0, 0.2, 0.5, 2}).alpha_clipped == 1.0);
  const auto half = preprocess(CraftConfig{0.5, 0.5, 0.5, 2});
  CHECK(half.n_xi == 0);
  CHECK(half.grid.values() == std::vector<double>{0.0});
  CHECK(half.eta_effective == 0.5);
}

TEST_CASE("preprocessing rejects invalid bounds") {
  CHECK_THROWS_AS(preprocess(CraftConfig{1.0, 0.0, 0.5, 2}), PreconditionError);
  CHECK_THROWS_AS(preprocess(CraftConfig{1.0, 1.0, 0.5, 2}), PreconditionError);
  CHECK_THROWS_AS(preprocess(CraftConfig{1.0, 0.7, 0.5, 2}), PreconditionError);
  CHECK_THROWS_AS(preprocess(CraftConfig{0.0, 0.2, 0.5, 2}), PreconditionError);
  CHECK_THROWS_AS(preprocess(CraftConfig{1.0, 0.2, 0.0, 2}), PreconditionError);
  CHECK_THROWS_AS(preprocess(CraftConfig{1.0, 0.2, 0.5, 0}), PreconditionError);
}

TEST_CASE("perfectly separated agents at H=2 give two states and the true encoder") {
  const Fixture f = toy_fixture(2, 32, 200, 3, std::make_shared<ConstantPolicy>(0), std::make_shared<ConstantPolicy>(1));
  const CraftOutput out = craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(2), f.family);
  CHECK(out.assignment.steps[1].size() == 2);
  CHECK(out.encoders[0].is_constant());
  const auto acc = empirical_accuracy(out.encoders[1], *f.family.encoders[1], f.a, 1);
  const auto acc_b = empirical_accuracy(out.encoders[1], *f.family.encoders[1], f.b, 1);
  CHECK(*out.encoders[1].member == f.env.params->controllable_coordinate(1));
  CHECK(acc.mean == 1.0);
  CHECK(acc_b.mean == 1.0);
  CHECK(out.encoders[1].apply(*f.family.encoders[1], f.a.trajectories[0].observations[1]) !=
        out.encoders[1].apply(*f.family.encoders[1], f.b.trajectories[0].observations[1]));
}

TEST_CASE("assignment and window invariants on a toy run") {
  const Fixture f = toy_fixture(8, 32, 1500, 5);
  const CraftOutput out = craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(), f.family);
  REQUIRE(out.assignment.steps.size() == 8);
  CHECK(out.assignment.steps[0].size() == 1);
  CHECK(out.assignment.steps[0][0].a.size() == 1500);
  CHECK(out.assignment.steps[0][0].b.size() == 1500);
  for (const auto& states : out.assignment.steps) {
    CHECK(static_cast<int>(states.size()) <= 8);
    std::set<std::size_t> seen_a, seen_b;
    std::size_t total_a = 0, total_b = 0;
    for (const auto& s : states) {
      seen_a.insert(s.a.begin(), s.a.end());
      seen_b.insert(s.b.begin(), s.b.end());
      total_a += s.a.size();
      total_b += s.b.size();
      for (std::size_t i : s.a) CHECK(i < 1500);
      for (std::size_t i : s.b) CHECK(i < 1500);
    }
    CHECK(seen_a.size() == total_a);
    CHECK(seen_b.size() == total_b);
  }
  for (const auto& step : out.steps) {
    for (const auto& scan : step.scans) {
      for (std::size_t w = 1; w < scan.windows.size(); ++w) CHECK(scan.windows[w].lo > scan.windows[w - 1].hi);
      for (const auto& w : scan.windows) {
        CHECK(w.lo <= w.trigger);
        CHECK(w.trigger <= w.hi);
        CHECK(static_cast<double>(scan.histogram[static_cast<std::size_t>(w.trigger)]) >= step.count_threshold);
        // merges happen only above 0.5 and at most once per target within one predecessor
        for (const auto& m : w.attempts) CHECK(m.merged == (m.loss > 0.5));
      }
      std::set<int> merged_targets;
      for (const auto& w : scan.windows) {
        if (!w.created && w.state >= 0) CHECK(merged_targets.insert(w.state).second);
      }
    }
    CHECK(step.q_thresh == doctest::Approx((step.h + 1) * (5.0 / 32.0) / (8.0 * 8)));
  }
  CHECK(out.encoders.size() == 8);
}

TEST_CASE("CRAFT output does not depend on the thread count") {
  const Fixture f = toy_fixture(6, 40, 800, 9);
  const auto one = craft_output_json(craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(), f.family, 1), f.family);
  const auto three = craft_output_json(craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(), f.family, 3), f.family);
  CHECK(one.dump() == three.dump());
}

TEST_CASE("CRAFT recovers the controllable coordinate with ample data") {
  const Fixture f = toy_fixture(6, 32, 4000, 1);
  const CraftOutput out = craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(2), f.family);
  for (int h = 1; h < 6; ++h) {
    CHECK(*out.encoders[static_cast<std::size_t>(h)].member == f.env.params->controllable_coordinate(h));
  }
}

TEST_CASE("exceeding max_states names the timestep") {
  Fixture f = toy_fixture(2, 8, 300, 2, std::make_shared<ConstantPolicy>(0), std::make_shared<ConstantPolicy>(1));
  // the two separated clusters cannot share the single allowed state
  try {
    craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(1), f.family);
    FAIL("expected a precondition failure");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("h=1") != std::string::npos);
  }
}

TEST_CASE("CRAFT input validation") {
  const Fixture f = toy_fixture(3, 8, 50, 2);
  const Fixture g = toy_fixture(4, 8, 50, 2);
  CHECK_THROWS_AS(craft_run(ActionFreeData(f.a), ActionFreeData(g.b), toy_config(), f.family), PreconditionError);
  TrajectoryDataset empty = f.b;
  empty.trajectories.clear();
  CHECK_THROWS_AS(craft_run(ActionFreeData(f.a), ActionFreeData(empty), toy_config(), f.family), PreconditionError);
  HypothesisFamily short_family = f.family;
  short_family.encoders.pop_back();
  CHECK_THROWS_AS(craft_run(ActionFreeData(f.a), ActionFreeData(f.b), toy_config(), short_family), PreconditionError);
}

TEST_CASE("DRAFT with identical agents returns the first hypothesis at loss 1") {
  const Fixture f = toy_fixture(2, 16, 100, 4);
  const auto g = toy_classifier_class(*f.env.params);
  const DraftOutput out = draft_run(ActionFreeData(f.a), ActionFreeData(f.a), *g);
  CHECK(out.loss == doctest::Approx(1.0));
  CHECK(*out.encoders[1].member == 0);
  CHECK(out.encoders[0].is_constant());
}

TEST_CASE("DRAFT picks the separating hypothesis on a hand dataset") {
  auto make = [](Agent agent, std::vector<const char*> second) {
    TrajectoryDataset d;
    d.agent = agent;
    d.horizon = 2;
    d.obs_length = 3;
    for (const char* s : second) d.trajectories.push_back({{BitVector(3), BitVector::from_string(s)}, std::nullopt});
    return d;
  };
  const auto a = make(Agent::A, {"000", "100", "001", "101"});
  const auto b = make(Agent::B, {"010", "110", "011", "111"});
  const SignedCoordinateClassifiers g(3);
  const DraftOutput out = draft_run(ActionFreeData(a), ActionFreeData(b), g);
  CHECK(out.loss == 0.0);
  CHECK(*out.encoders[1].member == 1);
}

TEST_CASE("DRAFT rejects H other than 2") {
  const Fixture f = toy_fixture(3, 8, 20, 1);
  const auto g = toy_classifier_class(*f.env.params);
  CHECK_THROWS_AS(draft_run(ActionFreeData(f.a), ActionFreeData(f.b), *g), PreconditionError);
}

TEST_CASE("sample complexity diagnostic") {
  const double base = sample_complexity_estimate(30, 128, 2, 0.1, 0.1, 5.0 / 32.0, 0.25, 0.2, std::log(3.0));
  CHECK(base > 1e6);
  CHECK(sample_complexity_estimate(60, 128, 2, 0.1, 0.1, 5.0 / 32.0, 0.25, 0.2, std::log(3.0)) == doctest::Approx(4 * base));
  CHECK_THROWS_AS(sample_complexity_estimate(30, 128, 2, 0.0, 0.1, 0.1, 0.1, 0.2, 1.0), PreconditionError);
}
