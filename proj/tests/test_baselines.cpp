#include <cmath>
#include <random>

#include "craft/baselines.hpp"
#include "craft/toy_env.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace craft;

namespace {

ObservationBatch rows(std::vector<const char*> bits) {
  std::vector<BitVector> v;
  for (const char* b : bits) v.push_back(BitVector::from_string(b));
  return ObservationBatch(v, v.front().size());
}

}  // namespace

TEST_CASE("constant feature carries no information") {
  const CoordinateEncoders phi(2);
  CHECK(feature_mi(rows({"01", "11", "01"}), rows({"00", "10"}), phi, 0) != 0.0);
  CHECK(feature_mi(rows({"01", "11", "01"}), rows({"01", "11"}), phi, 1) == 0.0);
}

TEST_CASE("feature equal to the agent label has MI ln 2") {
  const CoordinateEncoders phi(2);
  CHECK(feature_mi(rows({"10", "11", "10"}), rows({"00", "01", "00"}), phi, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("pair of constant coordinates has MI 0") {
  const CoordinateEncoders phi(2);
  const auto a = rows({"10", "10"});
  const auto b = rows({"10", "10", "10"});
  CHECK(pair_mi(a, a, b, b, phi, phi, 0, 1) == 0.0);
}

TEST_CASE("hand-built 8-sample pair MI matches the contingency table") {
  const CoordinateEncoders phi(2);
  const auto a_h = rows({"10", "10", "00", "01"});
  const auto a_n = rows({"01", "11", "01", "00"});
  const auto b_h = rows({"00", "00", "10", "01"});
  const auto b_n = rows({"00", "10", "00", "00"});
  // features: x_h[0], x_next[1]
  const std::vector<std::pair<int, int>> va{{1, 1}, {1, 1}, {0, 1}, {0, 0}};
  const std::vector<std::pair<int, int>> vb{{0, 0}, {0, 0}, {1, 0}, {0, 0}};
  CHECK(std::abs(pair_mi(a_h, a_n, b_h, b_n, phi, phi, 0, 1) - oracle::contingency_mi(va, vb)) < 1e-12);
  // by hand: cells (1,1): A2, (0,1): A1, (0,0): A1 B3, (1,0): B1
  const double n = 8;
  const double expected = (2 / n) * std::log((2 / n) / ((2 / n) * 0.5)) + (1 / n) * std::log((1 / n) / ((1 / n) * 0.5)) +
                          (1 / n) * std::log((1 / n) / ((4 / n) * 0.5)) + (3 / n) * std::log((3 / n) / ((4 / n) * 0.5)) +
                          (1 / n) * std::log((1 / n) / ((1 / n) * 0.5));
  CHECK(pair_mi(a_h, a_n, b_h, b_n, phi, phi, 0, 1) == doctest::Approx(expected));
}

TEST_CASE("MI estimators match direct contingency computation on random data") {
  std::mt19937_64 rng(12);
  const std::size_t width = 5;
  const SignedCoordinateClassifiers signed_phi(width);
  std::vector<std::vector<int>> tables(3, std::vector<int>(32));
  for (auto& t : tables) {
    for (auto& v : t) v = static_cast<int>(rng() % 3);
  }
  const LookupEncoders lookup(tables, 3);
  for (int trial = 0; trial < 100; ++trial) {
    auto sample = [&](std::size_t n) {
      std::vector<BitVector> v;
      for (std::size_t i = 0; i < n; ++i) {
        BitVector x(width);
        for (std::size_t c = 0; c < width; ++c) x.set(c, (rng() % 3) == 0);
        v.push_back(x);
      }
      return v;
    };
    const auto ah = sample(1 + rng() % 40), bh = sample(1 + rng() % 40);
    std::vector<BitVector> an, bn;
    for (std::size_t i = 0; i < ah.size(); ++i) an.push_back(sample(1)[0]);
    for (std::size_t i = 0; i < bh.size(); ++i) bn.push_back(sample(1)[0]);
    const EncoderClass& phi = trial % 2 ? static_cast<const EncoderClass&>(signed_phi) : lookup;
    const std::size_t i = rng() % phi.size();
    const std::size_t j = rng() % phi.size();
    std::vector<int> fa, fb;
    std::vector<std::pair<int, int>> pa, pb;
    for (std::size_t r = 0; r < ah.size(); ++r) {
      fa.push_back(phi.apply(i, ah[r]));
      pa.emplace_back(phi.apply(i, ah[r]), phi.apply(j, an[r]));
    }
    for (std::size_t r = 0; r < bh.size(); ++r) {
      fb.push_back(phi.apply(i, bh[r]));
      pb.emplace_back(phi.apply(i, bh[r]), phi.apply(j, bn[r]));
    }
    const ObservationBatch Ah(ah, width), An(an, width), Bh(bh, width), Bn(bn, width);
    CHECK(std::abs(feature_mi(Ah, Bh, phi, i) - oracle::contingency_mi(fa, fb)) < 1e-12);
    CHECK(std::abs(pair_mi(Ah, An, Bh, Bn, phi, phi, i, j) - oracle::contingency_mi(pa, pb)) < 1e-12);
  }
}

TEST_CASE("baselines return one choice per timestep and break ties low") {
  const ToyEnvironment env = build_toy_env(5, 12, 3);
  const auto [pa, pb] = toy_policies();
  const ActionFreeData a(generate_dataset(env.model, *pa, 300, Agent::A, 1));
  const ActionFreeData b(generate_dataset(env.model, *pb, 300, Agent::B, 2));
  const std::vector<std::shared_ptr<const EncoderClass>> classes(5, toy_encoder_class(*env.params));
  const auto single = single_obs_baseline(a, b, classes);
  CHECK(single.best.size() == 5);
  for (int h = 0; h < 5; ++h) {
    for (std::size_t m = 0; m < 12; ++m) {
      const double mi = feature_mi(a.at(h), b.at(h), *classes[0], m);
      CHECK(mi <= single.best[static_cast<std::size_t>(h)].mi);
      if (m < single.best[static_cast<std::size_t>(h)].first) CHECK(mi < single.best[static_cast<std::size_t>(h)].mi);
    }
  }
  const auto paired = paired_obs_baseline(a, b, classes, 2);
  CHECK(paired.windows.size() == 4);
  CHECK(paired_obs_baseline(a, b, classes, 1).windows[2].mi == paired.windows[2].mi);

  // identical datasets: every feature scores 0 and index 0 wins
  const auto tie = single_obs_baseline(a, a, classes);
  for (const auto& s : tie.best) {
    CHECK(s.first == 0);
    CHECK(s.mi == 0.0);
  }
}
