#include "craft/toy_env.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "craft/errors.hpp"

namespace craft {

BitVector ToyEmission::emit(int h, int state, std::span<const int> exogenous, Rng&) const {
  const auto& pos = params_->position[static_cast<std::size_t>(h)];
  BitVector x(params_->width);
  x.set(pos[0], state != 0);
  for (std::size_t i = 1; i < params_->width; ++i) x.set(pos[i], (state ^ exogenous[i - 1]) != 0);
  return x;
}

int ToyEmission::decode_state(int h, const BitVector& x) const {
  return x.get(params_->controllable_coordinate(h)) ? 1 : 0;
}

std::vector<int> ToyEmission::decode_exogenous(int h, const BitVector& x) const {
  const auto& pos = params_->position[static_cast<std::size_t>(h)];
  const int s = decode_state(h, x);
  std::vector<int> e(params_->width - 1);
  for (std::size_t i = 1; i < params_->width; ++i) e[i - 1] = (x.get(pos[i]) ? 1 : 0) ^ s;
  return e;
}

ToyEnvironment build_toy_env(int horizon, std::size_t width, std::uint64_t seed) {
  if (horizon < 2) throw PreconditionError("toy environment needs H >= 2");
  if (width < 2) throw PreconditionError("toy environment needs M >= 2 (the fixed distractor e^1 occupies one bit)");

  auto spec = std::make_shared<ToyEnvSpec>();
  spec->horizon = horizon;
  spec->width = width;
  spec->seed = seed;

  Rng chain_rng(derive_seed(seed, {0x636861696eULL}));
  spec->chains.push_back(ChainParams{0.5, 0.0, 0.0});
  for (std::size_t i = 2; i < width; ++i) {
    ChainParams c;
    c.p_init0 = uniform01(chain_rng);
    c.p01 = uniform01(chain_rng);
    c.p10 = uniform01(chain_rng);
    spec->chains.push_back(c);
  }

  Rng perm_rng(derive_seed(seed, {0x7065726dULL}));
  for (int h = 0; h < horizon; ++h) {
    std::vector<std::size_t> pos(width);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    for (std::size_t k = width - 1; k > 0; --k) std::swap(pos[k], pos[uniform_index(perm_rng, k + 1)]);
    std::vector<std::size_t> inverse(width);
    for (std::size_t f = 0; f < width; ++f) inverse[pos[f]] = f;
    spec->position.push_back(std::move(pos));
    spec->factor_at.push_back(std::move(inverse));
  }

  ToyEnvironment env;
  env.params = spec;
  ExBmdpSpec& m = env.model;
  m.horizon = horizon;
  m.num_actions = 2;
  m.state_counts.assign(static_cast<std::size_t>(horizon), 2);
  m.state_counts[0] = 1;
  for (int h = 0; h + 1 < horizon; ++h) {
    const std::size_t n_states = static_cast<std::size_t>(m.state_counts[static_cast<std::size_t>(h)]);
    m.transition.emplace_back(n_states, std::vector<int>{0, 1});
  }
  for (const auto& c : spec->chains) {
    ExogenousFactor f;
    f.initial = {c.p_init0, 1.0 - c.p_init0};
    f.transitions.assign(static_cast<std::size_t>(horizon - 1), Matrix{{1.0 - c.p01, c.p01}, {c.p10, 1.0 - c.p10}});
    m.exogenous.factors.push_back(std::move(f));
  }
  m.emission = std::make_shared<ToyEmission>(spec);
  m.validate();
  return env;
}

std::pair<std::shared_ptr<const Policy>, std::shared_ptr<const Policy>> toy_policies(double stay_b) {
  return {std::make_shared<UniformPolicy>(2), std::make_shared<StickyPolicy>(2, stay_b)};
}

double exogenous_marginal(const ToyEnvSpec& spec, std::size_t factor, int h) {
  if (factor < 1 || factor >= spec.width) {
    throw std::out_of_range("exogenous_marginal: factor " + std::to_string(factor) + " outside [1, M)");
  }
  if (h < 0 || h >= spec.horizon) throw std::out_of_range("exogenous_marginal: timestep " + std::to_string(h) + " outside [0, H)");
  const ChainParams& c = spec.chains[factor - 1];
  double p0 = c.p_init0;
  for (int t = 0; t < h; ++t) p0 = p0 * (1.0 - c.p01) + (1.0 - p0) * c.p10;
  return p0;
}

std::shared_ptr<const EncoderClass> toy_encoder_class(const ToyEnvSpec& spec) {
  return std::make_shared<CoordinateEncoders>(spec.width);
}

std::shared_ptr<const ClassifierClass> toy_classifier_class(const ToyEnvSpec& spec) {
  return std::make_shared<SignedCoordinateClassifiers>(spec.width);
}

}  // namespace craft
