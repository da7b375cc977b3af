#pragma once

// Binary toy Ex-BMDP: one controllable bit plus M-1 distractor bits
// s XOR e^i driven by independent two-state exogenous chains, with the M
// coordinates shuffled by a timestep-dependent permutation.
//
// Factor 0 is the controllable state; factor i in [1, M) is the distractor
// s XOR e^i. Factor 1 (e^1) starts uniform and never transitions.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "craft/exbmdp.hpp"
#include "craft/hypotheses.hpp"

namespace craft {

/// Two-state chain: Pr(e_0 = 0), Pr(0 -> 1), Pr(1 -> 0); time-homogeneous.
struct ChainParams {
  double p_init0 = 0.5;
  double p01 = 0.0;
  double p10 = 0.0;
};

struct ToyEnvSpec {
  int horizon = 0;
  std::size_t width = 0;  // M
  std::uint64_t seed = 0;
  std::vector<ChainParams> chains;                    // chains[i - 1] drives factor i
  std::vector<std::vector<std::size_t>> position;     // [h][factor] -> observation coordinate
  std::vector<std::vector<std::size_t>> factor_at;    // [h][coordinate] -> factor

  std::size_t controllable_coordinate(int h) const { return position[static_cast<std::size_t>(h)][0]; }
};

class ToyEmission final : public Emission {
 public:
  explicit ToyEmission(std::shared_ptr<const ToyEnvSpec> params) : params_(std::move(params)) {}
  std::size_t observation_length() const override { return params_->width; }
  BitVector emit(int h, int state, std::span<const int> exogenous, Rng& rng) const override;
  int decode_state(int h, const BitVector& x) const override;
  std::vector<int> decode_exogenous(int h, const BitVector& x) const override;

 private:
  std::shared_ptr<const ToyEnvSpec> params_;
};

struct ToyEnvironment {
  std::shared_ptr<const ToyEnvSpec> params;
  ExBmdpSpec model;
};

/// Chain parameters drawn uniform on [0,1]; permutations uniform per timestep.
/// Requires H >= 2 and M >= 2 (throws PreconditionError).
ToyEnvironment build_toy_env(int horizon, std::size_t width, std::uint64_t seed);

/// Agent A acts uniformly; agent B repeats the current state with probability `stay_b`.
std::pair<std::shared_ptr<const Policy>, std::shared_ptr<const Policy>> toy_policies(double stay_b = 0.75);

/// Pr(e^factor_h = 0) by forward recursion from the chain parameters.
double exogenous_marginal(const ToyEnvSpec& spec, std::size_t factor, int h);

/// Phi_h: every coordinate projection. One shared class serves all timesteps.
std::shared_ptr<const EncoderClass> toy_encoder_class(const ToyEnvSpec& spec);
/// G_h: coordinate projections and their negations.
std::shared_ptr<const ClassifierClass> toy_classifier_class(const ToyEnvSpec& spec);

}  // namespace craft
