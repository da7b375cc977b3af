#pragma once

// CRAFT: comparison-based latent state discovery from two agents' action-free
// trajectories, and its single-step precursor DRAFT.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "craft/hypotheses.hpp"
#include "craft/observations.hpp"

namespace craft {

struct CraftConfig {
  double alpha = 0.0;  // log-odds separation lower bound
  double eta = 0.5;    // per-agent relative coverage lower bound, in (0, 1/2]
  double nu = 1.0;     // pair coverage lower bound, in (0, 1]
  int max_states = 2;  // N_s
};

struct PreprocessedParams {
  double alpha_clipped = 0.0;
  double xi = 0.0;
  int n_xi = 0;
  double eta_effective = 0.5;
  DiscreteGrid grid;
};

/// alpha' = min(1, alpha); xi = alpha'/4; n = ceil(8 ln(1/eta - 1) / alpha');
/// eta' = 1 / (1 + e^{n alpha'/8}). Throws PreconditionError on invalid bounds.
PreprocessedParams preprocess(const CraftConfig& config);

/// Per-timestep encoder and classifier classes (index = timestep).
struct HypothesisFamily {
  std::vector<std::shared_ptr<const EncoderClass>> encoders;
  std::vector<std::shared_ptr<const ClassifierClass>> classifiers;

  static HypothesisFamily repeated(int horizon, std::shared_ptr<const EncoderClass> encoders,
                                   std::shared_ptr<const ClassifierClass> classifiers);
};

/// Trajectory indices assigned to one learned latent state.
struct LearnedState {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

/// steps[h][s]: the learned states at timestep h with their trajectory sets.
struct StateAssignment {
  std::vector<std::vector<LearnedState>> steps;
};

struct MergeAttempt {
  int candidate = 0;
  std::size_t classifier = 0;
  double loss = 0.0;
  bool merged = false;
};

/// One run of heavy buckets [lo, hi] found while scanning a predecessor.
struct ClusterWindow {
  int trigger = 0;
  int lo = 0;
  int hi = 0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::vector<MergeAttempt> attempts;
  int state = -1;  // resulting state index at h + 1
  bool created = false;
};

struct PredecessorScan {
  int state = 0;
  std::vector<std::size_t> histogram;  // pred_succ sizes per grid index
  std::vector<ClusterWindow> windows;
  bool skipped = false;
};

struct StepDiagnostics {
  int h = 0;
  OddsPredictor predictor;
  double predictor_loss = 0.0;
  double q_thresh = 0.0;
  double count_threshold = 0.0;
  std::vector<PredecessorScan> scans;
  double encoder_loss = 0.0;
};

struct CraftOutput {
  PreprocessedParams params;
  std::vector<LearnedEncoder> encoders;  // one per timestep
  StateAssignment assignment;
  std::vector<StepDiagnostics> steps;    // one per transition h -> h + 1
  std::vector<std::string> warnings;
};

/// Full CRAFT run. Throws PreconditionError on incompatible inputs or when a
/// timestep would need more than config.max_states learned states. The
/// result does not depend on `threads`.
CraftOutput craft_run(const ActionFreeData& a, const ActionFreeData& b, const CraftConfig& config,
                      const HypothesisFamily& family, unsigned threads = 1);

struct DraftOutput {
  std::vector<LearnedEncoder> encoders;  // constant at h = 0, ERM at h = 1
  double loss = 0.0;
};

/// Minimises (1/|A|) sum_A phi(x_2) + (1/|B|) sum_B (1 - phi(x_2)) over a
/// binary class. Requires H == 2.
DraftOutput draft_run(const ActionFreeData& a, const ActionFreeData& b, const EncoderClass& phi);

/// Order-of-magnitude per-pair sample requirement (no constants or log factors):
/// H^2 (ln(|Phi|/delta) + N_s^2) / (nu eta^2 alpha^4) * max(1/nu^2, 1/(eps^2 nu'^2)).
double sample_complexity_estimate(int horizon, std::size_t class_size, int max_states, double delta, double epsilon,
                                  double nu, double nu_prime, double eta, double alpha);

}  // namespace craft
