#pragma once

// Encoder accuracy: analytic population accuracy on the toy environment and
// empirical accuracy up to a relabelling on labelled data.

#include <cstddef>
#include <span>
#include <vector>

#include "craft/algorithm.hpp"
#include "craft/exbmdp.hpp"
#include "craft/hypotheses.hpp"
#include "craft/toy_env.hpp"

namespace craft {

/// 1 for the controllable coordinate, max(Pr(e = 0), Pr(e = 1)) for a
/// distractor coordinate. A constant encoder scores 1 at h = 0 (one state)
/// and 1/2 afterwards. Throws PreconditionError for non-projection members.
double population_accuracy_toy(const LearnedEncoder& encoder, const EncoderClass& cls, const ToyEnvSpec& spec, int h);

/// Same for a bare class member.
double population_accuracy_toy(std::size_t member, const EncoderClass& cls, const ToyEnvSpec& spec, int h);

/// Largest total agreement over injective maps from rows (learned labels) to
/// columns (true labels); unmatched rows score zero. Writes the chosen map
/// (-1 = unmatched) when `mapping` is non-null. Ties keep the first map found
/// in lexicographic order.
std::size_t best_injective_agreement(const std::vector<std::vector<std::size_t>>& confusion,
                                     std::vector<int>* mapping = nullptr);

struct EmpiricalAccuracy {
  double mean = 0.0;            // fraction of samples correct under the best map
  double per_state_min = 0.0;   // smallest per-true-state recall under that map
};

/// Learned and true labels are non-negative integers. Throws PreconditionError when empty.
EmpiricalAccuracy empirical_accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Applies `encoder` to every observation at timestep h of a labelled dataset.
EmpiricalAccuracy empirical_accuracy(const LearnedEncoder& encoder, const EncoderClass& cls,
                                     const TrajectoryDataset& labeled, int h);

/// Mean of per-timestep accuracies. With `paired`, a timestep may carry two
/// values which are averaged first; otherwise each entry must hold exactly one.
double average_accuracy(const std::vector<std::vector<double>>& per_h, bool paired);
double average_accuracy(std::span<const double> per_h);

/// Trajectories (both agents) not in the learned state matched to their true
/// latent state, under the best injective matching. Unassigned indices count.
std::size_t misassigned_count(const std::vector<LearnedState>& states, std::span<const int> labels_a,
                              std::span<const int> labels_b);

}  // namespace craft
