#pragma once

// Mutual-information "shortcut" baselines: pick the feature (or sequential
// feature pair) most informative about which agent produced the data.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "craft/hypotheses.hpp"
#include "craft/observations.hpp"

namespace craft {

/// Plug-in mutual information (nats) between a discrete feature and agent
/// identity, given per-value counts for each agent. 0 ln 0 = 0.
double plug_in_mutual_information(std::span<const std::size_t> counts_a, std::span<const std::size_t> counts_b);

struct MiScore {
  std::size_t first = 0;
  std::size_t second = 0;  // paired baseline only
  double mi = 0.0;
};

/// MI of member `member`'s output at one timestep with the agent label.
double feature_mi(const ObservationBatch& a, const ObservationBatch& b, const EncoderClass& phi, std::size_t member);

/// MI of (phi_h member i applied to x_h, phi_next member j applied to x_{h+1}) with the agent label.
double pair_mi(const ObservationBatch& a_h, const ObservationBatch& a_next, const ObservationBatch& b_h,
               const ObservationBatch& b_next, const EncoderClass& phi_h, const EncoderClass& phi_next, std::size_t i,
               std::size_t j);

struct SingleObsResult {
  std::vector<MiScore> best;  // one per timestep
};

SingleObsResult single_obs_baseline(const ActionFreeData& a, const ActionFreeData& b,
                                    std::span<const std::shared_ptr<const EncoderClass>> classes, unsigned threads = 1);

/// windows[h] is the best pair for (h, h + 1). Timestep h is covered by the
/// forward choice windows[h].first (h < H - 1) and the backward choice
/// windows[h - 1].second (h > 0).
struct PairedObsResult {
  std::vector<MiScore> windows;
};

PairedObsResult paired_obs_baseline(const ActionFreeData& a, const ActionFreeData& b,
                                    std::span<const std::shared_ptr<const EncoderClass>> classes, unsigned threads = 1);

}  // namespace craft
