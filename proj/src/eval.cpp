#include "craft/eval.hpp"

#include <algorithm>

#include "craft/errors.hpp"

namespace craft {

double population_accuracy_toy(std::size_t member, const EncoderClass& cls, const ToyEnvSpec& spec, int h) {
  if (h < 0 || h >= spec.horizon) throw PreconditionError("timestep outside the horizon");
  const auto p = cls.projection(member);
  if (!p || p->coordinate >= spec.width) throw PreconditionError("encoder is not a coordinate projection of the toy class");
  const std::size_t factor = spec.factor_at[static_cast<std::size_t>(h)][p->coordinate];
  if (factor == 0) return 1.0;
  const double p0 = exogenous_marginal(spec, factor, h);
  return std::max(p0, 1.0 - p0);
}

double population_accuracy_toy(const LearnedEncoder& encoder, const EncoderClass& cls, const ToyEnvSpec& spec, int h) {
  if (encoder.is_constant()) {
    if (h < 0 || h >= spec.horizon) throw PreconditionError("timestep outside the horizon");
    return h == 0 ? 1.0 : 0.5;
  }
  const auto& r = encoder.relabel;
  if (r.size() == 2 && r[0] == r[1]) return h == 0 ? 1.0 : 0.5;
  return population_accuracy_toy(*encoder.member, cls, spec, h);
}

namespace {

void search(const std::vector<std::vector<std::size_t>>& conf, std::size_t row, std::vector<bool>& used,
            std::vector<int>& current, std::size_t score, std::size_t& best, std::vector<int>& best_map, bool& found) {
  if (row == conf.size()) {
    if (!found || score > best) {
      best = score;
      best_map = current;
      found = true;
    }
    return;
  }
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c]) continue;
    used[c] = true;
    current[row] = static_cast<int>(c);
    search(conf, row + 1, used, current, score + conf[row][c], best, best_map, found);
    used[c] = false;
  }
  current[row] = -1;
  search(conf, row + 1, used, current, score, best, best_map, found);
}

}  // namespace

std::size_t best_injective_agreement(const std::vector<std::vector<std::size_t>>& confusion, std::vector<int>* mapping) {
  std::size_t cols = 0;
  for (const auto& row : confusion) cols = std::max(cols, row.size());
  std::vector<std::vector<std::size_t>> conf = confusion;
  for (auto& row : conf) row.resize(cols, 0);
  if (conf.size() > 8 || cols > 8) throw PreconditionError("label matching limited to 8 labels");
  std::vector<bool> used(cols, false);
  std::vector<int> current(conf.size(), -1);
  std::vector<int> best_map(conf.size(), -1);
  std::size_t best = 0;
  bool found = false;
  search(conf, 0, used, current, 0, best, best_map, found);
  if (mapping) *mapping = best_map;
  return best;
}

EmpiricalAccuracy empirical_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty()) throw PreconditionError("empirical_accuracy: empty dataset");
  if (predicted.size() != truth.size()) throw PreconditionError("empirical_accuracy: length mismatch");
  int n_pred = 0;
  int n_true = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0) throw PreconditionError("empirical_accuracy: negative label");
    n_pred = std::max(n_pred, predicted[i] + 1);
    n_true = std::max(n_true, truth[i] + 1);
  }
  std::vector<std::vector<std::size_t>> conf(static_cast<std::size_t>(n_pred),
                                             std::vector<std::size_t>(static_cast<std::size_t>(n_true), 0));
  std::vector<std::size_t> per_true(static_cast<std::size_t>(n_true), 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++conf[static_cast<std::size_t>(predicted[i])][static_cast<std::size_t>(truth[i])];
    ++per_true[static_cast<std::size_t>(truth[i])];
  }
  std::vector<int> map;
  const std::size_t agree = best_injective_agreement(conf, &map);
  EmpiricalAccuracy out;
  out.mean = static_cast<double>(agree) / static_cast<double>(predicted.size());
  out.per_state_min = 1.0;
  for (int t = 0; t < n_true; ++t) {
    const auto u = static_cast<std::size_t>(t);
    if (per_true[u] == 0) continue;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < map.size(); ++r) {
      if (map[r] == t) hits += conf[r][u];
    }
    out.per_state_min = std::min(out.per_state_min, static_cast<double>(hits) / static_cast<double>(per_true[u]));
  }
  return out;
}

EmpiricalAccuracy empirical_accuracy(const LearnedEncoder& encoder, const EncoderClass& cls,
                                     const TrajectoryDataset& labeled, int h) {
  if (h < 0 || h >= labeled.horizon) throw PreconditionError("timestep outside the horizon");
  std::vector<int> predicted;
  std::vector<int> truth;
  predicted.reserve(labeled.trajectories.size());
  truth.reserve(labeled.trajectories.size());
  for (const auto& tr : labeled.trajectories) {
    if (!tr.labels) throw DataError("empirical_accuracy: dataset has no latent labels");
    predicted.push_back(encoder.apply(cls, tr.observations[static_cast<std::size_t>(h)]));
    truth.push_back((*tr.labels)[static_cast<std::size_t>(h)]);
  }
  return empirical_accuracy(predicted, truth);
}

double average_accuracy(const std::vector<std::vector<double>>& per_h, bool paired) {
  if (per_h.empty()) throw PreconditionError("average_accuracy: no timesteps");
  double sum = 0.0;
  for (const auto& v : per_h) {
    if (v.empty() || v.size() > (paired ? 2U : 1U)) {
      throw PreconditionError("average_accuracy: wrong number of values for a timestep");
    }
    double s = 0.0;
    for (double x : v) s += x;
    sum += s / static_cast<double>(v.size());
  }
  return sum / static_cast<double>(per_h.size());
}

double average_accuracy(std::span<const double> per_h) {
  if (per_h.empty()) throw PreconditionError("average_accuracy: no timesteps");
  double sum = 0.0;
  for (double x : per_h) sum += x;
  return sum / static_cast<double>(per_h.size());
}

std::size_t misassigned_count(const std::vector<LearnedState>& states, std::span<const int> labels_a,
                              std::span<const int> labels_b) {
  int n_true = 1;
  for (int l : labels_a) n_true = std::max(n_true, l + 1);
  for (int l : labels_b) n_true = std::max(n_true, l + 1);
  std::vector<std::vector<std::size_t>> conf(states.size(), std::vector<std::size_t>(static_cast<std::size_t>(n_true), 0));
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t i : states[s].a) ++conf[s][static_cast<std::size_t>(labels_a[i])];
    for (std::size_t i : states[s].b) ++conf[s][static_cast<std::size_t>(labels_b[i])];
  }
  const std::size_t agree = best_injective_agreement(conf);
  return labels_a.size() + labels_b.size() - agree;
}

}  // namespace craft
