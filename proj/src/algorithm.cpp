#include "craft/algorithm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "craft/errors.hpp"
#include "craft/parallel.hpp"

namespace craft {

PreprocessedParams preprocess(const CraftConfig& config) {
  if (!(config.alpha > 0.0) || !std::isfinite(config.alpha)) throw PreconditionError("alpha must be a positive real");
  if (!(config.eta > 0.0) || !(config.eta <= 0.5)) throw PreconditionError("eta must lie in (0, 1/2]");
  if (!(config.nu > 0.0) || !(config.nu <= 1.0)) throw PreconditionError("nu must lie in (0, 1]");
  if (config.max_states < 1) throw PreconditionError("max_states must be positive");

  PreprocessedParams p;
  p.alpha_clipped = std::min(1.0, config.alpha);
  p.xi = p.alpha_clipped / 4.0;
  const double raw = 8.0 * std::log(1.0 / config.eta - 1.0) / p.alpha_clipped;
  // Guard ceil against values that are integers up to rounding noise.
  const double snapped = std::round(raw);
  p.n_xi = static_cast<int>(std::abs(raw - snapped) < 1e-9 ? snapped : std::ceil(raw));
  p.eta_effective = 1.0 / (1.0 + std::exp(p.n_xi * p.alpha_clipped / 8.0));
  p.grid = DiscreteGrid(p.n_xi, p.xi);
  return p;
}

HypothesisFamily HypothesisFamily::repeated(int horizon, std::shared_ptr<const EncoderClass> encoders,
                                            std::shared_ptr<const ClassifierClass> classifiers) {
  HypothesisFamily f;
  f.encoders.assign(static_cast<std::size_t>(horizon), encoders);
  f.classifiers.assign(static_cast<std::size_t>(horizon), classifiers);
  return f;
}

namespace {

void check_inputs(const ActionFreeData& a, const ActionFreeData& b, const HypothesisFamily& family) {
  if (a.horizon() != b.horizon()) {
    throw PreconditionError("horizon mismatch: A has H=" + std::to_string(a.horizon()) + ", B has H=" +
                            std::to_string(b.horizon()));
  }
  if (a.horizon() < 2) throw PreconditionError("CRAFT needs H >= 2");
  if (a.size() == 0 || b.size() == 0) throw PreconditionError("both datasets must be nonempty");
  if (a.width() != b.width()) throw PreconditionError("observation widths differ between agents");
  const auto h = static_cast<std::size_t>(a.horizon());
  if (family.encoders.size() != h || family.classifiers.size() != h) {
    throw PreconditionError("hypothesis family must supply one encoder and one classifier class per timestep");
  }
  for (std::size_t t = 0; t < h; ++t) {
    if (!family.encoders[t] || !family.classifiers[t]) throw PreconditionError("null hypothesis class");
    if (family.classifiers[t]->num_outputs() != 2) throw PreconditionError("classifier classes must be binary");
  }
}

// Assigns trajectory indices to state `target`, keeping any earlier owner.
void claim(std::vector<std::size_t>& dest, std::vector<int>& owner, std::span<const std::size_t> indices, int target,
           char agent, int h_next, std::vector<std::string>& warnings) {
  std::size_t conflicts = 0;
  for (std::size_t i : indices) {
    if (owner[i] == -1) {
      owner[i] = target;
      dest.push_back(i);
    } else if (owner[i] != target) {
      ++conflicts;
    }
  }
  if (conflicts > 0) {
    warnings.push_back("h=" + std::to_string(h_next) + ": " + std::to_string(conflicts) + " trajectories of agent " +
                       agent + " already assigned to another state; first assignment kept");
  }
}

}  // namespace

CraftOutput craft_run(const ActionFreeData& a, const ActionFreeData& b, const CraftConfig& config,
                      const HypothesisFamily& family, unsigned threads) {
  check_inputs(a, b, family);
  CraftOutput out;
  out.params = preprocess(config);
  const DiscreteGrid& grid = out.params.grid;
  const int H = a.horizon();
  const std::size_t n_a = a.size();
  const std::size_t n_b = b.size();
  const double total = static_cast<double>(n_a + n_b);

  // f_h for every transition, independently.
  std::vector<OddsFit> fits(static_cast<std::size_t>(H - 1));
  parallel_for(fits.size(), threads, [&](std::size_t t) {
    const int h = static_cast<int>(t);
    fits[t] = erm_odds_predictor(a.at(h), a.at(h + 1), b.at(h), b.at(h + 1), *family.encoders[t],
                                 *family.encoders[t + 1], grid, 1);
  });

  out.encoders.push_back(LearnedEncoder::constant_label(0));
  out.assignment.steps.resize(static_cast<std::size_t>(H));
  {
    LearnedState first;
    first.a.resize(n_a);
    first.b.resize(n_b);
    for (std::size_t i = 0; i < n_a; ++i) first.a[i] = i;
    for (std::size_t i = 0; i < n_b; ++i) first.b[i] = i;
    out.assignment.steps[0].push_back(std::move(first));
  }

  for (int h = 0; h + 1 < H; ++h) {
    const auto t = static_cast<std::size_t>(h);
    const EncoderClass& phi_h = *family.encoders[t];
    const EncoderClass& phi_next = *family.encoders[t + 1];
    const ClassifierClass& g_next = *family.classifiers[t + 1];
    const ObservationBatch& a_h = a.at(h);
    const ObservationBatch& a_next = a.at(h + 1);
    const ObservationBatch& b_h = b.at(h);
    const ObservationBatch& b_next = b.at(h + 1);

    StepDiagnostics diag;
    diag.h = h;
    diag.predictor = fits[t].predictor;
    diag.predictor_loss = fits[t].loss;
    diag.q_thresh = static_cast<double>(h + 1) * config.nu / (8.0 * H);
    diag.count_threshold = diag.q_thresh * total;

    std::vector<int> pred_a(n_a);
    std::vector<int> pred_b(n_b);
    for (std::size_t i = 0; i < n_a; ++i) pred_a[i] = predict_odds_index(diag.predictor, phi_h, phi_next, a_h.row(i), a_next.row(i));
    for (std::size_t i = 0; i < n_b; ++i) pred_b[i] = predict_odds_index(diag.predictor, phi_h, phi_next, b_h.row(i), b_next.row(i));

    std::vector<LearnedState> next;
    std::vector<int> owner_a(n_a, -1);
    std::vector<int> owner_b(n_b, -1);
    const int n_buckets = grid.count();

    const auto& current = out.assignment.steps[t];
    for (std::size_t sp = 0; sp < current.size(); ++sp) {
      const LearnedState& pred = current[sp];
      PredecessorScan scan;
      scan.state = static_cast<int>(sp);
      if (pred.a.empty() && pred.b.empty()) {
        scan.skipped = true;
        out.warnings.push_back("h=" + std::to_string(h) + ": predecessor state " + std::to_string(sp) +
                               " has no trajectories; skipped");
        diag.scans.push_back(std::move(scan));
        continue;
      }

      std::vector<std::vector<std::size_t>> bucket_a(static_cast<std::size_t>(n_buckets));
      std::vector<std::vector<std::size_t>> bucket_b(static_cast<std::size_t>(n_buckets));
      for (std::size_t i : pred.a) bucket_a[static_cast<std::size_t>(pred_a[i])].push_back(i);
      for (std::size_t i : pred.b) bucket_b[static_cast<std::size_t>(pred_b[i])].push_back(i);
      scan.histogram.resize(static_cast<std::size_t>(n_buckets));
      for (int j = 0; j < n_buckets; ++j) {
        const auto u = static_cast<std::size_t>(j);
        scan.histogram[u] = bucket_a[u].size() + bucket_b[u].size();
      }
      auto heavy = [&](int j) { return static_cast<double>(scan.histogram[static_cast<std::size_t>(j)]) >= diag.count_threshold; };

      std::vector<bool> merged_already(next.size(), false);
      std::vector<LearnedState> fresh;
      const int n_xi = grid.n_xi();
      int j = 0;
      while (j <= n_xi) {
        if (!heavy(j)) {
          ++j;
          continue;
        }
        int j_end = j + 1;
        while (j_end <= n_xi && heavy(j_end)) ++j_end;
        if (j_end > n_xi) j_end = n_xi;

        ClusterWindow window;
        window.trigger = j;
        window.lo = std::max(0, j - 1);
        window.hi = j_end;
        std::vector<std::size_t> new_a;
        std::vector<std::size_t> new_b;
        for (int k = window.lo; k <= window.hi; ++k) {
          const auto u = static_cast<std::size_t>(k);
          new_a.insert(new_a.end(), bucket_a[u].begin(), bucket_a[u].end());
          new_b.insert(new_b.end(), bucket_b[u].begin(), bucket_b[u].end());
        }
        std::sort(new_a.begin(), new_a.end());
        std::sort(new_b.begin(), new_b.end());
        window.size_a = new_a.size();
        window.size_b = new_b.size();

        if (new_a.empty() && new_b.empty()) {
          out.warnings.push_back("h=" + std::to_string(h) + ": empty cluster window; skipped");
          scan.windows.push_back(std::move(window));
          j = j_end + 2;
          continue;
        }

        const ObservationBatch d_new = ObservationBatch::gather(a_next, new_a, b_next, new_b);
        for (std::size_t c = 0; c < next.size(); ++c) {
          if (merged_already[c]) continue;
          const ObservationBatch d_s = ObservationBatch::gather(a_next, next[c].a, b_next, next[c].b);
          const ClassifierFit fit = erm_binary_classifier(d_new, d_s, g_next);
          MergeAttempt attempt{static_cast<int>(c), fit.member, fit.loss, fit.loss > 0.5};
          if (fit.loss > 0.45 && fit.loss < 0.55) {
            std::ostringstream msg;
            msg << "h=" << h << ": classifier loss " << fit.loss << " against state " << c << " is close to 0.5";
            out.warnings.push_back(msg.str());
          }
          window.attempts.push_back(attempt);
          if (attempt.merged) {
            const int target = static_cast<int>(c);
            claim(next[c].a, owner_a, new_a, target, 'A', h + 1, out.warnings);
            claim(next[c].b, owner_b, new_b, target, 'B', h + 1, out.warnings);
            merged_already[c] = true;
            window.state = target;
            break;
          }
        }
        if (window.state < 0) {
          const int target = static_cast<int>(next.size() + fresh.size());
          LearnedState s;
          claim(s.a, owner_a, new_a, target, 'A', h + 1, out.warnings);
          claim(s.b, owner_b, new_b, target, 'B', h + 1, out.warnings);
          fresh.push_back(std::move(s));
          window.state = target;
          window.created = true;
        }
        scan.windows.push_back(std::move(window));
        j = j_end + 2;
      }

      for (auto& s : fresh) next.push_back(std::move(s));
      if (static_cast<int>(next.size()) > config.max_states) {
        throw PreconditionError("timestep h=" + std::to_string(h + 1) + " needs " + std::to_string(next.size()) +
                                " learned states, more than max_states=" + std::to_string(config.max_states));
      }
      diag.scans.push_back(std::move(scan));
    }

    for (auto& s : next) {
      std::sort(s.a.begin(), s.a.end());
      std::sort(s.b.begin(), s.b.end());
    }

    std::vector<ObservationBatch> per_state;
    for (const auto& s : next) {
      if (!s.a.empty() || !s.b.empty()) per_state.push_back(ObservationBatch::gather(a_next, s.a, b_next, s.b));
    }
    if (per_state.size() != next.size() || next.empty()) {
      // Only reachable when every window was empty or fully conflicting.
      out.warnings.push_back("h=" + std::to_string(h + 1) + ": no usable learned states; constant encoder emitted");
      out.encoders.push_back(LearnedEncoder::constant_label(0));
      diag.encoder_loss = 0.0;
    } else {
      MulticlassFit fit = erm_multiclass_encoder(per_state, phi_next);
      out.encoders.push_back(std::move(fit.encoder));
      diag.encoder_loss = fit.loss;
    }
    out.assignment.steps[t + 1] = std::move(next);
    out.steps.push_back(std::move(diag));
  }
  return out;
}

DraftOutput draft_run(const ActionFreeData& a, const ActionFreeData& b, const EncoderClass& phi) {
  if (a.horizon() != 2 || b.horizon() != 2) throw PreconditionError("DRAFT requires H = 2");
  if (a.size() == 0 || b.size() == 0) throw PreconditionError("both datasets must be nonempty");
  if (phi.num_outputs() != 2) throw PreconditionError("DRAFT needs a binary encoder class");
  // Same objective as the classifier loss with B as positives and A as negatives.
  const ClassifierFit fit = erm_binary_classifier(b.at(1), a.at(1), phi);
  DraftOutput out;
  out.encoders.push_back(LearnedEncoder::constant_label(0));
  out.encoders.push_back(LearnedEncoder::identity(fit.member, 2));
  out.loss = fit.loss;
  return out;
}

double sample_complexity_estimate(int horizon, std::size_t class_size, int max_states, double delta, double epsilon,
                                  double nu, double nu_prime, double eta, double alpha) {
  if (horizon < 1 || class_size == 0 || max_states < 1 || !(delta > 0.0 && delta < 1.0) || !(epsilon > 0.0) ||
      !(nu > 0.0) || !(nu_prime > 0.0) || !(eta > 0.0) || !(alpha > 0.0)) {
    throw PreconditionError("sample_complexity_estimate: arguments out of range");
  }
  const double h2 = static_cast<double>(horizon) * horizon;
  const double ns2 = static_cast<double>(max_states) * max_states;
  const double lead = h2 * (std::log(static_cast<double>(class_size) / delta) + ns2) / (nu * eta * eta * std::pow(alpha, 4));
  return lead * std::max(1.0 / (nu * nu), 1.0 / (epsilon * epsilon * nu_prime * nu_prime));
}

}  // namespace craft
