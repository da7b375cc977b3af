#include "craft/baselines.hpp"

#include <cmath>

#include "craft/errors.hpp"
#include "craft/parallel.hpp"

namespace craft {

double plug_in_mutual_information(std::span<const std::size_t> counts_a, std::span<const std::size_t> counts_b) {
  if (counts_a.size() != counts_b.size()) throw std::invalid_argument("plug_in_mutual_information: size mismatch");
  double n_a = 0.0;
  double n_b = 0.0;
  for (std::size_t c : counts_a) n_a += static_cast<double>(c);
  for (std::size_t c : counts_b) n_b += static_cast<double>(c);
  const double n = n_a + n_b;
  if (n == 0.0) return 0.0;
  double mi = 0.0;
  auto term = [&](double joint, double value_total, double agent_total) {
    if (joint == 0.0) return 0.0;
    return (joint / n) * std::log(joint * n / (value_total * agent_total));
  };
  for (std::size_t v = 0; v < counts_a.size(); ++v) {
    const double ca = static_cast<double>(counts_a[v]);
    const double cb = static_cast<double>(counts_b[v]);
    mi += term(ca, ca + cb, n_a) + term(cb, ca + cb, n_b);
  }
  return std::max(0.0, mi);
}

namespace {

std::vector<std::size_t> value_counts(const ObservationBatch& d, const EncoderClass& phi, std::size_t member) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(phi.num_outputs()), 0);
  if (const auto p = phi.projection(member); p && phi.num_outputs() == 2) {
    const std::size_t ones = d.ones(p->coordinate);
    counts[1] = p->negated ? d.size() - ones : ones;
    counts[0] = d.size() - counts[1];
    return counts;
  }
  for (const auto& x : d.rows()) ++counts[static_cast<std::size_t>(phi.apply(member, x))];
  return counts;
}

std::vector<std::size_t> joint_counts(const ObservationBatch& first, const ObservationBatch& second,
                                      const EncoderClass& phi_h, const EncoderClass& phi_next, std::size_t i,
                                      std::size_t j) {
  const auto rows = static_cast<std::size_t>(phi_h.num_outputs());
  const auto cols = static_cast<std::size_t>(phi_next.num_outputs());
  std::vector<std::size_t> counts(rows * cols, 0);
  const auto p = phi_h.projection(i);
  const auto q = phi_next.projection(j);
  if (p && q && rows == 2 && cols == 2) {
    const std::size_t n = first.size();
    const std::size_t both = first.column(p->coordinate).and_count(second.column(q->coordinate));
    const std::size_t f1 = first.ones(p->coordinate);
    const std::size_t s1 = second.ones(q->coordinate);
    const std::size_t raw[2][2] = {{n - f1 - s1 + both, s1 - both}, {f1 - both, both}};
    for (std::size_t u = 0; u < 2; ++u) {
      for (std::size_t v = 0; v < 2; ++v) {
        counts[(u ^ (p->negated ? 1U : 0U)) * 2 + (v ^ (q->negated ? 1U : 0U))] = raw[u][v];
      }
    }
    return counts;
  }
  for (std::size_t r = 0; r < first.size(); ++r) {
    const auto u = static_cast<std::size_t>(phi_h.apply(i, first.row(r)));
    const auto v = static_cast<std::size_t>(phi_next.apply(j, second.row(r)));
    ++counts[u * cols + v];
  }
  return counts;
}

void check(const ActionFreeData& a, const ActionFreeData& b, std::size_t classes) {
  if (a.size() == 0 || b.size() == 0) throw PreconditionError("baselines need nonempty datasets");
  if (a.horizon() != b.horizon()) throw PreconditionError("horizon mismatch between agents");
  if (classes != static_cast<std::size_t>(a.horizon())) throw PreconditionError("need one encoder class per timestep");
}

}  // namespace

double feature_mi(const ObservationBatch& a, const ObservationBatch& b, const EncoderClass& phi, std::size_t member) {
  const auto ca = value_counts(a, phi, member);
  const auto cb = value_counts(b, phi, member);
  return plug_in_mutual_information(ca, cb);
}

double pair_mi(const ObservationBatch& a_h, const ObservationBatch& a_next, const ObservationBatch& b_h,
               const ObservationBatch& b_next, const EncoderClass& phi_h, const EncoderClass& phi_next, std::size_t i,
               std::size_t j) {
  const auto ca = joint_counts(a_h, a_next, phi_h, phi_next, i, j);
  const auto cb = joint_counts(b_h, b_next, phi_h, phi_next, i, j);
  return plug_in_mutual_information(ca, cb);
}

SingleObsResult single_obs_baseline(const ActionFreeData& a, const ActionFreeData& b,
                                    std::span<const std::shared_ptr<const EncoderClass>> classes, unsigned threads) {
  check(a, b, classes.size());
  SingleObsResult out;
  out.best.resize(classes.size());
  parallel_for(classes.size(), threads, [&](std::size_t t) {
    const int h = static_cast<int>(t);
    const EncoderClass& phi = *classes[t];
    MiScore best{0, 0, -1.0};
    for (std::size_t m = 0; m < phi.size(); ++m) {
      const double mi = feature_mi(a.at(h), b.at(h), phi, m);
      if (mi > best.mi) best = MiScore{m, 0, mi};
    }
    out.best[t] = best;
  });
  return out;
}

PairedObsResult paired_obs_baseline(const ActionFreeData& a, const ActionFreeData& b,
                                    std::span<const std::shared_ptr<const EncoderClass>> classes, unsigned threads) {
  check(a, b, classes.size());
  if (a.horizon() < 2) throw PreconditionError("paired baseline needs H >= 2");
  PairedObsResult out;
  out.windows.resize(classes.size() - 1);
  parallel_for(out.windows.size(), threads, [&](std::size_t t) {
    const int h = static_cast<int>(t);
    const EncoderClass& phi_h = *classes[t];
    const EncoderClass& phi_next = *classes[t + 1];
    MiScore best{0, 0, -1.0};
    for (std::size_t i = 0; i < phi_h.size(); ++i) {
      for (std::size_t j = 0; j < phi_next.size(); ++j) {
        const double mi = pair_mi(a.at(h), a.at(h + 1), b.at(h), b.at(h + 1), phi_h, phi_next, i, j);
        if (mi > best.mi) best = MiScore{i, j, mi};
      }
    }
    out.windows[t] = best;
  });
  return out;
}

}  // namespace craft
