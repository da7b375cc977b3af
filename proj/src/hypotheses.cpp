#include "craft/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "craft/errors.hpp"
#include "craft/parallel.hpp"

namespace craft {

std::string SignedCoordinateClassifiers::describe(std::size_t member) const {
  const auto p = *projection(member);
  return (p.negated ? "1-x[" : "x[") + std::to_string(p.coordinate) + "]";
}

LookupEncoders::LookupEncoders(std::vector<std::vector<int>> tables, int num_outputs)
    : tables_(std::move(tables)), num_outputs_(num_outputs) {
  for (const auto& t : tables_) {
    for (int v : t) {
      if (v < 0 || v >= num_outputs_) throw std::invalid_argument("LookupEncoders: output outside [0, num_outputs)");
    }
  }
}

DiscreteGrid::DiscreteGrid(int n_xi, double xi) : n_xi_(n_xi), xi_(xi) {
  if (n_xi < 0) throw std::invalid_argument("DiscreteGrid: n_xi must be non-negative");
  if (!(xi > 0.0)) throw std::invalid_argument("DiscreteGrid: step must be positive");
}

double DiscreteGrid::clamp(double v) const noexcept { return std::clamp(v, min(), max()); }

int DiscreteGrid::nearest(double v) const noexcept {
  const double pos = (clamp(v) - min()) / xi_;
  int j = static_cast<int>(std::floor(pos));
  if (pos - j > 0.5) ++j;
  return std::clamp(j, 0, n_xi_);
}

std::vector<double> DiscreteGrid::values() const {
  std::vector<double> out(static_cast<std::size_t>(count()));
  for (int j = 0; j < count(); ++j) out[static_cast<std::size_t>(j)] = value(j);
  return out;
}

double bucket_loss(double a, double b, double c) {
  // ln(1 + e^{-c}) without overflow for large |c|
  auto softplus = [](double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); };
  return a * softplus(-c) + b * softplus(c);
}

namespace {

struct GridLosses {
  std::vector<double> neg;  // ln(1 + e^{-c_j})
  std::vector<double> pos;  // ln(1 + e^{c_j})
  explicit GridLosses(const DiscreteGrid& grid) {
    for (int j = 0; j < grid.count(); ++j) {
      neg.push_back(bucket_loss(1.0, 0.0, grid.value(j)));
      pos.push_back(bucket_loss(0.0, 1.0, grid.value(j)));
    }
  }
  std::pair<int, double> best(double a, double b) const {
    int arg = 0;
    double lo = a * neg[0] + b * pos[0];
    for (std::size_t j = 1; j < neg.size(); ++j) {
      const double v = a * neg[j] + b * pos[j];
      if (v < lo) {
        lo = v;
        arg = static_cast<int>(j);
      }
    }
    return {arg, lo};
  }
};

std::optional<std::vector<Projection>> all_projections(const EncoderClass& cls) {
  if (cls.num_outputs() != 2) return std::nullopt;
  std::vector<Projection> out;
  out.reserve(cls.size());
  for (std::size_t k = 0; k < cls.size(); ++k) {
    auto p = cls.projection(k);
    if (!p) return std::nullopt;
    out.push_back(*p);
  }
  return out;
}

/// Counts of (first bit, second bit) for one coordinate pair, indexed [b1 * 2 + b2].
std::array<std::size_t, 4> joint_bits(const ObservationBatch& first, std::size_t c1, const ObservationBatch& second,
                                      std::size_t c2) {
  const std::size_t n = first.size();
  const std::size_t both = first.column(c1).and_count(second.column(c2));
  const std::size_t one_first = first.ones(c1);
  const std::size_t one_second = second.ones(c2);
  return {n - one_first - one_second + both, one_second - both, one_first - both, both};
}

void fill_projection_counts(const Projection& p, const Projection& q, const std::array<std::size_t, 4>& bits,
                            std::vector<std::size_t>& out) {
  for (int u = 0; u < 2; ++u) {
    for (int v = 0; v < 2; ++v) {
      const int bu = u ^ static_cast<int>(p.negated);
      const int bv = v ^ static_cast<int>(q.negated);
      out[static_cast<std::size_t>(u * 2 + v)] = bits[static_cast<std::size_t>(bu * 2 + bv)];
    }
  }
}

std::vector<std::vector<std::uint8_t>> encode_all(const EncoderClass& cls, const ObservationBatch& batch) {
  std::vector<std::vector<std::uint8_t>> codes(cls.size(), std::vector<std::uint8_t>(batch.size()));
  for (std::size_t k = 0; k < cls.size(); ++k) {
    for (std::size_t r = 0; r < batch.size(); ++r) codes[k][r] = static_cast<std::uint8_t>(cls.apply(k, batch.row(r)));
  }
  return codes;
}

void check_pairs(const ObservationBatch& first, const ObservationBatch& second, const char* who) {
  if (first.size() != second.size()) throw std::invalid_argument(std::string(who) + ": pair batches are not row-aligned");
}

}  // namespace

int predict_odds_index(const OddsPredictor& f, const EncoderClass& phi_h, const EncoderClass& phi_next,
                       const BitVector& x_h, const BitVector& x_next) {
  return f.grid_index(phi_h.apply(f.enc_h, x_h), phi_next.apply(f.enc_next, x_next));
}

double predict_odds(const OddsPredictor& f, const EncoderClass& phi_h, const EncoderClass& phi_next,
                    const DiscreteGrid& grid, const BitVector& x_h, const BitVector& x_next) {
  return grid.value(predict_odds_index(f, phi_h, phi_next, x_h, x_next));
}

BucketCounts bucket_counts(std::size_t enc_h, std::size_t enc_next, const ObservationBatch& a_first,
                           const ObservationBatch& a_second, const ObservationBatch& b_first,
                           const ObservationBatch& b_second, const EncoderClass& phi_h, const EncoderClass& phi_next) {
  check_pairs(a_first, a_second, "bucket_counts");
  check_pairs(b_first, b_second, "bucket_counts");
  BucketCounts out;
  out.rows = phi_h.num_outputs();
  out.cols = phi_next.num_outputs();
  const auto cells = static_cast<std::size_t>(out.rows * out.cols);
  out.a.assign(cells, 0);
  out.b.assign(cells, 0);
  auto tally = [&](const ObservationBatch& first, const ObservationBatch& second, std::vector<std::size_t>& into) {
    for (std::size_t r = 0; r < first.size(); ++r) {
      const int u = phi_h.apply(enc_h, first.row(r));
      const int v = phi_next.apply(enc_next, second.row(r));
      ++into[static_cast<std::size_t>(u * out.cols + v)];
    }
  };
  tally(a_first, a_second, out.a);
  tally(b_first, b_second, out.b);
  return out;
}

int best_grid_index(double a, double b, const DiscreteGrid& grid) { return GridLosses(grid).best(a, b).first; }

OddsFit erm_odds_predictor(const ObservationBatch& a_first, const ObservationBatch& a_second,
                           const ObservationBatch& b_first, const ObservationBatch& b_second,
                           const EncoderClass& phi_h, const EncoderClass& phi_next, const DiscreteGrid& grid,
                           unsigned threads) {
  check_pairs(a_first, a_second, "erm_odds_predictor");
  check_pairs(b_first, b_second, "erm_odds_predictor");
  if (a_first.empty() || b_first.empty()) throw PreconditionError("erm_odds_predictor: both pair multisets must be nonempty");
  if (phi_h.size() == 0 || phi_next.size() == 0) throw PreconditionError("erm_odds_predictor: empty encoder class");

  const GridLosses losses(grid);
  const int rows = phi_h.num_outputs();
  const int cols = phi_next.num_outputs();
  const auto cells = static_cast<std::size_t>(rows * cols);

  const auto proj_h = all_projections(phi_h);
  const auto proj_next = all_projections(phi_next);
  const bool fast = proj_h && proj_next;

  std::vector<std::vector<std::uint8_t>> codes_ha, codes_na, codes_hb, codes_nb;
  if (!fast) {
    codes_ha = encode_all(phi_h, a_first);
    codes_na = encode_all(phi_next, a_second);
    codes_hb = encode_all(phi_h, b_first);
    codes_nb = encode_all(phi_next, b_second);
  }

  auto counts_for = [&](std::size_t i, std::size_t j, std::vector<std::size_t>& ca, std::vector<std::size_t>& cb) {
    if (fast) {
      const Projection& p = (*proj_h)[i];
      const Projection& q = (*proj_next)[j];
      fill_projection_counts(p, q, joint_bits(a_first, p.coordinate, a_second, q.coordinate), ca);
      fill_projection_counts(p, q, joint_bits(b_first, p.coordinate, b_second, q.coordinate), cb);
      return;
    }
    std::fill(ca.begin(), ca.end(), 0);
    std::fill(cb.begin(), cb.end(), 0);
    for (std::size_t r = 0; r < a_first.size(); ++r) ++ca[static_cast<std::size_t>(codes_ha[i][r] * cols + codes_na[j][r])];
    for (std::size_t r = 0; r < b_first.size(); ++r) ++cb[static_cast<std::size_t>(codes_hb[i][r] * cols + codes_nb[j][r])];
  };

  struct RowBest {
    double loss = 0.0;
    std::size_t j = 0;
  };
  std::vector<RowBest> row_best(phi_h.size());
  parallel_for(phi_h.size(), threads, [&](std::size_t i) {
    std::vector<std::size_t> ca(cells), cb(cells);
    RowBest best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t j = 0; j < phi_next.size(); ++j) {
      counts_for(i, j, ca, cb);
      double total = 0.0;
      for (std::size_t k = 0; k < cells; ++k) {
        total += losses.best(static_cast<double>(ca[k]), static_cast<double>(cb[k])).second;
      }
      if (total < best.loss) best = {total, j};
    }
    row_best[i] = best;
  });

  std::size_t best_i = 0;
  for (std::size_t i = 1; i < row_best.size(); ++i) {
    if (row_best[i].loss < row_best[best_i].loss) best_i = i;
  }

  OddsFit fit;
  fit.loss = row_best[best_i].loss;
  fit.predictor.enc_h = best_i;
  fit.predictor.enc_next = row_best[best_i].j;
  fit.predictor.rows = rows;
  fit.predictor.cols = cols;
  std::vector<std::size_t> ca(cells), cb(cells);
  counts_for(best_i, fit.predictor.enc_next, ca, cb);
  fit.predictor.table.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    fit.predictor.table[k] = losses.best(static_cast<double>(ca[k]), static_cast<double>(cb[k])).first;
  }
  return fit;
}

ClassifierFit erm_binary_classifier(const ObservationBatch& positives, const ObservationBatch& negatives,
                                    const ClassifierClass& g_class) {
  if (positives.empty() || negatives.empty()) throw PreconditionError("erm_binary_classifier: both multisets must be nonempty");
  if (g_class.size() == 0) throw PreconditionError("erm_binary_classifier: empty classifier class");
  const auto proj = all_projections(g_class);
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());

  auto count_ones = [&](std::size_t m, const ObservationBatch& batch) -> std::size_t {
    if (proj) {
      const Projection& p = (*proj)[m];
      const std::size_t ones = batch.ones(p.coordinate);
      return p.negated ? batch.size() - ones : ones;
    }
    std::size_t c = 0;
    for (const auto& x : batch.rows()) c += g_class.apply(m, x) == 1 ? 1 : 0;
    return c;
  };

  ClassifierFit best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t m = 0; m < g_class.size(); ++m) {
    const double loss = static_cast<double>(positives.size() - count_ones(m, positives)) / np +
                        static_cast<double>(count_ones(m, negatives)) / nn;
    if (loss < best.loss) best = {m, loss};
  }
  return best;
}

LearnedEncoder LearnedEncoder::identity(std::size_t member, int outputs) {
  std::vector<int> relabel(static_cast<std::size_t>(outputs));
  std::iota(relabel.begin(), relabel.end(), 0);
  return of(member, std::move(relabel));
}

MulticlassFit erm_multiclass_encoder(std::span<const ObservationBatch> per_state, const EncoderClass& phi) {
  if (per_state.empty()) throw PreconditionError("erm_multiclass_encoder: no states");
  for (const auto& d : per_state) {
    if (d.empty()) throw PreconditionError("erm_multiclass_encoder: a state has no observations");
  }
  if (phi.size() == 0) throw PreconditionError("erm_multiclass_encoder: empty encoder class");
  const int outputs = phi.num_outputs();
  const int n_states = static_cast<int>(per_state.size());
  const int k = std::max(outputs, n_states);
  if (k > 9) throw PreconditionError("erm_multiclass_encoder: relabelling search limited to 9 labels");

  const auto proj = all_projections(phi);
  std::vector<std::vector<std::size_t>> conf(static_cast<std::size_t>(n_states),
                                             std::vector<std::size_t>(static_cast<std::size_t>(outputs)));
  MulticlassFit best;
  best.loss = std::numeric_limits<double>::infinity();
  std::vector<int> perm(static_cast<std::size_t>(k));

  for (std::size_t m = 0; m < phi.size(); ++m) {
    for (int s = 0; s < n_states; ++s) {
      auto& row = conf[static_cast<std::size_t>(s)];
      const ObservationBatch& d = per_state[static_cast<std::size_t>(s)];
      std::fill(row.begin(), row.end(), 0);
      if (proj) {
        const Projection& p = (*proj)[m];
        const std::size_t ones = d.ones(p.coordinate);
        row[1] = p.negated ? d.size() - ones : ones;
        row[0] = d.size() - row[1];
      } else {
        for (const auto& x : d.rows()) ++row[static_cast<std::size_t>(phi.apply(m, x))];
      }
    }
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double loss = 0.0;
      for (int s = 0; s < n_states; ++s) {
        std::size_t hits = 0;
        for (int o = 0; o < outputs; ++o) {
          if (perm[static_cast<std::size_t>(o)] == s) hits += conf[static_cast<std::size_t>(s)][static_cast<std::size_t>(o)];
        }
        loss += 1.0 - static_cast<double>(hits) / static_cast<double>(per_state[static_cast<std::size_t>(s)].size());
      }
      if (loss < best.loss) {
        best.loss = loss;
        best.encoder = LearnedEncoder::of(m, std::vector<int>(perm.begin(), perm.begin() + outputs));
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

}  // namespace craft
