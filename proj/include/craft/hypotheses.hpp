#pragma once

// Finite hypothesis classes and exact ERM oracles over them.
//
// Every ERM here enumerates its class completely; ties always resolve to the
// lowest enumeration index so results are deterministic.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "craft/bitvector.hpp"
#include "craft/observations.hpp"

namespace craft {

/// A class member that reads a single observation coordinate.
struct Projection {
  std::size_t coordinate = 0;
  bool negated = false;
};

/// Enumerable encoder class: member k maps an observation to [0, num_outputs()).
/// Binary classifier classes are encoder classes with two outputs.
class EncoderClass {
 public:
  virtual ~EncoderClass() = default;
  virtual std::size_t size() const = 0;
  virtual int num_outputs() const = 0;
  virtual int apply(std::size_t member, const BitVector& x) const = 0;
  /// Members that are coordinate projections unlock the bitmap fast paths.
  virtual std::optional<Projection> projection(std::size_t) const { return std::nullopt; }
  virtual std::string describe(std::size_t member) const { return "member " + std::to_string(member); }
};

using ClassifierClass = EncoderClass;

/// {x -> x[i] : i in [width)}.
class CoordinateEncoders final : public EncoderClass {
 public:
  explicit CoordinateEncoders(std::size_t width) : width_(width) {}
  std::size_t size() const override { return width_; }
  int num_outputs() const override { return 2; }
  int apply(std::size_t member, const BitVector& x) const override { return x.get(member) ? 1 : 0; }
  std::optional<Projection> projection(std::size_t member) const override { return Projection{member, false}; }
  std::string describe(std::size_t member) const override { return "x[" + std::to_string(member) + "]"; }

 private:
  std::size_t width_;
};

/// {x -> x[i]} followed by {x -> 1 - x[i]}: member k < width reads x[k],
/// member width + k reads its negation.
class SignedCoordinateClassifiers final : public EncoderClass {
 public:
  explicit SignedCoordinateClassifiers(std::size_t width) : width_(width) {}
  std::size_t size() const override { return 2 * width_; }
  int num_outputs() const override { return 2; }
  int apply(std::size_t member, const BitVector& x) const override {
    const auto p = *projection(member);
    return (x.get(p.coordinate) != p.negated) ? 1 : 0;
  }
  std::optional<Projection> projection(std::size_t member) const override {
    return member < width_ ? Projection{member, false} : Projection{member - width_, true};
  }
  std::string describe(std::size_t member) const override;

 private:
  std::size_t width_;
};

/// Arbitrary members given as lookup tables over x.to_uint() (narrow observations only).
class LookupEncoders final : public EncoderClass {
 public:
  LookupEncoders(std::vector<std::vector<int>> tables, int num_outputs);
  std::size_t size() const override { return tables_.size(); }
  int num_outputs() const override { return num_outputs_; }
  int apply(std::size_t member, const BitVector& x) const override {
    return tables_[member][static_cast<std::size_t>(x.to_uint())];
  }

 private:
  std::vector<std::vector<int>> tables_;
  int num_outputs_;
};

/// Symmetric log-odds grid {-n*xi/2, -n*xi/2 + xi, ..., n*xi/2} with n + 1 values.
class DiscreteGrid {
 public:
  DiscreteGrid() = default;
  DiscreteGrid(int n_xi, double xi);

  int n_xi() const noexcept { return n_xi_; }
  double step() const noexcept { return xi_; }
  int count() const noexcept { return n_xi_ + 1; }
  double value(int j) const noexcept { return j * xi_ - n_xi_ * xi_ / 2.0; }
  double min() const noexcept { return value(0); }
  double max() const noexcept { return value(n_xi_); }
  double clamp(double v) const noexcept;
  /// Index of the grid value nearest to clamp(v); halfway ties go to the lower value.
  int nearest(double v) const noexcept;
  std::vector<double> values() const;

 private:
  int n_xi_ = 0;
  double xi_ = 1.0;
};

/// a * ln(1 + e^{-c}) + b * ln(1 + e^{c}): the log-odds loss of one bucket
/// holding a pairs from agent A and b from agent B, all predicted as c.
double bucket_loss(double a, double b, double c);

/// Grid index minimising bucket_loss(a, b, .), lowest value on ties.
int best_grid_index(double a, double b, const DiscreteGrid& grid);

/// Element of Phi_h x Phi_{h+1} x ([N_s]^2 -> grid). Table entries are grid
/// indices, row-major over (encoder_h output, encoder_next output).
struct OddsPredictor {
  std::size_t enc_h = 0;
  std::size_t enc_next = 0;
  int rows = 0;
  int cols = 0;
  std::vector<int> table;

  int grid_index(int u, int v) const { return table[static_cast<std::size_t>(u * cols + v)]; }
};

/// Grid index of table[enc_h(x_h), enc_next(x_next)].
int predict_odds_index(const OddsPredictor& f, const EncoderClass& phi_h, const EncoderClass& phi_next,
                       const BitVector& x_h, const BitVector& x_next);
double predict_odds(const OddsPredictor& f, const EncoderClass& phi_h, const EncoderClass& phi_next,
                    const DiscreteGrid& grid, const BitVector& x_h, const BitVector& x_next);

/// Per-bucket agent counts for one encoder pair, row-major like OddsPredictor::table.
struct BucketCounts {
  int rows = 0;
  int cols = 0;
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

BucketCounts bucket_counts(std::size_t enc_h, std::size_t enc_next, const ObservationBatch& a_first,
                           const ObservationBatch& a_second, const ObservationBatch& b_first,
                           const ObservationBatch& b_second, const EncoderClass& phi_h, const EncoderClass& phi_next);

struct OddsFit {
  OddsPredictor predictor;
  double loss = 0.0;
};

/// Global minimiser of sum_A ln(1 + e^{-f}) + sum_B ln(1 + e^{f}) over the
/// discretised predictor class. Pairs are (first[i], second[i]) row-aligned.
/// The loss decomposes per bucket, so each encoder pair is scored by its
/// per-bucket grid minima. Ties: lowest (enc_h, enc_next), then lowest grid value.
OddsFit erm_odds_predictor(const ObservationBatch& a_first, const ObservationBatch& a_second,
                           const ObservationBatch& b_first, const ObservationBatch& b_second,
                           const EncoderClass& phi_h, const EncoderClass& phi_next, const DiscreteGrid& grid,
                           unsigned threads = 1);

struct ClassifierFit {
  std::size_t member = 0;
  double loss = 0.0;
};

/// Minimiser of (1/|P|) sum_P (1 - g(x)) + (1/|N|) sum_N g(x) over `g_class`.
/// A loss above 0.5 means the two multisets could not be told apart.
ClassifierFit erm_binary_classifier(const ObservationBatch& positives, const ObservationBatch& negatives,
                                    const ClassifierClass& g_class);

/// Member of an encoder class composed with an output relabelling, or a constant map.
struct LearnedEncoder {
  std::optional<std::size_t> member;
  std::vector<int> relabel;  // learned label of encoder output o
  int constant = 0;

  static LearnedEncoder constant_label(int label) { return LearnedEncoder{std::nullopt, {}, label}; }
  static LearnedEncoder of(std::size_t member, std::vector<int> relabel) {
    return LearnedEncoder{member, std::move(relabel), 0};
  }
  static LearnedEncoder identity(std::size_t member, int outputs);

  bool is_constant() const noexcept { return !member.has_value(); }
  int apply(const EncoderClass& cls, const BitVector& x) const {
    return member ? relabel[static_cast<std::size_t>(cls.apply(*member, x))] : constant;
  }
};

struct MulticlassFit {
  LearnedEncoder encoder;
  double loss = 0.0;
};

/// Minimiser of sum_s (1/|D_s|) sum_{x in D_s} 1[encoder(x) != s] over Phi
/// composed with every relabelling of its outputs (the state numbering is
/// arbitrary). Ties: lowest member, then lexicographically smallest relabelling.
MulticlassFit erm_multiclass_encoder(std::span<const ObservationBatch> per_state, const EncoderClass& phi);

}  // namespace craft
