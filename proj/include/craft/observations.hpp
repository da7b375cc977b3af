#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "craft/bitvector.hpp"
#include "craft/exbmdp.hpp"

namespace craft {

/// A multiset of equal-width observations stored both row-wise and as one
/// bitmap per coordinate (bit r of column c is coordinate c of row r).
class ObservationBatch {
 public:
  ObservationBatch() = default;
  ObservationBatch(std::vector<BitVector> rows, std::size_t width);

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t width() const noexcept { return width_; }
  const BitVector& row(std::size_t i) const { return rows_[i]; }
  const std::vector<BitVector>& rows() const noexcept { return rows_; }
  const BitVector& column(std::size_t c) const { return columns_[c]; }
  /// Number of rows with coordinate c set.
  std::size_t ones(std::size_t c) const { return ones_[c]; }

  /// Rows `indices` of this batch (multiset order preserved).
  ObservationBatch select(std::span<const std::size_t> indices) const;
  /// Concatenation of selected rows from two batches of the same width.
  static ObservationBatch gather(const ObservationBatch& first, std::span<const std::size_t> first_rows,
                                 const ObservationBatch& second, std::span<const std::size_t> second_rows);

 private:
  void build_columns();

  std::size_t width_ = 0;
  std::vector<BitVector> rows_;
  std::vector<BitVector> columns_;
  std::vector<std::size_t> ones_;
};

/// Label-free view of one agent's trajectories: per-timestep observation
/// batches indexed by trajectory. Learning code only ever sees this type.
class ActionFreeData {
 public:
  ActionFreeData() = default;
  /// Drops any latent labels carried by `dataset`.
  explicit ActionFreeData(const TrajectoryDataset& dataset);

  Agent agent() const noexcept { return agent_; }
  int horizon() const noexcept { return static_cast<int>(steps_.size()); }
  std::size_t size() const noexcept { return size_; }
  std::size_t width() const noexcept { return width_; }
  const ObservationBatch& at(int h) const { return steps_[static_cast<std::size_t>(h)]; }

 private:
  Agent agent_ = Agent::A;
  std::size_t size_ = 0;
  std::size_t width_ = 0;
  std::vector<ObservationBatch> steps_;
};

}  // namespace craft
