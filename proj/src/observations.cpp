#include "craft/observations.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace craft {

ObservationBatch::ObservationBatch(std::vector<BitVector> rows, std::size_t width)
    : width_(width), rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.size() != width_) throw std::invalid_argument("ObservationBatch: row width mismatch");
  }
  build_columns();
}

void ObservationBatch::build_columns() {
  const std::size_t n = rows_.size();
  columns_.assign(width_, BitVector(n));
  ones_.assign(width_, 0);
  // Transpose one 64-row block at a time so each column word is written once.
  std::vector<BitVector::Word> block(width_);
  for (std::size_t base = 0; base < n; base += BitVector::kWordBits) {
    std::fill(block.begin(), block.end(), 0);
    const std::size_t end = std::min(n, base + BitVector::kWordBits);
    for (std::size_t r = base; r < end; ++r) {
      const auto& words = rows_[r].words();
      const BitVector::Word bit = BitVector::Word{1} << (r - base);
      for (std::size_t w = 0; w < words.size(); ++w) {
        BitVector::Word x = words[w];
        while (x) {
          const int k = std::countr_zero(x);
          block[w * BitVector::kWordBits + static_cast<std::size_t>(k)] |= bit;
          x &= x - 1;
        }
      }
    }
    for (std::size_t c = 0; c < width_; ++c) columns_[c].set_word(base / BitVector::kWordBits, block[c]);
  }
  for (std::size_t c = 0; c < width_; ++c) ones_[c] = columns_[c].count();
}

ObservationBatch ObservationBatch::select(std::span<const std::size_t> indices) const {
  std::vector<BitVector> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(rows_.at(i));
  return ObservationBatch(std::move(rows), width_);
}

ObservationBatch ObservationBatch::gather(const ObservationBatch& first, std::span<const std::size_t> first_rows,
                                          const ObservationBatch& second, std::span<const std::size_t> second_rows) {
  if (first.width() != second.width()) throw std::invalid_argument("ObservationBatch::gather: width mismatch");
  std::vector<BitVector> rows;
  rows.reserve(first_rows.size() + second_rows.size());
  for (std::size_t i : first_rows) rows.push_back(first.rows_.at(i));
  for (std::size_t i : second_rows) rows.push_back(second.rows_.at(i));
  return ObservationBatch(std::move(rows), first.width());
}

ActionFreeData::ActionFreeData(const TrajectoryDataset& dataset)
    : agent_(dataset.agent), size_(dataset.size()), width_(dataset.obs_length) {
  steps_.reserve(static_cast<std::size_t>(dataset.horizon));
  for (int h = 0; h < dataset.horizon; ++h) {
    std::vector<BitVector> rows;
    rows.reserve(dataset.size());
    for (const auto& t : dataset.trajectories) rows.push_back(t.observations[static_cast<std::size_t>(h)]);
    steps_.emplace_back(std::move(rows), width_);
  }
}

}  // namespace craft
