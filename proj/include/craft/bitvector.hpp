#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace craft {

/// Fixed-length packed bit vector. Observations and per-coordinate sample
/// bitmaps share this type so that bucket counts reduce to AND + popcount.
class BitVector {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_(word_count(size), 0) {}

  /// Parses a contiguous '0'/'1' string; throws std::invalid_argument otherwise.
  static BitVector from_string(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & Word{1};
  }
  void set(std::size_t i, bool value) noexcept {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }
  bool operator[](std::size_t i) const noexcept { return get(i); }

  std::size_t count() const noexcept {
    std::size_t total = 0;
    for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  /// popcount(*this & other) without materialising the intersection.
  std::size_t and_count(const BitVector& other) const noexcept {
    std::size_t total = 0;
    const std::size_t n = words_.size() < other.words_.size() ? words_.size() : other.words_.size();
    for (std::size_t k = 0; k < n; ++k) {
      total += static_cast<std::size_t>(std::popcount(words_[k] & other.words_[k]));
    }
    return total;
  }

  /// Low bits as an integer (first bit is the least significant). Requires size() <= 64.
  std::uint64_t to_uint() const noexcept { return words_.empty() ? 0 : words_[0]; }

  std::string to_string() const;

  const std::vector<Word>& words() const noexcept { return words_; }
  /// Overwrites word k; bits past size() must be zero.
  void set_word(std::size_t k, Word w) noexcept { words_[k] = w; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

  static std::size_t word_count(std::size_t bits) noexcept {
    return (bits + kWordBits - 1) / kWordBits;
  }

 private:
  std::size_t size_ = 0;
  std::vector<Word> words_;
};

}  // namespace craft
