#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rfp {

// Packed bit sequence, LSB-first within 64-bit words. Unused high bits of the
// last word are always zero so word-wise comparison and hashing are exact.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false);

  static BitVector from_string(std::string_view bits);
  static BitVector from_words(std::size_t size, std::vector<std::uint64_t> words);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v = true) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  bool operator[](std::size_t i) const noexcept { return get(i); }

  std::size_t count() const noexcept;
  std::size_t hamming_distance(const BitVector& other) const;

  BitVector slice(std::size_t begin, std::size_t length) const;
  void assign(std::size_t offset, const BitVector& src);
  void append(const BitVector& src);

  BitVector operator~() const;
  BitVector& operator&=(const BitVector& other);
  BitVector& operator|=(const BitVector& other);
  BitVector& operator^=(const BitVector& other);

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::string to_string() const;

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void trim() noexcept;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

inline BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
inline BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
inline BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

struct BitVectorHash {
  std::size_t operator()(const BitVector& v) const noexcept;
};

}  // namespace rfp
