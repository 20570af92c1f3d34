#include "rfp/bits.hpp"

#include <algorithm>
#include <bit>

#include "rfp/error.hpp"

namespace rfp {

BitVector::BitVector(std::size_t size, bool value)
    : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
  trim();
}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i);
    } else if (bits[i] != '0') {
      throw ParameterError("bit string contains a character other than 0/1");
    }
  }
  return v;
}

BitVector BitVector::from_words(std::size_t size, std::vector<std::uint64_t> words) {
  if (words.size() != (size + 63) / 64) throw IntegrityError("bit vector word count does not match size");
  BitVector v;
  v.size_ = size;
  v.words_ = std::move(words);
  const std::size_t tail = size & 63;
  if (tail != 0 && (v.words_.back() >> tail) != 0) {
    throw IntegrityError("bit vector has bits set past its length");
  }
  return v;
}

void BitVector::trim() noexcept {
  const std::size_t tail = size_ & 63;
  if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

std::size_t BitVector::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitVector::hamming_distance(const BitVector& other) const {
  if (other.size_ != size_) throw ParameterError("hamming_distance: length mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  }
  return n;
}

BitVector BitVector::slice(std::size_t begin, std::size_t length) const {
  if (begin + length > size_) throw ParameterError("slice out of range");
  BitVector out(length);
  if ((begin & 63) == 0) {
    const std::size_t first = begin >> 6;
    for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[first + w];
    out.trim();
    return out;
  }
  for (std::size_t i = 0; i < length; ++i) out.set(i, get(begin + i));
  return out;
}

void BitVector::assign(std::size_t offset, const BitVector& src) {
  if (offset + src.size_ > size_) throw ParameterError("assign out of range");
  const std::size_t shift = offset & 63;
  const std::size_t base = offset >> 6;
  for (std::size_t i = 0; i < src.words_.size(); ++i) {
    const std::size_t n = std::min<std::size_t>(64, src.size_ - i * 64);
    const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    const std::uint64_t w = src.words_[i] & mask;
    auto& lo = words_[base + i];
    lo = (lo & ~(mask << shift)) | (w << shift);
    if (shift != 0 && n + shift > 64) {
      auto& hi = words_[base + i + 1];
      hi = (hi & ~(mask >> (64 - shift))) | (w >> (64 - shift));
    }
  }
}

void BitVector::append(const BitVector& src) {
  const std::size_t offset = size_;
  size_ += src.size_;
  words_.resize((size_ + 63) / 64, 0);
  assign(offset, src);
}

BitVector BitVector::operator~() const {
  BitVector out = *this;
  for (auto& w : out.words_) w = ~w;
  out.trim();
  return out;
}

BitVector& BitVector::operator&=(const BitVector& other) {
  if (other.size_ != size_) throw ParameterError("bitwise and: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

BitVector& BitVector::operator|=(const BitVector& other) {
  if (other.size_ != size_) throw ParameterError("bitwise or: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.size_ != size_) throw ParameterError("bitwise xor: length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

std::size_t BitVectorHash::operator()(const BitVector& v) const noexcept {
  // FNV-1a over the words, mixed with the length.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ v.size();
  for (auto w : v.words()) {
    h ^= w;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

}  // namespace rfp
