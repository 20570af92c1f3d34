#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfp/bits.hpp"

namespace rfp {

using Bytes = std::vector<std::uint8_t>;

// Little-endian writer used by every on-disk format in the library.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v);
  void raw(std::span<const std::uint8_t> bytes) {
    const auto at = out_.size();
    out_.resize(at + bytes.size());
    if (!bytes.empty()) std::memcpy(out_.data() + at, bytes.data(), bytes.size());
  }
  void magic(std::string_view tag) { out_.insert(out_.end(), tag.begin(), tag.end()); }
  // u32 length followed by the bytes.
  void blob(std::span<const std::uint8_t> bytes);
  void str(std::string_view s);
  // u64 bit length followed by the packed words.
  void bits(const BitVector& v);

  const Bytes& data() const noexcept { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes out_;
};

// Bounds-checked reader; every overrun throws IntegrityError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64();
  std::span<const std::uint8_t> raw(std::size_t n);
  void expect_magic(std::string_view tag);
  Bytes blob();
  std::string str();
  BitVector bits();

  bool done() const noexcept { return pos_ == in_.size(); }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  void expect_done() const;

 private:
  std::uint64_t get(int width);

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data,
                bool secret = false);
void append_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

}  // namespace rfp
