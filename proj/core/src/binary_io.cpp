#include "rfp/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "rfp/error.hpp"

namespace rfp {

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::blob(std::span<const std::uint8_t> bytes) {
  u32(static_cast<std::uint32_t>(bytes.size()));
  raw(bytes);
}

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteWriter::bits(const BitVector& v) {
  u64(v.size());
  for (auto w : v.words()) u64(w);
}

std::uint64_t ByteReader::get(int width) {
  if (remaining() < static_cast<std::size_t>(width)) throw IntegrityError("truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
  pos_ += static_cast<std::size_t>(width);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
  if (remaining() < n) throw IntegrityError("truncated input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::expect_magic(std::string_view tag) {
  auto got = raw(tag.size());
  if (!std::equal(got.begin(), got.end(), tag.begin())) {
    throw IntegrityError("bad magic, expected " + std::string(tag));
  }
}

Bytes ByteReader::blob() {
  auto n = u32();
  auto r = raw(n);
  return {r.begin(), r.end()};
}

std::string ByteReader::str() {
  auto n = u32();
  auto r = raw(n);
  return {r.begin(), r.end()};
}

BitVector ByteReader::bits() {
  const auto size = u64();
  if (size / 8 > remaining()) throw IntegrityError("bit vector length exceeds input");
  std::vector<std::uint64_t> words((size + 63) / 64);
  for (auto& w : words) w = u64();
  return BitVector::from_words(size, std::move(words));
}

void ByteReader::expect_done() const {
  if (!done()) throw IntegrityError("trailing bytes after record");
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data, bool secret) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (secret) {
    // Restrict before any secret bytes land in the file.
    std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                                 std::filesystem::perm_options::replace);
  }
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

void append_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("append failed for " + path.string());
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ParameterError("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParameterError("invalid hex digit");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace rfp
