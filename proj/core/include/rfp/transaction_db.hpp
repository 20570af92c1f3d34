#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfp/bits.hpp"
#include "rfp/crypto.hpp"

namespace rfp {

struct Pseudonym {
  std::array<std::uint8_t, 16> bytes{};

  std::string hex() const { return to_hex(bytes); }
  static Pseudonym from_hex(std::string_view hex);

  friend bool operator==(const Pseudonym&, const Pseudonym&) = default;
  friend auto operator<=>(const Pseudonym&, const Pseudonym&) = default;
};

struct PseudonymHash {
  std::size_t operator()(const Pseudonym& p) const noexcept;
};

struct TransactionRegister {
  Pseudonym pseudonym;
  Digest content_hash{};
  EncryptedFingerprint enc_fp;
  std::uint64_t timestamp = 0;  // simulation tick of the purchase
};

// The monitor's transaction database. Besides the registers it keeps, per
// register, a packed "tag class" bit per position: whether the tag equals the
// tag of the first register at that position. With exactly two valid tags per
// position, two registers have equal tags at k iff their class bits agree.
class TransactionDatabase {
 public:
  // Throws IntegrityError if an identical encrypted fingerprint or the same
  // pseudonym is already stored.
  std::size_t insert(TransactionRegister reg);

  std::size_t size() const noexcept { return registers_.size(); }
  bool empty() const noexcept { return registers_.empty(); }
  const TransactionRegister& at(std::size_t i) const { return registers_.at(i); }
  const std::vector<TransactionRegister>& registers() const noexcept { return registers_; }

  // Exact search by tag identity.
  std::optional<std::size_t> find(const EncryptedFingerprint& enc) const;
  std::optional<std::size_t> find(const Pseudonym& p) const;

  const BitVector& tag_classes(std::size_t i) const { return classes_.at(i); }
  BitVector classify(const EncryptedFingerprint& enc) const;

  // One length-prefixed record per register, in insertion order.
  static Bytes encode_record(const TransactionRegister& reg);
  void append_to(const std::filesystem::path& path, std::size_t from = 0) const;
  static TransactionDatabase load(const std::filesystem::path& path);

 private:
  std::vector<TransactionRegister> registers_;
  std::vector<BitVector> classes_;
  std::unordered_map<std::string, std::size_t> by_digest_;
  std::unordered_map<Pseudonym, std::size_t, PseudonymHash> by_pseudonym_;
};

}  // namespace rfp
