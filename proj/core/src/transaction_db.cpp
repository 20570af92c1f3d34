#include "rfp/transaction_db.hpp"

#include <cstring>

#include "rfp/error.hpp"

namespace rfp {
namespace {

std::string digest_key(const EncryptedFingerprint& enc) {
  const auto d = digest(enc.bytes());
  return std::string(d.begin(), d.end());
}

}  // namespace

Pseudonym Pseudonym::from_hex(std::string_view hex) {
  const auto raw = rfp::from_hex(hex);
  if (raw.size() != 16) throw ParameterError("pseudonym must be 32 hex digits");
  Pseudonym p;
  std::copy(raw.begin(), raw.end(), p.bytes.begin());
  return p;
}

std::size_t PseudonymHash::operator()(const Pseudonym& p) const noexcept {
  std::uint64_t h = 0;
  std::memcpy(&h, p.bytes.data(), sizeof h);
  return static_cast<std::size_t>(h);
}

std::size_t TransactionDatabase::insert(TransactionRegister reg) {
  if (!registers_.empty()) {
    const auto& ref = registers_.front().enc_fp;
    if (reg.enc_fp.size() != ref.size() || reg.enc_fp.tag_width() != ref.tag_width()) {
      throw IntegrityError("register fingerprint shape differs from the database");
    }
  } else if (reg.enc_fp.size() == 0) {
    throw IntegrityError("empty encrypted fingerprint");
  }
  auto key = digest_key(reg.enc_fp);
  if (by_digest_.contains(key)) throw IntegrityError("duplicate encrypted fingerprint in transaction database");
  if (by_pseudonym_.contains(reg.pseudonym)) throw IntegrityError("pseudonym already has a register");
  const std::size_t idx = registers_.size();
  classes_.push_back(registers_.empty() ? BitVector(reg.enc_fp.size()) : classify(reg.enc_fp));
  by_digest_.emplace(std::move(key), idx);
  by_pseudonym_.emplace(reg.pseudonym, idx);
  registers_.push_back(std::move(reg));
  return idx;
}

std::optional<std::size_t> TransactionDatabase::find(const EncryptedFingerprint& enc) const {
  auto it = by_digest_.find(digest_key(enc));
  if (it == by_digest_.end()) return std::nullopt;
  if (!(registers_[it->second].enc_fp == enc)) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TransactionDatabase::find(const Pseudonym& p) const {
  auto it = by_pseudonym_.find(p);
  if (it == by_pseudonym_.end()) return std::nullopt;
  return it->second;
}

BitVector TransactionDatabase::classify(const EncryptedFingerprint& enc) const {
  if (registers_.empty()) throw StateError("cannot classify tags against an empty database");
  const auto& ref = registers_.front().enc_fp;
  if (enc.size() != ref.size()) throw ParameterError("classify: length mismatch");
  BitVector cls(enc.size());
  for (std::size_t k = 0; k < enc.size(); ++k) {
    if (!enc.tag_equal(k, ref)) cls.set(k);
  }
  return cls;
}

Bytes TransactionDatabase::encode_record(const TransactionRegister& reg) {
  ByteWriter body;
  body.raw(reg.pseudonym.bytes);
  body.raw(reg.content_hash);
  body.u64(reg.timestamp);
  body.blob(reg.enc_fp.serialize());
  ByteWriter w;
  w.blob(body.data());
  return w.take();
}

void TransactionDatabase::append_to(const std::filesystem::path& path, std::size_t from) const {
  Bytes out;
  for (std::size_t i = from; i < registers_.size(); ++i) {
    auto rec = encode_record(registers_[i]);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  append_file(path, out);
}

TransactionDatabase TransactionDatabase::load(const std::filesystem::path& path) {
  TransactionDatabase db;
  if (!std::filesystem::exists(path)) return db;
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  while (!r.done()) {
    const auto body = r.blob();
    ByteReader b(body);
    TransactionRegister reg;
    auto pn = b.raw(16);
    std::copy(pn.begin(), pn.end(), reg.pseudonym.bytes.begin());
    auto ch = b.raw(32);
    std::copy(ch.begin(), ch.end(), reg.content_hash.begin());
    reg.timestamp = b.u64();
    reg.enc_fp = EncryptedFingerprint::deserialize(b.blob());
    b.expect_done();
    db.insert(std::move(reg));
  }
  return db;
}

}  // namespace rfp
