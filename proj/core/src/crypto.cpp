#include "rfp/crypto.hpp"

#include <algorithm>
#include <cstring>

#include <gmpxx.h>

#include "rfp/error.hpp"
#include "sodium_init.hpp"
#include "tag_ciphers.hpp"

namespace rfp {
namespace {

constexpr std::string_view kKeyMagic = "RFPK";
constexpr std::uint16_t kKeyVersion = 1;
constexpr std::size_t kMockTagWidth = 4;
constexpr std::size_t kMockNonceBytes = 16;

class MockTagCipher final : public TagCipher {
 public:
  MockTagCipher(std::size_t l, Bytes secret, Seed nonce_seed) : length_(l), secret_(std::move(secret)) {
    detail::ensure_sodium();
    if (secret_.size() != crypto_generichash_KEYBYTES) throw ParameterError("mock cipher secret has wrong size");
    table_.resize(2 * l * kMockTagWidth);
    Rng nonces(nonce_seed);
    std::array<std::uint8_t, kMockNonceBytes + 1> input{};
    std::array<std::uint8_t, crypto_generichash_BYTES_MIN> out{};
    for (std::size_t k = 0; k < l; ++k) {
      // Redraw the position nonce in the rare case the two tags coincide.
      do {
        nonces.fill(input.data(), kMockNonceBytes);
        for (int bit = 0; bit < 2; ++bit) {
          input[kMockNonceBytes] = static_cast<std::uint8_t>(bit);
          crypto_generichash(out.data(), out.size(), input.data(), input.size(), secret_.data(), secret_.size());
          std::memcpy(&table_[(2 * k + bit) * kMockTagWidth], out.data(), kMockTagWidth);
        }
      } while (std::equal(tag(false, k).begin(), tag(false, k).end(), tag(true, k).begin()));
    }
  }

  Security security() const noexcept override { return Security::Mock; }
  std::size_t length() const noexcept override { return length_; }
  std::size_t tag_width() const noexcept override { return kMockTagWidth; }

  std::span<const std::uint8_t> tag(bool bit, std::size_t k) const override {
    if (k >= length_) throw ParameterError("tag position out of range");
    return {&table_[(2 * k + (bit ? 1 : 0)) * kMockTagWidth], kMockTagWidth};
  }

  void write_secrets(ByteWriter& w) const override { w.blob(secret_); }

 protected:
  bool decrypt_impl(std::span<const std::uint8_t> t, std::size_t k) const override {
    if (t.size() == kMockTagWidth) {
      for (int bit = 0; bit < 2; ++bit) {
        auto ref = tag(bit != 0, k);
        if (std::equal(t.begin(), t.end(), ref.begin())) return bit != 0;
      }
    }
    throw IntegrityError("tag at position " + std::to_string(k) + " matches neither bit value");
  }

 private:
  std::size_t length_;
  Bytes secret_;
  Bytes table_;
};

}  // namespace

namespace detail {

std::shared_ptr<const TagCipher> make_mock_cipher(std::size_t l, Bytes secret, Seed nonce_seed) {
  return std::make_shared<MockTagCipher>(l, std::move(secret), nonce_seed);
}

std::shared_ptr<const TagCipher> read_cipher(Security security, std::size_t l, Seed nonce_seed, ByteReader& r) {
  if (security == Security::Mock) return make_mock_cipher(l, r.blob(), nonce_seed);
  auto p = r.str();
  auto q = r.str();
  return make_paillier_cipher(l, security, p, q, nonce_seed);
}

}  // namespace detail

Security parse_security(std::string_view name) {
  if (name == "mock") return Security::Mock;
  if (name == "1024" || name == "paillier-1024" || name == "paillier") return Security::Paillier1024;
  if (name == "2048" || name == "paillier-2048") return Security::Paillier2048;
  throw ParameterError("unknown crypto backend '" + std::string(name) + "'");
}

std::string to_string(Security s) {
  switch (s) {
    case Security::Mock:
      return "mock";
    case Security::Paillier1024:
      return "paillier-1024";
    case Security::Paillier2048:
      return "paillier-2048";
  }
  return "unknown";
}

Digest digest(std::span<const std::uint8_t> data) {
  detail::ensure_sodium();
  Digest out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

Digest digest(std::string_view text) {
  return digest(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PermutationKey::PermutationKey(std::vector<std::uint32_t> source) : source_(std::move(source)) {
  image_.assign(source_.size(), 0);
  std::vector<bool> seen(source_.size(), false);
  for (std::size_t k = 0; k < source_.size(); ++k) {
    const auto s = source_[k];
    if (s >= source_.size() || seen[s]) throw ParameterError("permutation key is not a bijection");
    seen[s] = true;
    image_[s] = static_cast<std::uint32_t>(k);
  }
}

PermutationKey PermutationKey::identity(std::size_t l) {
  std::vector<std::uint32_t> src(l);
  for (std::size_t k = 0; k < l; ++k) src[k] = static_cast<std::uint32_t>(k);
  return PermutationKey(std::move(src));
}

PermutationKey PermutationKey::random(std::size_t l, Seed seed) {
  std::vector<std::uint32_t> src(l);
  for (std::size_t k = 0; k < l; ++k) src[k] = static_cast<std::uint32_t>(k);
  Rng rng(seed);
  for (std::size_t k = l; k > 1; --k) std::swap(src[k - 1], src[rng.below(k)]);
  return PermutationKey(std::move(src));
}

BitVector permute(const BitVector& bits, const PermutationKey& sigma) {
  if (bits.size() != sigma.size()) throw ParameterError("permute: length mismatch");
  BitVector out(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) out.set(k, bits.get(sigma.source(k)));
  return out;
}

BitVector inverse_permute(const BitVector& bits, const PermutationKey& sigma) {
  if (bits.size() != sigma.size()) throw ParameterError("inverse_permute: length mismatch");
  BitVector out(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) out.set(sigma.source(k), bits.get(k));
  return out;
}

std::vector<double> permute(std::span<const double> values, const PermutationKey& sigma) {
  if (values.size() != sigma.size()) throw ParameterError("permute: length mismatch");
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[sigma.source(k)];
  return out;
}

bool TagCipher::decrypt(std::span<const std::uint8_t> tag, std::size_t k) const {
  if (k >= length()) throw ParameterError("tag position out of range");
  decrypts_.fetch_add(1, std::memory_order_relaxed);
  return decrypt_impl(tag, k);
}

AuthorityKeyMaterial::AuthorityKeyMaterial(std::string content_binding, Seed nonce_seed, Seed permutation_seed,
                                           Bytes envelope_public, Bytes envelope_secret,
                                           std::shared_ptr<const TagCipher> cipher)
    : content_binding_(std::move(content_binding)),
      nonce_seed_(nonce_seed),
      permutation_seed_(permutation_seed),
      envelope_public_(std::move(envelope_public)),
      envelope_secret_(std::move(envelope_secret)),
      cipher_(std::move(cipher)) {
  if (envelope_public_.size() != crypto_box_PUBLICKEYBYTES || envelope_secret_.size() != crypto_box_SECRETKEYBYTES) {
    throw ParameterError("envelope keypair has wrong size");
  }
  if (!cipher_) throw ParameterError("missing tag cipher");
}

Bytes AuthorityKeyMaterial::serialize() const {
  ByteWriter w;
  w.magic(kKeyMagic);
  w.u16(kKeyVersion);
  w.u8(static_cast<std::uint8_t>(security()));
  w.str(content_binding_);
  w.u64(length());
  w.u64(nonce_seed_);
  w.u64(permutation_seed_);
  w.blob(envelope_public_);
  w.blob(envelope_secret_);
  cipher_->write_secrets(w);
  return w.take();
}

std::pair<AuthorityKeyMaterial, PermutationKey> AuthorityKeyMaterial::deserialize(
    std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kKeyMagic);
  if (r.u16() != kKeyVersion) throw IntegrityError("unsupported key file version");
  const auto sec = r.u8();
  if (sec > static_cast<std::uint8_t>(Security::Paillier2048)) throw IntegrityError("unknown key backend");
  const auto security = static_cast<Security>(sec);
  auto binding = r.str();
  const auto l = r.u64();
  const auto nonce_seed = r.u64();
  const auto perm_seed = r.u64();
  auto pub = r.blob();
  auto sk = r.blob();
  auto cipher = detail::read_cipher(security, l, nonce_seed, r);
  r.expect_done();
  AuthorityKeyMaterial keys(std::move(binding), nonce_seed, perm_seed, std::move(pub), std::move(sk),
                            std::move(cipher));
  return {std::move(keys), PermutationKey::random(l, perm_seed)};
}

std::pair<AuthorityKeyMaterial, PermutationKey> generate_keys(std::size_t l, Security security, Seed seed,
                                                              std::string content_binding) {
  detail::ensure_sodium();
  if (l < 1) throw ParameterError("key material needs l >= 1");
  if (l > UINT32_MAX) throw ParameterError("fingerprint length too large");
  const Seed nonce_seed = derive_seed(seed, "position-nonces");
  const Seed perm_seed = derive_seed(seed, "permutation");

  Rng envelope_rng(derive_seed(seed, "envelope"));
  std::array<std::uint8_t, crypto_box_SEEDBYTES> env_seed{};
  envelope_rng.fill(env_seed.data(), env_seed.size());
  Bytes pk(crypto_box_PUBLICKEYBYTES), sk(crypto_box_SECRETKEYBYTES);
  crypto_box_seed_keypair(pk.data(), sk.data(), env_seed.data());

  std::shared_ptr<const TagCipher> cipher;
  if (security == Security::Mock) {
    Bytes secret(crypto_generichash_KEYBYTES);
    Rng(derive_seed(seed, "prf-secret")).fill(secret.data(), secret.size());
    cipher = detail::make_mock_cipher(l, std::move(secret), nonce_seed);
  } else {
    const unsigned bits = security == Security::Paillier1024 ? 1024 : 2048;
    auto [p, q] = detail::generate_paillier_primes(bits, derive_seed(seed, "paillier"));
    cipher = detail::make_paillier_cipher(l, security, p, q, nonce_seed);
  }
  AuthorityKeyMaterial keys(std::move(content_binding), nonce_seed, perm_seed, std::move(pk), std::move(sk),
                            std::move(cipher));
  return {std::move(keys), PermutationKey::random(l, perm_seed)};
}

EncryptedFingerprint::EncryptedFingerprint(std::size_t tag_width, Bytes data)
    : width_(tag_width), data_(std::move(data)) {
  if (width_ == 0 || data_.size() % width_ != 0) throw ParameterError("tag data is not a multiple of the width");
}

bool EncryptedFingerprint::tag_equal(std::size_t k, const EncryptedFingerprint& other) const {
  if (other.width_ != width_) return false;
  return std::memcmp(data_.data() + k * width_, other.data_.data() + k * width_, width_) == 0;
}

Bytes EncryptedFingerprint::serialize() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(size()));
  w.u16(static_cast<std::uint16_t>(width_));
  w.raw(data_);
  return w.take();
}

EncryptedFingerprint EncryptedFingerprint::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::size_t count = r.u32();
  const std::size_t width = r.u16();
  if (width == 0 || count * width != r.remaining()) throw IntegrityError("encrypted fingerprint size mismatch");
  auto raw = r.raw(count * width);
  return EncryptedFingerprint(width, Bytes(raw.begin(), raw.end()));
}

std::span<const std::uint8_t> encrypt_bit(bool bit, std::size_t k, const AuthorityKeyMaterial& keys) {
  return keys.cipher().tag(bit, k);
}

bool decrypt_bit(std::span<const std::uint8_t> tag, std::size_t k, const AuthorityKeyMaterial& keys) {
  return keys.cipher().decrypt(tag, k);
}

EncryptedFingerprint encrypt_fingerprint(const BitVector& fingerprint, const PermutationKey& sigma,
                                         const AuthorityKeyMaterial& keys) {
  const auto l = keys.length();
  if (fingerprint.size() != l || sigma.size() != l) throw ParameterError("encrypt_fingerprint: length mismatch");
  const auto& cipher = keys.cipher();
  const auto width = cipher.tag_width();
  Bytes data(l * width);
  for (std::size_t k = 0; k < l; ++k) {
    auto t = cipher.tag(fingerprint.get(sigma.source(k)), k);
    std::memcpy(&data[k * width], t.data(), width);
  }
  return EncryptedFingerprint(width, std::move(data));
}

BitVector decrypt_fingerprint(const EncryptedFingerprint& enc, const PermutationKey& sigma,
                              const AuthorityKeyMaterial& keys) {
  if (enc.size() != keys.length() || sigma.size() != keys.length()) {
    throw ParameterError("decrypt_fingerprint: length mismatch");
  }
  BitVector permuted(enc.size());
  for (std::size_t k = 0; k < enc.size(); ++k) permuted.set(k, keys.cipher().decrypt(enc.tag(k), k));
  return inverse_permute(permuted, sigma);
}

Bytes seal_to_authority(std::span<const std::uint8_t> plaintext, const AuthorityPublicKey& pk, Rng& rng) {
  detail::ensure_sodium();
  if (pk.envelope.size() != crypto_box_PUBLICKEYBYTES) throw ParameterError("bad authority public key");
  std::array<std::uint8_t, crypto_box_SEEDBYTES> eseed{};
  rng.fill(eseed.data(), eseed.size());
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> epk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> esk{};
  crypto_box_seed_keypair(epk.data(), esk.data(), eseed.data());
  // Nonce bound to both public keys, as in libsodium sealed boxes.
  std::array<std::uint8_t, crypto_box_NONCEBYTES> nonce{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, epk.data(), epk.size());
  crypto_generichash_update(&st, pk.envelope.data(), pk.envelope.size());
  crypto_generichash_final(&st, nonce.data(), nonce.size());
  Bytes out(epk.size() + plaintext.size() + crypto_box_MACBYTES);
  std::copy(epk.begin(), epk.end(), out.begin());
  if (crypto_box_easy(out.data() + epk.size(), plaintext.data(), plaintext.size(), nonce.data(),
                      pk.envelope.data(), esk.data()) != 0) {
    throw IntegrityError("envelope encryption failed");
  }
  sodium_memzero(esk.data(), esk.size());
  return out;
}

Bytes open_as_authority(std::span<const std::uint8_t> ciphertext, const AuthorityKeyMaterial& keys) {
  detail::ensure_sodium();
  if (ciphertext.size() < crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES) {
    throw IntegrityError("envelope too short");
  }
  const auto epk = ciphertext.first(crypto_box_PUBLICKEYBYTES);
  const auto pk = keys.public_key().envelope;
  std::array<std::uint8_t, crypto_box_NONCEBYTES> nonce{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, epk.data(), epk.size());
  crypto_generichash_update(&st, pk.data(), pk.size());
  crypto_generichash_final(&st, nonce.data(), nonce.size());
  const auto body = ciphertext.subspan(crypto_box_PUBLICKEYBYTES);
  Bytes out(body.size() - crypto_box_MACBYTES);
  if (crypto_box_open_easy(out.data(), body.data(), body.size(), nonce.data(), epk.data(),
                           keys.envelope_secret().data()) != 0) {
    throw IntegrityError("envelope authentication failed");
  }
  return out;
}

Bytes encrypt_segment(const BitVector& segment, const AuthorityPublicKey& pk, Rng& rng) {
  ByteWriter w;
  w.bits(segment);
  return seal_to_authority(w.data(), pk, rng);
}

BitVector decrypt_segment(std::span<const std::uint8_t> ciphertext, const AuthorityKeyMaterial& keys) {
  const auto plain = open_as_authority(ciphertext, keys);
  ByteReader r(plain);
  auto bits = r.bits();
  r.expect_done();
  return bits;
}

Bytes encrypt_segment_group(std::span<const GroupItem> items, const AuthorityPublicKey& pk, Rng& rng) {
  ByteWriter w;
  w.magic("GRP1");
  w.u32(static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) {
    w.u32(item.index);
    w.blob(item.enc_segment);
    w.blob(item.signer);
    w.blob(item.signature);
  }
  return seal_to_authority(w.data(), pk, rng);
}

std::vector<GroupItem> decrypt_segment_group(std::span<const std::uint8_t> ciphertext,
                                             const AuthorityKeyMaterial& keys) {
  const auto plain = open_as_authority(ciphertext, keys);
  ByteReader r(plain);
  r.expect_magic("GRP1");
  const auto n = r.u32();
  if (n == 0) throw IntegrityError("empty segment group");
  std::vector<GroupItem> items;
  items.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    GroupItem item;
    item.index = r.u32();
    item.enc_segment = r.blob();
    item.signer = r.blob();
    item.signature = r.blob();
    if (!items.empty() && item.index != items.back().index + 1) {
      throw IntegrityError("segment group is not contiguous");
    }
    items.push_back(std::move(item));
  }
  r.expect_done();
  return items;
}

SigningKey SigningKey::from_seed(Seed seed) {
  detail::ensure_sodium();
  std::array<std::uint8_t, crypto_sign_SEEDBYTES> s{};
  Rng(seed).fill(s.data(), s.size());
  SigningKey key;
  key.public_.resize(crypto_sign_PUBLICKEYBYTES);
  key.secret_.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(key.public_.data(), key.secret_.data(), s.data());
  return key;
}

Bytes SigningKey::sign(std::span<const std::uint8_t> message) const {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

bool verify_signature(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) {
  detail::ensure_sodium();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

namespace {
std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> session_nonce(std::uint64_t n) {
  std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce{};
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(n >> (8 * i));
  return nonce;
}
}  // namespace

Bytes session_encrypt(const SessionKey& key, std::uint64_t nonce, std::span<const std::uint8_t> plaintext) {
  detail::ensure_sodium();
  const auto iv = session_nonce(nonce);
  Bytes out(plaintext.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(out.data(), plaintext.data(), plaintext.size(), iv.data(), key.data());
  return out;
}

std::optional<Bytes> session_decrypt(const SessionKey& key, std::uint64_t nonce,
                                     std::span<const std::uint8_t> ciphertext) {
  detail::ensure_sodium();
  if (ciphertext.size() < crypto_secretbox_MACBYTES) return std::nullopt;
  const auto iv = session_nonce(nonce);
  Bytes out(ciphertext.size() - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(out.data(), ciphertext.data(), ciphertext.size(), iv.data(), key.data()) != 0) {
    return std::nullopt;
  }
  return out;
}

std::string group_plaintext_space(std::uint64_t codewords, std::uint64_t segments) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), codewords, segments);
  return r.get_str();
}

}  // namespace rfp
