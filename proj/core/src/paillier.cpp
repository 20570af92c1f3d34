#include <gmpxx.h>

#include <algorithm>
#include <cstring>

#include "rfp/error.hpp"
#include "tag_ciphers.hpp"

namespace rfp::detail {
namespace {

void export_fixed(const mpz_class& v, std::uint8_t* out, std::size_t width) {
  std::fill(out, out + width, 0);
  std::size_t count = 0;
  const std::size_t needed = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (needed > width) throw IntegrityError("ciphertext wider than tag");
  mpz_export(out + (width - needed), &count, 1, 1, 1, 0, v.get_mpz_t());
}

mpz_class import_bytes(std::span<const std::uint8_t> bytes) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

// Paillier with g = n + 1 and the randomness fixed to r_k at position k, so
// E(b, k) = (1 + b*n) * r_k^n mod n^2.
class PaillierTagCipher final : public TagCipher {
 public:
  PaillierTagCipher(std::size_t l, Security security, const std::string& p_hex, const std::string& q_hex,
                    Seed nonce_seed)
      : length_(l), security_(security), p_(p_hex, 16), q_(q_hex, 16) {
    n_ = p_ * q_;
    n2_ = n_ * n_;
    const unsigned bits = security == Security::Paillier1024 ? 1024 : 2048;
    if (mpz_sizeinbase(n_.get_mpz_t(), 2) != bits) throw IntegrityError("Paillier modulus has the wrong size");
    mpz_class pm = p_ - 1, qm = q_ - 1;
    mpz_lcm(lambda_.get_mpz_t(), pm.get_mpz_t(), qm.get_mpz_t());
    if (mpz_invert(mu_.get_mpz_t(), lambda_.get_mpz_t(), n_.get_mpz_t()) == 0) {
      throw IntegrityError("Paillier lambda is not invertible mod n");
    }
    width_ = (mpz_sizeinbase(n2_.get_mpz_t(), 2) + 7) / 8;
    const std::size_t nbytes = (mpz_sizeinbase(n_.get_mpz_t(), 2) + 7) / 8;

    table_.resize(2 * l * width_);
    Rng rng(nonce_seed);
    Bytes buf(nbytes + 8);
    mpz_class r, mask, one_plus_n = n_ + 1, g;
    for (std::size_t k = 0; k < l; ++k) {
      do {
        rng.fill(buf.data(), buf.size());
        r = import_bytes(buf) % n_;
        mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t());
      } while (r == 0 || g != 1);
      mpz_powm(mask.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t(), n2_.get_mpz_t());
      export_fixed(mask, &table_[(2 * k) * width_], width_);
      mpz_class c1 = (one_plus_n * mask) % n2_;
      export_fixed(c1, &table_[(2 * k + 1) * width_], width_);
    }
  }

  Security security() const noexcept override { return security_; }
  std::size_t length() const noexcept override { return length_; }
  std::size_t tag_width() const noexcept override { return width_; }

  std::span<const std::uint8_t> tag(bool bit, std::size_t k) const override {
    if (k >= length_) throw ParameterError("tag position out of range");
    return {&table_[(2 * k + (bit ? 1 : 0)) * width_], width_};
  }

  void write_secrets(ByteWriter& w) const override {
    w.str(p_.get_str(16));
    w.str(q_.get_str(16));
  }

 protected:
  bool decrypt_impl(std::span<const std::uint8_t> t, std::size_t k) const override {
    if (t.size() != width_) throw IntegrityError("tag has wrong width");
    const mpz_class c = import_bytes(t);
    if (c >= n2_) throw IntegrityError("ciphertext outside Z_{n^2}");
    mpz_class u;
    mpz_powm(u.get_mpz_t(), c.get_mpz_t(), lambda_.get_mpz_t(), n2_.get_mpz_t());
    mpz_class m = ((u - 1) / n_) * mu_ % n_;
    if (m != 0 && m != 1) throw IntegrityError("tag at position " + std::to_string(k) + " decrypts to a non-bit");
    const bool bit = m == 1;
    auto expected = tag(bit, k);
    if (!std::equal(t.begin(), t.end(), expected.begin())) {
      throw IntegrityError("tag at position " + std::to_string(k) + " uses foreign randomness");
    }
    return bit;
  }

 private:
  std::size_t length_;
  Security security_;
  mpz_class p_, q_, n_, n2_, lambda_, mu_;
  std::size_t width_ = 0;
  Bytes table_;
};

mpz_class random_prime(gmp_randclass& rand, unsigned bits) {
  mpz_class x = rand.get_z_bits(bits);
  mpz_setbit(x.get_mpz_t(), bits - 1);
  mpz_setbit(x.get_mpz_t(), bits - 2);
  mpz_class p;
  mpz_nextprime(p.get_mpz_t(), x.get_mpz_t());
  return p;
}

}  // namespace

std::shared_ptr<const TagCipher> make_paillier_cipher(std::size_t l, Security security, const std::string& p_hex,
                                                      const std::string& q_hex, Seed nonce_seed) {
  return std::make_shared<PaillierTagCipher>(l, security, p_hex, q_hex, nonce_seed);
}

std::pair<std::string, std::string> generate_paillier_primes(unsigned modulus_bits, Seed seed) {
  gmp_randclass rand(gmp_randinit_mt);
  rand.seed(static_cast<unsigned long>(seed));
  const unsigned half = modulus_bits / 2;
  for (;;) {
    mpz_class p = random_prime(rand, half);
    mpz_class q = random_prime(rand, half);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != modulus_bits) continue;
    return {p.get_str(16), q.get_str(16)};
  }
}

}  // namespace rfp::detail
