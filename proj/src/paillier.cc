// Copyright 2026 The fedgwas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "fedgwas/paillier.h"

#include <string>

#include "fedgwas/error.h"

namespace fedgwas::paillier {
namespace {

Digest FingerprintOf(const mpz_class& n) {
  ByteWriter w;
  w.PutU32(static_cast<std::uint32_t>(mpz_sizeinbase(n.get_mpz_t(), 2)));
  w.PutLengthPrefixed(ToBigEndian(n));
  return Sha256(w.bytes());
}

void CheckFingerprint(const Digest& expected, const Ciphertext& c) {
  if (c.key_fingerprint() != expected) {
    throw Error(ErrorCode::kKeyMismatch,
                "ciphertext was produced under a different public key");
  }
}

mpz_class L(const mpz_class& x, const mpz_class& n) { return (x - 1) / n; }

// Candidate of exactly `bits` bits with the two top bits set, so the
// product of two such primes has exactly 2 * bits bits.
mpz_class RandomPrime(unsigned bits, RandomSource& rng, int& budget) {
  while (budget-- > 0) {
    mpz_class c = rng.UniformBits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (mpz_probab_prime_p(c.get_mpz_t(), 40) > 0) return c;
  }
  throw Error(ErrorCode::kCrypto, "prime search exceeded its retry budget");
}

}  // namespace

PublicKey::PublicKey(mpz_class n) : n_(std::move(n)) {
  if (n_ < 15 || mpz_even_p(n_.get_mpz_t())) {
    throw InvalidArgument("Paillier modulus must be odd and at least 15");
  }
  n_squared_ = n_ * n_;
  bits_ = static_cast<std::uint32_t>(mpz_sizeinbase(n_.get_mpz_t(), 2));
  fingerprint_ = FingerprintOf(n_);
}

Bytes PublicKey::Serialize() const {
  ByteWriter w;
  w.PutU32(bits_);
  w.PutLengthPrefixed(ToBigEndian(n_));
  return std::move(w).bytes();
}

PublicKey PublicKey::Deserialize(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  std::uint32_t bits = r.GetU32();
  PublicKey pk(FromBigEndian(r.GetLengthPrefixed()));
  r.ExpectDone();
  if (pk.bits() != bits) {
    throw InvalidArgument("public key bit length does not match its modulus");
  }
  return pk;
}

PrivateKey::PrivateKey(mpz_class lambda, mpz_class mu, mpz_class n)
    : lambda_(std::move(lambda)), mu_(std::move(mu)), n_(std::move(n)) {
  if (n_ < 15 || lambda_ <= 0 || mu_ <= 0 || mu_ >= n_) {
    throw InvalidArgument("malformed Paillier private key");
  }
  n_squared_ = n_ * n_;
  mpz_class u;
  mpz_powm(u.get_mpz_t(), mpz_class(n_ + 1).get_mpz_t(), lambda_.get_mpz_t(),
           n_squared_.get_mpz_t());
  if ((L(u, n_) * mu_) % n_ != 1) {
    throw InvalidArgument("private key fails mu * L(g^lambda) = 1 (mod n)");
  }
  fingerprint_ = FingerprintOf(n_);
}

Bytes PrivateKey::Serialize() const {
  ByteWriter w;
  w.PutLengthPrefixed(ToBigEndian(n_));
  w.PutLengthPrefixed(ToBigEndian(lambda_));
  w.PutLengthPrefixed(ToBigEndian(mu_));
  return std::move(w).bytes();
}

PrivateKey PrivateKey::Deserialize(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  mpz_class n = FromBigEndian(r.GetLengthPrefixed());
  mpz_class lambda = FromBigEndian(r.GetLengthPrefixed());
  mpz_class mu = FromBigEndian(r.GetLengthPrefixed());
  r.ExpectDone();
  return PrivateKey(std::move(lambda), std::move(mu), std::move(n));
}

Bytes Ciphertext::Serialize() const {
  ByteWriter w;
  w.PutRaw(fingerprint_);
  w.PutLengthPrefixed(ToBigEndian(value_));
  return std::move(w).bytes();
}

Ciphertext Ciphertext::Deserialize(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  Digest fp{};
  auto raw = r.GetRaw(fp.size());
  std::copy(raw.begin(), raw.end(), fp.begin());
  mpz_class value = FromBigEndian(r.GetLengthPrefixed());
  r.ExpectDone();
  return Ciphertext(std::move(value), fp);
}

KeyPair KeyPairFromPrimes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw InvalidArgument("Paillier primes must be distinct");
  if (p < 3 || q < 3 || mpz_probab_prime_p(p.get_mpz_t(), 40) == 0 ||
      mpz_probab_prime_p(q.get_mpz_t(), 40) == 0) {
    throw InvalidArgument("Paillier factors must be odd primes");
  }
  mpz_class n = p * q;
  mpz_class phi = (p - 1) * (q - 1);
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
  if (g != 1) throw InvalidArgument("gcd(pq, (p-1)(q-1)) must be 1");

  mpz_class lambda;
  mpz_lcm(lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(),
          mpz_class(q - 1).get_mpz_t());
  mpz_class n2 = n * n;
  mpz_class u;
  mpz_powm(u.get_mpz_t(), mpz_class(n + 1).get_mpz_t(), lambda.get_mpz_t(),
           n2.get_mpz_t());
  mpz_class mu;
  if (mpz_invert(mu.get_mpz_t(), mpz_class(L(u, n)).get_mpz_t(),
                 n.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kCrypto, "L(g^lambda) is not invertible mod n");
  }
  return KeyPair{PublicKey(n), PrivateKey(lambda, mu, n)};
}

KeyPair GenerateKeyPair(unsigned bits, RandomSource& rng,
                        const KeygenOptions& options) {
  if (bits < 16 || bits % 2 != 0) {
    throw InvalidArgument("key size must be even and at least 16 bits, got " +
                          std::to_string(bits));
  }
  if (bits < kMinSecureBits && !options.insecure_test) {
    throw InvalidArgument("key sizes below " + std::to_string(kMinSecureBits) +
                          " bits require the insecure-test flag");
  }
  int budget = options.max_prime_attempts;
  unsigned half = bits / 2;
  while (true) {
    mpz_class p = RandomPrime(half, rng, budget);
    mpz_class q = RandomPrime(half, rng, budget);
    if (p == q) continue;
    mpz_class g;
    mpz_class phi = (p - 1) * (q - 1);
    mpz_class n = p * q;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    return KeyPairFromPrimes(p, q);
  }
}

mpz_class DrawNonce(const PublicKey& pk, RandomSource& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    mpz_class r = rng.UniformBelow(pk.n());
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t());
    if (g == 1) return r;
  }
  throw Error(ErrorCode::kCrypto, "could not draw a nonce coprime to n");
}

Ciphertext EncryptWithNonce(const PublicKey& pk, const mpz_class& m,
                            const mpz_class& r) {
  if (m < 0 || m >= pk.n()) {
    throw InvalidArgument("plaintext outside [0, n)");
  }
  // g^m = (1 + n)^m = 1 + m n (mod n^2)
  mpz_class gm = (1 + m * pk.n()) % pk.n_squared();
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t(),
           pk.n_squared().get_mpz_t());
  return Ciphertext((gm * rn) % pk.n_squared(), pk.fingerprint());
}

Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng) {
  if (m < 0 || m >= pk.n()) {
    throw InvalidArgument("plaintext outside [0, n)");
  }
  return EncryptWithNonce(pk, m, DrawNonce(pk, rng));
}

mpz_class Decrypt(const PrivateKey& sk, const Ciphertext& c) {
  CheckFingerprint(sk.fingerprint(), c);
  const mpz_class& n2 = sk.n_squared();
  if (c.value() < 1 || c.value() >= n2) {
    throw Error(ErrorCode::kCrypto, "ciphertext value outside [1, n^2)");
  }
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.value().get_mpz_t(), sk.lambda().get_mpz_t(),
           n2.get_mpz_t());
  return (L(u, sk.n()) * sk.mu()) % sk.n();
}

Ciphertext Add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  CheckFingerprint(pk.fingerprint(), a);
  CheckFingerprint(pk.fingerprint(), b);
  return Ciphertext((a.value() * b.value()) % pk.n_squared(),
                    pk.fingerprint());
}

Ciphertext AddMany(const PublicKey& pk, std::span<const Ciphertext> cs) {
  if (cs.empty()) throw InvalidArgument("AddMany over an empty sequence");
  CheckFingerprint(pk.fingerprint(), cs.front());
  Ciphertext acc = cs.front();
  for (const Ciphertext& c : cs.subspan(1)) acc = Add(pk, acc, c);
  return acc;
}

}  // namespace fedgwas::paillier
