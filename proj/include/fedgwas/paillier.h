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


// Paillier cryptosystem with the fixed generator g = n + 1.
//
// Plaintexts are non-negative integers below n. Ciphertexts are tagged with
// the SHA-256 fingerprint of the serialized public key; mixing ciphertexts
// from different keys is rejected rather than producing garbage.

#ifndef FEDGWAS_PAILLIER_H_
#define FEDGWAS_PAILLIER_H_

#include <cstdint>
#include <span>

#include <gmpxx.h>

#include "fedgwas/bytes.h"
#include "fedgwas/random.h"

namespace fedgwas::paillier {

class PublicKey {
 public:
  // n must be odd and at least 15.
  explicit PublicKey(mpz_class n);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n_squared_; }
  mpz_class g() const { return n_ + 1; }
  std::uint32_t bits() const { return bits_; }
  const Digest& fingerprint() const { return fingerprint_; }

  // { bits: u32, n: u32 length ‖ big-endian bytes }
  Bytes Serialize() const;
  static PublicKey Deserialize(std::span<const std::uint8_t> data);

  friend bool operator==(const PublicKey& a, const PublicKey& b) {
    return a.n_ == b.n_;
  }

 private:
  mpz_class n_;
  mpz_class n_squared_;
  std::uint32_t bits_;
  Digest fingerprint_;
};

class PrivateKey {
 public:
  PrivateKey(mpz_class lambda, mpz_class mu, mpz_class n);

  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }
  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n_squared_; }
  PublicKey public_key() const { return PublicKey(n_); }
  // Fingerprint of the matching public key.
  const Digest& fingerprint() const { return fingerprint_; }

  // { n, lambda, mu } each length-prefixed big-endian.
  Bytes Serialize() const;
  static PrivateKey Deserialize(std::span<const std::uint8_t> data);

  friend bool operator==(const PrivateKey& a, const PrivateKey& b) {
    return a.n_ == b.n_ && a.lambda_ == b.lambda_ && a.mu_ == b.mu_;
  }

 private:
  mpz_class lambda_;
  mpz_class mu_;
  mpz_class n_;
  mpz_class n_squared_;
  Digest fingerprint_;
};

struct KeyPair {
  PublicKey public_key;
  PrivateKey private_key;
};

class Ciphertext {
 public:
  Ciphertext(mpz_class value, const Digest& key_fingerprint)
      : value_(std::move(value)), fingerprint_(key_fingerprint) {}

  const mpz_class& value() const { return value_; }
  const Digest& key_fingerprint() const { return fingerprint_; }

  // { key_fingerprint: 32 bytes, value: u32 length ‖ big-endian bytes }
  Bytes Serialize() const;
  static Ciphertext Deserialize(std::span<const std::uint8_t> data);

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.value_ == b.value_ && a.fingerprint_ == b.fingerprint_;
  }

 private:
  mpz_class value_;
  Digest fingerprint_;
};

struct KeygenOptions {
  // Moduli below kMinSecureBits are refused unless this is set.
  bool insecure_test = false;
  int max_prime_attempts = 100000;
};

inline constexpr unsigned kMinSecureBits = 512;
inline constexpr unsigned kDefaultKeyBits = 1024;

// Modulus of exactly `bits` bits from two distinct primes of bits/2 bits.
KeyPair GenerateKeyPair(unsigned bits, RandomSource& rng,
                        const KeygenOptions& options = {});
// Builds a keypair from caller-chosen primes; used for small oracle keys.
KeyPair KeyPairFromPrimes(const mpz_class& p, const mpz_class& q);

// Fresh r uniform in [1, n) with gcd(r, n) = 1.
mpz_class DrawNonce(const PublicKey& pk, RandomSource& rng);

Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng);
// Deterministic given r; r must come from DrawNonce.
Ciphertext EncryptWithNonce(const PublicKey& pk, const mpz_class& m,
                            const mpz_class& r);
mpz_class Decrypt(const PrivateKey& sk, const Ciphertext& c);

Ciphertext Add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
// Left fold of Add. Throws on an empty sequence.
Ciphertext AddMany(const PublicKey& pk, std::span<const Ciphertext> cs);

}  // namespace fedgwas::paillier

#endif  // FEDGWAS_PAILLIER_H_
