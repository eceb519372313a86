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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "fedgwas/error.h"
#include "gtest/gtest.h"

namespace fedgwas::paillier {
namespace {

// n = 11 * 13 = 143; small enough to sweep every residue.
KeyPair OracleKeyPair() { return KeyPairFromPrimes(11, 13); }

KeyPair SmallKeyPair(std::uint64_t seed) {
  InsecureSeededRandom rng(seed);
  return GenerateKeyPair(16, rng, {.insecure_test = true});
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInternal;
}

TEST(PaillierKeygenTest, ProducesExactBitLength) {
  SystemRandom rng;
  KeyPair kp = GenerateKeyPair(1024, rng);
  EXPECT_EQ(kp.public_key.bits(), 1024u);
  EXPECT_EQ(mpz_sizeinbase(kp.public_key.n().get_mpz_t(), 2), 1024u);
  EXPECT_EQ(kp.public_key.g(), kp.public_key.n() + 1);
  mpz_class m("123456789012345678901234567890");
  EXPECT_EQ(Decrypt(kp.private_key, Encrypt(kp.public_key, m, rng)), m);
}

TEST(PaillierKeygenTest, SeededSmallKeyIsDeterministic) {
  KeyPair a = SmallKeyPair(7);
  KeyPair b = SmallKeyPair(7);
  EXPECT_EQ(a.public_key.n(), b.public_key.n());
  EXPECT_EQ(a.private_key.lambda(), b.private_key.lambda());
  EXPECT_EQ(a.public_key.bits(), 16u);
}

TEST(PaillierKeygenTest, RejectsBadSizes) {
  InsecureSeededRandom rng(1);
  EXPECT_EQ(CodeOf([&] { GenerateKeyPair(15, rng, {.insecure_test = true}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { GenerateKeyPair(14, rng, {.insecure_test = true}); }),
            ErrorCode::kInvalidArgument);
  // Small keys are gated behind the test flag.
  EXPECT_EQ(CodeOf([&] { GenerateKeyPair(256, rng); }),
            ErrorCode::kInvalidArgument);
}

TEST(PaillierKeygenTest, PrimeSearchBudgetIsEnforced) {
  InsecureSeededRandom rng(1);
  EXPECT_EQ(CodeOf([&] {
              GenerateKeyPair(512, rng, {.max_prime_attempts = 1});
            }),
            ErrorCode::kCrypto);
}

TEST(PaillierKeygenTest, PrivateKeySatisfiesMuInvariant) {
  KeyPair kp = SmallKeyPair(3);
  const auto& sk = kp.private_key;
  mpz_class n2 = sk.n() * sk.n();
  mpz_class u;
  mpz_class g = sk.n() + 1;
  mpz_powm(u.get_mpz_t(), g.get_mpz_t(), sk.lambda().get_mpz_t(),
           n2.get_mpz_t());
  EXPECT_EQ((((u - 1) / sk.n()) * sk.mu()) % sk.n(), 1);
}

TEST(PaillierTest, ExhaustiveRoundTripOnOracleModulus) {
  KeyPair kp = OracleKeyPair();
  InsecureSeededRandom rng(11);
  for (long m = 0; m < 143; ++m) {
    EXPECT_EQ(Decrypt(kp.private_key, Encrypt(kp.public_key, m, rng)), m);
  }
  EXPECT_EQ(Decrypt(kp.private_key, Encrypt(kp.public_key, 142, rng)), 142);
}

TEST(PaillierTest, ExhaustiveRoundTripOnSixteenBitModulus) {
  KeyPair kp = SmallKeyPair(2024);
  InsecureSeededRandom rng(5);
  const unsigned long n = mpz_get_ui(kp.public_key.n().get_mpz_t());
  for (unsigned long m = 0; m < n; ++m) {
    ASSERT_EQ(Decrypt(kp.private_key, Encrypt(kp.public_key, m, rng)), m)
        << "m = " << m;
  }
}

TEST(PaillierTest, ExhaustiveHomomorphismOnOracleModulus) {
  KeyPair kp = OracleKeyPair();
  InsecureSeededRandom rng(12);
  std::vector<Ciphertext> enc;
  for (long m = 0; m < 143; ++m) enc.push_back(Encrypt(kp.public_key, m, rng));
  for (long a = 0; a < 143; ++a) {
    for (long b = 0; b < 143; ++b) {
      ASSERT_EQ(Decrypt(kp.private_key, Add(kp.public_key, enc[a], enc[b])),
                (a + b) % 143);
    }
  }
}

TEST(PaillierTest, EncryptionIsProbabilistic) {
  InsecureSeededRandom rng(99);
  KeyPair kp = GenerateKeyPair(64, rng, {.insecure_test = true});
  std::set<mpz_class> seen;
  for (int i = 0; i < 100; ++i) {
    Ciphertext c = Encrypt(kp.public_key, 1, rng);
    EXPECT_EQ(Decrypt(kp.private_key, c), 1);
    seen.insert(c.value());
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(PaillierTest, ZeroRoundTrip) {
  KeyPair kp = SmallKeyPair(1);
  InsecureSeededRandom rng(1);
  EXPECT_EQ(Decrypt(kp.private_key, Encrypt(kp.public_key, 0, rng)), 0);
}

TEST(PaillierTest, PlaintextOutOfRangeIsRejected) {
  KeyPair kp = OracleKeyPair();
  InsecureSeededRandom rng(1);
  EXPECT_EQ(CodeOf([&] { Encrypt(kp.public_key, 143, rng); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { Encrypt(kp.public_key, -1, rng); }),
            ErrorCode::kInvalidArgument);
}

TEST(PaillierTest, ForeignCiphertextIsRejected) {
  KeyPair a = SmallKeyPair(1);
  KeyPair b = SmallKeyPair(2);
  ASSERT_NE(a.public_key.n(), b.public_key.n());
  InsecureSeededRandom rng(1);
  Ciphertext c = Encrypt(a.public_key, 7, rng);
  EXPECT_EQ(CodeOf([&] { Decrypt(b.private_key, c); }),
            ErrorCode::kKeyMismatch);
  EXPECT_EQ(CodeOf([&] { Add(b.public_key, c, c); }), ErrorCode::kKeyMismatch);
}

TEST(PaillierTest, CiphertextValueOutOfRangeIsRejected) {
  KeyPair kp = OracleKeyPair();
  Ciphertext zero(0, kp.public_key.fingerprint());
  Ciphertext big(143 * 143, kp.public_key.fingerprint());
  EXPECT_EQ(CodeOf([&] { Decrypt(kp.private_key, zero); }), ErrorCode::kCrypto);
  EXPECT_EQ(CodeOf([&] { Decrypt(kp.private_key, big); }), ErrorCode::kCrypto);
}

TEST(PaillierTest, AddExamples) {
  InsecureSeededRandom rng(4);
  KeyPair kp = GenerateKeyPair(128, rng, {.insecure_test = true});
  const auto& pk = kp.public_key;
  EXPECT_EQ(Decrypt(kp.private_key,
                    Add(pk, Encrypt(pk, 2, rng), Encrypt(pk, 3, rng))),
            5);
  for (long m : {0L, 1L, 99L, 123456L}) {
    EXPECT_EQ(Decrypt(kp.private_key,
                      Add(pk, Encrypt(pk, 0, rng), Encrypt(pk, m, rng))),
              m);
  }
  // CA haplotype counts of the four example owners: 1, 0, 2, 2.
  std::vector<Ciphertext> ca;
  for (long m : {1L, 0L, 2L, 2L}) ca.push_back(Encrypt(pk, m, rng));
  EXPECT_EQ(Decrypt(kp.private_key, AddMany(pk, ca)), 5);
}

TEST(PaillierTest, AddManyFolds) {
  InsecureSeededRandom rng(8);
  KeyPair kp = GenerateKeyPair(128, rng, {.insecure_test = true});
  const auto& pk = kp.public_key;
  std::vector<Ciphertext> one{Encrypt(pk, 1, rng)};
  EXPECT_EQ(Decrypt(kp.private_key, AddMany(pk, one)), 1);
  std::vector<Ciphertext> ones;
  for (int i = 0; i < 5; ++i) ones.push_back(Encrypt(pk, 1, rng));
  EXPECT_EQ(Decrypt(kp.private_key, AddMany(pk, ones)), 5);
  EXPECT_EQ(CodeOf([&] { AddMany(pk, {}); }), ErrorCode::kInvalidArgument);
}

TEST(PaillierPropertyTest, AdditionIsCommutativeAndAssociative) {
  InsecureSeededRandom rng(21);
  KeyPair kp = GenerateKeyPair(256, rng, {.insecure_test = true});
  const auto& pk = kp.public_key;
  const auto& sk = kp.private_key;
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<unsigned long> dist(0, 1u << 30);
  for (int trial = 0; trial < 50; ++trial) {
    unsigned long a = dist(gen), b = dist(gen), c = dist(gen);
    Ciphertext x = Encrypt(pk, a, rng), y = Encrypt(pk, b, rng),
               z = Encrypt(pk, c, rng);
    EXPECT_EQ(Decrypt(sk, Add(pk, x, y)), Decrypt(sk, Add(pk, y, x)));
    EXPECT_EQ(Decrypt(sk, Add(pk, Add(pk, x, y), z)),
              Decrypt(sk, Add(pk, x, Add(pk, y, z))));
    EXPECT_EQ(Decrypt(sk, Add(pk, x, y)), mpz_class(a) + b);
  }
}

TEST(PaillierPropertyTest, AddManyIsPermutationInvariant) {
  InsecureSeededRandom rng(22);
  KeyPair kp = GenerateKeyPair(256, rng, {.insecure_test = true});
  const auto& pk = kp.public_key;
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<unsigned long> values(1 + gen() % 8);
    for (auto& v : values) v = gen() % 100000;
    std::vector<Ciphertext> cs;
    for (auto v : values) cs.push_back(Encrypt(pk, v, rng));
    mpz_class expected = std::accumulate(values.begin(), values.end(), 0ul);
    Ciphertext fold = cs.front();
    for (std::size_t i = 1; i < cs.size(); ++i) fold = Add(pk, fold, cs[i]);
    EXPECT_EQ(Decrypt(kp.private_key, fold), expected);
    std::shuffle(cs.begin(), cs.end(), gen);
    EXPECT_EQ(Decrypt(kp.private_key, AddMany(pk, cs)), expected);
  }
}

TEST(PaillierSerializationTest, RoundTripsAndFingerprint) {
  InsecureSeededRandom rng(30);
  KeyPair kp = GenerateKeyPair(512, rng);
  Bytes pk_bytes = kp.public_key.Serialize();
  EXPECT_EQ(PublicKey::Deserialize(pk_bytes), kp.public_key);
  EXPECT_EQ(kp.public_key.fingerprint(), Sha256(pk_bytes));
  // bits: u32 big-endian 512 = 00 00 02 00, then a 64-byte length prefix.
  ASSERT_GE(pk_bytes.size(), 8u);
  EXPECT_EQ(pk_bytes[2], 0x02);
  EXPECT_EQ(pk_bytes[7], 64);

  for (int i = 0; i < 20; ++i) {
    Ciphertext c = Encrypt(kp.public_key, i, rng);
    Ciphertext back = Ciphertext::Deserialize(c.Serialize());
    EXPECT_EQ(back, c);
    EXPECT_EQ(Decrypt(kp.private_key, back), i);
  }
  PrivateKey sk = PrivateKey::Deserialize(kp.private_key.Serialize());
  EXPECT_EQ(sk.lambda(), kp.private_key.lambda());
  EXPECT_EQ(sk.fingerprint(), kp.public_key.fingerprint());
}

TEST(PaillierSerializationTest, RejectsTruncatedInput) {
  KeyPair kp = OracleKeyPair();
  Bytes pk = kp.public_key.Serialize();
  pk.pop_back();
  EXPECT_THROW(PublicKey::Deserialize(pk), Error);
  Bytes c = Ciphertext(5, kp.public_key.fingerprint()).Serialize();
  c.push_back(0);
  EXPECT_THROW(Ciphertext::Deserialize(c), Error);
}

}  // namespace
}  // namespace fedgwas::paillier
