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


#include "fedgwas/enclave.h"

#include <random>
#include <string>
#include <vector>

#include "fedgwas/error.h"
#include "fedgwas/kernels.h"
#include "gtest/gtest.h"

namespace fedgwas::enclave {
namespace {

// No spelling of a key accessor compiles against the handle.
template <typename T>
concept ExposesKey = requires(const T& e) { e.sealed_key(); } ||
                     requires(const T& e) { e.private_key(); } ||
                     requires(const T& e) { e.key(); } ||
                     requires(const T& e) { e.secret(); };
static_assert(!ExposesKey<Enclave>);
static_assert(!std::is_copy_constructible_v<Enclave>);

struct Fixture {
  paillier::KeyPair agg;
  paillier::KeyPair result;
};

Fixture MakeKeys(std::uint64_t seed) {
  InsecureSeededRandom rng(seed);
  return {paillier::GenerateKeyPair(512, rng),
          paillier::GenerateKeyPair(512, rng)};
}

Enclave MakeEnclave(const Fixture& f) {
  return Enclave(std::string(kKernelId), {}, f.agg.private_key,
                 f.result.public_key, {.insecure_seed = 1});
}

EncryptedCountVector EncryptCounts(const paillier::PublicKey& pk,
                                   std::vector<std::uint64_t> counts,
                                   RandomSource& rng,
                                   std::string owner = "o") {
  EncryptedCountVector v;
  v.query_id = "q";
  v.owner_id = std::move(owner);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    v.layout.push_back("c" + std::to_string(i));
  }
  v.ciphertexts = kernels::serial::EncryptAll(pk, counts, rng);
  return v;
}

std::vector<std::uint64_t> SampleCounts(TestKind test, std::mt19937_64& gen) {
  std::vector<std::uint64_t> c(CategoryCount(test));
  for (auto& x : c) x = 3 + gen() % 40;
  return c;
}

TEST(MeasurementTest, DeterministicAndSensitive) {
  KernelConfig config;
  Bytes bytes = config.Serialize();
  EXPECT_EQ(Measure(kKernelId, bytes), Measure(kKernelId, bytes));
  Bytes mutated = bytes;
  mutated.back() ^= 1;
  EXPECT_NE(Measure(kKernelId, bytes), Measure(kKernelId, mutated));
  EXPECT_NE(Measure(kKernelId, bytes), Measure("fedgwas.stats-kernels/2", bytes));
  KernelConfig other{.catt_weights = {0, 1, 1}};
  EXPECT_NE(Measure(kKernelId, bytes), Measure(kKernelId, other.Serialize()));
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()),
            "catt_weights=0,1,2;scale=1000000");
}

TEST(AttestationTest, MatchingMeasurementVerifies) {
  Fixture f = MakeKeys(1);
  Enclave h = MakeEnclave(f);
  InsecureSeededRandom rng(2);
  AttestationVerifier verifier(DefaultProvisioningSecret());
  Nonce nonce = verifier.IssueNonce(rng);
  Measurement expected = Measure(kKernelId, KernelConfig{}.Serialize());
  AttestationReport report = Attest(h, expected, nonce);
  EXPECT_NO_THROW(verifier.Verify(report, expected));
  // Replaying the same report is refused.
  EXPECT_THROW(verifier.Verify(report, expected), Error);
}

TEST(AttestationTest, TamperedKernelFails) {
  Fixture f = MakeKeys(1);
  Enclave h(std::string(kKernelId) + "-patched", {}, f.agg.private_key,
            f.result.public_key);
  Measurement expected = Measure(kKernelId, KernelConfig{}.Serialize());
  InsecureSeededRandom rng(3);
  AttestationVerifier verifier(DefaultProvisioningSecret());
  Nonce nonce = verifier.IssueNonce(rng);
  try {
    Attest(h, expected, nonce);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAttestation);
  }
  // A report produced anyway is refused by the challenger.
  EXPECT_THROW(verifier.Verify(h.Attest(nonce), expected), Error);
}

TEST(AttestationTest, UnknownNonceAndBadSignatureFail) {
  Fixture f = MakeKeys(1);
  Enclave h = MakeEnclave(f);
  Measurement expected = h.measurement();
  AttestationVerifier verifier(DefaultProvisioningSecret());
  Nonce never_issued{};
  EXPECT_THROW(verifier.Verify(h.Attest(never_issued), expected), Error);

  InsecureSeededRandom rng(4);
  Nonce nonce = verifier.IssueNonce(rng);
  AttestationReport forged = h.Attest(nonce);
  forged.signature[0] ^= 0x80;
  EXPECT_THROW(verifier.Verify(forged, expected), Error);
}

TEST(AttestationPropertyTest, EverySingleBitMutationIsRejected) {
  Fixture f = MakeKeys(1);
  Enclave h = MakeEnclave(f);
  const Measurement good = h.measurement();
  InsecureSeededRandom rng(5);
  AttestationVerifier verifier(DefaultProvisioningSecret());
  for (std::size_t bit = 0; bit < good.digest.size() * 8; ++bit) {
    Measurement expected = good;
    expected.digest[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    Nonce nonce = verifier.IssueNonce(rng);
    EXPECT_THROW(verifier.Verify(h.Attest(nonce), expected), Error);
  }
  Nonce nonce = verifier.IssueNonce(rng);
  EXPECT_NO_THROW(verifier.Verify(h.Attest(nonce), good));
}

TEST(ProvisionTest, BundleOnlyOpensForItsMeasurement) {
  Fixture f = MakeKeys(6);
  Bytes secret = DefaultProvisioningSecret();
  Enclave good = Enclave::Launch(std::string(kKernelId), {}, secret);
  Enclave bad = Enclave::Launch("something-else", {}, secret);
  EXPECT_FALSE(good.provisioned());
  Nonce nonce{1, 2, 3};
  SealedKeyBundle bundle = SealKeyForEnclave(
      f.agg.private_key, f.result.public_key, good.measurement(), nonce, secret);
  EXPECT_THROW(bad.Provision(bundle), Error);
  EXPECT_FALSE(bad.provisioned());
  good.Provision(bundle);
  EXPECT_TRUE(good.provisioned());
  EXPECT_EQ(good.result_key(), f.result.public_key);

  SealedKeyBundle tampered = bundle;
  tampered.wrapped_key[0] ^= 1;
  Enclave again = Enclave::Launch(std::string(kKernelId), {}, secret);
  EXPECT_THROW(again.Provision(tampered), Error);

  // Wrapped bytes are not the serialized key.
  EXPECT_NE(bundle.wrapped_key, f.agg.private_key.Serialize());
}

TEST(EnclaveTest, UnprovisionedHandleRefusesWork) {
  Fixture f = MakeKeys(7);
  Enclave h = Enclave::Launch(std::string(kKernelId), {},
                              DefaultProvisioningSecret());
  InsecureSeededRandom rng(7);
  auto v = EncryptCounts(f.agg.public_key, {1, 2, 3}, rng);
  try {
    h.ComputeHybrid(TestKind::kHwe, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAttestation);
  }
  EXPECT_EQ(h.decryption_meter(), 0u);
}

TEST(EnclaveTest, HybridDecryptionCountsByTest) {
  Fixture f = MakeKeys(8);
  InsecureSeededRandom rng(8);
  std::mt19937_64 gen(8);
  const std::uint64_t expected[] = {4, 3, 6, 6};
  int i = 0;
  for (TestKind test : kAllTests) {
    Enclave h = MakeEnclave(f);
    auto totals = EncryptCounts(f.agg.public_key, SampleCounts(test, gen), rng);
    auto r = h.ComputeHybrid(test, totals);
    EXPECT_EQ(r.decryptions_used, expected[i]);
    EXPECT_EQ(h.decryption_meter(), expected[i]);
    EXPECT_EQ(r.fields.size(), FieldLabels(test).size());
    ++i;
  }
}

TEST(EnclaveTest, SecureHwDecryptsEveryOwnerCiphertext) {
  Fixture f = MakeKeys(9);
  InsecureSeededRandom rng(9);
  std::mt19937_64 gen(9);
  for (TestKind test : kAllTests) {
    for (std::size_t owners : {1u, 3u, 5u}) {
      std::vector<EncryptedCountVector> per_owner;
      std::vector<std::uint64_t> pooled(CategoryCount(test), 0);
      for (std::size_t k = 0; k < owners; ++k) {
        auto counts = SampleCounts(test, gen);
        for (std::size_t c = 0; c < counts.size(); ++c) pooled[c] += counts[c];
        per_owner.push_back(EncryptCounts(f.agg.public_key, counts, rng,
                                          "o" + std::to_string(k)));
      }
      Enclave hw = MakeEnclave(f);
      auto r_hw = hw.ComputeSecureHw(test, per_owner);
      EXPECT_EQ(r_hw.decryptions_used, CategoryCount(test) * owners);
      EXPECT_EQ(hw.decryption_meter(), CategoryCount(test) * owners);

      std::vector<std::vector<paillier::Ciphertext>> columns;
      for (auto& v : per_owner) columns.push_back(v.ciphertexts);
      EncryptedCountVector totals = per_owner.front();
      totals.ciphertexts =
          kernels::serial::AggregateColumns(f.agg.public_key, columns);
      Enclave hy = MakeEnclave(f);
      auto r_hy = hy.ComputeHybrid(test, totals);
      EXPECT_EQ(r_hy.decryptions_used, CategoryCount(test));

      auto a = DecodeResult(f.result.private_key, r_hw);
      auto b = DecodeResult(f.result.private_key, r_hy);
      auto direct = EvaluateKernel(test, pooled);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].label, direct[k].label);
        EXPECT_EQ(a[k].value, b[k].value);
        EXPECT_EQ(a[k].value, ToFixedPoint(direct[k].value) / 1e6);
      }
    }
  }
}

TEST(EnclaveTest, ExactHweDecodesToZero) {
  Fixture f = MakeKeys(10);
  InsecureSeededRandom rng(10);
  Enclave h = MakeEnclave(f);
  auto r = h.ComputeHybrid(TestKind::kHwe,
                           EncryptCounts(f.agg.public_key, {25, 50, 25}, rng));
  auto decoded = DecodeResult(f.result.private_key, r);
  ASSERT_EQ(decoded.size(), 2u);
  EXPECT_EQ(decoded[0].label, "statistic");
  EXPECT_EQ(decoded[0].value, 0);
  EXPECT_EQ(decoded[1].value, 1);
  EXPECT_EQ(r.scale, 1'000'000);
}

TEST(EnclaveTest, NegativeFieldsCarrySign) {
  Fixture f = MakeKeys(11);
  InsecureSeededRandom rng(11);
  Enclave h = MakeEnclave(f);
  auto r = h.ComputeHybrid(TestKind::kLd,
                           EncryptCounts(f.agg.public_key, {10, 30, 30, 30}, rng));
  EXPECT_TRUE(r.fields[0].negative);
  auto decoded = DecodeResult(f.result.private_key, r);
  EXPECT_NEAR(decoded[0].value, -0.06, 1e-6);
  EXPECT_NEAR(decoded[1].value, -0.375, 1e-6);
  EXPECT_FALSE(r.fields[2].negative);
}

TEST(EnclaveTest, KernelErrorsPropagate) {
  Fixture f = MakeKeys(12);
  InsecureSeededRandom rng(12);
  Enclave h = MakeEnclave(f);
  try {
    h.ComputeHybrid(TestKind::kHwe,
                    EncryptCounts(f.agg.public_key, {9, 0, 0}, rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStatistics);
  }
}

TEST(EnclaveTest, LayoutErrors) {
  Fixture f = MakeKeys(13);
  InsecureSeededRandom rng(13);
  Enclave h = MakeEnclave(f);
  EXPECT_THROW(h.ComputeHybrid(TestKind::kLd,
                               EncryptCounts(f.agg.public_key, {1, 2, 3}, rng)),
               Error);
  auto a = EncryptCounts(f.agg.public_key, {1, 2, 3}, rng, "a");
  auto b = EncryptCounts(f.agg.public_key, {1, 2, 3}, rng, "b");
  b.layout[0] = "other";
  std::vector<EncryptedCountVector> both = {a, b};
  EXPECT_THROW(h.ComputeSecureHw(TestKind::kHwe, both), Error);
}

TEST(EnclaveTest, ForeignAggregationKeyIsRejected) {
  Fixture f = MakeKeys(14);
  Fixture g = MakeKeys(15);
  InsecureSeededRandom rng(14);
  Enclave h = MakeEnclave(f);
  try {
    h.ComputeHybrid(TestKind::kHwe,
                    EncryptCounts(g.agg.public_key, {1, 2, 3}, rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKeyMismatch);
  }
}

TEST(DecodeTest, WrongKeyIsAnIntegrityError) {
  Fixture f = MakeKeys(16);
  InsecureSeededRandom rng(16);
  Enclave h = MakeEnclave(f);
  auto r = h.ComputeHybrid(TestKind::kHwe,
                           EncryptCounts(f.agg.public_key, {6, 4, 2}, rng));
  EXPECT_THROW(DecodeResult(f.agg.private_key, r), Error);

  // Same fingerprint, implausible plaintext.
  EncryptedStatResult forged = r;
  forged.fields[0].magnitude = paillier::Encrypt(
      f.result.public_key, f.result.public_key.n() - 1, rng);
  try {
    DecodeResult(f.result.private_key, forged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCrypto);
  }
}

TEST(FixedPointTest, RoundsToGrain) {
  EXPECT_EQ(ToFixedPoint(0.75), 750000);
  EXPECT_EQ(ToFixedPoint(-0.0000004), 0);
  EXPECT_EQ(ToFixedPoint(-0.0000006), -1);
  EXPECT_THROW(ToFixedPoint(std::nan("")), Error);
}

}  // namespace
}  // namespace fedgwas::enclave
