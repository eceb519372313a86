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


// In-process stand-in for the trusted execution boundary.
//
// The aggregation private key lives only inside an Enclave object. Nothing
// on its public surface returns, serializes or copies that key: callers see
// the measurement, attestation reports, the decryption meter and results
// encrypted under the researcher's key.

#ifndef FEDGWAS_ENCLAVE_H_
#define FEDGWAS_ENCLAVE_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedgwas/bytes.h"
#include "fedgwas/paillier.h"
#include "fedgwas/random.h"
#include "fedgwas/stats.h"
#include "fedgwas/types.h"

namespace fedgwas::enclave {

using Nonce = std::array<std::uint8_t, 16>;

inline constexpr std::string_view kKernelId = "fedgwas.stats-kernels/1";
inline constexpr std::int64_t kResultScale = 1'000'000;

// Stand-in for the platform attestation key shared by the CSP and the
// enclave. Deployments override it on both sides.
Bytes DefaultProvisioningSecret();

struct Measurement {
  Digest digest{};

  std::string hex() const { return ToHex(digest); }
  static Measurement FromHex(std::string_view hex);
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

// Parameters baked into the enclave image and covered by its measurement.
struct KernelConfig {
  stats::TrendWeights catt_weights = stats::kAdditiveWeights;

  // Canonical text, e.g. "catt_weights=0,1,2;scale=1000000".
  Bytes Serialize() const;
};

// SHA-256 over kernel_id ‖ 0x00 ‖ config.
Measurement Measure(std::string_view kernel_id,
                    std::span<const std::uint8_t> config);

struct AttestationReport {
  Measurement measurement;
  Nonce nonce{};
  Digest signature{};  // HMAC(secret, "attest" ‖ measurement ‖ nonce)

  friend bool operator==(const AttestationReport&,
                         const AttestationReport&) = default;
};

// Challenger side (the CSP). Nonces are single use.
class AttestationVerifier {
 public:
  explicit AttestationVerifier(Bytes provisioning_secret)
      : secret_(std::move(provisioning_secret)) {}

  Nonce IssueNonce(RandomSource& rng);
  // Throws AttestationError on a bad signature, an unknown or replayed
  // nonce, or a measurement other than `expected`.
  void Verify(const AttestationReport& report, const Measurement& expected);

 private:
  Bytes secret_;
  std::set<Nonce> outstanding_;
};

// Aggregation private key wrapped for one attested measurement and nonce,
// together with the researcher's result public key.
struct SealedKeyBundle {
  Nonce nonce{};
  Bytes wrapped_key;
  Bytes result_public_key;
  Digest tag{};

  friend bool operator==(const SealedKeyBundle&,
                         const SealedKeyBundle&) = default;
};

SealedKeyBundle SealKeyForEnclave(const paillier::PrivateKey& key,
                                  const paillier::PublicKey& result_key,
                                  const Measurement& measurement,
                                  const Nonce& nonce,
                                  std::span<const std::uint8_t> secret);

struct EncryptedField {
  std::string label;
  bool negative = false;
  paillier::Ciphertext magnitude;  // round(|value| * scale)

  friend bool operator==(const EncryptedField&,
                         const EncryptedField&) = default;
};

struct EncryptedStatResult {
  TestKind test = TestKind::kHwe;
  std::int64_t scale = kResultScale;
  std::vector<EncryptedField> fields;
  std::uint64_t decryptions_used = 0;

  friend bool operator==(const EncryptedStatResult&,
                         const EncryptedStatResult&) = default;
};

struct EnclaveOptions {
  Exec exec = Exec::kSerial;
  // Deterministic result encryption for tests; system randomness otherwise.
  std::optional<std::uint64_t> insecure_seed;
};

class Enclave {
 public:
  // Fully provisioned handle.
  Enclave(std::string kernel_id, KernelConfig config,
          paillier::PrivateKey sealed_key, paillier::PublicKey result_key,
          EnclaveOptions options = {});

  // Handle without key material, awaiting Provision after attestation.
  static Enclave Launch(std::string kernel_id, KernelConfig config,
                        Bytes provisioning_secret, EnclaveOptions options = {});

  Enclave(Enclave&&) noexcept;
  Enclave& operator=(Enclave&&) noexcept;
  Enclave(const Enclave&) = delete;
  Enclave& operator=(const Enclave&) = delete;
  ~Enclave();

  const Measurement& measurement() const;
  bool provisioned() const;
  std::uint64_t decryption_meter() const;
  // Throws if not provisioned.
  const paillier::PublicKey& result_key() const;

  AttestationReport Attest(const Nonce& nonce) const;
  // Unwraps the bundle with this enclave's measurement; throws
  // AttestationError if it was sealed for anything else.
  void Provision(const SealedKeyBundle& bundle);

  // Decrypts the |totals| aggregated ciphertexts and runs the kernel.
  EncryptedStatResult ComputeHybrid(TestKind test,
                                    const EncryptedCountVector& totals);
  // Decrypts every owner's ciphertexts, sums per category, runs the kernel.
  EncryptedStatResult ComputeSecureHw(
      TestKind test, std::span<const EncryptedCountVector> per_owner);

 private:
  struct State;
  explicit Enclave(std::unique_ptr<State> state);

  std::unique_ptr<State> state_;
};

// Attests h to a challenger expecting `expected`; throws AttestationError
// on mismatch.
AttestationReport Attest(const Enclave& h, const Measurement& expected,
                         const Nonce& nonce);

struct DecodedField {
  std::string label;
  double value = 0;
};

// Researcher side: decrypt and rescale. Throws Error(kKeyMismatch) for a
// foreign key and Error(kCrypto) when a magnitude is implausible.
std::vector<DecodedField> DecodeResult(const paillier::PrivateKey& result_key,
                                       const EncryptedStatResult& result);

// Fixed-point encoding of statistic values, shared with tests.
std::int64_t ToFixedPoint(double value);

// The kernel step of the enclave without any cryptography: the per-field
// values computed from plaintext totals in layout order.
std::vector<DecodedField> EvaluateKernel(TestKind test,
                                         std::span<const std::uint64_t> totals,
                                         const KernelConfig& config = {});

}  // namespace fedgwas::enclave

#endif  // FEDGWAS_ENCLAVE_H_
