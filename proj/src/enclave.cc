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

#include <cmath>
#include <sstream>

#include "fedgwas/error.h"
#include "fedgwas/kernels.h"

namespace fedgwas::enclave {
namespace {

constexpr std::string_view kAttestLabel = "fedgwas/attest";
constexpr std::string_view kProvisionLabel = "fedgwas/provision";
constexpr std::string_view kTagLabel = "fedgwas/provision-tag";
// Decoded magnitudes above this are treated as a decryption failure.
constexpr std::int64_t kPlausibleMagnitude = std::int64_t{1} << 62;

Digest SignReport(std::span<const std::uint8_t> secret, const Measurement& m,
                  const Nonce& nonce) {
  ByteWriter w;
  w.PutRaw(AsBytes(kAttestLabel));
  w.PutRaw(m.digest);
  w.PutRaw(nonce);
  return HmacSha256(secret, w.bytes());
}

Digest ProvisionKey(std::span<const std::uint8_t> secret, const Measurement& m,
                    const Nonce& nonce) {
  ByteWriter w;
  w.PutRaw(AsBytes(kProvisionLabel));
  w.PutRaw(m.digest);
  w.PutRaw(nonce);
  return HmacSha256(secret, w.bytes());
}

// SHA-256 in counter mode over the provisioning key.
Bytes ApplyKeystream(const Digest& key, std::span<const std::uint8_t> data) {
  Bytes out(data.begin(), data.end());
  for (std::size_t block = 0; block * 32 < out.size(); ++block) {
    ByteWriter w;
    w.PutRaw(key);
    w.PutU32(static_cast<std::uint32_t>(block));
    Digest pad = Sha256(w.bytes());
    for (std::size_t i = 0; i < 32 && block * 32 + i < out.size(); ++i) {
      out[block * 32 + i] ^= pad[i];
    }
  }
  return out;
}

Digest BundleTag(const Digest& key, const SealedKeyBundle& b) {
  ByteWriter w;
  w.PutRaw(AsBytes(kTagLabel));
  w.PutRaw(b.nonce);
  w.PutLengthPrefixed(b.wrapped_key);
  w.PutLengthPrefixed(b.result_public_key);
  return HmacSha256(key, w.bytes());
}

bool ConstantTimeEqual(const Digest& a, const Digest& b) {
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= a[i] ^ b[i];
  return diff == 0;
}

std::uint64_t ToCount(const mpz_class& v) {
  if (!mpz_fits_ulong_p(v.get_mpz_t())) {
    throw Error(ErrorCode::kCrypto, "decrypted count does not fit 64 bits");
  }
  return mpz_get_ui(v.get_mpz_t());
}

std::string FormatWeight(double w) {
  std::ostringstream os;
  os.precision(17);
  os << w;
  return os.str();
}

}  // namespace

Bytes DefaultProvisioningSecret() {
  std::string_view s = "fedgwas-development-provisioning-secret";
  return Bytes(s.begin(), s.end());
}

Measurement Measurement::FromHex(std::string_view hex) {
  Bytes raw = fedgwas::FromHex(hex);
  Measurement m;
  if (raw.size() != m.digest.size()) {
    throw InvalidArgument("measurement must be 32 bytes");
  }
  std::copy(raw.begin(), raw.end(), m.digest.begin());
  return m;
}

Bytes KernelConfig::Serialize() const {
  std::string s = "catt_weights=" + FormatWeight(catt_weights[0]) + "," +
                  FormatWeight(catt_weights[1]) + "," +
                  FormatWeight(catt_weights[2]) +
                  ";scale=" + std::to_string(kResultScale);
  return Bytes(s.begin(), s.end());
}

Measurement Measure(std::string_view kernel_id,
                    std::span<const std::uint8_t> config) {
  ByteWriter w;
  w.PutRaw(AsBytes(kernel_id));
  w.PutRaw(std::array<std::uint8_t, 1>{0});
  w.PutRaw(config);
  return Measurement{Sha256(w.bytes())};
}

Nonce AttestationVerifier::IssueNonce(RandomSource& rng) {
  Nonce n{};
  do {
    rng.Fill(n);
  } while (outstanding_.contains(n));
  outstanding_.insert(n);
  return n;
}

void AttestationVerifier::Verify(const AttestationReport& report,
                                 const Measurement& expected) {
  auto it = outstanding_.find(report.nonce);
  if (it == outstanding_.end()) {
    throw AttestationError("attestation nonce is unknown or was already used");
  }
  outstanding_.erase(it);
  if (!ConstantTimeEqual(report.signature,
                         SignReport(secret_, report.measurement,
                                    report.nonce))) {
    throw AttestationError("attestation report signature is invalid");
  }
  if (report.measurement != expected) {
    throw AttestationError("enclave measurement " + report.measurement.hex() +
                           " does not match expected " + expected.hex());
  }
}

SealedKeyBundle SealKeyForEnclave(const paillier::PrivateKey& key,
                                  const paillier::PublicKey& result_key,
                                  const Measurement& measurement,
                                  const Nonce& nonce,
                                  std::span<const std::uint8_t> secret) {
  Digest k = ProvisionKey(secret, measurement, nonce);
  SealedKeyBundle b;
  b.nonce = nonce;
  b.wrapped_key = ApplyKeystream(k, key.Serialize());
  b.result_public_key = result_key.Serialize();
  b.tag = BundleTag(k, b);
  return b;
}

struct Enclave::State {
  std::string kernel_id;
  KernelConfig config;
  Measurement measurement;
  Bytes secret;
  std::optional<paillier::PrivateKey> key;
  std::optional<paillier::PublicKey> result_key;
  std::uint64_t meter = 0;
  EnclaveOptions options;
  std::unique_ptr<RandomSource> rng;

  State(std::string id, KernelConfig cfg, Bytes s, EnclaveOptions opts)
      : kernel_id(std::move(id)),
        config(cfg),
        measurement(Measure(kernel_id, config.Serialize())),
        secret(std::move(s)),
        options(opts) {
    if (kernel_id.empty()) throw InvalidArgument("kernel id must be non-empty");
    if (options.insecure_seed) {
      rng = std::make_unique<InsecureSeededRandom>(*options.insecure_seed);
    } else {
      rng = std::make_unique<SystemRandom>();
    }
  }

  void RequireKey() const {
    if (!key || !result_key) {
      throw AttestationError("enclave has not been provisioned with keys");
    }
  }

  EncryptedStatResult Finish(TestKind test,
                             std::span<const std::uint64_t> totals,
                             std::uint64_t decryptions) {
    EncryptedStatResult out;
    out.test = test;
    out.decryptions_used = decryptions;
    mpz_class half = result_key->n() / 2;
    for (DecodedField& f : EvaluateKernel(test, totals, config)) {
      std::int64_t fixed = ToFixedPoint(f.value);
      mpz_class magnitude(static_cast<long>(fixed < 0 ? -fixed : fixed));
      if (magnitude >= half) {
        throw Error(ErrorCode::kCrypto,
                    "result key too small for fixed-point field " + f.label);
      }
      out.fields.push_back(EncryptedField{
          f.label, fixed < 0, paillier::Encrypt(*result_key, magnitude, *rng)});
    }
    return out;
  }
};

Enclave::Enclave(std::unique_ptr<State> state) : state_(std::move(state)) {}

Enclave::Enclave(std::string kernel_id, KernelConfig config,
                 paillier::PrivateKey sealed_key,
                 paillier::PublicKey result_key, EnclaveOptions options)
    : state_(std::make_unique<State>(std::move(kernel_id), config,
                                     DefaultProvisioningSecret(), options)) {
  state_->key.emplace(std::move(sealed_key));
  state_->result_key.emplace(std::move(result_key));
}

Enclave Enclave::Launch(std::string kernel_id, KernelConfig config,
                        Bytes provisioning_secret, EnclaveOptions options) {
  return Enclave(std::make_unique<State>(std::move(kernel_id), config,
                                         std::move(provisioning_secret),
                                         options));
}

Enclave::Enclave(Enclave&&) noexcept = default;
Enclave& Enclave::operator=(Enclave&&) noexcept = default;
Enclave::~Enclave() = default;

const Measurement& Enclave::measurement() const { return state_->measurement; }

bool Enclave::provisioned() const {
  return state_->key.has_value() && state_->result_key.has_value();
}

std::uint64_t Enclave::decryption_meter() const { return state_->meter; }

const paillier::PublicKey& Enclave::result_key() const {
  state_->RequireKey();
  return *state_->result_key;
}

AttestationReport Enclave::Attest(const Nonce& nonce) const {
  return AttestationReport{state_->measurement, nonce,
                           SignReport(state_->secret, state_->measurement,
                                      nonce)};
}

void Enclave::Provision(const SealedKeyBundle& bundle) {
  Digest k = ProvisionKey(state_->secret, state_->measurement, bundle.nonce);
  if (!ConstantTimeEqual(bundle.tag, BundleTag(k, bundle))) {
    throw AttestationError("key bundle was not sealed for this enclave");
  }
  auto key = paillier::PrivateKey::Deserialize(
      ApplyKeystream(k, bundle.wrapped_key));
  auto result = paillier::PublicKey::Deserialize(bundle.result_public_key);
  state_->key.emplace(std::move(key));
  state_->result_key.emplace(std::move(result));
}

EncryptedStatResult Enclave::ComputeHybrid(TestKind test,
                                           const EncryptedCountVector& totals) {
  state_->RequireKey();
  totals.Validate(test);
  auto plain = kernels::DecryptAll(state_->options.exec, *state_->key,
                                   totals.ciphertexts);
  state_->meter += plain.size();
  std::vector<std::uint64_t> counts;
  counts.reserve(plain.size());
  for (const auto& v : plain) counts.push_back(ToCount(v));
  return state_->Finish(test, counts, plain.size());
}

EncryptedStatResult Enclave::ComputeSecureHw(
    TestKind test, std::span<const EncryptedCountVector> per_owner) {
  state_->RequireKey();
  if (per_owner.empty()) throw InvalidArgument("no owner responses");
  for (const auto& v : per_owner) {
    v.Validate(test);
    if (v.layout != per_owner.front().layout) {
      throw ProtocolError("owner '" + v.owner_id +
                          "' uses a different category layout");
    }
  }
  std::vector<paillier::Ciphertext> flat;
  for (const auto& v : per_owner) {
    flat.insert(flat.end(), v.ciphertexts.begin(), v.ciphertexts.end());
  }
  auto plain = kernels::DecryptAll(state_->options.exec, *state_->key, flat);
  state_->meter += plain.size();

  const std::size_t categories = CategoryCount(test);
  std::vector<mpz_class> sums(categories);
  for (std::size_t k = 0; k < plain.size(); ++k) sums[k % categories] += plain[k];
  std::vector<std::uint64_t> counts;
  for (const auto& s : sums) counts.push_back(ToCount(s));
  return state_->Finish(test, counts, plain.size());
}

AttestationReport Attest(const Enclave& h, const Measurement& expected,
                         const Nonce& nonce) {
  if (h.measurement() != expected) {
    throw AttestationError("enclave measurement " + h.measurement().hex() +
                           " does not match expected " + expected.hex());
  }
  return h.Attest(nonce);
}

std::int64_t ToFixedPoint(double value) {
  if (!std::isfinite(value)) {
    throw StatisticsError("statistic is not finite");
  }
  double scaled = std::round(std::fabs(value) * kResultScale);
  if (scaled >= static_cast<double>(kPlausibleMagnitude)) {
    throw StatisticsError("statistic too large for fixed-point transport");
  }
  auto magnitude = static_cast<std::int64_t>(scaled);
  return value < 0 ? -magnitude : magnitude;
}

std::vector<DecodedField> DecodeResult(const paillier::PrivateKey& result_key,
                                       const EncryptedStatResult& result) {
  if (result.scale <= 0) throw ProtocolError("non-positive result scale");
  const mpz_class half = result_key.n() / 2;
  std::vector<DecodedField> out;
  for (const EncryptedField& f : result.fields) {
    mpz_class m = paillier::Decrypt(result_key, f.magnitude);
    if (m >= half || m > mpz_class(static_cast<long>(kPlausibleMagnitude))) {
      throw Error(ErrorCode::kCrypto,
                  "result field '" + f.label +
                      "' failed the integrity check (wrong key?)");
    }
    double v = static_cast<double>(mpz_get_si(m.get_mpz_t())) /
               static_cast<double>(result.scale);
    out.push_back(DecodedField{f.label, f.negative ? -v : v});
  }
  return out;
}

std::vector<DecodedField> EvaluateKernel(TestKind test,
                                         std::span<const std::uint64_t> totals,
                                         const KernelConfig& config) {
  if (totals.size() != CategoryCount(test)) {
    throw ProtocolError("kernel input has the wrong number of categories");
  }
  auto labels = FieldLabels(test);
  std::vector<double> values;
  switch (test) {
    case TestKind::kLd: {
      auto r = stats::Ld({totals[0], totals[1], totals[2], totals[3]});
      values = {r.d, r.d_prime, r.r_squared};
      break;
    }
    case TestKind::kHwe: {
      auto r = stats::Hwe({totals[0], totals[1], totals[2]});
      values = {r.statistic, r.p_value};
      break;
    }
    case TestKind::kCatt:
    case TestKind::kFet: {
      // Layout: AA/case, AA/control, Aa/case, Aa/control, aa/case, aa/control.
      stats::ContingencyTable2x3 t;
      for (int g = 0; g < 3; ++g) {
        t.cases[g] = totals[2 * g];
        t.controls[g] = totals[2 * g + 1];
      }
      if (test == TestKind::kCatt) {
        auto r = stats::Catt(t, config.catt_weights);
        values = {r.statistic, r.p_value};
      } else {
        values = {stats::Fet(t)};
      }
      break;
    }
  }
  std::vector<DecodedField> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back(DecodedField{labels[i], values[i]});
  }
  return out;
}

}  // namespace fedgwas::enclave
