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


// Domain types shared by the enclave, protocol and federation layers.

#ifndef FEDGWAS_TYPES_H_
#define FEDGWAS_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedgwas/paillier.h"

namespace fedgwas {

enum class TestKind : std::uint8_t { kLd, kHwe, kCatt, kFet };

inline constexpr TestKind kAllTests[] = {TestKind::kLd, TestKind::kHwe,
                                         TestKind::kCatt, TestKind::kFet};

std::string_view TestKindName(TestKind kind);  // "ld", "hwe", ...
TestKind ParseTestKind(std::string_view name);

// Ciphertexts per owner response: LD 4, HWE 3, CATT and FET 6.
std::size_t CategoryCount(TestKind kind);
// Loci named in a query: 2 for LD, 1 otherwise.
std::size_t LocusCount(TestKind kind);
// Labels of the statistic fields returned to the researcher.
std::vector<std::string> FieldLabels(TestKind kind);

enum class Mode : std::uint8_t { kHybrid, kSecureHw };

std::string_view ModeName(Mode mode);  // "hybrid", "secure-hw"
Mode ParseMode(std::string_view name);

struct EncryptedCountVector {
  std::string query_id;
  std::string owner_id;
  std::vector<std::string> layout;
  std::vector<paillier::Ciphertext> ciphertexts;

  // Throws ProtocolError unless |ciphertexts| = |layout| = CategoryCount.
  void Validate(TestKind kind) const;

  friend bool operator==(const EncryptedCountVector&,
                         const EncryptedCountVector&) = default;
};

struct OwnerRoundTrip {
  std::string owner_id;
  double ms = 0;

  friend bool operator==(const OwnerRoundTrip&,
                         const OwnerRoundTrip&) = default;
};

struct TimingBreakdown {
  double communication_ms = 0;
  double computation_ms = 0;
  std::uint64_t decryptions = 0;
  std::vector<OwnerRoundTrip> per_owner;

  double total_ms() const { return communication_ms + computation_ms; }

  friend bool operator==(const TimingBreakdown&,
                         const TimingBreakdown&) = default;
};

}  // namespace fedgwas

#endif  // FEDGWAS_TYPES_H_
