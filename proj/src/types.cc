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


#include "fedgwas/types.h"

#include "fedgwas/error.h"

namespace fedgwas {

std::string_view TestKindName(TestKind kind) {
  switch (kind) {
    case TestKind::kLd: return "ld";
    case TestKind::kHwe: return "hwe";
    case TestKind::kCatt: return "catt";
    case TestKind::kFet: return "fet";
  }
  return "?";
}

TestKind ParseTestKind(std::string_view name) {
  for (TestKind k : kAllTests) {
    if (TestKindName(k) == name) return k;
  }
  throw InvalidArgument("unknown test kind '" + std::string(name) + "'");
}

std::size_t CategoryCount(TestKind kind) {
  switch (kind) {
    case TestKind::kLd: return 4;
    case TestKind::kHwe: return 3;
    case TestKind::kCatt:
    case TestKind::kFet: return 6;
  }
  return 0;
}

std::size_t LocusCount(TestKind kind) { return kind == TestKind::kLd ? 2 : 1; }

std::vector<std::string> FieldLabels(TestKind kind) {
  switch (kind) {
    case TestKind::kLd: return {"d", "d_prime", "r_squared"};
    case TestKind::kHwe:
    case TestKind::kCatt: return {"statistic", "p_value"};
    case TestKind::kFet: return {"p_value"};
  }
  return {};
}

std::string_view ModeName(Mode mode) {
  return mode == Mode::kHybrid ? "hybrid" : "secure-hw";
}

Mode ParseMode(std::string_view name) {
  if (name == "hybrid") return Mode::kHybrid;
  if (name == "secure-hw" || name == "secure_hw") return Mode::kSecureHw;
  throw InvalidArgument("unknown mode '" + std::string(name) + "'");
}

void EncryptedCountVector::Validate(TestKind kind) const {
  const std::size_t want = CategoryCount(kind);
  if (layout.size() != want || ciphertexts.size() != want) {
    throw ProtocolError(std::string(TestKindName(kind)) + " expects " +
                        std::to_string(want) + " categories, owner '" +
                        owner_id + "' sent " +
                        std::to_string(ciphertexts.size()) + " ciphertexts / " +
                        std::to_string(layout.size()) + " labels");
  }
}

}  // namespace fedgwas
