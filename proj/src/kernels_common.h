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


// Shared helpers for the serial and parallel kernel translation units.

#ifndef FEDGWAS_SRC_KERNELS_COMMON_H_
#define FEDGWAS_SRC_KERNELS_COMMON_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fedgwas/error.h"
#include "fedgwas/paillier.h"
#include "fedgwas/stats.h"

namespace fedgwas::kernels::internal {

// Relative slack when deciding whether a table is as extreme as observed.
inline constexpr double kFetTieTolerance = 1e-12;

// Margins of a 2x3 table plus a log-factorial table up to N.
struct FetFrame {
  std::int64_t cases;
  std::int64_t n[3];
  std::vector<double> log_factorial;
  double log_constant;  // log(prod n_i! * C! * R! / N!)

  explicit FetFrame(const stats::ContingencyTable2x3& t) {
    cases = static_cast<std::int64_t>(t.case_total());
    const std::int64_t controls = static_cast<std::int64_t>(t.control_total());
    const std::int64_t total = cases + controls;
    for (int i = 0; i < 3; ++i) n[i] = static_cast<std::int64_t>(t.column(i));
    log_factorial.resize(static_cast<std::size_t>(total) + 1);
    log_factorial[0] = 0;
    for (std::int64_t k = 1; k <= total; ++k) {
      log_factorial[k] = log_factorial[k - 1] + std::log(static_cast<double>(k));
    }
    log_constant = log_factorial[n[0]] + log_factorial[n[1]] +
                   log_factorial[n[2]] + log_factorial[cases] +
                   log_factorial[controls] - log_factorial[total];
  }

  // Hypergeometric probability of the table whose case row is (x0, x1, x2).
  double Probability(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    const auto& lf = log_factorial;
    return std::exp(log_constant - lf[x0] - lf[x1] - lf[x2] - lf[n[0] - x0] -
                    lf[n[1] - x1] - lf[n[2] - x2]);
  }

  // Feasible range of the second case cell given the first.
  std::int64_t Low1(std::int64_t x0) const {
    return std::max<std::int64_t>(0, cases - x0 - n[2]);
  }
  std::int64_t High1(std::int64_t x0) const {
    return std::min<std::int64_t>(n[1], cases - x0);
  }
  std::int64_t Low0() const {
    return std::max<std::int64_t>(0, cases - n[1] - n[2]);
  }
  std::int64_t High0() const { return std::min<std::int64_t>(n[0], cases); }
};

inline void CheckUniformLayout(
    std::span<const std::vector<paillier::Ciphertext>> per_owner) {
  if (per_owner.empty()) throw InvalidArgument("no owner vectors to aggregate");
  for (const auto& v : per_owner) {
    if (v.size() != per_owner.front().size() || v.empty()) {
      throw ProtocolError("owner vectors have inconsistent category counts");
    }
  }
}

inline std::vector<mpz_class> DrawNonces(const paillier::PublicKey& pk,
                                         std::size_t count,
                                         RandomSource& rng) {
  std::vector<mpz_class> nonces;
  nonces.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    nonces.push_back(paillier::DrawNonce(pk, rng));
  }
  return nonces;
}

inline int GenotypeIndex(std::uint8_t code) {
  if (code > 2) throw InvalidArgument("genotype code outside {0, 1, 2}");
  return code;
}

}  // namespace fedgwas::kernels::internal

#endif  // FEDGWAS_SRC_KERNELS_COMMON_H_
