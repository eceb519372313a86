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


#include <omp.h>

#include <optional>

#include "fedgwas/kernels.h"
#include "kernels_common.h"

namespace fedgwas::kernels::parallel {

std::vector<double> MarginConsistentProbabilities(
    const stats::ContingencyTable2x3& t) {
  internal::FetFrame f(t);
  const std::int64_t lo = f.Low0();
  const std::int64_t hi = f.High0();
  if (hi < lo) return {};
  // Offsets per x0 keep the output in serial enumeration order.
  std::vector<std::size_t> offset(static_cast<std::size_t>(hi - lo + 2), 0);
  for (std::int64_t x0 = lo; x0 <= hi; ++x0) {
    offset[x0 - lo + 1] =
        offset[x0 - lo] + static_cast<std::size_t>(f.High1(x0) - f.Low1(x0) + 1);
  }
  std::vector<double> out(offset.back());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t x0 = lo; x0 <= hi; ++x0) {
    std::size_t k = offset[x0 - lo];
    for (std::int64_t x1 = f.Low1(x0); x1 <= f.High1(x0); ++x1) {
      out[k++] = f.Probability(x0, x1, f.cases - x0 - x1);
    }
  }
  return out;
}

double FreemanHaltonPValue(const stats::ContingencyTable2x3& t) {
  // Summed per x0 then combined in order so the result matches the serial
  // accumulation exactly.
  internal::FetFrame f(t);
  const double observed =
      f.Probability(static_cast<std::int64_t>(t.cases[0]),
                    static_cast<std::int64_t>(t.cases[1]),
                    static_cast<std::int64_t>(t.cases[2]));
  const double cutoff = observed * (1.0 + internal::kFetTieTolerance);
  const std::int64_t lo = f.Low0();
  const std::int64_t hi = f.High0();
  if (hi < lo) return 1.0;
  std::vector<std::vector<double>> kept(static_cast<std::size_t>(hi - lo + 1));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t x0 = lo; x0 <= hi; ++x0) {
    auto& row = kept[x0 - lo];
    for (std::int64_t x1 = f.Low1(x0); x1 <= f.High1(x0); ++x1) {
      double q = f.Probability(x0, x1, f.cases - x0 - x1);
      if (q <= cutoff) row.push_back(q);
    }
  }
  double p = 0;
  for (const auto& row : kept) {
    for (double q : row) p += q;
  }
  return std::min(p, 1.0);
}

std::vector<paillier::Ciphertext> EncryptAll(
    const paillier::PublicKey& pk, std::span<const std::uint64_t> plaintexts,
    RandomSource& rng) {
  auto nonces = internal::DrawNonces(pk, plaintexts.size(), rng);
  for (std::uint64_t m : plaintexts) {
    if (mpz_class(static_cast<unsigned long>(m)) >= pk.n()) {
      throw InvalidArgument("plaintext outside [0, n)");
    }
  }
  std::vector<std::optional<paillier::Ciphertext>> slots(plaintexts.size());
  const std::int64_t count = static_cast<std::int64_t>(plaintexts.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    slots[i].emplace(paillier::EncryptWithNonce(
        pk, mpz_class(static_cast<unsigned long>(plaintexts[i])), nonces[i]));
  }
  std::vector<paillier::Ciphertext> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<mpz_class> DecryptAll(const paillier::PrivateKey& sk,
                                  std::span<const paillier::Ciphertext> cs) {
  // Validate serially so errors surface outside the parallel region.
  for (const auto& c : cs) {
    if (c.key_fingerprint() != sk.fingerprint()) {
      throw Error(ErrorCode::kKeyMismatch,
                  "ciphertext was produced under a different public key");
    }
    if (c.value() < 1 || c.value() >= sk.n_squared()) {
      throw Error(ErrorCode::kCrypto, "ciphertext value outside [1, n^2)");
    }
  }
  std::vector<mpz_class> out(cs.size());
  const std::int64_t count = static_cast<std::int64_t>(cs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    out[i] = paillier::Decrypt(sk, cs[i]);
  }
  return out;
}

std::vector<paillier::Ciphertext> AggregateColumns(
    const paillier::PublicKey& pk,
    std::span<const std::vector<paillier::Ciphertext>> per_owner) {
  internal::CheckUniformLayout(per_owner);
  const std::size_t categories = per_owner.front().size();
  for (const auto& v : per_owner) {
    for (const auto& c : v) {
      if (c.key_fingerprint() != pk.fingerprint()) {
        throw Error(ErrorCode::kKeyMismatch, "ciphertext under a foreign key");
      }
    }
  }
  std::vector<mpz_class> acc(categories);
  const std::int64_t cats = static_cast<std::int64_t>(categories);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < cats; ++i) {
    mpz_class v = per_owner.front()[i].value();
    for (std::size_t k = 1; k < per_owner.size(); ++k) {
      v *= per_owner[k][i].value();
      v %= pk.n_squared();
    }
    acc[i] = std::move(v);
  }
  std::vector<paillier::Ciphertext> out;
  out.reserve(categories);
  for (auto& v : acc) out.emplace_back(std::move(v), pk.fingerprint());
  return out;
}

stats::ContingencyTable2x3 CountGenotypes(const GenotypeColumn& column) {
  if (column.genotype.size() != column.is_case.size()) {
    throw InvalidArgument("genotype and phenotype columns differ in length");
  }
  for (std::uint8_t g : column.genotype) internal::GenotypeIndex(g);
  std::uint64_t cells[6] = {0, 0, 0, 0, 0, 0};
  const std::int64_t count = static_cast<std::int64_t>(column.genotype.size());
#pragma omp parallel for reduction(+ : cells[:6]) schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    ++cells[column.genotype[i] * 2 + (column.is_case[i] ? 0 : 1)];
  }
  stats::ContingencyTable2x3 t;
  for (int g = 0; g < 3; ++g) {
    t.cases[g] = cells[2 * g];
    t.controls[g] = cells[2 * g + 1];
  }
  return t;
}

}  // namespace fedgwas::kernels::parallel
