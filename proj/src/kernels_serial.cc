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


#include "fedgwas/kernels.h"
#include "kernels_common.h"

namespace fedgwas::kernels::serial {

std::vector<double> MarginConsistentProbabilities(
    const stats::ContingencyTable2x3& t) {
  internal::FetFrame f(t);
  std::vector<double> out;
  for (std::int64_t x0 = f.Low0(); x0 <= f.High0(); ++x0) {
    for (std::int64_t x1 = f.Low1(x0); x1 <= f.High1(x0); ++x1) {
      out.push_back(f.Probability(x0, x1, f.cases - x0 - x1));
    }
  }
  return out;
}

double FreemanHaltonPValue(const stats::ContingencyTable2x3& t) {
  internal::FetFrame f(t);
  const double observed =
      f.Probability(static_cast<std::int64_t>(t.cases[0]),
                    static_cast<std::int64_t>(t.cases[1]),
                    static_cast<std::int64_t>(t.cases[2]));
  const double cutoff = observed * (1.0 + internal::kFetTieTolerance);
  double p = 0;
  for (std::int64_t x0 = f.Low0(); x0 <= f.High0(); ++x0) {
    for (std::int64_t x1 = f.Low1(x0); x1 <= f.High1(x0); ++x1) {
      double q = f.Probability(x0, x1, f.cases - x0 - x1);
      if (q <= cutoff) p += q;
    }
  }
  return std::min(p, 1.0);
}

std::vector<paillier::Ciphertext> EncryptAll(
    const paillier::PublicKey& pk, std::span<const std::uint64_t> plaintexts,
    RandomSource& rng) {
  auto nonces = internal::DrawNonces(pk, plaintexts.size(), rng);
  std::vector<paillier::Ciphertext> out;
  out.reserve(plaintexts.size());
  for (std::size_t i = 0; i < plaintexts.size(); ++i) {
    out.push_back(paillier::EncryptWithNonce(
        pk, mpz_class(static_cast<unsigned long>(plaintexts[i])), nonces[i]));
  }
  return out;
}

std::vector<mpz_class> DecryptAll(const paillier::PrivateKey& sk,
                                  std::span<const paillier::Ciphertext> cs) {
  std::vector<mpz_class> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(paillier::Decrypt(sk, c));
  return out;
}

std::vector<paillier::Ciphertext> AggregateColumns(
    const paillier::PublicKey& pk,
    std::span<const std::vector<paillier::Ciphertext>> per_owner) {
  internal::CheckUniformLayout(per_owner);
  std::vector<paillier::Ciphertext> out = per_owner.front();
  for (const auto& c : out) {
    if (c.key_fingerprint() != pk.fingerprint()) {
      throw Error(ErrorCode::kKeyMismatch, "ciphertext under a foreign key");
    }
  }
  for (std::size_t k = 1; k < per_owner.size(); ++k) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = paillier::Add(pk, out[i], per_owner[k][i]);
    }
  }
  return out;
}

stats::ContingencyTable2x3 CountGenotypes(const GenotypeColumn& column) {
  if (column.genotype.size() != column.is_case.size()) {
    throw InvalidArgument("genotype and phenotype columns differ in length");
  }
  stats::ContingencyTable2x3 t;
  for (std::size_t i = 0; i < column.genotype.size(); ++i) {
    int g = internal::GenotypeIndex(column.genotype[i]);
    if (column.is_case[i]) {
      ++t.cases[g];
    } else {
      ++t.controls[g];
    }
  }
  return t;
}

}  // namespace fedgwas::kernels::serial
