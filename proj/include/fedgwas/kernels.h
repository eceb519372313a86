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


// Data-parallel inner loops of the pipeline. Every kernel exists twice: a
// plain serial loop kept as the reference, and an OpenMP version with the
// same signature and bit-identical output. Tests compare the two and the
// benchmark target times them.

#ifndef FEDGWAS_KERNELS_H_
#define FEDGWAS_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "fedgwas/paillier.h"
#include "fedgwas/random.h"
#include "fedgwas/stats.h"

namespace fedgwas::kernels {

// Genotype code per subject: 0 = AA, 1 = Aa, 2 = aa. Phenotype: 1 = case.
struct GenotypeColumn {
  std::span<const std::uint8_t> genotype;
  std::span<const std::uint8_t> is_case;
};

namespace serial {

std::vector<double> MarginConsistentProbabilities(
    const stats::ContingencyTable2x3& t);
double FreemanHaltonPValue(const stats::ContingencyTable2x3& t);

// Nonces are drawn from rng in order before any exponentiation, so both
// variants produce identical ciphertexts from identically seeded sources.
std::vector<paillier::Ciphertext> EncryptAll(
    const paillier::PublicKey& pk, std::span<const std::uint64_t> plaintexts,
    RandomSource& rng);
std::vector<mpz_class> DecryptAll(const paillier::PrivateKey& sk,
                                  std::span<const paillier::Ciphertext> cs);
// per_owner[k][i] is owner k's ciphertext for category i; result[i] is the
// homomorphic sum over owners.
std::vector<paillier::Ciphertext> AggregateColumns(
    const paillier::PublicKey& pk,
    std::span<const std::vector<paillier::Ciphertext>> per_owner);
stats::ContingencyTable2x3 CountGenotypes(const GenotypeColumn& column);

}  // namespace serial

namespace parallel {

std::vector<double> MarginConsistentProbabilities(
    const stats::ContingencyTable2x3& t);
double FreemanHaltonPValue(const stats::ContingencyTable2x3& t);
std::vector<paillier::Ciphertext> EncryptAll(
    const paillier::PublicKey& pk, std::span<const std::uint64_t> plaintexts,
    RandomSource& rng);
std::vector<mpz_class> DecryptAll(const paillier::PrivateKey& sk,
                                  std::span<const paillier::Ciphertext> cs);
std::vector<paillier::Ciphertext> AggregateColumns(
    const paillier::PublicKey& pk,
    std::span<const std::vector<paillier::Ciphertext>> per_owner);
stats::ContingencyTable2x3 CountGenotypes(const GenotypeColumn& column);

}  // namespace parallel

inline std::vector<mpz_class> DecryptAll(
    Exec exec, const paillier::PrivateKey& sk,
    std::span<const paillier::Ciphertext> cs) {
  return exec == Exec::kParallel ? parallel::DecryptAll(sk, cs)
                                 : serial::DecryptAll(sk, cs);
}
inline std::vector<paillier::Ciphertext> EncryptAll(
    Exec exec, const paillier::PublicKey& pk,
    std::span<const std::uint64_t> plaintexts, RandomSource& rng) {
  return exec == Exec::kParallel ? parallel::EncryptAll(pk, plaintexts, rng)
                                 : serial::EncryptAll(pk, plaintexts, rng);
}
inline std::vector<paillier::Ciphertext> AggregateColumns(
    Exec exec, const paillier::PublicKey& pk,
    std::span<const std::vector<paillier::Ciphertext>> per_owner) {
  return exec == Exec::kParallel ? parallel::AggregateColumns(pk, per_owner)
                                 : serial::AggregateColumns(pk, per_owner);
}
inline stats::ContingencyTable2x3 CountGenotypes(Exec exec,
                                                 const GenotypeColumn& c) {
  return exec == Exec::kParallel ? parallel::CountGenotypes(c)
                                 : serial::CountGenotypes(c);
}

}  // namespace fedgwas::kernels

#endif  // FEDGWAS_KERNELS_H_
