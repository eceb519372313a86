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


// Plaintext association statistics over aggregated counts. These are the
// computations the enclave runs after decrypting totals, and they are
// usable directly as the reference for the encrypted pipeline.

#ifndef FEDGWAS_STATS_H_
#define FEDGWAS_STATS_H_

#include <array>
#include <cstdint>
#include <vector>

namespace fedgwas {

// Serial loops are the reference; parallel ones use OpenMP.
enum class Exec { kSerial, kParallel };

}  // namespace fedgwas

namespace fedgwas::stats {

// Two bi-allelic loci with alleles (a, A) and (b, B); lowercase is the first
// allele listed for the locus. Field order matches the wire layout, e.g.
// CA, TA, CG, TG for loci C/T and A/G.
struct HaplotypeCounts {
  std::uint64_t n_ab = 0;
  std::uint64_t n_Ab = 0;
  std::uint64_t n_aB = 0;
  std::uint64_t n_AB = 0;

  std::uint64_t total() const { return n_ab + n_Ab + n_aB + n_AB; }
};

// n_AA is homozygous for the first allele (CC at a C/T locus).
struct GenotypeCounts {
  std::uint64_t n_AA = 0;
  std::uint64_t n_Aa = 0;
  std::uint64_t n_aa = 0;

  std::uint64_t total() const { return n_AA + n_Aa + n_aa; }
};

// Columns are genotypes (AA, Aa, aa); rows are cases and controls.
struct ContingencyTable2x3 {
  std::array<std::uint64_t, 3> cases{};
  std::array<std::uint64_t, 3> controls{};

  std::uint64_t case_total() const { return cases[0] + cases[1] + cases[2]; }
  std::uint64_t control_total() const {
    return controls[0] + controls[1] + controls[2];
  }
  std::uint64_t column(int i) const { return cases[i] + controls[i]; }
  std::uint64_t total() const { return case_total() + control_total(); }
};

struct LdResult {
  double d = 0;
  double d_prime = 0;
  double r_squared = 0;
};

struct ChiSquareResult {
  double statistic = 0;
  double p_value = 1;
};

using TrendWeights = std::array<double, 3>;
inline constexpr TrendWeights kAdditiveWeights = {0.0, 1.0, 2.0};

// D, Lewontin's D' and r^2. Throws StatisticsError on an empty table or a
// monomorphic locus.
LdResult Ld(const HaplotypeCounts& h);

// Pearson goodness-of-fit against HWE proportions, 1 degree of freedom.
ChiSquareResult Hwe(const GenotypeCounts& g);

// Cochran-Armitage trend test, 1 degree of freedom.
ChiSquareResult Catt(const ContingencyTable2x3& t,
                     const TrendWeights& weights = kAdditiveWeights);

// Freeman-Halton exact test: sum of the hypergeometric probabilities of all
// margin-consistent tables that are no more likely than the observed one.
double Fet(const ContingencyTable2x3& t, Exec exec = Exec::kSerial);

// Probability of every table sharing t's margins, in enumeration order.
std::vector<double> MarginConsistentProbabilities(const ContingencyTable2x3& t);

// Upper tail of the chi-square distribution.
double ChiSquareSf(double x, int df);

// Regularized upper incomplete gamma Q(a, x).
double RegularizedGammaQ(double a, double x);

}  // namespace fedgwas::stats

#endif  // FEDGWAS_STATS_H_
