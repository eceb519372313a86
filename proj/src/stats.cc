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


#include "fedgwas/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedgwas/error.h"
#include "fedgwas/kernels.h"

namespace fedgwas::stats {
namespace {

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 10000;

// P(a, x) by its power series; converges quickly for x < a + 1.
double GammaPSeries(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by modified Lentz continued fraction; used for x >= a + 1.
double GammaQContinuedFraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double RegularizedGammaQ(double a, double x) {
  if (!(a > 0) || !(x >= 0)) {
    throw InvalidArgument("incomplete gamma needs a > 0 and x >= 0");
  }
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - GammaPSeries(a, x);
  return GammaQContinuedFraction(a, x);
}

double ChiSquareSf(double x, int df) {
  if (df <= 0) throw InvalidArgument("chi-square needs positive df");
  if (!(x >= 0)) throw InvalidArgument("chi-square statistic must be >= 0");
  double q = RegularizedGammaQ(df / 2.0, x / 2.0);
  // Keep the p-value in (0, 1] when the tail underflows.
  return std::clamp(q, std::numeric_limits<double>::min(), 1.0);
}

LdResult Ld(const HaplotypeCounts& h) {
  const std::uint64_t total = h.total();
  if (total == 0) throw StatisticsError("LD over an empty haplotype table");
  const double n = static_cast<double>(total);
  const double p_ab = h.n_ab / n;
  const double p_a = (h.n_ab + h.n_aB) / n;  // first allele at locus 1
  const double p_b = (h.n_ab + h.n_Ab) / n;  // first allele at locus 2
  if (h.n_ab + h.n_aB == 0 || h.n_Ab + h.n_AB == 0) {
    throw StatisticsError("LD undefined: first locus is monomorphic");
  }
  if (h.n_ab + h.n_Ab == 0 || h.n_aB + h.n_AB == 0) {
    throw StatisticsError("LD undefined: second locus is monomorphic");
  }
  const double q_a = 1.0 - p_a;
  const double q_b = 1.0 - p_b;

  LdResult r;
  r.d = p_ab - p_a * p_b;
  if (r.d > 0) {
    r.d_prime = r.d / std::min(p_a * q_b, q_a * p_b);
  } else if (r.d < 0) {
    r.d_prime = r.d / std::min(p_a * p_b, q_a * q_b);
  }
  r.r_squared = r.d * r.d / (p_a * q_a * p_b * q_b);
  return r;
}

ChiSquareResult Hwe(const GenotypeCounts& g) {
  const std::uint64_t total = g.total();
  if (total == 0) throw StatisticsError("HWE over an empty genotype table");
  const double n = static_cast<double>(total);
  const double p = g.n_AA / n + 0.5 * (g.n_Aa / n);
  const double q = 1.0 - p;
  if (2 * g.n_AA + g.n_Aa == 0 || 2 * g.n_aa + g.n_Aa == 0) {
    throw StatisticsError("HWE undefined: locus is monomorphic");
  }
  const double e_AA = n * p * p;
  const double e_Aa = 2.0 * n * p * q;
  const double e_aa = n * q * q;
  const double d_AA = g.n_AA - e_AA;
  const double d_Aa = g.n_Aa - e_Aa;
  const double d_aa = g.n_aa - e_aa;

  ChiSquareResult r;
  r.statistic = d_AA * d_AA / e_AA + d_Aa * d_Aa / e_Aa + d_aa * d_aa / e_aa;
  r.p_value = ChiSquareSf(r.statistic, 1);
  return r;
}

ChiSquareResult Catt(const ContingencyTable2x3& t,
                     const TrendWeights& weights) {
  const double cases = static_cast<double>(t.case_total());
  const double controls = static_cast<double>(t.control_total());
  if (t.case_total() == 0 || t.control_total() == 0) {
    throw StatisticsError("CATT needs at least one case and one control");
  }
  const double n = cases + controls;

  // Degenerate iff every populated column carries the same weight.
  bool varies = false;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      varies |= t.column(i) > 0 && t.column(j) > 0 && weights[i] != weights[j];
    }
  }
  if (!varies) {
    throw StatisticsError("CATT undefined: trend statistic has zero variance");
  }

  // Weights are centred on their column-weighted mean. T is unchanged because
  // the cell terms c_i R - r_i C sum to zero, and
  // sum w_i^2 n_i (N - n_i) - 2 sum_{i<j} w_i w_j n_i n_j
  //   = N sum n_i (w_i - mean)^2,
  // so this is the textbook T^2 / Var(T) without the cancellation.
  double mean = 0;
  for (int i = 0; i < 3; ++i) mean += weights[i] * t.column(i);
  mean /= n;
  double trend = 0;
  double spread = 0;
  for (int i = 0; i < 3; ++i) {
    const double w = weights[i] - mean;
    trend += w * (t.cases[i] * controls - t.controls[i] * cases);
    spread += w * w * static_cast<double>(t.column(i));
  }
  const double variance = cases * controls * spread;

  ChiSquareResult r;
  r.statistic = trend * trend / variance;
  r.p_value = ChiSquareSf(r.statistic, 1);
  return r;
}

double Fet(const ContingencyTable2x3& t, Exec exec) {
  if (t.total() == 0) throw StatisticsError("FET over an empty table");
  if (t.case_total() == 0 || t.control_total() == 0) {
    throw StatisticsError("FET needs a non-empty case row and control row");
  }
  return exec == Exec::kParallel ? kernels::parallel::FreemanHaltonPValue(t)
                                 : kernels::serial::FreemanHaltonPValue(t);
}

std::vector<double> MarginConsistentProbabilities(
    const ContingencyTable2x3& t) {
  return kernels::serial::MarginConsistentProbabilities(t);
}

}  // namespace fedgwas::stats
