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

#include <cmath>
#include <random>
#include <vector>

#include "fedgwas/error.h"
#include "gtest/gtest.h"

namespace fedgwas::stats {
namespace {

// ---- Independent oracles -------------------------------------------------

// Chi-square upper tail by composite Simpson integration of the density
// after t = u^2, which leaves a smooth integrand 2 u^(df-1) e^(-u^2/2) / norm.
double ChiSquareSfByQuadrature(double x, int df) {
  const double k = df / 2.0;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  auto g = [&](double u) {
    if (u == 0) return df == 1 ? 2 * std::exp(log_norm) : 0.0;
    return 2 * std::exp(log_norm + (df - 1) * std::log(u) - u * u / 2);
  };
  const int steps = 200000;
  const double hi = std::sqrt(x);
  const double h = hi / steps;
  double s = g(0) + g(hi);
  for (int i = 1; i < steps; ++i) s += g(i * h) * (i % 2 ? 4 : 2);
  return 1 - s * h / 3;
}

// Cochran-Armitage statistic as N * r^2, r being the Pearson correlation
// between the case indicator and the genotype weight over individuals.
double CattByCorrelation(const ContingencyTable2x3& t, const TrendWeights& w) {
  std::vector<std::pair<double, double>> people;
  for (int g = 0; g < 3; ++g) {
    for (std::uint64_t i = 0; i < t.cases[g]; ++i) people.push_back({w[g], 1});
    for (std::uint64_t i = 0; i < t.controls[g]; ++i) {
      people.push_back({w[g], 0});
    }
  }
  const double n = static_cast<double>(people.size());
  double mx = 0, my = 0;
  for (auto [x, y] : people) mx += x, my += y;
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (auto [x, y] : people) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  return n * sxy * sxy / (sxx * syy);
}

// Brute-force over every assignment of the six cells in [0, N], keeping
// those with matching margins. Returns {sum of probabilities, p-value}.
std::pair<double, double> FetByBruteForce(const ContingencyTable2x3& t) {
  const int n = static_cast<int>(t.total());
  auto lf = [](double k) { return std::lgamma(k + 1); };
  const double C = t.case_total(), R = t.control_total();
  double n_col[3];
  for (int i = 0; i < 3; ++i) n_col[i] = t.column(i);
  auto prob = [&](int a, int b, int c, int d, int e, int f) {
    return std::exp(lf(n_col[0]) + lf(n_col[1]) + lf(n_col[2]) + lf(C) +
                    lf(R) - lf(n) - lf(a) - lf(b) - lf(c) - lf(d) - lf(e) -
                    lf(f));
  };
  const double observed = prob(t.cases[0], t.cases[1], t.cases[2],
                               t.controls[0], t.controls[1], t.controls[2]);
  double total = 0, p = 0;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b)
      for (int c = 0; a + b + c <= n; ++c) {
        if (a + b + c != C) continue;
        for (int d = 0; d <= n; ++d)
          for (int e = 0; d + e <= n; ++e) {
            int f = n - a - b - c - d - e;
            if (f < 0) continue;
            if (a + d != n_col[0] || b + e != n_col[1] || c + f != n_col[2]) {
              continue;
            }
            double q = prob(a, b, c, d, e, f);
            total += q;
            if (q <= observed * (1 + 1e-12)) p += q;
          }
      }
  return {total, p};
}

ContingencyTable2x3 RandomTable(std::mt19937_64& gen, int max_total) {
  ContingencyTable2x3 t;
  do {
    std::uniform_int_distribution<int> cell(0, max_total / 6);
    for (int i = 0; i < 3; ++i) {
      t.cases[i] = cell(gen);
      t.controls[i] = cell(gen);
    }
  } while (t.case_total() == 0 || t.control_total() == 0);
  return t;
}

// ---- LD ------------------------------------------------------------------

TEST(LdTest, IndependenceGivesZero) {
  LdResult r = Ld({10, 10, 10, 10});
  EXPECT_EQ(r.d, 0);
  EXPECT_EQ(r.d_prime, 0);
  EXPECT_EQ(r.r_squared, 0);
}

TEST(LdTest, WorkedExample) {
  // p(CA) = 0.3, both marginals 0.4: D = 0.3 - 0.16, Dmax = 0.4 * 0.6.
  LdResult r = Ld({30, 10, 10, 50});
  EXPECT_NEAR(r.d, 0.14, 1e-15);
  EXPECT_NEAR(r.d_prime, 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(r.r_squared, 49.0 / 144.0, 1e-15);
}

TEST(LdTest, NegativeDisequilibriumUsesOtherMaximum) {
  // p(ab) = 0.1, p(a.) = 0.4, p(.b) = 0.4: D = -0.06, Dmax = min(.16, .36).
  LdResult r = Ld({10, 30, 30, 30});
  EXPECT_NEAR(r.d, -0.06, 1e-15);
  EXPECT_NEAR(r.d_prime, -0.375, 1e-15);
  EXPECT_NEAR(r.r_squared, 0.0036 / 0.0576, 1e-14);
}

TEST(LdTest, MonomorphicAndEmptyAreErrors) {
  EXPECT_THROW(Ld({0, 0, 0, 0}), Error);
  EXPECT_THROW(Ld({5, 5, 0, 0}), Error);  // second locus fixed
  EXPECT_THROW(Ld({5, 0, 5, 0}), Error);  // first locus fixed
  try {
    Ld({0, 4, 0, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStatistics);
  }
}

TEST(LdPropertyTest, TransposeAndScaleInvariance) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::uint64_t> cell(1, 200);
  for (int trial = 0; trial < 500; ++trial) {
    HaplotypeCounts h{cell(gen), cell(gen), cell(gen), cell(gen)};
    LdResult r = Ld(h);
    LdResult t = Ld({h.n_ab, h.n_aB, h.n_Ab, h.n_AB});
    EXPECT_NEAR(std::fabs(r.d), std::fabs(t.d), 1e-12);
    EXPECT_NEAR(std::fabs(r.d_prime), std::fabs(t.d_prime), 1e-12);
    EXPECT_NEAR(r.r_squared, t.r_squared, 1e-12);
    std::uint64_t k = 1 + gen() % 7;
    LdResult s = Ld({k * h.n_ab, k * h.n_Ab, k * h.n_aB, k * h.n_AB});
    EXPECT_NEAR(r.d, s.d, 1e-12);
    EXPECT_NEAR(r.d_prime, s.d_prime, 1e-12);
    EXPECT_NEAR(r.r_squared, s.r_squared, 1e-12);
    EXPECT_GE(r.d, -0.25);
    EXPECT_LE(r.d, 0.25);
    EXPECT_GE(r.d_prime, -1 - 1e-12);
    EXPECT_LE(r.d_prime, 1 + 1e-12);
    EXPECT_GE(r.r_squared, 0);
    EXPECT_LE(r.r_squared, 1 + 1e-12);
  }
}

// ---- HWE -----------------------------------------------------------------

TEST(HweTest, ExactProportionsGiveZero) {
  ChiSquareResult r = Hwe({25, 50, 25});
  EXPECT_EQ(r.statistic, 0);
  EXPECT_EQ(r.p_value, 1);
}

TEST(HweTest, PooledExampleCounts) {
  // P_C = 2/3, expected (16/3, 16/3, 4/3): 1/12 + 1/3 + 1/3.
  ChiSquareResult r = Hwe({6, 4, 2});
  EXPECT_NEAR(r.statistic, 0.75, 1e-14);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(0.375)), 1e-10);
}

TEST(HweTest, DegenerateInputsAreErrors) {
  EXPECT_THROW(Hwe({0, 0, 0}), Error);
  EXPECT_THROW(Hwe({10, 0, 0}), Error);
  EXPECT_THROW(Hwe({0, 0, 10}), Error);
}

TEST(HwePropertyTest, ZeroExactlyAtExpectedCounts) {
  // (p^2, 2pq, q^2) * n is integral for n = 4 m^2 style choices.
  for (std::uint64_t a = 1; a < 20; ++a) {
    for (std::uint64_t b = 1; b < 20; ++b) {
      // Allele counts a, b; genotype counts a^2, 2ab, b^2 (n = (a+b)^2).
      ChiSquareResult r = Hwe({a * a, 2 * a * b, b * b});
      EXPECT_NEAR(r.statistic, 0, 1e-9);
    }
  }
  EXPECT_GT(Hwe({10, 1, 1}).statistic, 0);
}

// ---- CATT ----------------------------------------------------------------

TEST(CattTest, IdenticalRowsGiveZero) {
  ChiSquareResult r = Catt({{5, 5, 5}, {5, 5, 5}});
  EXPECT_EQ(r.statistic, 0);
  EXPECT_EQ(r.p_value, 1);
}

TEST(CattTest, MatchesCorrelationOracle) {
  ContingencyTable2x3 t{{10, 20, 30}, {30, 20, 10}};
  ChiSquareResult r = Catt(t);
  double expected = CattByCorrelation(t, kAdditiveWeights);
  EXPECT_NEAR(r.statistic, expected, 1e-10 * expected);
  // Columns 40 each, mean weight 1: T = 2400, Var = 60 * 60 * 80.
  EXPECT_NEAR(r.statistic, 20.0, 1e-12);
  EXPECT_NEAR(r.p_value, ChiSquareSf(20.0, 1), 0);
}

TEST(CattTest, AffineWeights) {
  ContingencyTable2x3 t{{10, 20, 30}, {30, 20, 10}};
  EXPECT_NEAR(Catt(t, {0, 1, 2}).statistic, Catt(t, {5, 15, 25}).statistic,
              1e-9 * 20);
}

TEST(CattTest, DegenerateInputsAreErrors) {
  EXPECT_THROW(Catt({{5, 5, 5}, {0, 0, 0}}), Error);
  EXPECT_THROW(Catt({{0, 0, 0}, {5, 5, 5}}), Error);
  // Only one populated column: no trend to measure.
  EXPECT_THROW(Catt({{0, 7, 0}, {0, 3, 0}}), Error);
  // Two columns with equal weight.
  EXPECT_THROW(Catt({{1, 2, 0}, {3, 4, 0}}, {1, 1, 5}), Error);
}

TEST(CattPropertyTest, RandomTablesAgreeWithOracleAndInvariances) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> a_dist(0.01, 10), b_dist(-10, 10);
  for (int trial = 0; trial < 300; ++trial) {
    ContingencyTable2x3 t = RandomTable(gen, 120);
    int populated = (t.column(0) > 0) + (t.column(1) > 0) + (t.column(2) > 0);
    if (populated < 2) continue;
    double base = Catt(t).statistic;
    EXPECT_NEAR(base, CattByCorrelation(t, kAdditiveWeights),
                1e-9 * std::max(1.0, base));
    double a = a_dist(gen), b = b_dist(gen);
    double shifted = Catt(t, {b, a + b, 2 * a + b}).statistic;
    EXPECT_NEAR(shifted, base, 1e-9 * base + 1e-12);
    ContingencyTable2x3 swapped{t.controls, t.cases};
    EXPECT_NEAR(Catt(swapped).statistic, base, 1e-12 * std::max(1.0, base));
  }
}

// ---- FET -----------------------------------------------------------------

TEST(FetTest, BalancedTwoByTwo) {
  // Probabilities 1/6, 4/6, 1/6; observed is the most likely table.
  EXPECT_NEAR(Fet({{1, 1, 0}, {1, 1, 0}}), 1.0, 1e-12);
}

TEST(FetTest, ClassicTwoByTwo) {
  // Hypergeometric weights 1, 16, 36, 16, 1 over 70; observed weight 16.
  EXPECT_NEAR(Fet({{3, 1, 0}, {1, 3, 0}}), 34.0 / 70.0, 1e-12);
}

TEST(FetTest, EmptyRowsAreErrors) {
  EXPECT_THROW(Fet({{5, 5, 0}, {0, 0, 0}}), Error);
  EXPECT_THROW(Fet({{0, 0, 0}, {1, 2, 3}}), Error);
  EXPECT_THROW(Fet({{0, 0, 0}, {0, 0, 0}}), Error);
}

TEST(FetTest, SingleArrangementGivesOne) {
  // Only one populated column: every margin-consistent table is this one.
  EXPECT_NEAR(Fet({{0, 4, 0}, {0, 3, 0}}), 1.0, 1e-12);
  EXPECT_EQ(MarginConsistentProbabilities({{0, 4, 0}, {0, 3, 0}}).size(), 1u);
}

TEST(FetPropertyTest, AgreesWithBruteForceAndNormalizes) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 60; ++trial) {
    ContingencyTable2x3 t = RandomTable(gen, 24);
    auto [total, p_oracle] = FetByBruteForce(t);
    EXPECT_NEAR(total, 1.0, 1e-9);
    double p = Fet(t);
    EXPECT_NEAR(p, p_oracle, 1e-9);
    EXPECT_GT(p, 0);
    EXPECT_LE(p, 1);
    double sum = 0;
    for (double q : MarginConsistentProbabilities(t)) sum += q;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(Fet(t, Exec::kParallel), p);
  }
}

// ---- chi-square tail -----------------------------------------------------

TEST(ChiSquareSfTest, BasicValues) {
  EXPECT_EQ(ChiSquareSf(0, 1), 1);
  EXPECT_NEAR(ChiSquareSf(3.841, 1), 0.05, 1e-3);
  EXPECT_NEAR(ChiSquareSf(3.841458820694124, 1), 0.05, 1e-10);
  EXPECT_THROW(ChiSquareSf(-1, 1), Error);
  EXPECT_THROW(ChiSquareSf(1, 0), Error);
  EXPECT_GT(ChiSquareSf(5000, 1), 0);
}

TEST(ChiSquareSfTest, MatchesQuadratureOracle) {
  for (int df : {1, 2, 3, 4, 6}) {
    for (double x : {0.01, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0}) {
      EXPECT_NEAR(ChiSquareSf(x, df), ChiSquareSfByQuadrature(x, df), 1e-8)
          << "df=" << df << " x=" << x;
    }
  }
}

TEST(ChiSquareSfTest, MatchesClosedFormForOneDf) {
  for (double x = 0; x < 60; x += 0.37) {
    EXPECT_NEAR(ChiSquareSf(x, 1), std::erfc(std::sqrt(x / 2)), 1e-10);
  }
}

TEST(ChiSquareSfTest, MonotoneNonIncreasing) {
  double prev = 1;
  for (double x = 0; x < 100; x += 0.05) {
    double v = ChiSquareSf(x, 1);
    EXPECT_LE(v, prev);
    EXPECT_GT(v, 0);
    prev = v;
  }
}

}  // namespace
}  // namespace fedgwas::stats
