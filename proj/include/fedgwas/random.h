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


#ifndef FEDGWAS_RANDOM_H_
#define FEDGWAS_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

#include <gmpxx.h>

namespace fedgwas {

// Byte-oriented randomness with helpers for big-integer sampling. Not
// thread-safe; each thread or call site holds its own instance.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual void Fill(std::span<std::uint8_t> out) = 0;

  // Uniform in [0, 2^bits).
  mpz_class UniformBits(unsigned bits);
  // Uniform in [0, bound) by rejection sampling. bound must be positive.
  mpz_class UniformBelow(const mpz_class& bound);
  std::uint64_t NextU64();
};

// OpenSSL DRBG. Fill throws Error(kCrypto) if the generator fails.
class SystemRandom final : public RandomSource {
 public:
  void Fill(std::span<std::uint8_t> out) override;
};

// Deterministic stream for reproducible tests and synthetic data. Never use
// it for key material outside of tests.
class InsecureSeededRandom final : public RandomSource {
 public:
  explicit InsecureSeededRandom(std::uint64_t seed) : engine_(seed) {}
  void Fill(std::span<std::uint8_t> out) override;

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedgwas

#endif  // FEDGWAS_RANDOM_H_
