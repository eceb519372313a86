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


#include "fedgwas/random.h"

#include <openssl/rand.h>

#include <vector>

#include "fedgwas/bytes.h"
#include "fedgwas/error.h"

namespace fedgwas {

mpz_class RandomSource::UniformBits(unsigned bits) {
  if (bits == 0) return 0;
  std::vector<std::uint8_t> buf((bits + 7) / 8);
  Fill(buf);
  unsigned excess = static_cast<unsigned>(buf.size() * 8 - bits);
  buf[0] &= static_cast<std::uint8_t>(0xffu >> excess);
  return FromBigEndian(buf);
}

mpz_class RandomSource::UniformBelow(const mpz_class& bound) {
  if (bound <= 0) throw InvalidArgument("sampling bound must be positive");
  unsigned bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  // Each draw succeeds with probability > 1/2.
  for (int attempt = 0; attempt < 1024; ++attempt) {
    mpz_class candidate = UniformBits(bits);
    if (candidate < bound) return candidate;
  }
  throw Error(ErrorCode::kCrypto, "rejection sampling exhausted its budget");
}

std::uint64_t RandomSource::NextU64() {
  std::uint8_t buf[8];
  Fill(buf);
  std::uint64_t v = 0;
  for (std::uint8_t b : buf) v = (v << 8) | b;
  return v;
}

void SystemRandom::Fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(ErrorCode::kCrypto, "system randomness source failed");
  }
}

void InsecureSeededRandom::Fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = engine_();
    for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
      out[i] = static_cast<std::uint8_t>(word >> (8 * k));
    }
  }
}

}  // namespace fedgwas
