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


#ifndef FEDGWAS_BYTES_H_
#define FEDGWAS_BYTES_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace fedgwas {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

std::string ToHex(std::span<const std::uint8_t> data);
// Throws InvalidArgument on odd length or non-hex characters.
Bytes FromHex(std::string_view hex);

Digest Sha256(std::span<const std::uint8_t> data);
Digest HmacSha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> data);

inline std::span<const std::uint8_t> AsBytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Big-endian magnitude, no leading zero bytes; zero encodes as empty.
Bytes ToBigEndian(const mpz_class& value);
mpz_class FromBigEndian(std::span<const std::uint8_t> data);

// Append-only builder for the fixed binary layouts (key, ciphertext).
class ByteWriter {
 public:
  void PutU32(std::uint32_t v);
  void PutRaw(std::span<const std::uint8_t> data);
  // u32 big-endian length followed by the bytes.
  void PutLengthPrefixed(std::span<const std::uint8_t> data);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint32_t GetU32();
  std::span<const std::uint8_t> GetRaw(std::size_t n);
  std::span<const std::uint8_t> GetLengthPrefixed();

  bool done() const { return pos_ == data_.size(); }
  // Throws unless all input was consumed.
  void ExpectDone() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace fedgwas

#endif  // FEDGWAS_BYTES_H_
