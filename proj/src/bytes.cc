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


#include "fedgwas/bytes.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "fedgwas/error.h"

namespace fedgwas {
namespace {

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string ToHex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes FromHex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw InvalidArgument("hex string of odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = HexValue(hex[2 * i]);
    int lo = HexValue(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InvalidArgument("invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest Sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    throw Error(ErrorCode::kCrypto, "SHA-256 failed");
  }
  return out;
}

Digest HmacSha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
           data.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    throw Error(ErrorCode::kCrypto, "HMAC-SHA-256 failed");
  }
  return out;
}

Bytes ToBigEndian(const mpz_class& value) {
  if (sgn(value) < 0) throw InvalidArgument("negative big integer");
  if (value == 0) return {};
  std::size_t count = (mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8;
  Bytes out(count);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, value.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class FromBigEndian(std::span<const std::uint8_t> data) {
  mpz_class v;
  if (!data.empty()) {
    mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  }
  return v;
}

void ByteWriter::PutU32(std::uint32_t v) {
  out_.push_back(static_cast<std::uint8_t>(v >> 24));
  out_.push_back(static_cast<std::uint8_t>(v >> 16));
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
  out_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::PutRaw(std::span<const std::uint8_t> data) {
  out_.insert(out_.end(), data.begin(), data.end());
}

void ByteWriter::PutLengthPrefixed(std::span<const std::uint8_t> data) {
  PutU32(static_cast<std::uint32_t>(data.size()));
  PutRaw(data);
}

std::uint32_t ByteReader::GetU32() {
  auto b = GetRaw(4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::span<const std::uint8_t> ByteReader::GetRaw(std::size_t n) {
  if (data_.size() - pos_ < n) {
    throw InvalidArgument("truncated binary field: need " + std::to_string(n) +
                          " bytes, have " +
                          std::to_string(data_.size() - pos_));
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::span<const std::uint8_t> ByteReader::GetLengthPrefixed() {
  return GetRaw(GetU32());
}

void ByteReader::ExpectDone() const {
  if (!done()) throw InvalidArgument("trailing bytes after binary field");
}

}  // namespace fedgwas
