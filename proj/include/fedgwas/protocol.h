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


// Wire format between researcher, CSP, central server and data owners.
//
// Frame: version (1 byte) ‖ msg_type (1 byte) ‖ payload_length (4 bytes,
// big-endian) ‖ payload. The payload is compact JSON with sorted keys, so
// equal messages always encode to identical bytes. Binary values (keys,
// ciphertexts, digests, nonces) travel as lowercase hex of their fixed
// binary layouts.

#ifndef FEDGWAS_PROTOCOL_H_
#define FEDGWAS_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fedgwas/bytes.h"
#include "fedgwas/enclave.h"
#include "fedgwas/error.h"
#include "fedgwas/paillier.h"
#include "fedgwas/types.h"

namespace fedgwas::protocol {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 6;
inline constexpr std::size_t kMaxPayload = 16u << 20;

enum class MsgType : std::uint8_t {
  kSubmitQuery = 1,
  kCountRequest = 2,
  kCountResponse = 3,
  kQueryResult = 4,
  kPublicKeyRequest = 5,
  kPublicKeyResponse = 6,
  kResultKeyRequest = 7,
  kResultKeyGrant = 8,
  kProvisionRequest = 9,
  kAttestChallenge = 10,
  kAttestReport = 11,
  kKeyProvision = 12,
  kPing = 13,
  kPong = 14,
  kError = 15,
};

struct Query {
  std::string query_id;
  TestKind test = TestKind::kHwe;
  std::vector<std::string> loci;
  std::string researcher_id;

  // Throws ProtocolError unless ids are non-empty and LD names two loci,
  // every other test one.
  void Validate() const;
  friend bool operator==(const Query&, const Query&) = default;
};

struct SubmitQuery {
  Query query;
  std::string token;
  friend bool operator==(const SubmitQuery&, const SubmitQuery&) = default;
};

struct CountRequest {
  Query query;
  Mode mode = Mode::kHybrid;
  std::string token;
  friend bool operator==(const CountRequest&, const CountRequest&) = default;
};

struct CountResponse {
  TestKind test = TestKind::kHwe;
  EncryptedCountVector counts;
  friend bool operator==(const CountResponse&, const CountResponse&) = default;
};

struct QueryResult {
  std::string query_id;
  enclave::EncryptedStatResult result;
  TimingBreakdown timing;
  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

struct PublicKeyRequest {
  std::string requester;
  friend bool operator==(const PublicKeyRequest&,
                         const PublicKeyRequest&) = default;
};

struct PublicKeyResponse {
  paillier::PublicKey key;
  friend bool operator==(const PublicKeyResponse&,
                         const PublicKeyResponse&) = default;
};

struct ResultKeyRequest {
  std::string researcher_id;
  std::string token;
  friend bool operator==(const ResultKeyRequest&,
                         const ResultKeyRequest&) = default;
};

struct ResultKeyGrant {
  std::string researcher_id;
  paillier::PrivateKey key;
  friend bool operator==(const ResultKeyGrant&,
                         const ResultKeyGrant&) = default;
};

// Server asks the CSP for the aggregation key for its enclave.
struct ProvisionRequest {
  enclave::Measurement measurement;
  std::string token;
  friend bool operator==(const ProvisionRequest&,
                         const ProvisionRequest&) = default;
};

struct AttestChallenge {
  enclave::Nonce nonce{};
  enclave::Measurement expected;
  friend bool operator==(const AttestChallenge&,
                         const AttestChallenge&) = default;
};

struct AttestReport {
  enclave::AttestationReport report;
  friend bool operator==(const AttestReport&, const AttestReport&) = default;
};

struct KeyProvision {
  enclave::SealedKeyBundle bundle;
  friend bool operator==(const KeyProvision&, const KeyProvision&) = default;
};

struct Ping {
  std::string query_id;
  friend bool operator==(const Ping&, const Ping&) = default;
};

struct Pong {
  std::string query_id;
  friend bool operator==(const Pong&, const Pong&) = default;
};

struct ErrorMessage {
  ErrorCode code = ErrorCode::kInternal;
  std::string detail;
  std::string query_id;
  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

using Message =
    std::variant<SubmitQuery, CountRequest, CountResponse, QueryResult,
                 PublicKeyRequest, PublicKeyResponse, ResultKeyRequest,
                 ResultKeyGrant, ProvisionRequest, AttestChallenge,
                 AttestReport, KeyProvision, Ping, Pong, ErrorMessage>;

MsgType TypeOf(const Message& m);
std::string_view MsgTypeName(MsgType t);

struct FrameHeader {
  std::uint8_t version = kVersion;
  MsgType type = MsgType::kError;
  std::uint32_t payload_length = 0;
};

// Validates version, type and length bound. Needs kHeaderSize bytes.
FrameHeader ParseHeader(std::span<const std::uint8_t> header);

// Canonical JSON payload of a message.
std::string EncodePayload(const Message& m);
Message DecodePayload(MsgType type, std::string_view payload);

// Full frame. Throws ProtocolError for payloads above kMaxPayload.
Bytes Encode(const Message& m);
// Exactly one complete frame. Every failure is a ProtocolError; a short
// buffer reports how many more bytes the frame needs.
Message Decode(std::span<const std::uint8_t> frame);

// Throws Error carrying the remote code when m is an ErrorMessage,
// ProtocolError when m holds an unexpected alternative.
template <typename T>
T Expect(Message m) {
  if (auto* e = std::get_if<ErrorMessage>(&m)) {
    throw Error(e->code, e->detail);
  }
  if (auto* v = std::get_if<T>(&m)) return std::move(*v);
  throw ProtocolError("unexpected message " +
                      std::string(MsgTypeName(TypeOf(m))));
}

}  // namespace fedgwas::protocol

#endif  // FEDGWAS_PROTOCOL_H_
