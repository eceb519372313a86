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


#include "fedgwas/protocol.h"

#include <algorithm>
#include <string>
#include <utility>

#include "json.hpp"

namespace fedgwas::protocol {
namespace {

using json = nlohmann::json;

// ---- field access ----------------------------------------------------------

const json& Field(const json& j, const char* key) {
  if (!j.is_object()) throw ProtocolError("payload is not a JSON object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string GetString(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_string()) {
    throw ProtocolError(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

double GetDouble(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_number()) {
    throw ProtocolError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::uint64_t GetU64(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_number_unsigned()) {
    throw ProtocolError(std::string("field '") + key +
                        "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool GetBool(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_boolean()) {
    throw ProtocolError(std::string("field '") + key + "' must be a boolean");
  }
  return v.get<bool>();
}

const json& GetArray(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_array()) {
    throw ProtocolError(std::string("field '") + key + "' must be an array");
  }
  return v;
}

std::vector<std::string> GetStrings(const json& j, const char* key) {
  std::vector<std::string> out;
  for (const json& v : GetArray(j, key)) {
    if (!v.is_string()) {
      throw ProtocolError(std::string("field '") + key +
                          "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

Bytes GetHex(const json& j, const char* key) {
  return FromHex(GetString(j, key));
}

template <std::size_t N>
std::array<std::uint8_t, N> GetFixed(const json& j, const char* key) {
  Bytes raw = GetHex(j, key);
  if (raw.size() != N) {
    throw ProtocolError(std::string("field '") + key + "' must be " +
                        std::to_string(N) + " bytes");
  }
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

// ---- shared value types ----------------------------------------------------

json ToJson(const Query& q) {
  return {{"query_id", q.query_id},
          {"test", TestKindName(q.test)},
          {"loci", q.loci},
          {"researcher_id", q.researcher_id}};
}

Query QueryFromJson(const json& j) {
  Query q;
  q.query_id = GetString(j, "query_id");
  q.test = ParseTestKind(GetString(j, "test"));
  q.loci = GetStrings(j, "loci");
  q.researcher_id = GetString(j, "researcher_id");
  q.Validate();
  return q;
}

json CiphertextsToJson(const std::vector<paillier::Ciphertext>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back(ToHex(c.Serialize()));
  return out;
}

json ToJson(const EncryptedCountVector& v) {
  return {{"query_id", v.query_id},
          {"owner_id", v.owner_id},
          {"layout", v.layout},
          {"ciphertexts", CiphertextsToJson(v.ciphertexts)}};
}

EncryptedCountVector CountsFromJson(const json& j) {
  EncryptedCountVector v;
  v.query_id = GetString(j, "query_id");
  v.owner_id = GetString(j, "owner_id");
  v.layout = GetStrings(j, "layout");
  for (const json& c : GetArray(j, "ciphertexts")) {
    if (!c.is_string()) throw ProtocolError("ciphertexts must be hex strings");
    v.ciphertexts.push_back(
        paillier::Ciphertext::Deserialize(FromHex(c.get<std::string>())));
  }
  return v;
}

json ToJson(const enclave::EncryptedStatResult& r) {
  json fields = json::array();
  for (const auto& f : r.fields) {
    fields.push_back({{"label", f.label},
                      {"negative", f.negative},
                      {"magnitude", ToHex(f.magnitude.Serialize())}});
  }
  return {{"test", TestKindName(r.test)},
          {"scale", r.scale},
          {"decryptions_used", r.decryptions_used},
          {"fields", std::move(fields)}};
}

enclave::EncryptedStatResult StatResultFromJson(const json& j) {
  enclave::EncryptedStatResult r;
  r.test = ParseTestKind(GetString(j, "test"));
  r.scale = static_cast<std::int64_t>(GetU64(j, "scale"));
  if (r.scale != enclave::kResultScale) {
    throw ProtocolError("unsupported result scale");
  }
  r.decryptions_used = GetU64(j, "decryptions_used");
  for (const json& f : GetArray(j, "fields")) {
    r.fields.push_back(enclave::EncryptedField{
        GetString(f, "label"), GetBool(f, "negative"),
        paillier::Ciphertext::Deserialize(GetHex(f, "magnitude"))});
  }
  auto labels = FieldLabels(r.test);
  if (r.fields.size() != labels.size()) {
    throw ProtocolError("result carries the wrong number of fields");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (r.fields[i].label != labels[i]) {
      throw ProtocolError("unexpected result field '" + r.fields[i].label +
                          "'");
    }
  }
  return r;
}

json ToJson(const TimingBreakdown& t) {
  json owners = json::array();
  for (const auto& o : t.per_owner) {
    owners.push_back({{"owner_id", o.owner_id}, {"ms", o.ms}});
  }
  return {{"communication_ms", t.communication_ms},
          {"computation_ms", t.computation_ms},
          {"decryptions", t.decryptions},
          {"per_owner", std::move(owners)}};
}

TimingBreakdown TimingFromJson(const json& j) {
  TimingBreakdown t;
  t.communication_ms = GetDouble(j, "communication_ms");
  t.computation_ms = GetDouble(j, "computation_ms");
  t.decryptions = GetU64(j, "decryptions");
  for (const json& o : GetArray(j, "per_owner")) {
    t.per_owner.push_back({GetString(o, "owner_id"), GetDouble(o, "ms")});
  }
  return t;
}

// ---- messages --------------------------------------------------------------

json ToJson(const SubmitQuery& m) {
  return {{"query", ToJson(m.query)}, {"token", m.token}};
}
json ToJson(const CountRequest& m) {
  return {{"query", ToJson(m.query)},
          {"mode", ModeName(m.mode)},
          {"token", m.token}};
}
json ToJson(const CountResponse& m) {
  return {{"test", TestKindName(m.test)}, {"counts", ToJson(m.counts)}};
}
json ToJson(const QueryResult& m) {
  return {{"query_id", m.query_id},
          {"result", ToJson(m.result)},
          {"timing", ToJson(m.timing)}};
}
json ToJson(const PublicKeyRequest& m) { return {{"requester", m.requester}}; }
json ToJson(const PublicKeyResponse& m) {
  return {{"public_key", ToHex(m.key.Serialize())}};
}
json ToJson(const ResultKeyRequest& m) {
  return {{"researcher_id", m.researcher_id}, {"token", m.token}};
}
json ToJson(const ResultKeyGrant& m) {
  return {{"researcher_id", m.researcher_id},
          {"private_key", ToHex(m.key.Serialize())}};
}
json ToJson(const ProvisionRequest& m) {
  return {{"measurement", m.measurement.hex()}, {"token", m.token}};
}
json ToJson(const AttestChallenge& m) {
  return {{"nonce", ToHex(m.nonce)}, {"expected", m.expected.hex()}};
}
json ToJson(const AttestReport& m) {
  return {{"measurement", m.report.measurement.hex()},
          {"nonce", ToHex(m.report.nonce)},
          {"signature", ToHex(m.report.signature)}};
}
json ToJson(const KeyProvision& m) {
  return {{"nonce", ToHex(m.bundle.nonce)},
          {"wrapped_key", ToHex(m.bundle.wrapped_key)},
          {"result_public_key", ToHex(m.bundle.result_public_key)},
          {"tag", ToHex(m.bundle.tag)}};
}
json ToJson(const Ping& m) { return {{"query_id", m.query_id}}; }
json ToJson(const Pong& m) { return {{"query_id", m.query_id}}; }
json ToJson(const ErrorMessage& m) {
  return {{"code", ErrorCodeName(m.code)},
          {"detail", m.detail},
          {"query_id", m.query_id}};
}

Message FromJson(MsgType type, const json& j) {
  switch (type) {
    case MsgType::kSubmitQuery:
      return SubmitQuery{QueryFromJson(Field(j, "query")),
                         GetString(j, "token")};
    case MsgType::kCountRequest:
      return CountRequest{QueryFromJson(Field(j, "query")),
                          ParseMode(GetString(j, "mode")),
                          GetString(j, "token")};
    case MsgType::kCountResponse: {
      CountResponse m{ParseTestKind(GetString(j, "test")),
                      CountsFromJson(Field(j, "counts"))};
      m.counts.Validate(m.test);
      return m;
    }
    case MsgType::kQueryResult:
      return QueryResult{GetString(j, "query_id"),
                         StatResultFromJson(Field(j, "result")),
                         TimingFromJson(Field(j, "timing"))};
    case MsgType::kPublicKeyRequest:
      return PublicKeyRequest{GetString(j, "requester")};
    case MsgType::kPublicKeyResponse:
      return PublicKeyResponse{
          paillier::PublicKey::Deserialize(GetHex(j, "public_key"))};
    case MsgType::kResultKeyRequest:
      return ResultKeyRequest{GetString(j, "researcher_id"),
                              GetString(j, "token")};
    case MsgType::kResultKeyGrant:
      return ResultKeyGrant{
          GetString(j, "researcher_id"),
          paillier::PrivateKey::Deserialize(GetHex(j, "private_key"))};
    case MsgType::kProvisionRequest:
      return ProvisionRequest{
          enclave::Measurement{GetFixed<32>(j, "measurement")},
          GetString(j, "token")};
    case MsgType::kAttestChallenge:
      return AttestChallenge{GetFixed<16>(j, "nonce"),
                             enclave::Measurement{GetFixed<32>(j, "expected")}};
    case MsgType::kAttestReport:
      return AttestReport{enclave::AttestationReport{
          enclave::Measurement{GetFixed<32>(j, "measurement")},
          GetFixed<16>(j, "nonce"), GetFixed<32>(j, "signature")}};
    case MsgType::kKeyProvision:
      return KeyProvision{enclave::SealedKeyBundle{
          GetFixed<16>(j, "nonce"), GetHex(j, "wrapped_key"),
          GetHex(j, "result_public_key"), GetFixed<32>(j, "tag")}};
    case MsgType::kPing:
      return Ping{GetString(j, "query_id")};
    case MsgType::kPong:
      return Pong{GetString(j, "query_id")};
    case MsgType::kError: {
      std::string code = GetString(j, "code");
      return ErrorMessage{ErrorCodeFromName(code), GetString(j, "detail"),
                          GetString(j, "query_id")};
    }
  }
  throw ProtocolError("unknown message type");
}

bool KnownType(std::uint8_t t) {
  return t >= static_cast<std::uint8_t>(MsgType::kSubmitQuery) &&
         t <= static_cast<std::uint8_t>(MsgType::kError);
}

}  // namespace

void Query::Validate() const {
  if (query_id.empty()) throw ProtocolError("query_id must be non-empty");
  if (loci.size() != LocusCount(test)) {
    throw ProtocolError(std::string(TestKindName(test)) + " takes " +
                        std::to_string(LocusCount(test)) + " loci, got " +
                        std::to_string(loci.size()));
  }
  for (const auto& l : loci) {
    if (l.empty()) throw ProtocolError("locus identifier must be non-empty");
  }
}

MsgType TypeOf(const Message& m) {
  return static_cast<MsgType>(m.index() + 1);
}

std::string_view MsgTypeName(MsgType t) {
  switch (t) {
    case MsgType::kSubmitQuery: return "SubmitQuery";
    case MsgType::kCountRequest: return "CountRequest";
    case MsgType::kCountResponse: return "CountResponse";
    case MsgType::kQueryResult: return "QueryResult";
    case MsgType::kPublicKeyRequest: return "PublicKeyRequest";
    case MsgType::kPublicKeyResponse: return "PublicKeyResponse";
    case MsgType::kResultKeyRequest: return "ResultKeyRequest";
    case MsgType::kResultKeyGrant: return "ResultKeyGrant";
    case MsgType::kProvisionRequest: return "ProvisionRequest";
    case MsgType::kAttestChallenge: return "AttestChallenge";
    case MsgType::kAttestReport: return "AttestReport";
    case MsgType::kKeyProvision: return "KeyProvision";
    case MsgType::kPing: return "Ping";
    case MsgType::kPong: return "Pong";
    case MsgType::kError: return "Error";
  }
  return "Unknown";
}

FrameHeader ParseHeader(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) {
    throw ProtocolError("truncated frame header: need " +
                        std::to_string(kHeaderSize - header.size()) +
                        " more bytes");
  }
  if (header[0] != kVersion) {
    throw ProtocolError("unsupported protocol version " +
                        std::to_string(header[0]));
  }
  if (!KnownType(header[1])) {
    throw ProtocolError("unknown message type " + std::to_string(header[1]));
  }
  FrameHeader h;
  h.version = header[0];
  h.type = static_cast<MsgType>(header[1]);
  h.payload_length = (std::uint32_t{header[2]} << 24) |
                     (std::uint32_t{header[3]} << 16) |
                     (std::uint32_t{header[4]} << 8) | std::uint32_t{header[5]};
  if (h.payload_length > kMaxPayload) {
    throw ProtocolError("payload length " + std::to_string(h.payload_length) +
                        " exceeds the 16 MiB limit");
  }
  return h;
}

std::string EncodePayload(const Message& m) {
  json j = std::visit([](const auto& v) { return ToJson(v); }, m);
  try {
    return j.dump();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("message is not encodable: ") + e.what());
  }
}

Message DecodePayload(MsgType type, std::string_view payload) {
  json j = json::parse(payload.begin(), payload.end(), nullptr, false);
  if (j.is_discarded()) throw ProtocolError("payload is not valid JSON");
  try {
    return FromJson(type, j);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) throw;
    throw ProtocolError(std::string("malformed ") +
                        std::string(MsgTypeName(type)) + ": " + e.what());
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed ") +
                        std::string(MsgTypeName(type)) + ": " + e.what());
  }
}

Bytes Encode(const Message& m) {
  std::string payload = EncodePayload(m);
  if (payload.size() > kMaxPayload) {
    throw ProtocolError("payload of " + std::to_string(payload.size()) +
                        " bytes exceeds the 16 MiB limit");
  }
  ByteWriter w;
  Bytes out;
  out.reserve(kHeaderSize + payload.size());
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(TypeOf(m)));
  w.PutU32(static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), w.bytes().begin(), w.bytes().end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Message Decode(std::span<const std::uint8_t> frame) {
  FrameHeader h = ParseHeader(frame);
  const std::size_t have = frame.size() - kHeaderSize;
  if (have < h.payload_length) {
    throw ProtocolError("truncated frame: need " +
                        std::to_string(h.payload_length - have) +
                        " more bytes");
  }
  if (have > h.payload_length) {
    throw ProtocolError("frame carries " +
                        std::to_string(have - h.payload_length) +
                        " bytes beyond its payload_length");
  }
  auto payload = frame.subspan(kHeaderSize);
  return DecodePayload(
      h.type, std::string_view(reinterpret_cast<const char*>(payload.data()),
                               payload.size()));
}

}  // namespace fedgwas::protocol
