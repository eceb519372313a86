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


#include "fedgwas/federation.h"

#include <chrono>
#include <future>
#include <thread>
#include <utility>

#include "fedgwas/error.h"
#include "fedgwas/kernels.h"

namespace fedgwas::federation {
namespace {

using Clock = std::chrono::steady_clock;
using protocol::Expect;
using protocol::Message;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::unique_ptr<RandomSource> MakeRandom(std::optional<std::uint64_t> seed,
                                         std::uint64_t salt) {
  if (seed) return std::make_unique<InsecureSeededRandom>(*seed ^ salt);
  return std::make_unique<SystemRandom>();
}

paillier::KeyPair MakeKeys(const CspOptions& o, std::uint64_t salt) {
  auto rng = MakeRandom(o.insecure_seed, salt);
  paillier::KeygenOptions kopts;
  kopts.insecure_test = o.insecure_keys;
  return paillier::GenerateKeyPair(o.key_bits, *rng, kopts);
}

void CheckToken(const std::string& expected, const std::string& got,
                const std::string& what) {
  if (!expected.empty() && expected != got) {
    throw Error(ErrorCode::kUnauthorized, what + ": bad token");
  }
}

// Salts that keep the seeded streams of different roles apart.
constexpr std::uint64_t kAggregationSalt = 0x6167677265676174ull;
constexpr std::uint64_t kResultSalt = 0x726573756c74ull;
constexpr std::uint64_t kNonceSalt = 0x6e6f6e6365ull;

}  // namespace

// ---- owner -------------------------------------------------------------

OwnerNode::OwnerNode(GenotypeDataset data, net::Address csp,
                     OwnerOptions options)
    : data_(std::move(data)),
      csp_(std::move(csp)),
      options_(std::move(options)),
      rng_(MakeRandom(options_.insecure_seed,
                      std::hash<std::string>{}(options_.owner_id))),
      server_("owner:" + options_.owner_id,
              [this](const Message& m) { return Handle(m); }, options_.tap) {}

OwnerNode::~OwnerNode() { Stop(); }

void OwnerNode::Start(const net::Address& listen) {
  net::Client csp(csp_, "owner:" + options_.owner_id, options_.timeout,
                  options_.tap);
  key_ = Expect<protocol::PublicKeyResponse>(
             csp.Call(protocol::PublicKeyRequest{options_.owner_id}))
             .key;
  table_ = PrecompTable::Build(data_, {}, options_.exec);
  server_.Start(listen);
}

void OwnerNode::Stop() { server_.Stop(); }

void OwnerNode::InjectLegDelay() const {
  if (options_.latency_ms > 0) {
    std::this_thread::sleep_for(
        std::chrono::duration<double, std::milli>(options_.latency_ms / 2));
  }
}

Message OwnerNode::Handle(const Message& request) {
  InjectLegDelay();
  Message reply;
  if (const auto* ping = std::get_if<protocol::Ping>(&request)) {
    reply = protocol::Pong{ping->query_id};
  } else if (const auto* req = std::get_if<protocol::CountRequest>(&request)) {
    try {
      CheckToken(options_.server_token, req->token, "count request");
      std::lock_guard lock(rng_mu_);
      reply = protocol::CountResponse{
          req->query.test,
          OwnerAnswer(req->query, options_.owner_id, table_, *key_, *rng_,
                      options_.exec)};
    } catch (const Error& e) {
      reply = protocol::ErrorMessage{e.code(), e.what(), req->query.query_id};
    }
  } else {
    reply = protocol::ErrorMessage{
        ErrorCode::kProtocol,
        "owner does not accept " +
            std::string(protocol::MsgTypeName(protocol::TypeOf(request))),
        ""};
  }
  InjectLegDelay();
  return reply;
}

// ---- CSP ---------------------------------------------------------------

CspNode::CspNode(CspOptions options)
    : options_(std::move(options)),
      aggregation_(MakeKeys(options_, kAggregationSalt)),
      result_(MakeKeys(options_, kResultSalt)),
      rng_(MakeRandom(options_.insecure_seed, kNonceSalt)),
      verifier_(options_.provisioning_secret),
      server_("csp", [this](const Message& m) { return Handle(m); },
              options_.tap) {}

CspNode::~CspNode() { Stop(); }

void CspNode::Start(const net::Address& listen) { server_.Start(listen); }
void CspNode::Stop() { server_.Stop(); }

std::uint64_t CspNode::provisions_granted() const {
  std::lock_guard lock(mu_);
  return granted_;
}

std::uint64_t CspNode::provisions_refused() const {
  std::lock_guard lock(mu_);
  return refused_;
}

Message CspNode::Handle(const Message& request) {
  if (std::holds_alternative<protocol::PublicKeyRequest>(request)) {
    return protocol::PublicKeyResponse{aggregation_.public_key};
  }
  if (const auto* r = std::get_if<protocol::ResultKeyRequest>(&request)) {
    auto it = options_.researchers.find(r->researcher_id);
    if (it == options_.researchers.end() || it->second != r->token) {
      return protocol::ErrorMessage{
          ErrorCode::kUnauthorized,
          "researcher '" + r->researcher_id + "' is not authorized", ""};
    }
    return protocol::ResultKeyGrant{r->researcher_id, result_.private_key};
  }
  if (const auto* p = std::get_if<protocol::ProvisionRequest>(&request)) {
    CheckToken(options_.server_token, p->token, "provision request");
    std::lock_guard lock(mu_);
    return protocol::AttestChallenge{verifier_.IssueNonce(*rng_),
                                     options_.expected};
  }
  if (const auto* a = std::get_if<protocol::AttestReport>(&request)) {
    std::lock_guard lock(mu_);
    try {
      verifier_.Verify(a->report, options_.expected);
    } catch (const Error& e) {
      ++refused_;
      return protocol::ErrorMessage{
          ErrorCode::kAttestation,
          std::string("key provision refused: ") + e.what(), ""};
    }
    ++granted_;
    return protocol::KeyProvision{enclave::SealKeyForEnclave(
        aggregation_.private_key, result_.public_key, a->report.measurement,
        a->report.nonce, options_.provisioning_secret)};
  }
  return protocol::ErrorMessage{
      ErrorCode::kProtocol,
      "csp does not accept " +
          std::string(protocol::MsgTypeName(protocol::TypeOf(request))),
      ""};
}

// ---- server ------------------------------------------------------------

ServerNode::ServerNode(ServerOptions options)
    : options_(std::move(options)),
      enclave_(enclave::Enclave::Launch(
          options_.kernel_id, options_.kernel_config,
          options_.provisioning_secret,
          enclave::EnclaveOptions{options_.exec, options_.insecure_seed})),
      server_("server", [this](const Message& m) { return Handle(m); },
              options_.tap) {}

ServerNode::~ServerNode() { Stop(); }

void ServerNode::Provision() {
  net::Client csp(options_.csp, "server", options_.timeout, options_.tap);
  key_ = Expect<protocol::PublicKeyResponse>(
             csp.Call(protocol::PublicKeyRequest{"server"}))
             .key;
  auto challenge = Expect<protocol::AttestChallenge>(
      csp.Call(protocol::ProvisionRequest{measurement(), options_.token}));
  enclave::AttestationReport report;
  {
    std::lock_guard lock(enclave_mu_);
    report = enclave_.Attest(challenge.nonce);
  }
  auto grant = Expect<protocol::KeyProvision>(
      csp.Call(protocol::AttestReport{report}));
  std::lock_guard lock(enclave_mu_);
  enclave_.Provision(grant.bundle);
  provision_error_.reset();
}

void ServerNode::Start(const net::Address& listen) {
  try {
    Provision();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAttestation) throw;
    provision_error_ = e.what();
  }
  server_.Start(listen);
}

void ServerNode::Stop() { server_.Stop(); }

bool ServerNode::provisioned() const {
  std::lock_guard lock(enclave_mu_);
  return enclave_.provisioned();
}

const enclave::Measurement& ServerNode::measurement() const {
  return enclave_.measurement();
}

std::uint64_t ServerNode::decryption_meter() const {
  std::lock_guard lock(enclave_mu_);
  return enclave_.decryption_meter();
}

EncryptedCountVector ServerNode::AskOwner(const OwnerEndpoint& owner,
                                          const protocol::Query& query) {
  const protocol::CountRequest request{query, options_.mode, options_.token};
  for (int attempt = 0;; ++attempt) {
    try {
      net::Client client(owner.address, "server", options_.timeout,
                         options_.tap);
      auto response = Expect<protocol::CountResponse>(client.Call(request));
      if (response.counts.query_id != query.query_id) {
        throw ProtocolError("owner " + owner.owner_id +
                            " answered unknown query_id '" +
                            response.counts.query_id + "'");
      }
      if (response.counts.owner_id != owner.owner_id ||
          response.test != query.test) {
        throw ProtocolError("owner " + owner.owner_id +
                            " answered with mismatched identity or test");
      }
      return std::move(response.counts);
    } catch (const Error& e) {
      const bool transient =
          e.code() == ErrorCode::kTimeout || e.code() == ErrorCode::kIo;
      if (!transient) throw;
      if (attempt >= options_.retries) {
        throw Error(ErrorCode::kTimeout, "owner " + owner.owner_id +
                                             " did not answer: " + e.what());
      }
    }
  }
}

std::vector<EncryptedCountVector> ServerNode::Collect(
    const protocol::Query& query, TimingBreakdown& timing) {
  std::vector<std::future<EncryptedCountVector>> pending;
  std::vector<double> round_trip(options_.owners.size());
  for (std::size_t i = 0; i < options_.owners.size(); ++i) {
    pending.push_back(std::async(std::launch::async, [this, i, &query,
                                                      &round_trip] {
      auto start = Clock::now();
      auto v = AskOwner(options_.owners[i], query);
      round_trip[i] = MillisSince(start);
      return v;
    }));
  }
  std::vector<EncryptedCountVector> out;
  std::optional<Error> first_error;
  for (auto& f : pending) {
    try {
      out.push_back(f.get());
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;
  for (std::size_t i = 0; i < options_.owners.size(); ++i) {
    timing.per_owner.push_back({options_.owners[i].owner_id, round_trip[i]});
  }
  return out;
}

ServerNode::Outcome ServerNode::Execute(const protocol::Query& query) {
  query.Validate();
  if (options_.owners.empty()) throw InvalidArgument("server has no owners");
  if (!provisioned()) {
    throw AttestationError(
        "enclave holds no key: " +
        provision_error_.value_or("provisioning has not run"));
  }
  Outcome out;
  auto comm_start = Clock::now();
  std::vector<EncryptedCountVector> responses = Collect(query, out.timing);
  out.timing.communication_ms = MillisSince(comm_start);

  for (const auto& r : responses) {
    if (r.layout != responses.front().layout) {
      throw ProtocolError("owner " + r.owner_id +
                          " used a different category layout");
    }
  }

  auto compute_start = Clock::now();
  if (options_.mode == Mode::kHybrid) {
    std::vector<std::vector<paillier::Ciphertext>> columns;
    columns.reserve(responses.size());
    for (auto& r : responses) columns.push_back(std::move(r.ciphertexts));
    EncryptedCountVector totals{query.query_id, "aggregate",
                                responses.front().layout, {}};
    std::lock_guard lock(enclave_mu_);
    totals.ciphertexts =
        kernels::AggregateColumns(options_.exec, *key_, columns);
    out.result = enclave_.ComputeHybrid(query.test, totals);
  } else {
    std::lock_guard lock(enclave_mu_);
    out.result = enclave_.ComputeSecureHw(query.test, responses);
  }
  out.timing.computation_ms = MillisSince(compute_start);
  out.timing.decryptions = out.result.decryptions_used;
  return out;
}

Message ServerNode::Handle(const Message& request) {
  const auto* submit = std::get_if<protocol::SubmitQuery>(&request);
  if (!submit) {
    return protocol::ErrorMessage{
        ErrorCode::kProtocol,
        "server does not accept " +
            std::string(protocol::MsgTypeName(protocol::TypeOf(request))),
        ""};
  }
  const auto& q = submit->query;
  try {
    if (!options_.researchers.empty()) {
      auto it = options_.researchers.find(q.researcher_id);
      if (it == options_.researchers.end() || it->second != submit->token) {
        throw Error(ErrorCode::kUnauthorized,
                    "researcher '" + q.researcher_id + "' is not authorized");
      }
    }
    Outcome o = Execute(q);
    return protocol::QueryResult{q.query_id, std::move(o.result),
                                 std::move(o.timing)};
  } catch (const Error& e) {
    return protocol::ErrorMessage{e.code(), e.what(), q.query_id};
  }
}

// ---- researcher --------------------------------------------------------

double ResearchResult::value(std::string_view label) const {
  for (const auto& f : fields) {
    if (f.label == label) return f.value;
  }
  throw InvalidArgument("result has no field '" + std::string(label) + "'");
}

ResearcherClient::ResearcherClient(std::string researcher_id,
                                   std::string token, net::Address server,
                                   net::Address csp, net::Millis timeout,
                                   net::FrameTap tap)
    : id_(std::move(researcher_id)),
      token_(std::move(token)),
      server_(std::move(server)),
      csp_(std::move(csp)),
      timeout_(timeout),
      tap_(std::move(tap)) {
  SystemRandom rng;
  Bytes salt(4);
  rng.Fill(salt);
  prefix_ = id_ + "-" + ToHex(salt);
}

void ResearcherClient::FetchResultKey() {
  net::Client csp(csp_, "researcher", timeout_, tap_);
  auto grant = Expect<protocol::ResultKeyGrant>(
      csp.Call(protocol::ResultKeyRequest{id_, token_}));
  result_key_ = std::move(grant.key);
}

ResearchResult ResearcherClient::Run(protocol::Query query) {
  if (!result_key_) FetchResultKey();
  if (query.researcher_id.empty()) query.researcher_id = id_;
  if (query.query_id.empty()) {
    query.query_id = prefix_ + "-" + std::to_string(++counter_);
  }
  query.Validate();
  net::Client server(server_, "researcher", timeout_, tap_);
  auto reply = Expect<protocol::QueryResult>(
      server.Call(protocol::SubmitQuery{query, token_}));
  if (reply.query_id != query.query_id) {
    throw ProtocolError("server answered unknown query_id '" +
                        reply.query_id + "'");
  }
  if (reply.result.test != query.test) {
    throw ProtocolError("server answered a different test");
  }
  ResearchResult out;
  out.query_id = reply.query_id;
  out.fields = enclave::DecodeResult(*result_key_, reply.result);
  out.timing = std::move(reply.timing);
  return out;
}

// ---- local topology ----------------------------------------------------

LocalTopology::LocalTopology(FederationConfig config,
                             std::vector<GenotypeDataset> datasets,
                             TopologyOverrides overrides)
    : config_(std::move(config)), overrides_(std::move(overrides)) {
  config_.Validate();
  if (!datasets.empty() && datasets.size() != config_.owners.size()) {
    throw InvalidArgument("one dataset per configured owner is required");
  }
  if (datasets.empty()) {
    for (const auto& o : config_.owners) {
      if (o.data_path.empty()) {
        throw InvalidArgument("owner " + o.owner_id + " has no data path");
      }
      datasets.push_back(GenotypeDataset::Load(o.data_path));
    }
  }

  CspOptions csp;
  csp.key_bits = config_.key_bits;
  csp.insecure_keys = config_.insecure_keys;
  csp.insecure_seed = config_.seed;
  csp.researchers = config_.researchers;
  csp.server_token = config_.server_token;
  csp.tap = overrides_.tap;
  csp_ = std::make_unique<CspNode>(std::move(csp));
  csp_->Start(config_.csp);

  ServerOptions server;
  for (std::size_t i = 0; i < config_.owners.size(); ++i) {
    const auto& spec = config_.owners[i];
    OwnerOptions o;
    o.owner_id = spec.owner_id;
    o.latency_ms = spec.latency_ms;
    o.server_token = config_.server_token;
    o.exec = config_.exec;
    o.insecure_seed = config_.seed;
    o.timeout = config_.timeout;
    o.tap = overrides_.tap;
    owners_.push_back(std::make_unique<OwnerNode>(std::move(datasets[i]),
                                                  csp_->address(), o));
    owners_.back()->Start(spec.address);
    server.owners.push_back({spec.owner_id, owners_.back()->address()});
  }

  server.mode = config_.mode;
  server.csp = csp_->address();
  server.token = config_.server_token;
  server.timeout = config_.timeout;
  server.retries = config_.retries;
  server.exec = config_.exec;
  if (overrides_.server_kernel_id) {
    server.kernel_id = *overrides_.server_kernel_id;
  }
  server.insecure_seed = config_.seed;
  server.researchers = config_.researchers;
  server.tap = overrides_.tap;
  server_ = std::make_unique<ServerNode>(std::move(server));
  server_->Start(config_.server);
}

LocalTopology::~LocalTopology() { Stop(); }

void LocalTopology::Stop() {
  if (server_) server_->Stop();
  for (auto& o : owners_) o->Stop();
  if (csp_) csp_->Stop();
}

ResearcherClient LocalTopology::Researcher(const std::string& id) {
  if (config_.researchers.empty()) {
    throw InvalidArgument("configuration lists no researchers");
  }
  auto it = id.empty() ? config_.researchers.begin()
                       : config_.researchers.find(id);
  if (it == config_.researchers.end()) {
    throw InvalidArgument("unknown researcher " + id);
  }
  ResearcherClient client(it->first, it->second, server_->address(),
                          csp_->address(), config_.timeout, overrides_.tap);
  client.FetchResultKey();
  return client;
}

}  // namespace fedgwas::federation
