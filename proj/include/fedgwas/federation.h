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


// The four node roles and an in-process topology that wires them together.

#ifndef FEDGWAS_FEDERATION_H_
#define FEDGWAS_FEDERATION_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fedgwas/config.h"
#include "fedgwas/dataset.h"
#include "fedgwas/enclave.h"
#include "fedgwas/net.h"
#include "fedgwas/paillier.h"
#include "fedgwas/protocol.h"
#include "fedgwas/random.h"

namespace fedgwas::federation {

struct OwnerOptions {
  std::string owner_id = "owner-1";
  double latency_ms = 0;
  // Required CountRequest token; empty accepts any.
  std::string server_token;
  Exec exec = Exec::kSerial;
  std::optional<std::uint64_t> insecure_seed;
  net::Millis timeout{30000};
  net::FrameTap tap;
};

class OwnerNode {
 public:
  OwnerNode(GenotypeDataset data, net::Address csp, OwnerOptions options);
  ~OwnerNode();

  // Fetches the aggregation key from the CSP, builds the pre-computation
  // table and starts serving CountRequests.
  void Start(const net::Address& listen);
  void Stop();

  const net::Address& address() const { return server_.address(); }
  const std::string& owner_id() const { return options_.owner_id; }
  const PrecompTable& table() const { return table_; }

 private:
  protocol::Message Handle(const protocol::Message& request);
  void InjectLegDelay() const;

  GenotypeDataset data_;
  net::Address csp_;
  OwnerOptions options_;
  PrecompTable table_;
  std::optional<paillier::PublicKey> key_;
  std::mutex rng_mu_;
  std::unique_ptr<RandomSource> rng_;
  net::FrameServer server_;
};

struct CspOptions {
  unsigned key_bits = paillier::kDefaultKeyBits;
  bool insecure_keys = false;
  std::optional<std::uint64_t> insecure_seed;
  std::map<std::string, std::string> researchers;  // id -> token
  // Required ProvisionRequest token; empty accepts any.
  std::string server_token;
  Bytes provisioning_secret = enclave::DefaultProvisioningSecret();
  enclave::Measurement expected = enclave::Measure(
      enclave::kKernelId, enclave::KernelConfig{}.Serialize());
  net::FrameTap tap;
};

class CspNode {
 public:
  // Generates the aggregation and result keypairs.
  explicit CspNode(CspOptions options);
  ~CspNode();

  void Start(const net::Address& listen);
  void Stop();

  const net::Address& address() const { return server_.address(); }
  const paillier::PublicKey& public_key() const { return aggregation_.public_key; }
  const paillier::PublicKey& result_public_key() const {
    return result_.public_key;
  }
  // Test-harness access used to check that captured ciphertexts are really
  // encrypted. Never sent over the wire.
  const paillier::PrivateKey& AggregationKeyForAudit() const {
    return aggregation_.private_key;
  }

  std::uint64_t provisions_granted() const;
  std::uint64_t provisions_refused() const;

 private:
  protocol::Message Handle(const protocol::Message& request);

  CspOptions options_;
  paillier::KeyPair aggregation_;
  paillier::KeyPair result_;
  mutable std::mutex mu_;
  std::unique_ptr<RandomSource> rng_;
  enclave::AttestationVerifier verifier_;
  std::uint64_t granted_ = 0;
  std::uint64_t refused_ = 0;
  net::FrameServer server_;
};

struct OwnerEndpoint {
  std::string owner_id;
  net::Address address;
};

struct ServerOptions {
  Mode mode = Mode::kHybrid;
  std::vector<OwnerEndpoint> owners;
  net::Address csp;
  std::string token;
  net::Millis timeout{30000};
  int retries = 1;
  Exec exec = Exec::kSerial;
  std::string kernel_id = std::string(enclave::kKernelId);
  enclave::KernelConfig kernel_config;
  Bytes provisioning_secret = enclave::DefaultProvisioningSecret();
  std::optional<std::uint64_t> insecure_seed;
  // SubmitQuery tokens; empty accepts any researcher.
  std::map<std::string, std::string> researchers;
  net::FrameTap tap;
};

class ServerNode {
 public:
  struct Outcome {
    enclave::EncryptedStatResult result;
    TimingBreakdown timing;
  };

  explicit ServerNode(ServerOptions options);
  ~ServerNode();

  // Attests the enclave to the CSP and receives the sealed key. Throws
  // AttestationError when the CSP refuses.
  void Provision();
  // Provisions (recording, not throwing, a refusal that later queries
  // report) and starts serving SubmitQuery.
  void Start(const net::Address& listen);
  void Stop();

  // Fans CountRequests out to every owner and runs the enclave.
  Outcome Execute(const protocol::Query& query);

  const net::Address& address() const { return server_.address(); }
  bool provisioned() const;
  const std::optional<std::string>& provision_error() const {
    return provision_error_;
  }
  const enclave::Measurement& measurement() const;
  std::uint64_t decryption_meter() const;

 private:
  protocol::Message Handle(const protocol::Message& request);
  std::vector<EncryptedCountVector> Collect(const protocol::Query& query,
                                            TimingBreakdown& timing);
  EncryptedCountVector AskOwner(const OwnerEndpoint& owner,
                                const protocol::Query& query);

  ServerOptions options_;
  std::optional<paillier::PublicKey> key_;
  mutable std::mutex enclave_mu_;
  enclave::Enclave enclave_;
  std::optional<std::string> provision_error_;
  net::FrameServer server_;
};

struct ResearchResult {
  std::string query_id;
  std::vector<enclave::DecodedField> fields;
  TimingBreakdown timing;

  // Throws InvalidArgument for an unknown label.
  double value(std::string_view label) const;
};

class ResearcherClient {
 public:
  ResearcherClient(std::string researcher_id, std::string token,
                   net::Address server, net::Address csp,
                   net::Millis timeout = net::Millis{30000},
                   net::FrameTap tap = nullptr);

  // Obtains the result private key from the CSP.
  void FetchResultKey();
  bool has_result_key() const { return result_key_.has_value(); }

  // Fills in researcher_id and a fresh query_id when empty.
  ResearchResult Run(protocol::Query query);

 private:
  std::string id_;
  std::string token_;
  net::Address server_;
  net::Address csp_;
  net::Millis timeout_;
  net::FrameTap tap_;
  std::optional<paillier::PrivateKey> result_key_;
  std::uint64_t counter_ = 0;
  std::string prefix_;
};

// Knobs that a configuration file cannot express, used by tests.
struct TopologyOverrides {
  net::FrameTap tap;
  std::optional<std::string> server_kernel_id;
};

// CSP, owners and server in one process on loopback sockets.
class LocalTopology {
 public:
  // datasets[i] belongs to config.owners[i]; when empty, each owner's
  // data_path is loaded.
  LocalTopology(FederationConfig config,
                std::vector<GenotypeDataset> datasets = {},
                TopologyOverrides overrides = {});
  ~LocalTopology();

  CspNode& csp() { return *csp_; }
  ServerNode& server() { return *server_; }
  std::vector<std::unique_ptr<OwnerNode>>& owners() { return owners_; }
  const FederationConfig& config() const { return config_; }

  // Client for a configured researcher (the first one when id is empty),
  // with its result key already fetched.
  ResearcherClient Researcher(const std::string& id = "");

  void Stop();

 private:
  FederationConfig config_;
  TopologyOverrides overrides_;
  std::unique_ptr<CspNode> csp_;
  std::vector<std::unique_ptr<OwnerNode>> owners_;
  std::unique_ptr<ServerNode> server_;
};

}  // namespace fedgwas::federation

#endif  // FEDGWAS_FEDERATION_H_
