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


// Plain-text topology configuration.
//
// One "key = value" setting per line; '#' starts a comment. Keys:
//
//   mode          = hybrid | secure-hw
//   key_bits      = 1024
//   insecure_keys = false          # allow moduli below 512 bits
//   csp           = 127.0.0.1:7000
//   server        = 127.0.0.1:7100
//   owner         = <id> <host:port> [latency=<ms>] [data=<path>]
//   researcher    = <id> <token>   # may repeat
//   server_token  = <token>        # server credential towards CSP and owners
//   timeout_ms    = 30000
//   retries       = 1
//   exec          = serial | parallel
//   seed          = <u64>          # deterministic keys and nonces (tests only)
//
// "owner" may repeat; relative data paths resolve against the config file's
// directory. Port 0 asks for an ephemeral port (local topology only).

#ifndef FEDGWAS_CONFIG_H_
#define FEDGWAS_CONFIG_H_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedgwas/net.h"
#include "fedgwas/stats.h"
#include "fedgwas/types.h"

namespace fedgwas::federation {

struct OwnerSpec {
  std::string owner_id;
  net::Address address;
  double latency_ms = 0;  // injected round trip, half per leg
  std::string data_path;
};

struct FederationConfig {
  std::vector<OwnerSpec> owners;
  net::Address server;
  net::Address csp;
  Mode mode = Mode::kHybrid;
  unsigned key_bits = 1024;
  bool insecure_keys = false;
  std::map<std::string, std::string> researchers;  // id -> token
  std::string server_token;
  std::chrono::milliseconds timeout{30000};
  int retries = 1;
  Exec exec = Exec::kSerial;
  std::optional<std::uint64_t> seed;

  // Throws InvalidArgument unless there is at least one owner, ids are
  // unique and latencies are non-negative.
  void Validate() const;

  static FederationConfig Parse(std::istream& in,
                                const std::string& base_dir = ".");
  static FederationConfig Load(const std::string& path);
};

// "researcher_id token" per line, '#' comments.
std::map<std::string, std::string> LoadAuthorizedResearchers(
    const std::string& path);

}  // namespace fedgwas::federation

#endif  // FEDGWAS_CONFIG_H_
