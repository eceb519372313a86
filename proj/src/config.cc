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


#include "fedgwas/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fedgwas/error.h"

namespace fedgwas::federation {
namespace {

std::string Trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& text, const std::string& key) {
  T value{};
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgument("bad value '" + text + "' for " + key);
  }
  return value;
}

bool ParseBool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgument("bad boolean '" + text + "' for " + key);
}

OwnerSpec ParseOwner(const std::string& value, const std::string& base_dir) {
  std::istringstream in(value);
  OwnerSpec o;
  std::string addr;
  if (!(in >> o.owner_id >> addr)) {
    throw InvalidArgument("owner needs '<id> <host:port>', got '" + value + "'");
  }
  o.address = net::Address::Parse(addr);
  for (std::string opt; in >> opt;) {
    auto eq = opt.find('=');
    std::string k = opt.substr(0, eq);
    std::string v = eq == std::string::npos ? "" : opt.substr(eq + 1);
    if (k == "latency") {
      o.latency_ms = ParseNumber<double>(v, "owner latency");
    } else if (k == "data") {
      std::filesystem::path p(v);
      o.data_path = p.is_absolute() ? v : (base_dir / p).string();
    } else {
      throw InvalidArgument("unknown owner option '" + opt + "'");
    }
  }
  return o;
}

}  // namespace

void FederationConfig::Validate() const {
  if (owners.empty()) throw InvalidArgument("configuration lists no owners");
  std::set<std::string> ids;
  for (const auto& o : owners) {
    if (o.owner_id.empty()) throw InvalidArgument("owner id must be non-empty");
    if (!ids.insert(o.owner_id).second) {
      throw InvalidArgument("duplicate owner id " + o.owner_id);
    }
    if (!(o.latency_ms >= 0)) {
      throw InvalidArgument("owner " + o.owner_id +
                            " has a negative injected latency");
    }
  }
  if (key_bits < paillier::kMinSecureBits && !insecure_keys) {
    throw InvalidArgument("key_bits below 512 requires insecure_keys = true");
  }
  if (retries < 0) throw InvalidArgument("retries must be non-negative");
}

FederationConfig FederationConfig::Parse(std::istream& in,
                                         const std::string& base_dir) {
  FederationConfig c;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    try {
      if (key == "mode") {
        c.mode = ParseMode(value);
      } else if (key == "key_bits") {
        c.key_bits = ParseNumber<unsigned>(value, key);
      } else if (key == "insecure_keys") {
        c.insecure_keys = ParseBool(value, key);
      } else if (key == "csp") {
        c.csp = net::Address::Parse(value);
      } else if (key == "server") {
        c.server = net::Address::Parse(value);
      } else if (key == "owner") {
        c.owners.push_back(ParseOwner(value, base_dir));
      } else if (key == "researcher") {
        std::istringstream r(value);
        std::string id, token;
        if (!(r >> id >> token)) {
          throw InvalidArgument("researcher needs '<id> <token>'");
        }
        c.researchers[id] = token;
      } else if (key == "server_token") {
        c.server_token = value;
      } else if (key == "timeout_ms") {
        c.timeout = std::chrono::milliseconds(ParseNumber<long>(value, key));
      } else if (key == "retries") {
        c.retries = ParseNumber<int>(value, key);
      } else if (key == "exec") {
        if (value == "serial") {
          c.exec = Exec::kSerial;
        } else if (value == "parallel") {
          c.exec = Exec::kParallel;
        } else {
          throw InvalidArgument("exec must be serial or parallel");
        }
      } else if (key == "seed") {
        c.seed = ParseNumber<std::uint64_t>(value, key);
      } else {
        throw InvalidArgument("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return c;
}

FederationConfig FederationConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  auto dir = std::filesystem::path(path).parent_path();
  return Parse(in, dir.empty() ? "." : dir.string());
}

std::map<std::string, std::string> LoadAuthorizedResearchers(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream t(line.substr(0, line.find('#')));
    std::string id, token, extra;
    if (!(t >> id)) continue;
    if (!(t >> token) || (t >> extra)) {
      throw InvalidArgument(path + ":" + std::to_string(line_no) +
                            ": expected '<researcher_id> <token>'");
    }
    out[id] = token;
  }
  return out;
}

}  // namespace fedgwas::federation
