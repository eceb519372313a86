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


// Command-line entry point for every node role, the local demo topology,
// the experiment harness, the data generator and the self-check.

#include <csignal>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedgwas/config.h"
#include "fedgwas/dataset.h"
#include "fedgwas/enclave.h"
#include "fedgwas/error.h"
#include "fedgwas/federation.h"
#include "fedgwas/harness.h"
#include "fedgwas/kernels.h"
#include "fedgwas/paillier.h"
#include "fedgwas/stats.h"

namespace fedgwas {
namespace {

using federation::FederationConfig;

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Blocks until SIGINT or SIGTERM.
void WaitForSignal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void BlockSignals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

void PrintResult(const federation::ResearchResult& r, TestKind test) {
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "query_id\t" << r.query_id << "\n"
            << "test\t" << TestKindName(test) << "\n";
  for (const auto& f : r.fields) std::cout << f.label << "\t" << f.value << "\n";
  std::cout << std::setprecision(3) << "communication_ms\t"
            << r.timing.communication_ms << "\n"
            << "computation_ms\t" << r.timing.computation_ms << "\n"
            << "total_ms\t" << r.timing.total_ms() << "\n"
            << "decryptions\t" << r.timing.decryptions << "\n";
  for (const auto& o : r.timing.per_owner) {
    std::cout << "round_trip_ms\t" << o.owner_id << "\t" << o.ms << "\n";
  }
}

protocol::Query MakeQuery(const std::string& test, const std::string& loci) {
  protocol::Query q;
  q.test = ParseTestKind(test);
  q.loci = SplitList(loci);
  q.query_id = "pending";
  q.Validate();
  q.query_id.clear();
  return q;
}

std::optional<std::uint64_t> OptionalSeed(const CLI::Option* opt,
                                          std::uint64_t value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

// ---- verify ------------------------------------------------------------

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

std::vector<Check> SelfChecks() {
  std::vector<Check> out;
  auto add = [&](std::string name, bool ok, std::string detail = "") {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  add("chi_square_sf(3.841, 1) ~= 0.05",
      std::abs(stats::ChiSquareSf(3.841, 1) - 0.05) < 1e-3);

  auto ld = stats::Ld({30, 10, 10, 50});
  add("ld(30,10,10,50) = (0.14, 7/12, 49/144)",
      std::abs(ld.d - 0.14) < 1e-12 && std::abs(ld.d_prime - 7.0 / 12) < 1e-12 &&
          std::abs(ld.r_squared - 49.0 / 144) < 1e-12);

  add("hwe(6,4,2) = 0.75", std::abs(stats::Hwe({6, 4, 2}).statistic - 0.75) < 1e-12);

  std::mt19937_64 rng(2026);
  auto random_table = [&](int max) {
    stats::ContingencyTable2x3 t;
    do {
      for (auto& c : t.cases) c = rng() % static_cast<unsigned>(max);
      for (auto& c : t.controls) c = rng() % static_cast<unsigned>(max);
    } while (t.case_total() == 0 || t.control_total() == 0);
    return t;
  };

  bool fet_ok = true;
  for (int i = 0; i < 200; ++i) {
    auto t = random_table(10);
    auto probs = stats::MarginConsistentProbabilities(t);
    double sum = 0;
    for (double p : probs) sum += p;
    double p = stats::Fet(t, Exec::kSerial);
    fet_ok &= std::abs(sum - 1) < 1e-9 && p > 0 && p <= 1 &&
              p == stats::Fet(t, Exec::kParallel);
  }
  add("fet: margin enumeration sums to 1, serial = parallel", fet_ok);

  bool catt_ok = true;
  int catt_checked = 0;
  for (int i = 0; i < 50; ++i) {
    auto t = random_table(30);
    double a = 0.1 + static_cast<double>(rng() % 1000) / 100;
    double b = static_cast<double>(rng() % 2001) / 100 - 10;
    try {
      double base = stats::Catt(t).statistic;
      double moved = stats::Catt(t, {b, a + b, 2 * a + b}).statistic;
      catt_ok &= std::abs(base - moved) <= 1e-9 * std::max(1.0, std::abs(base));
      ++catt_checked;
    } catch (const Error&) {
      // Zero-variance tables carry no trend to compare.
    }
  }
  add("catt: invariant under affine weights", catt_ok && catt_checked > 0,
      std::to_string(catt_checked) + " tables");

  auto keys = paillier::KeyPairFromPrimes(11, 13);
  InsecureSeededRandom prng(1);
  bool rt = true;
  for (unsigned m = 0; m < 143; ++m) {
    rt &= paillier::Decrypt(keys.private_key,
                            paillier::Encrypt(keys.public_key, m, prng)) == m;
  }
  add("paillier: exhaustive round trip, n = 143", rt);
  return out;
}

int RunVerify(const std::vector<std::string>& data_files) {
  bool all_ok = true;
  for (const auto& c : SelfChecks()) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    all_ok &= c.ok;
  }
  if (!data_files.empty()) {
    std::vector<federation::PrecompTable> tables;
    std::vector<federation::GenotypeDataset> sets;
    for (const auto& f : data_files) sets.push_back(federation::GenotypeDataset::Load(f));
    for (const auto& s : sets) {
      auto serial = federation::PrecompTable::Build(s, {}, Exec::kSerial);
      auto parallel = federation::PrecompTable::Build(s, {}, Exec::kParallel);
      for (const auto& l : s.loci()) {
        const auto& a = serial.genotypes(l.id);
        const auto& b = parallel.genotypes(l.id);
        bool same = a.cases == b.cases && a.controls == b.controls &&
                    a.total() == s.records().size();
        all_ok &= same;
        if (!same) std::cout << "FAIL recount mismatch at " << l.id << "\n";
      }
      tables.push_back(std::move(serial));
    }
    std::cout << "PASS pooled tables rebuilt for " << data_files.size()
              << " file(s)\n";
    std::cout << std::setprecision(6) << std::fixed;
    for (const auto& l : sets.front().loci()) {
      for (TestKind t : {TestKind::kHwe, TestKind::kCatt, TestKind::kFet}) {
        protocol::Query q{"verify", t, {l.id}, ""};
        std::vector<std::uint64_t> pooled(CategoryCount(t));
        for (const auto& tab : tables) {
          auto slice = tab.Slice(q);
          for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += slice.counts[i];
        }
        std::cout << l.id << "\t" << TestKindName(t);
        try {
          for (const auto& f : enclave::EvaluateKernel(t, pooled)) {
            std::cout << "\t" << f.label << "=" << f.value;
          }
        } catch (const Error& e) {
          std::cout << "\tundefined: " << e.what();
        }
        std::cout << "\n";
      }
    }
  }
  return all_ok ? 0 : 4;
}

// ---- subcommands -------------------------------------------------------

int Main(int argc, char** argv) {
  CLI::App app{"Federated secure GWAS over Paillier aggregation and a "
               "simulated enclave"};
  app.require_subcommand(1);

  // owner
  auto* owner = app.add_subcommand("owner", "Serve one data owner's counts");
  std::string owner_data, owner_listen, owner_csp, owner_id = "owner-1",
                                                   owner_token;
  double owner_latency = 0;
  std::uint64_t owner_seed = 0;
  owner->add_option("--data", owner_data, "Genotype file")->required();
  owner->add_option("--listen", owner_listen, "host:port")->required();
  owner->add_option("--csp", owner_csp, "CSP host:port")->required();
  owner->add_option("--latency", owner_latency,
                    "Injected round-trip latency in ms");
  owner->add_option("--id", owner_id, "Owner id")->capture_default_str();
  owner->add_option("--token", owner_token, "Required server token");
  auto* owner_seed_opt =
      owner->add_option("--insecure-seed", owner_seed, "Deterministic nonces");

  // csp
  auto* csp = app.add_subcommand("csp", "Run the key authority");
  std::string csp_listen, csp_researchers, csp_server_token;
  unsigned csp_bits = paillier::kDefaultKeyBits;
  bool csp_insecure = false;
  std::uint64_t csp_seed = 0;
  csp->add_option("--listen", csp_listen, "host:port")->required();
  csp->add_option("--key-bits", csp_bits, "Modulus size")->capture_default_str();
  csp->add_option("--authorized-researchers", csp_researchers,
                  "File of '<id> <token>' lines")
      ->required();
  csp->add_option("--server-token", csp_server_token, "Required server token");
  csp->add_flag("--insecure-keys", csp_insecure, "Allow moduli below 512 bits");
  auto* csp_seed_opt =
      csp->add_option("--insecure-seed", csp_seed, "Deterministic keys");

  // server
  auto* server = app.add_subcommand("server", "Run the central server");
  std::string server_listen, server_csp, server_owners, server_mode = "hybrid",
                                                        server_token,
                                                        server_researchers;
  std::string server_kernel(enclave::kKernelId);
  long server_timeout = 30000;
  server->add_option("--listen", server_listen, "host:port")->required();
  server->add_option("--csp", server_csp, "CSP host:port")->required();
  server->add_option("--owners", server_owners,
                     "Config file with 'owner = <id> <host:port>' lines")
      ->required();
  server->add_option("--mode", server_mode, "hybrid | secure-hw")
      ->capture_default_str();
  server->add_option("--token", server_token, "Server token");
  server->add_option("--timeout-ms", server_timeout, "Owner timeout")
      ->capture_default_str();
  server->add_option("--authorized-researchers", server_researchers,
                     "Restrict SubmitQuery to these researchers");
  server->add_option("--kernel-id", server_kernel,
                     "Enclave kernel identity (changes the measurement)");

  // query
  auto* query = app.add_subcommand("query", "Submit one query as a researcher");
  std::string q_server, q_csp, q_test, q_loci, q_researcher = "researcher",
                                               q_token;
  long q_timeout = 60000;
  query->add_option("--server", q_server, "Server host:port")->required();
  query->add_option("--csp", q_csp, "CSP host:port")->required();
  query->add_option("--test", q_test, "ld | hwe | catt | fet")->required();
  query->add_option("--loci", q_loci, "rsA[,rsB]")->required();
  query->add_option("--researcher", q_researcher, "Researcher id")
      ->capture_default_str();
  query->add_option("--token", q_token, "Researcher token")->required();
  query->add_option("--timeout-ms", q_timeout, "Call timeout");

  // local
  auto* local = app.add_subcommand("local", "Run the whole topology in-process");
  std::string l_config, l_test = "hwe", l_loci, l_mode;
  std::string l_kernel(enclave::kKernelId);
  local->add_option("--config", l_config, "Topology config file")->required();
  local->add_option("--test", l_test, "ld | hwe | catt | fet")
      ->capture_default_str();
  local->add_option("--loci", l_loci, "rsA[,rsB]")->required();
  local->add_option("--mode", l_mode, "Override the configured mode");
  local->add_option("--kernel-id", l_kernel,
                    "Enclave kernel identity (changes the measurement)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run experiment presets");
  std::string b_preset = "all", b_test = "all", b_mode = "both", b_out;
  bool b_zero = false;
  harness::ExperimentOptions b_opts;
  bool b_parallel = false;
  bench->add_option("--preset", b_preset, "1-4 or all")->capture_default_str();
  bench->add_option("--test", b_test, "ld|hwe|catt|fet or all")
      ->capture_default_str();
  bench->add_option("--mode", b_mode, "hybrid|secure-hw or both")
      ->capture_default_str();
  bench->add_flag("--zero-latency", b_zero, "Disable injected latency");
  bench->add_option("--seed", b_opts.seed, "Data seed")->capture_default_str();
  bench->add_option("--key-bits", b_opts.key_bits, "Modulus size")
      ->capture_default_str();
  bench->add_option("--subjects", b_opts.subjects_per_owner,
                    "Subjects per owner")
      ->capture_default_str();
  bench->add_option("--repetitions", b_opts.repetitions, "Runs per cell")
      ->capture_default_str();
  bench->add_flag("--parallel", b_parallel, "Use the OpenMP kernels");
  bench->add_option("--out", b_out, "Report directory")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic owner dataset");
  std::string g_freq, g_out, g_population, g_loci;
  std::size_t g_subjects = 100;
  double g_case = 0.5;
  std::uint64_t g_seed = 1;
  auto* g_freq_opt =
      gen->add_option("--freq", g_freq, "Major-allele frequencies F[,F...]");
  auto* g_pop_opt = gen->add_option("--population", g_population,
                                    "CHB | CHS | JPT | MXL (illustrative)");
  g_freq_opt->excludes(g_pop_opt);
  gen->add_option("--loci", g_loci, "Locus ids for --freq (default snp1...)");
  gen->add_option("--subjects", g_subjects, "Subjects")->capture_default_str();
  gen->add_option("--case-fraction", g_case, "Case fraction")
      ->capture_default_str();
  gen->add_option("--seed", g_seed, "Seed")->capture_default_str();
  gen->add_option("--out", g_out, "Output file (PATH.hap written too)")
      ->required();

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Check the kernels against reference oracles");
  std::vector<std::string> v_data;
  verify->add_option("--data", v_data, "Genotype files to pool and evaluate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*owner) {
    BlockSignals();
    federation::OwnerOptions o;
    o.owner_id = owner_id;
    o.latency_ms = owner_latency;
    o.server_token = owner_token;
    o.insecure_seed = OptionalSeed(owner_seed_opt, owner_seed);
    federation::OwnerNode node(federation::GenotypeDataset::Load(owner_data),
                               net::Address::Parse(owner_csp), o);
    node.Start(net::Address::Parse(owner_listen));
    std::cout << "owner " << owner_id << " listening on "
              << node.address().ToString() << std::endl;
    WaitForSignal();
    return 0;
  }
  if (*csp) {
    BlockSignals();
    federation::CspOptions o;
    o.key_bits = csp_bits;
    o.insecure_keys = csp_insecure;
    o.insecure_seed = OptionalSeed(csp_seed_opt, csp_seed);
    o.researchers = federation::LoadAuthorizedResearchers(csp_researchers);
    o.server_token = csp_server_token;
    federation::CspNode node(o);
    node.Start(net::Address::Parse(csp_listen));
    std::cout << "csp listening on " << node.address().ToString() << std::endl;
    WaitForSignal();
    return 0;
  }
  if (*server) {
    BlockSignals();
    auto owners_cfg = FederationConfig::Load(server_owners);
    federation::ServerOptions o;
    o.mode = ParseMode(server_mode);
    for (const auto& spec : owners_cfg.owners) {
      o.owners.push_back({spec.owner_id, spec.address});
    }
    if (o.owners.empty()) throw InvalidArgument("owners file lists no owners");
    o.csp = net::Address::Parse(server_csp);
    o.token = server_token;
    o.timeout = net::Millis{server_timeout};
    o.kernel_id = server_kernel;
    if (!server_researchers.empty()) {
      o.researchers = federation::LoadAuthorizedResearchers(server_researchers);
    }
    federation::ServerNode node(o);
    node.Start(net::Address::Parse(server_listen));
    if (node.provision_error()) {
      std::cerr << "warning: " << *node.provision_error()
                << "; queries will be refused" << std::endl;
    }
    std::cout << "server (" << ModeName(o.mode) << ") listening on "
              << node.address().ToString() << std::endl;
    WaitForSignal();
    return 0;
  }
  if (*query) {
    auto q = MakeQuery(q_test, q_loci);
    federation::ResearcherClient client(
        q_researcher, q_token, net::Address::Parse(q_server),
        net::Address::Parse(q_csp), net::Millis{q_timeout});
    PrintResult(client.Run(q), q.test);
    return 0;
  }
  if (*local) {
    auto config = FederationConfig::Load(l_config);
    if (!l_mode.empty()) config.mode = ParseMode(l_mode);
    federation::TopologyOverrides overrides;
    if (l_kernel != enclave::kKernelId) overrides.server_kernel_id = l_kernel;
    federation::LocalTopology topo(config, {}, overrides);
    if (topo.server().provision_error()) {
      std::cerr << "warning: " << *topo.server().provision_error() << std::endl;
    }
    auto q = MakeQuery(l_test, l_loci);
    PrintResult(topo.Researcher().Run(q), q.test);
    return 0;
  }
  if (*bench) {
    std::vector<int> presets;
    if (b_preset == "all") {
      for (int p = 1; p <= harness::kPresetCount; ++p) presets.push_back(p);
    } else {
      presets.push_back(std::stoi(b_preset));
      harness::PresetSites(presets.back());
    }
    std::vector<TestKind> tests;
    if (b_test == "all") {
      tests.assign(std::begin(kAllTests), std::end(kAllTests));
    } else {
      tests.push_back(ParseTestKind(b_test));
    }
    std::vector<Mode> modes;
    if (b_mode == "both") {
      modes = {Mode::kHybrid, Mode::kSecureHw};
    } else {
      modes.push_back(ParseMode(b_mode));
    }
    b_opts.zero_latency = b_zero;
    b_opts.exec = b_parallel ? Exec::kParallel : Exec::kSerial;
    auto rows = harness::RunSweep(presets, modes, tests, b_opts);
    for (const auto& r : rows) {
      std::cerr << "preset " << r.preset << " " << TestKindName(r.test) << " "
                << ModeName(r.mode) << ": computation "
                << r.timing.computation_ms << " ms, communication "
                << r.timing.communication_ms << " ms, "
                << r.timing.decryptions << " decryptions" << std::endl;
    }
    harness::EmitReport(rows, b_out);
    std::cout << harness::ReportSummary(rows);
    return 0;
  }
  if (*gen) {
    harness::PopulationSpec spec;
    if (*g_pop_opt) {
      spec = harness::PresetPopulation(g_population, g_subjects, g_case, g_seed);
    } else {
      if (!*g_freq_opt) throw InvalidArgument("gen needs --freq or --population");
      auto freqs = SplitList(g_freq);
      auto ids = SplitList(g_loci);
      if (!ids.empty() && ids.size() != freqs.size()) {
        throw InvalidArgument("--loci must name one id per frequency");
      }
      for (std::size_t i = 0; i < freqs.size(); ++i) {
        harness::LocusSpec l;
        l.id = ids.empty() ? "snp" + std::to_string(i + 1) : ids[i];
        std::size_t used = 0;
        try {
          l.major_frequency = std::stod(freqs[i], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != freqs[i].size()) {
          throw InvalidArgument("bad frequency '" + freqs[i] + "'");
        }
        spec.loci.push_back(l);
      }
      spec.n_subjects = g_subjects;
      spec.case_fraction = g_case;
      spec.seed = g_seed;
    }
    harness::GenerateDataset(spec).Save(g_out);
    std::cout << "wrote " << g_out << " (" << spec.n_subjects << " subjects, "
              << spec.loci.size() << " loci)" << std::endl;
    return 0;
  }
  if (*verify) return RunVerify(v_data);
  return 1;
}

}  // namespace
}  // namespace fedgwas

int main(int argc, char** argv) {
  try {
    return fedgwas::Main(argc, argv);
  } catch (const fedgwas::Error& e) {
    std::cerr << "error (" << fedgwas::ErrorCodeName(e.code())
              << "): " << e.what() << std::endl;
    return fedgwas::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
