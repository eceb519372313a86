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


#include "fedgwas/harness.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fedgwas/error.h"
#include "json.hpp"

namespace fedgwas::harness {
namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double Uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

constexpr PopulationPreset kPopulations[] = {
    {"CHB", {0.62, 0.55, 0.71}},
    {"CHS", {0.58, 0.52, 0.68}},
    {"JPT", {0.66, 0.60, 0.74}},
    {"MXL", {0.73, 0.48, 0.63}},
};

protocol::Query QueryFor(TestKind test) {
  if (test == TestKind::kLd) return {"", test, {"rs4305", "rs4630"}, ""};
  return {"", test, {"rs4426"}, ""};
}

std::string Fixed(double v, int digits = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string FieldsText(const std::vector<enclave::DecodedField>& fields) {
  std::ostringstream out;
  out << std::setprecision(9);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ';';
    out << fields[i].label << '=' << fields[i].value;
  }
  return out.str();
}

const ExperimentRow* Partner(std::span<const ExperimentRow> rows,
                             const ExperimentRow& r) {
  for (const auto& o : rows) {
    if (o.preset == r.preset && o.test == r.test && o.mode != r.mode) return &o;
  }
  return nullptr;
}

// secure-hw time over hybrid time for the row's cell.
std::optional<std::pair<double, double>> CellRatios(
    std::span<const ExperimentRow> rows, const ExperimentRow& r) {
  const ExperimentRow* other = Partner(rows, r);
  if (!other) return std::nullopt;
  const ExperimentRow& hy = r.mode == Mode::kHybrid ? r : *other;
  const ExperimentRow& hw = r.mode == Mode::kHybrid ? *other : r;
  return std::make_pair(hw.timing.computation_ms / hy.timing.computation_ms,
                        hw.timing.total_ms() / hy.timing.total_ms());
}

}  // namespace

void PopulationSpec::Validate() const {
  if (loci.empty()) throw InvalidArgument("population needs at least one locus");
  for (const auto& l : loci) {
    if (!(l.major_frequency >= 0 && l.major_frequency <= 1)) {
      throw InvalidArgument("major-allele frequency of " + l.id +
                            " must lie in [0, 1]");
    }
  }
  if (!(case_fraction >= 0 && case_fraction <= 1)) {
    throw InvalidArgument("case fraction must lie in [0, 1]");
  }
}

federation::GenotypeDataset GenerateDataset(const PopulationSpec& spec) {
  spec.Validate();
  std::vector<federation::Locus> loci;
  for (const auto& l : spec.loci) loci.push_back({l.id, l.reference, l.alternate});
  federation::GenotypeDataset data(loci);

  const std::size_t k = spec.loci.size();
  std::vector<std::vector<std::uint64_t>> pair_counts(k * k,
                                                      std::vector<std::uint64_t>(4));
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint8_t> hap[2];
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    federation::SubjectRecord r;
    r.subject_id = "s" + std::to_string(s + 1);
    for (auto& h : hap) {
      h.resize(k);
      for (std::size_t l = 0; l < k; ++l) {
        h[l] = Uniform(rng) < spec.loci[l].major_frequency ? 0 : 1;
      }
    }
    for (std::size_t l = 0; l < k; ++l) {
      r.genotypes.push_back(static_cast<std::uint8_t>(hap[0][l] + hap[1][l]));
    }
    r.is_case = Uniform(rng) < spec.case_fraction;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        for (const auto& h : hap) {
          // Layout index: alternate at a adds 1, alternate at b adds 2.
          pair_counts[a * k + b][h[a] + 2 * h[b]]++;
        }
      }
    }
    data.AddRecord(std::move(r));
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const auto& c = pair_counts[a * k + b];
      data.SetPhased({spec.loci[a].id, spec.loci[b].id}, {c[0], c[1], c[2], c[3]});
    }
  }
  return data;
}

std::span<const PopulationPreset> PopulationPresets() { return kPopulations; }

PopulationSpec PresetPopulation(std::string_view name, std::size_t n_subjects,
                                double case_fraction, std::uint64_t seed) {
  for (const auto& p : kPopulations) {
    if (p.name != name) continue;
    PopulationSpec spec;
    spec.loci = {{"rs4426", 'C', 'T', p.frequencies[0]},
                 {"rs4305", 'C', 'T', p.frequencies[1]},
                 {"rs4630", 'A', 'G', p.frequencies[2]}};
    spec.n_subjects = n_subjects;
    spec.case_fraction = case_fraction;
    spec.seed = seed;
    return spec;
  }
  throw InvalidArgument("unknown population preset '" + std::string(name) + "'");
}

std::vector<Site> PresetSites(int preset) {
  if (preset < 1 || preset > kPresetCount) {
    throw InvalidArgument("experiment preset must be 1 to 4");
  }
  return {std::begin(kSites), std::begin(kSites) + preset + 1};
}

ExperimentRunner::ExperimentRunner(int preset, Mode mode,
                                   ExperimentOptions options)
    : preset_(preset),
      mode_(mode),
      options_(options),
      sites_(PresetSites(preset)) {
  if (options_.repetitions < 1) {
    throw InvalidArgument("repetitions must be at least 1");
  }
  federation::FederationConfig config;
  config.mode = mode;
  config.key_bits = options_.key_bits;
  config.insecure_keys = options_.key_bits < paillier::kMinSecureBits;
  config.exec = options_.exec;
  config.researchers["researcher"] = "researcher-token";
  config.server_token = "server-token";
  std::vector<federation::GenotypeDataset> datasets;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    federation::OwnerSpec o;
    o.owner_id = "owner-" + std::to_string(i + 1);
    o.latency_ms = options_.zero_latency ? 0 : sites_[i].ping_ms;
    config.owners.push_back(o);
    const auto& pop = kPopulations[i % std::size(kPopulations)];
    datasets.push_back(GenerateDataset(
        PresetPopulation(pop.name, options_.subjects_per_owner,
                         options_.case_fraction, options_.seed * 1000 + i)));
  }
  topology_ = std::make_unique<federation::LocalTopology>(
      std::move(config), std::move(datasets));
  researcher_ = std::make_unique<federation::ResearcherClient>(
      topology_->Researcher());
}

ExperimentRunner::~ExperimentRunner() = default;

ExperimentRow ExperimentRunner::Run(TestKind test) {
  ExperimentRow row;
  row.preset = preset_;
  row.owners = sites_.size();
  for (const auto& o : topology_->config().owners) {
    row.latencies_ms.push_back(o.latency_ms);
  }
  row.test = test;
  row.mode = mode_;

  std::vector<TimingBreakdown> runs;
  for (int rep = 0; rep < options_.repetitions; ++rep) {
    auto r = researcher_->Run(QueryFor(test));
    runs.push_back(r.timing);
    row.fields = std::move(r.fields);
  }
  std::vector<double> comm, comp;
  for (const auto& t : runs) {
    comm.push_back(t.communication_ms);
    comp.push_back(t.computation_ms);
  }
  row.timing = runs.back();
  row.timing.communication_ms = Median(comm);
  row.timing.computation_ms = Median(comp);
  row.computation_min_ms = *std::min_element(comp.begin(), comp.end());

  // Plaintext baseline: one round trip per owner, then the kernel on the
  // pooled counts.
  auto& owners = topology_->owners();
  auto comm_start = Clock::now();
  std::vector<std::future<void>> pings;
  for (auto& o : owners) {
    net::Address addr = o->address();
    pings.push_back(std::async(std::launch::async, [addr] {
      net::Client c(addr, "baseline", net::Millis{30000});
      protocol::Expect<protocol::Pong>(c.Call(protocol::Ping{"baseline"}));
    }));
  }
  for (auto& p : pings) p.get();
  row.baseline_communication_ms = MillisSince(comm_start);

  auto comp_start = Clock::now();
  protocol::Query q = QueryFor(test);
  q.query_id = "baseline";
  std::vector<std::uint64_t> pooled(CategoryCount(test));
  for (auto& o : owners) {
    auto slice = o->table().Slice(q);
    for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += slice.counts[i];
  }
  auto plain = enclave::EvaluateKernel(test, pooled);
  row.baseline_computation_ms = MillisSince(comp_start);

  row.matches_plaintext = plain.size() == row.fields.size();
  for (std::size_t i = 0; row.matches_plaintext && i < plain.size(); ++i) {
    row.matches_plaintext = plain[i].label == row.fields[i].label &&
                            std::abs(plain[i].value - row.fields[i].value) <= 1e-6;
  }
  return row;
}

ExperimentRow RunExperiment(int preset, TestKind test, Mode mode,
                            const ExperimentOptions& options) {
  ExperimentRunner runner(preset, mode, options);
  return runner.Run(test);
}

std::vector<ExperimentRow> RunSweep(std::span<const int> presets,
                                    std::span<const Mode> modes,
                                    std::span<const TestKind> tests,
                                    const ExperimentOptions& options) {
  if (options.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  ExperimentOptions once = options;
  once.repetitions = 1;
  std::vector<std::unique_ptr<ExperimentRunner>> runners;
  for (int p : presets) {
    for (Mode m : modes) {
      runners.push_back(std::make_unique<ExperimentRunner>(p, m, once));
    }
  }
  const std::size_t cells = runners.size() * tests.size();
  std::vector<std::vector<ExperimentRow>> samples(cells);
  for (int rep = 0; rep < options.repetitions; ++rep) {
    for (std::size_t r = 0; r < runners.size(); ++r) {
      for (std::size_t t = 0; t < tests.size(); ++t) {
        samples[r * tests.size() + t].push_back(runners[r]->Run(tests[t]));
      }
    }
  }
  std::vector<ExperimentRow> rows;
  for (auto& cell : samples) {
    ExperimentRow row = cell.back();
    std::vector<double> comm, comp, base_comm, base_comp;
    for (const auto& s : cell) {
      comm.push_back(s.timing.communication_ms);
      comp.push_back(s.timing.computation_ms);
      base_comm.push_back(s.baseline_communication_ms);
      base_comp.push_back(s.baseline_computation_ms);
      row.matches_plaintext = row.matches_plaintext && s.matches_plaintext;
    }
    row.timing.communication_ms = Median(comm);
    row.timing.computation_ms = Median(comp);
    row.computation_min_ms = *std::min_element(comp.begin(), comp.end());
    row.baseline_communication_ms = Median(base_comm);
    row.baseline_computation_ms = Median(base_comp);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ReportTsv(std::span<const ExperimentRow> rows) {
  std::ostringstream out;
  out << "preset\towners\tlatencies_ms\ttest\tmode\tcommunication_ms\t"
         "computation_ms\tcomputation_min_ms\ttotal_ms\tdecryptions\t"
         "baseline_communication_ms\tbaseline_computation_ms\tsecure_hw_over_hybrid_computation\t"
         "secure_hw_over_hybrid_total\tstatistics\tmatches_plaintext\n";
  for (const auto& r : rows) {
    std::string lat;
    for (std::size_t i = 0; i < r.latencies_ms.size(); ++i) {
      lat += (i ? "," : "") + Fixed(r.latencies_ms[i], 1);
    }
    auto ratios = CellRatios(rows, r);
    out << r.preset << '\t' << r.owners << '\t' << lat << '\t'
        << TestKindName(r.test) << '\t' << ModeName(r.mode) << '\t'
        << Fixed(r.timing.communication_ms) << '\t'
        << Fixed(r.timing.computation_ms) << '\t'
        << Fixed(r.computation_min_ms) << '\t'
        << Fixed(r.timing.total_ms()) << '\t' << r.timing.decryptions << '\t'
        << Fixed(r.baseline_communication_ms) << '\t'
        << Fixed(r.baseline_computation_ms) << '\t'
        << (ratios ? Fixed(ratios->first) : "NA") << '\t'
        << (ratios ? Fixed(ratios->second) : "NA") << '\t'
        << FieldsText(r.fields) << '\t'
        << (r.matches_plaintext ? "yes" : "no") << '\n';
  }
  return out.str();
}

std::string ReportSummary(std::span<const ExperimentRow> rows) {
  double longest = 0;
  for (const auto& r : rows) longest = std::max(longest, r.timing.total_ms());
  constexpr int kBarWidth = 40;

  std::ostringstream out;
  out << "Running time per experiment, test and mode.\n"
      << "Bars: '#' secure computation, '=' communication, scaled to the "
         "longest run ("
      << Fixed(longest, 1) << " ms).\n";
  std::set<int> presets;
  for (const auto& r : rows) presets.insert(r.preset);
  for (int p : presets) {
    auto sites = PresetSites(p);
    out << "\nExperiment " << p << " (" << sites.size() << " owners:";
    for (std::size_t i = 0; i < sites.size(); ++i) {
      out << (i ? ", " : " ") << sites[i].name;
    }
    out << ")\n";
    out << "  test  mode        computation_ms  communication_ms  "
           "decryptions  baseline_ms\n";
    for (const auto& r : rows) {
      if (r.preset != p) continue;
      int comp = 0, comm = 0;
      if (longest > 0) {
        comp = static_cast<int>(std::lround(kBarWidth *
                                            r.timing.computation_ms / longest));
        comm = static_cast<int>(std::lround(
            kBarWidth * r.timing.communication_ms / longest));
      }
      out << "  " << std::left << std::setw(6) << TestKindName(r.test)
          << std::setw(12) << ModeName(r.mode) << std::right << std::setw(14)
          << Fixed(r.timing.computation_ms, 1) << std::setw(18)
          << Fixed(r.timing.communication_ms, 1) << std::setw(13)
          << r.timing.decryptions << std::setw(13)
          << Fixed(r.baseline_communication_ms + r.baseline_computation_ms, 1)
          << "  " << std::string(static_cast<std::size_t>(comp), '#')
          << std::string(static_cast<std::size_t>(comm), '=') << '\n';
    }
    for (const auto& r : rows) {
      if (r.preset != p || r.mode != Mode::kHybrid) continue;
      if (auto ratios = CellRatios(rows, r)) {
        out << "  " << TestKindName(r.test) << ": hybrid is "
            << Fixed(ratios->second, 2) << "x faster overall, "
            << Fixed(ratios->first, 2) << "x in computation\n";
      }
    }
  }
  return out.str();
}

void EmitReport(std::span<const ExperimentRow> rows, const std::string& dir) {
  if (rows.empty()) throw InvalidArgument("report needs at least one row");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& body) {
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    f << body;
    f.flush();
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  };
  write("report.tsv", ReportTsv(rows));
  write("report.txt", ReportSummary(rows));
}

net::FrameTap TranscriptRecorder::Tap() {
  return [this](std::string_view sender, std::span<const std::uint8_t> frame) {
    std::lock_guard lock(mu_);
    frames_.push_back({std::string(sender), Bytes(frame.begin(), frame.end())});
  };
}

std::vector<TranscriptRecorder::Frame> TranscriptRecorder::frames() const {
  std::lock_guard lock(mu_);
  return frames_;
}

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> kNumericFields = {
    "communication_ms", "computation_ms", "ms", "decryptions",
    "decryptions_used", "scale"};
const std::set<std::string, std::less<>> kBinaryFields = {
    "ciphertexts", "magnitude", "public_key", "private_key",
    "wrapped_key", "result_public_key", "tag", "nonce",
    "signature", "measurement", "expected"};

bool AllDigits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c);
  });
}

void Walk(const json& j, const std::string& key, const std::string& sender,
          const std::string& message, std::vector<AuditFinding>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      Walk(it.value(), it.key(), sender, message, out);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) Walk(v, key, sender, message, out);
  } else if (j.is_number()) {
    if (!kNumericFields.contains(key)) {
      out.push_back({sender, message, "number in field '" + key + "'"});
    }
  } else if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (kBinaryFields.contains(key)) {
      try {
        FromHex(s);
      } catch (const Error&) {
        out.push_back({sender, message, "field '" + key + "' is not hex"});
      }
    } else if (AllDigits(s)) {
      out.push_back({sender, message,
                     "integer token '" + s + "' in field '" + key + "'"});
    }
  }
}

}  // namespace

std::vector<AuditFinding> AuditTranscript(
    std::span<const TranscriptRecorder::Frame> frames,
    const paillier::PrivateKey& aggregation_key) {
  std::vector<AuditFinding> out;
  const std::string key_hex = ToHex(aggregation_key.Serialize());
  const std::string lambda_hex = ToHex(ToBigEndian(aggregation_key.lambda()));
  const auto pk = aggregation_key.public_key();

  for (const auto& f : frames) {
    protocol::Message m;
    try {
      m = protocol::Decode(f.bytes);
    } catch (const Error& e) {
      out.push_back({f.sender, "?", std::string("undecodable frame: ") + e.what()});
      continue;
    }
    const std::string name(protocol::MsgTypeName(protocol::TypeOf(m)));
    std::string payload(f.bytes.begin() + protocol::kHeaderSize, f.bytes.end());
    Walk(json::parse(payload), "", f.sender, name, out);
    if (payload.find(key_hex) != std::string::npos ||
        payload.find(lambda_hex) != std::string::npos) {
      out.push_back({f.sender, name, "aggregation private key in the clear"});
    }
    if (const auto* r = std::get_if<protocol::CountResponse>(&m)) {
      for (const auto& c : r->counts.ciphertexts) {
        if (c.key_fingerprint() != pk.fingerprint()) {
          out.push_back({f.sender, name, "count under a foreign key"});
        } else if (mpz_class(c.value() % pk.n()) == 1) {
          out.push_back({f.sender, name,
                         "trivially encrypted count (r = 1) opens without the key"});
        }
      }
    }
  }
  return out;
}

}  // namespace fedgwas::harness
