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


// Synthetic populations, experiment orchestration and reports.

#ifndef FEDGWAS_HARNESS_H_
#define FEDGWAS_HARNESS_H_

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedgwas/dataset.h"
#include "fedgwas/enclave.h"
#include "fedgwas/federation.h"
#include "fedgwas/net.h"
#include "fedgwas/types.h"

namespace fedgwas::harness {

struct LocusSpec {
  std::string id;
  char reference = 'A';  // the major allele
  char alternate = 'G';
  double major_frequency = 0.5;
};

struct PopulationSpec {
  std::vector<LocusSpec> loci;
  double case_fraction = 0.5;
  std::size_t n_subjects = 100;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Each subject gets two haplotypes whose alleles are drawn independently per
// locus, so genotypes follow (p^2, 2pq, q^2). Phased counts are recorded for
// every locus pair. Output is a pure function of the spec.
federation::GenotypeDataset GenerateDataset(const PopulationSpec& spec);

// Loci rs4426 C/T, rs4305 C/T and rs4630 A/G with illustrative major-allele
// frequencies. These values are placeholders, not measured frequencies.
struct PopulationPreset {
  std::string_view name;
  double frequencies[3];
};
std::span<const PopulationPreset> PopulationPresets();
PopulationSpec PresetPopulation(std::string_view name, std::size_t n_subjects,
                                double case_fraction, std::uint64_t seed);

struct Site {
  std::string_view name;
  double ping_ms;
};
inline constexpr Site kSites[] = {{"Canada", 0.5},
                                  {"USA", 37},
                                  {"London", 105},
                                  {"Seoul", 170},
                                  {"Sydney", 233}};
inline constexpr int kPresetCount = 4;

// Preset p in [1, 4] involves the first p + 1 sites.
std::vector<Site> PresetSites(int preset);

struct ExperimentOptions {
  unsigned key_bits = paillier::kDefaultKeyBits;
  bool zero_latency = false;
  std::uint64_t seed = 1;
  std::size_t subjects_per_owner = 200;
  double case_fraction = 0.5;
  int repetitions = 1;
  Exec exec = Exec::kSerial;
};

struct ExperimentRow {
  int preset = 0;
  std::size_t owners = 0;
  std::vector<double> latencies_ms;
  TestKind test = TestKind::kLd;
  Mode mode = Mode::kHybrid;
  TimingBreakdown timing;  // median over repetitions
  // Fastest computation over repetitions. Host noise only ever adds time, so
  // this tracks the intrinsic cost more tightly than the median.
  double computation_min_ms = 0;
  std::vector<enclave::DecodedField> fields;
  double baseline_communication_ms = 0;
  double baseline_computation_ms = 0;
  // Decoded values equal the plaintext kernel on pooled counts within the
  // fixed-point grain.
  bool matches_plaintext = false;
};

// One topology for a preset and mode, reused across tests.
class ExperimentRunner {
 public:
  ExperimentRunner(int preset, Mode mode, ExperimentOptions options);
  ~ExperimentRunner();

  ExperimentRow Run(TestKind test);
  federation::LocalTopology& topology() { return *topology_; }

 private:
  int preset_;
  Mode mode_;
  ExperimentOptions options_;
  std::vector<Site> sites_;
  std::unique_ptr<federation::LocalTopology> topology_;
  std::unique_ptr<federation::ResearcherClient> researcher_;
};

ExperimentRow RunExperiment(int preset, TestKind test, Mode mode,
                            const ExperimentOptions& options);

// Runs every (preset, mode, test) cell with all topologies alive at once and
// the repetitions taken round-robin across cells, so slow drift on the host
// lands on every cell alike. Rows come back ordered by preset, mode, test;
// timings are per-cell medians.
std::vector<ExperimentRow> RunSweep(std::span<const int> presets,
                                    std::span<const Mode> modes,
                                    std::span<const TestKind> tests,
                                    const ExperimentOptions& options);

// Tab-separated table: a header line then one line per row.
std::string ReportTsv(std::span<const ExperimentRow> rows);
// Human summary grouped by preset, with computation/communication bars.
std::string ReportSummary(std::span<const ExperimentRow> rows);
// Writes DIR/report.tsv and DIR/report.txt. Throws InvalidArgument for an
// empty row set and Error(kIo) when a file cannot be written.
void EmitReport(std::span<const ExperimentRow> rows, const std::string& dir);

// Thread-safe capture of every frame sent in a topology.
class TranscriptRecorder {
 public:
  struct Frame {
    std::string sender;
    Bytes bytes;
  };

  net::FrameTap Tap();
  std::vector<Frame> frames() const;

 private:
  mutable std::mutex mu_;
  std::vector<Frame> frames_;
};

struct AuditFinding {
  std::string sender;
  std::string message;
  std::string detail;
};

// Checks that no frame carries count material in the clear: every payload
// decodes, numbers appear only in timing and metering fields, no string is
// a bare integer, every ciphertext is one that only the key holder can open
// (not a trivial r = 1 encryption under the aggregation modulus), and the
// aggregation private key never appears.
std::vector<AuditFinding> AuditTranscript(
    std::span<const TranscriptRecorder::Frame> frames,
    const paillier::PrivateKey& aggregation_key);

}  // namespace fedgwas::harness

#endif  // FEDGWAS_HARNESS_H_
