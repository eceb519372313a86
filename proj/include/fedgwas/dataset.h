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


// Owner-side genotype data and its pre-computed count tables.
//
// Genotype file (whitespace separated, '#' starts a comment):
//
//   subject_id  rs4426:C/T  rs4305:C/T  rs4630:A/G  phenotype
//   s1          CC          CT          GG          control
//
// Each locus column names its two alleles; the first is the reference
// allele that leads every layout. Phenotype is case/control (also accepted:
// positive/negative, 1/0). Phased haplotype counts live in a companion
// file at PATH.hap, one locus pair per line:
//
//   rs4305 rs4630 CA=1 TA=0 CG=2 TG=3

#ifndef FEDGWAS_DATASET_H_
#define FEDGWAS_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedgwas/paillier.h"
#include "fedgwas/protocol.h"
#include "fedgwas/random.h"
#include "fedgwas/stats.h"
#include "fedgwas/types.h"

namespace fedgwas::federation {

struct Locus {
  std::string id;
  char reference = 'A';
  char alternate = 'a';

  // Code 0 = reference homozygote, 1 = heterozygote, 2 = alternate
  // homozygote. Rendered with the reference allele first.
  std::string Genotype(int code) const;
  // Accepts either allele order; throws InvalidArgument otherwise.
  std::uint8_t ParseGenotype(std::string_view text) const;
  friend bool operator==(const Locus&, const Locus&) = default;
};

struct SubjectRecord {
  std::string subject_id;
  std::vector<std::uint8_t> genotypes;  // codes, one per locus
  bool is_case = false;
};

struct LocusPair {
  std::string first;
  std::string second;
  auto operator<=>(const LocusPair&) const = default;
};

class GenotypeDataset {
 public:
  GenotypeDataset() = default;
  explicit GenotypeDataset(std::vector<Locus> loci);

  const std::vector<Locus>& loci() const { return loci_; }
  const std::vector<SubjectRecord>& records() const { return records_; }
  const std::map<LocusPair, stats::HaplotypeCounts>& phased() const {
    return phased_;
  }

  std::optional<std::size_t> LocusIndex(std::string_view id) const;
  const Locus& locus(std::string_view id) const;

  void AddRecord(std::string subject_id,
                 std::span<const std::string> genotypes, bool is_case);
  void AddRecord(SubjectRecord record);
  // Phased counts must cover two haplotypes per subject and agree with the
  // genotype allele totals at both loci.
  void SetPhased(const LocusPair& pair, const stats::HaplotypeCounts& counts);

  static GenotypeDataset Parse(std::istream& genotypes,
                               std::istream* haplotypes = nullptr);
  // Reads PATH and, when present, PATH.hap.
  static GenotypeDataset Load(const std::string& path);

  std::string GenotypeText() const;
  std::string HaplotypeText() const;
  // Writes PATH and, when phased counts exist, PATH.hap.
  void Save(const std::string& path) const;

 private:
  void CheckPhased(const LocusPair& pair,
                   const stats::HaplotypeCounts& counts) const;

  std::vector<Locus> loci_;
  std::vector<SubjectRecord> records_;
  std::map<LocusPair, stats::HaplotypeCounts> phased_;
};

// Counts with their category labels, in the order an owner encrypts them.
struct CountSlice {
  std::vector<std::string> layout;
  std::vector<std::uint64_t> counts;
};

class PrecompTable {
 public:
  // Builds every locus table and the requested pairs, which must have
  // phased counts. An empty pair list takes every phased pair.
  static PrecompTable Build(const GenotypeDataset& data,
                            std::span<const LocusPair> pairs = {},
                            Exec exec = Exec::kSerial);

  // Cases and controls per genotype, genotype order as Locus::Genotype.
  const stats::ContingencyTable2x3& genotypes(std::string_view locus) const;
  stats::GenotypeCounts totals(std::string_view locus) const;
  // Pairs may be asked in either order.
  stats::HaplotypeCounts haplotypes(const LocusPair& pair) const;

  // Throws InvalidArgument naming the missing locus or pair.
  CountSlice Slice(const protocol::Query& query) const;

  std::size_t locus_count() const { return loci_.size(); }

 private:
  struct LocusEntry {
    Locus locus;
    stats::ContingencyTable2x3 table;
  };
  struct PairEntry {
    Locus first;
    Locus second;
    stats::HaplotypeCounts counts;
  };
  const LocusEntry& Entry(std::string_view locus) const;

  std::map<std::string, LocusEntry, std::less<>> loci_;
  std::map<LocusPair, PairEntry> pairs_;
};

// Encrypts the query's slice of the table under the aggregation key.
EncryptedCountVector OwnerAnswer(const protocol::Query& query,
                                 const std::string& owner_id,
                                 const PrecompTable& table,
                                 const paillier::PublicKey& pk,
                                 RandomSource& rng,
                                 Exec exec = Exec::kSerial);

}  // namespace fedgwas::federation

#endif  // FEDGWAS_DATASET_H_
