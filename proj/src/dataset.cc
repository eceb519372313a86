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


#include "fedgwas/dataset.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fedgwas/error.h"
#include "fedgwas/kernels.h"

namespace fedgwas::federation {
namespace {

std::vector<std::string> Tokens(const std::string& line) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream in(body);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool ParsePhenotype(const std::string& text, int line) {
  std::string t = Lower(text);
  if (t == "case" || t == "positive" || t == "1") return true;
  if (t == "control" || t == "negative" || t == "0") return false;
  throw InvalidArgument("line " + std::to_string(line) +
                        ": unknown phenotype '" + text + "'");
}

Locus ParseLocusHeader(const std::string& text) {
  // id:R/A
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 ||
      text.size() != colon + 4 || text[colon + 2] != '/') {
    throw InvalidArgument("locus column '" + text +
                          "' must look like rs123:C/T");
  }
  Locus l{text.substr(0, colon), text[colon + 1], text[colon + 3]};
  if (l.reference == l.alternate) {
    throw InvalidArgument("locus " + l.id + " lists the same allele twice");
  }
  return l;
}

std::string HapLabel(char a, char b) { return std::string{a, b}; }

std::vector<std::string> HapLayout(const Locus& a, const Locus& b) {
  return {HapLabel(a.reference, b.reference), HapLabel(a.alternate, b.reference),
          HapLabel(a.reference, b.alternate), HapLabel(a.alternate, b.alternate)};
}

std::uint64_t ReferenceAlleles(const GenotypeDataset& data, std::size_t idx) {
  std::uint64_t n = 0;
  for (const auto& r : data.records()) n += 2u - r.genotypes[idx];
  return n;
}

}  // namespace

std::string Locus::Genotype(int code) const {
  switch (code) {
    case 0: return {reference, reference};
    case 1: return {reference, alternate};
    case 2: return {alternate, alternate};
  }
  throw InvalidArgument("genotype code " + std::to_string(code));
}

std::uint8_t Locus::ParseGenotype(std::string_view text) const {
  if (text.size() == 2) {
    auto is_ref = [&](char c) { return c == reference; };
    auto is_alt = [&](char c) { return c == alternate; };
    char x = text[0], y = text[1];
    if ((is_ref(x) || is_alt(x)) && (is_ref(y) || is_alt(y))) {
      return static_cast<std::uint8_t>(is_alt(x) + is_alt(y));
    }
  }
  throw InvalidArgument("genotype '" + std::string(text) + "' at " + id +
                        " is not two of " + std::string{reference} + "/" +
                        std::string{alternate});
}

GenotypeDataset::GenotypeDataset(std::vector<Locus> loci)
    : loci_(std::move(loci)) {
  for (std::size_t i = 0; i < loci_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (loci_[i].id == loci_[j].id) {
        throw InvalidArgument("duplicate locus " + loci_[i].id);
      }
    }
  }
}

std::optional<std::size_t> GenotypeDataset::LocusIndex(
    std::string_view id) const {
  for (std::size_t i = 0; i < loci_.size(); ++i) {
    if (loci_[i].id == id) return i;
  }
  return std::nullopt;
}

const Locus& GenotypeDataset::locus(std::string_view id) const {
  auto idx = LocusIndex(id);
  if (!idx) throw InvalidArgument("unknown locus " + std::string(id));
  return loci_[*idx];
}

void GenotypeDataset::AddRecord(std::string subject_id,
                                std::span<const std::string> genotypes,
                                bool is_case) {
  if (genotypes.size() != loci_.size()) {
    throw InvalidArgument("subject " + subject_id + " has " +
                          std::to_string(genotypes.size()) +
                          " genotypes for " + std::to_string(loci_.size()) +
                          " loci");
  }
  SubjectRecord r{std::move(subject_id), {}, is_case};
  for (std::size_t i = 0; i < loci_.size(); ++i) {
    r.genotypes.push_back(loci_[i].ParseGenotype(genotypes[i]));
  }
  records_.push_back(std::move(r));
}

void GenotypeDataset::AddRecord(SubjectRecord record) {
  if (record.genotypes.size() != loci_.size() ||
      std::any_of(record.genotypes.begin(), record.genotypes.end(),
                  [](std::uint8_t g) { return g > 2; })) {
    throw InvalidArgument("malformed record for subject " + record.subject_id);
  }
  records_.push_back(std::move(record));
}

void GenotypeDataset::CheckPhased(const LocusPair& pair,
                                  const stats::HaplotypeCounts& h) const {
  auto a = LocusIndex(pair.first);
  auto b = LocusIndex(pair.second);
  if (!a || !b || *a == *b) {
    throw InvalidArgument("phased pair " + pair.first + "," + pair.second +
                          " does not name two loci of the dataset");
  }
  const std::string name = pair.first + "," + pair.second;
  if (h.total() != 2 * records_.size()) {
    throw InvalidArgument("phased counts for " + name + " cover " +
                          std::to_string(h.total()) + " haplotypes, expected " +
                          std::to_string(2 * records_.size()));
  }
  if (h.n_ab + h.n_aB != ReferenceAlleles(*this, *a) ||
      h.n_ab + h.n_Ab != ReferenceAlleles(*this, *b)) {
    throw InvalidArgument("phased counts for " + name +
                          " disagree with the genotype allele totals");
  }
}

void GenotypeDataset::SetPhased(const LocusPair& pair,
                                const stats::HaplotypeCounts& counts) {
  CheckPhased(pair, counts);
  phased_[pair] = counts;
}

GenotypeDataset GenotypeDataset::Parse(std::istream& genotypes,
                                       std::istream* haplotypes) {
  GenotypeDataset data;
  bool have_header = false;
  int line_no = 0;
  for (std::string line; std::getline(genotypes, line);) {
    ++line_no;
    auto t = Tokens(line);
    if (t.empty()) continue;
    if (!have_header) {
      if (t.size() < 2 || Lower(t.front()) != "subject_id" ||
          Lower(t.back()) != "phenotype") {
        throw InvalidArgument(
            "line " + std::to_string(line_no) +
            ": header must be 'subject_id <locus:R/A>... phenotype'");
      }
      std::vector<Locus> loci;
      for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        loci.push_back(ParseLocusHeader(t[i]));
      }
      data = GenotypeDataset(std::move(loci));
      have_header = true;
      continue;
    }
    if (t.size() != data.loci_.size() + 2) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(data.loci_.size() + 2) +
                            " columns, got " + std::to_string(t.size()));
    }
    std::vector<std::string> g(t.begin() + 1, t.end() - 1);
    try {
      data.AddRecord(t.front(), g, ParsePhenotype(t.back(), line_no));
    } catch (const Error& e) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (!have_header) throw InvalidArgument("genotype file has no header");

  if (haplotypes) {
    line_no = 0;
    for (std::string line; std::getline(*haplotypes, line);) {
      ++line_no;
      auto t = Tokens(line);
      if (t.empty()) continue;
      const std::string where = "haplotype line " + std::to_string(line_no);
      if (t.size() != 6) {
        throw InvalidArgument(where + ": expected two loci and four counts");
      }
      LocusPair pair{t[0], t[1]};
      if (!data.LocusIndex(pair.first) || !data.LocusIndex(pair.second)) {
        throw InvalidArgument(where + ": unknown locus");
      }
      auto layout = HapLayout(data.locus(pair.first), data.locus(pair.second));
      std::uint64_t v[4];
      for (int i = 0; i < 4; ++i) {
        const std::string& cell = t[2 + i];
        auto eq = cell.find('=');
        if (eq == std::string::npos ||
            cell.substr(0, eq) != layout[static_cast<std::size_t>(i)]) {
          throw InvalidArgument(where + ": expected " +
                                layout[static_cast<std::size_t>(i)] +
                                "=<count>, got '" + cell + "'");
        }
        const char* first = cell.data() + eq + 1;
        const char* last = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(first, last, v[i]);
        if (ec != std::errc() || ptr != last || first == last) {
          throw InvalidArgument(where + ": bad count '" + cell + "'");
        }
      }
      try {
        data.SetPhased(pair, {v[0], v[1], v[2], v[3]});
      } catch (const Error& e) {
        throw InvalidArgument(where + ": " + e.what());
      }
    }
  }
  return data;
}

GenotypeDataset GenotypeDataset::Load(const std::string& path) {
  std::ifstream g(path);
  if (!g) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ifstream h(path + ".hap");
  return Parse(g, h ? &h : nullptr);
}

std::string GenotypeDataset::GenotypeText() const {
  std::ostringstream out;
  out << "subject_id";
  for (const auto& l : loci_) {
    out << '\t' << l.id << ':' << l.reference << '/' << l.alternate;
  }
  out << "\tphenotype\n";
  for (const auto& r : records_) {
    out << r.subject_id;
    for (std::size_t i = 0; i < loci_.size(); ++i) {
      out << '\t' << loci_[i].Genotype(r.genotypes[i]);
    }
    out << '\t' << (r.is_case ? "case" : "control") << '\n';
  }
  return out.str();
}

std::string GenotypeDataset::HaplotypeText() const {
  std::ostringstream out;
  for (const auto& [pair, h] : phased_) {
    auto layout = HapLayout(locus(pair.first), locus(pair.second));
    const std::uint64_t v[4] = {h.n_ab, h.n_Ab, h.n_aB, h.n_AB};
    out << pair.first << ' ' << pair.second;
    for (int i = 0; i < 4; ++i) out << ' ' << layout[i] << '=' << v[i];
    out << '\n';
  }
  return out.str();
}

void GenotypeDataset::Save(const std::string& path) const {
  std::ofstream g(path, std::ios::binary);
  g << GenotypeText();
  if (!g) throw Error(ErrorCode::kIo, "cannot write " + path);
  if (!phased_.empty()) {
    std::ofstream h(path + ".hap", std::ios::binary);
    h << HaplotypeText();
    if (!h) throw Error(ErrorCode::kIo, "cannot write " + path + ".hap");
  }
}

PrecompTable PrecompTable::Build(const GenotypeDataset& data,
                                 std::span<const LocusPair> pairs, Exec exec) {
  PrecompTable table;
  const auto& records = data.records();
  std::vector<std::uint8_t> codes(records.size());
  std::vector<std::uint8_t> is_case(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    is_case[i] = records[i].is_case;
  }
  for (std::size_t l = 0; l < data.loci().size(); ++l) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      codes[i] = records[i].genotypes[l];
    }
    kernels::GenotypeColumn column{codes, is_case};
    table.loci_[data.loci()[l].id] =
        LocusEntry{data.loci()[l], kernels::CountGenotypes(exec, column)};
  }

  std::vector<LocusPair> wanted(pairs.begin(), pairs.end());
  if (wanted.empty()) {
    for (const auto& [pair, h] : data.phased()) wanted.push_back(pair);
  }
  for (const auto& pair : wanted) {
    if (!data.LocusIndex(pair.first) || !data.LocusIndex(pair.second)) {
      throw InvalidArgument("locus pair " + pair.first + "," + pair.second +
                            " names a locus absent from the dataset");
    }
    auto it = data.phased().find(pair);
    if (it == data.phased().end()) {
      throw InvalidArgument("no phased counts for " + pair.first + "," +
                            pair.second);
    }
    table.pairs_[pair] = PairEntry{data.locus(pair.first),
                                   data.locus(pair.second), it->second};
  }
  return table;
}

const PrecompTable::LocusEntry& PrecompTable::Entry(
    std::string_view locus) const {
  auto it = loci_.find(locus);
  if (it == loci_.end()) {
    throw InvalidArgument("locus " + std::string(locus) +
                          " is not in the pre-computation table");
  }
  return it->second;
}

const stats::ContingencyTable2x3& PrecompTable::genotypes(
    std::string_view locus) const {
  return Entry(locus).table;
}

stats::GenotypeCounts PrecompTable::totals(std::string_view locus) const {
  const auto& t = genotypes(locus);
  return {t.column(0), t.column(1), t.column(2)};
}

stats::HaplotypeCounts PrecompTable::haplotypes(const LocusPair& pair) const {
  if (auto it = pairs_.find(pair); it != pairs_.end()) return it->second.counts;
  if (auto it = pairs_.find({pair.second, pair.first}); it != pairs_.end()) {
    const auto& h = it->second.counts;
    return {h.n_ab, h.n_aB, h.n_Ab, h.n_AB};
  }
  throw InvalidArgument("locus pair " + pair.first + "," + pair.second +
                        " is not in the pre-computation table");
}

CountSlice PrecompTable::Slice(const protocol::Query& query) const {
  query.Validate();
  CountSlice s;
  if (query.test == TestKind::kLd) {
    LocusPair pair{query.loci[0], query.loci[1]};
    auto h = haplotypes(pair);
    s.layout = HapLayout(Entry(pair.first).locus, Entry(pair.second).locus);
    s.counts = {h.n_ab, h.n_Ab, h.n_aB, h.n_AB};
    return s;
  }
  const auto& e = Entry(query.loci[0]);
  if (query.test == TestKind::kHwe) {
    for (int g = 0; g < 3; ++g) {
      s.layout.push_back(e.locus.Genotype(g));
      s.counts.push_back(e.table.column(g));
    }
    return s;
  }
  for (int g = 0; g < 3; ++g) {
    s.layout.push_back(e.locus.Genotype(g) + "/case");
    s.counts.push_back(e.table.cases[static_cast<std::size_t>(g)]);
    s.layout.push_back(e.locus.Genotype(g) + "/control");
    s.counts.push_back(e.table.controls[static_cast<std::size_t>(g)]);
  }
  return s;
}

EncryptedCountVector OwnerAnswer(const protocol::Query& query,
                                 const std::string& owner_id,
                                 const PrecompTable& table,
                                 const paillier::PublicKey& pk,
                                 RandomSource& rng, Exec exec) {
  CountSlice slice = table.Slice(query);
  EncryptedCountVector v{query.query_id, owner_id, std::move(slice.layout),
                         kernels::EncryptAll(exec, pk, slice.counts, rng)};
  v.Validate(query.test);
  return v;
}

}  // namespace fedgwas::federation
