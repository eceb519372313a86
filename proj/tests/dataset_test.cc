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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "fedgwas/config.h"
#include "fedgwas/error.h"
#include "fedgwas/paillier.h"
#include "test_util.h"

namespace fedgwas::federation {
namespace {

using ::fedgwas::testing::ExampleDir;
using ::fedgwas::testing::ExampleOwners;

GenotypeDataset FromText(const std::string& g, const std::string& h = "") {
  std::istringstream gs(g);
  std::istringstream hs(h);
  return GenotypeDataset::Parse(gs, h.empty() ? nullptr : &hs);
}

TEST(DatasetTest, ExampleOwnerOneTotals) {
  auto data = ExampleOwners();
  auto table = PrecompTable::Build(data[0]);
  auto t = table.genotypes("rs4426");
  EXPECT_EQ(t.column(0), 2u);
  EXPECT_EQ(t.column(1), 1u);
  EXPECT_EQ(t.column(2), 0u);
  // Every subject of owner 1 is a control.
  EXPECT_EQ(t.case_total(), 0u);
  EXPECT_EQ(t.control_total(), 3u);
}

TEST(DatasetTest, ExamplePooledGenotypes) {
  std::uint64_t pooled[3] = {};
  for (const auto& d : ExampleOwners()) {
    auto g = PrecompTable::Build(d).totals("rs4426");
    pooled[0] += g.n_AA;
    pooled[1] += g.n_Aa;
    pooled[2] += g.n_aa;
  }
  EXPECT_EQ(pooled[0], 6u);
  EXPECT_EQ(pooled[1], 4u);
  EXPECT_EQ(pooled[2], 2u);
}

TEST(DatasetTest, PhasedCountsLoadedFromCompanionFile) {
  auto data = ExampleOwners();
  auto h = PrecompTable::Build(data[0]).haplotypes({"rs4305", "rs4630"});
  EXPECT_EQ(h.n_ab, 1u);
  EXPECT_EQ(h.n_Ab, 0u);
  EXPECT_EQ(h.n_aB, 2u);
  EXPECT_EQ(h.n_AB, 3u);
}

TEST(DatasetTest, EmptyDatasetGivesZeroTable) {
  auto data = FromText("subject_id rs1:A/G phenotype\n");
  auto t = PrecompTable::Build(data).genotypes("rs1");
  EXPECT_EQ(t.total(), 0u);
}

TEST(DatasetTest, RecountOracleOnThousandRecords) {
  std::mt19937_64 rng(99);
  std::vector<Locus> loci = {{"rs1", 'A', 'G'}, {"rs2", 'C', 'T'},
                             {"rs3", 'G', 'T'}};
  GenotypeDataset data(loci);
  std::vector<std::vector<std::string>> raw;
  std::vector<bool> phen;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> g;
    for (const auto& l : loci) {
      char a = rng() % 2 ? l.reference : l.alternate;
      char b = rng() % 2 ? l.reference : l.alternate;
      g.push_back(std::string{a, b});
    }
    bool is_case = rng() % 3 == 0;
    data.AddRecord("s" + std::to_string(i), g, is_case);
    raw.push_back(g);
    phen.push_back(is_case);
  }
  for (Exec exec : {Exec::kSerial, Exec::kParallel}) {
    auto table = PrecompTable::Build(data, {}, exec);
    for (std::size_t l = 0; l < loci.size(); ++l) {
      // Brute force over the raw strings, counting alternate alleles.
      std::uint64_t cases[3] = {}, controls[3] = {};
      for (std::size_t i = 0; i < raw.size(); ++i) {
        int alt = (raw[i][l][0] == loci[l].alternate) +
                  (raw[i][l][1] == loci[l].alternate);
        (phen[i] ? cases : controls)[alt]++;
      }
      const auto& t = table.genotypes(loci[l].id);
      for (int g = 0; g < 3; ++g) {
        EXPECT_EQ(t.cases[g], cases[g]);
        EXPECT_EQ(t.controls[g], controls[g]);
        EXPECT_EQ(t.column(g), cases[g] + controls[g]);
      }
    }
  }
}

TEST(DatasetTest, GenotypeAcceptsEitherAlleleOrder) {
  Locus l{"rs4426", 'C', 'T'};
  EXPECT_EQ(l.ParseGenotype("CT"), 1);
  EXPECT_EQ(l.ParseGenotype("TC"), 1);
  EXPECT_EQ(l.ParseGenotype("TT"), 2);
  EXPECT_THROW(l.ParseGenotype("CG"), Error);
  EXPECT_THROW(l.ParseGenotype("C"), Error);
  EXPECT_THROW(l.ParseGenotype("CCT"), Error);
}

TEST(DatasetTest, ParseErrorsNameTheLine) {
  try {
    FromText("subject_id rs1:A/G phenotype\ns1 AG case\ns2 AX control\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(FromText("subject_id rs1 phenotype\n"), Error);
  EXPECT_THROW(FromText("subject_id rs1:A/G phenotype\ns1 AG maybe\n"), Error);
  EXPECT_THROW(FromText("subject_id rs1:A/G phenotype\ns1 AG\n"), Error);
  EXPECT_THROW(FromText(""), Error);
}

TEST(DatasetTest, PhasedCountsMustMatchGenotypes) {
  const std::string g =
      "subject_id a:C/T b:A/G phenotype\n"
      "s1 CT AG case\n"
      "s2 CC GG control\n";
  EXPECT_NO_THROW(FromText(g, "a b CA=1 TA=0 CG=2 TG=1\n"));
  EXPECT_NO_THROW(FromText(g, "a b CA=0 TA=1 CG=3 TG=0\n"));
  // Wrong total.
  EXPECT_THROW(FromText(g, "a b CA=1 TA=0 CG=2 TG=2\n"), Error);
  // Right total, wrong allele margin at a.
  EXPECT_THROW(FromText(g, "a b CA=1 TA=0 CG=1 TG=2\n"), Error);
  // Labels out of order.
  EXPECT_THROW(FromText(g, "a b TA=0 CA=1 CG=2 TG=1\n"), Error);
  EXPECT_THROW(FromText(g, "a c CA=1 TA=0 CG=2 TG=1\n"), Error);
}

TEST(DatasetTest, UnknownPairIsRejected) {
  auto data = ExampleOwners()[0];
  LocusPair missing{"rs4426", "rs9999"};
  EXPECT_THROW(PrecompTable::Build(data, std::span(&missing, 1)), Error);
  LocusPair unphased{"rs4426", "rs4305"};
  EXPECT_THROW(PrecompTable::Build(data, std::span(&unphased, 1)), Error);
}

TEST(DatasetTest, SliceLayouts) {
  auto table = PrecompTable::Build(ExampleOwners()[1]);
  auto ld = table.Slice({"q", TestKind::kLd, {"rs4305", "rs4630"}, "r"});
  EXPECT_EQ(ld.layout, (std::vector<std::string>{"CA", "TA", "CG", "TG"}));
  EXPECT_EQ(ld.counts, (std::vector<std::uint64_t>{0, 0, 4, 2}));

  auto swapped = table.Slice({"q", TestKind::kLd, {"rs4630", "rs4305"}, "r"});
  EXPECT_EQ(swapped.layout, (std::vector<std::string>{"AC", "GC", "AT", "GT"}));
  EXPECT_EQ(swapped.counts, (std::vector<std::uint64_t>{0, 4, 0, 2}));

  auto hwe = table.Slice({"q", TestKind::kHwe, {"rs4426"}, "r"});
  EXPECT_EQ(hwe.layout, (std::vector<std::string>{"CC", "CT", "TT"}));
  EXPECT_EQ(hwe.counts, (std::vector<std::uint64_t>{2, 1, 0}));

  auto catt = table.Slice({"q", TestKind::kCatt, {"rs4426"}, "r"});
  EXPECT_EQ(catt.layout,
            (std::vector<std::string>{"CC/case", "CC/control", "CT/case",
                                      "CT/control", "TT/case", "TT/control"}));
  EXPECT_EQ(catt.counts, (std::vector<std::uint64_t>{1, 1, 1, 0, 0, 0}));

  EXPECT_THROW(table.Slice({"q", TestKind::kHwe, {"rs1"}, "r"}), Error);
}

TEST(DatasetTest, OwnerAnswerEncryptsSlice) {
  auto keys = paillier::KeyPairFromPrimes(1000003, 1000033);
  InsecureSeededRandom rng(5);
  auto table = PrecompTable::Build(ExampleOwners()[0]);
  protocol::Query q{"q-1", TestKind::kHwe, {"rs4426"}, "r"};
  auto v = OwnerAnswer(q, "owner-1", table, keys.public_key, rng);
  EXPECT_EQ(v.query_id, "q-1");
  EXPECT_EQ(v.owner_id, "owner-1");
  ASSERT_EQ(v.ciphertexts.size(), 3u);
  std::vector<unsigned long> plain;
  for (const auto& c : v.ciphertexts) {
    EXPECT_NE(c.value(), 0);
    plain.push_back(paillier::Decrypt(keys.private_key, c).get_ui());
  }
  EXPECT_EQ(plain, (std::vector<unsigned long>{2, 1, 0}));

  // Zero counts still travel as fresh, distinct ciphertexts.
  auto ld = OwnerAnswer({"q-2", TestKind::kLd, {"rs4305", "rs4630"}, "r"},
                        "owner-1", table, keys.public_key, rng);
  EXPECT_NE(ld.ciphertexts[1], v.ciphertexts[2]);
}

TEST(DatasetTest, SaveLoadRoundTrip) {
  auto data = ExampleOwners()[2];
  auto dir = std::filesystem::temp_directory_path() / "fedgwas_dataset_test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "owner.tsv").string();
  data.Save(path);
  auto back = GenotypeDataset::Load(path);
  EXPECT_EQ(back.GenotypeText(), data.GenotypeText());
  EXPECT_EQ(back.HaplotypeText(), data.HaplotypeText());
  std::filesystem::remove_all(dir);
}

TEST(ConfigTest, ParsesExampleConfig) {
  auto c = FederationConfig::Load(ExampleDir() + "/local.conf");
  EXPECT_NO_THROW(c.Validate());
  ASSERT_EQ(c.owners.size(), 4u);
  EXPECT_EQ(c.owners[2].owner_id, "owner-3");
  EXPECT_EQ(c.owners[2].data_path, ExampleDir() + "/owner3.tsv");
  EXPECT_EQ(c.mode, Mode::kHybrid);
  EXPECT_EQ(c.key_bits, 1024u);
  EXPECT_EQ(c.researchers.at("alice"), "alice-token");
}

TEST(ConfigTest, RejectsBadSettings) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return FederationConfig::Parse(in);
  };
  EXPECT_THROW(parse("colour = blue\n"), Error);
  EXPECT_THROW(parse("mode = fast\n"), Error);
  EXPECT_THROW(parse("owner = only-an-id\n"), Error);
  EXPECT_THROW(parse("key_bits = many\n"), Error);
  EXPECT_THROW(parse("owner\n"), Error);

  auto c = parse("owner = a 127.0.0.1:1 latency=-3\n");
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_THROW(parse("mode = hybrid\n").Validate(), Error);
  auto small = parse("owner = a :1\nkey_bits = 64\n");
  EXPECT_THROW(small.Validate(), Error);
  small.insecure_keys = true;
  EXPECT_NO_THROW(small.Validate());
  auto dup = parse("owner = a :1\nowner = a :2\n");
  EXPECT_THROW(dup.Validate(), Error);
}

}  // namespace
}  // namespace fedgwas::federation
