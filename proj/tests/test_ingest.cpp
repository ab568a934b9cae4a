#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "contab/cluster.hpp"
#include "contab/error.hpp"
#include "contab/ingest.hpp"
#include "contab/synthetic.hpp"

using namespace contab;

namespace {

ParseResult parse_file(const std::string& name, const ColumnSchema& schema = {}) {
  std::ifstream in(std::string(CONTAB_TEST_DATA) + "/" + name);
  REQUIRE(in.good());
  return parse_mutations(in, schema);
}

ParseResult parse_text(const std::string& text, const ColumnSchema& schema = {}) {
  std::istringstream in(text);
  return parse_mutations(in, schema);
}

MutationRecord rec(const std::string& gene, std::size_t chrom, Substitution s, const std::string& cohort = "c") {
  return MutationRecord{gene, ChromosomeId(chrom), s, cohort};
}

const std::string kHeader = "GENE_SYMBOL\tCHROMOSOME\tREF\tALT\tPRIMARY_SITE\n";

}  // namespace

TEST_CASE("substitution order is alphabetical by reference then alternate") {
  const char* expected[] = {"A>C", "A>G", "A>T", "C>A", "C>G", "C>T", "G>A", "G>C", "G>T", "T>A", "T>C", "T>G"};
  for (std::size_t i = 0; i < kSubstitutionCount; ++i) {
    CHECK(to_string(substitution_at(i)) == expected[i]);
    CHECK(index_of(substitution_at(i)) == i);
  }
}

TEST_CASE("alleles map to substitutions") {
  CHECK(substitution_from_alleles("C", "T") == Substitution::CT);
  CHECK(substitution_from_alleles("g", "a") == Substitution::GA);
  CHECK_FALSE(substitution_from_alleles("C", "C"));
  CHECK_FALSE(substitution_from_alleles("C", "CT"));
  CHECK_FALSE(substitution_from_alleles("N", "A"));
  CHECK_FALSE(substitution_from_alleles("", "A"));
}

TEST_CASE("chromosome names") {
  CHECK(ChromosomeId::parse("7")->index() == 6);
  CHECK(ChromosomeId::parse("chr7")->index() == 6);
  CHECK(ChromosomeId::parse("X")->index() == 22);
  CHECK(ChromosomeId::parse("chrY")->index() == 23);
  CHECK(ChromosomeId::parse("23")->index() == 22);
  CHECK(ChromosomeId::parse("24")->index() == 23);
  CHECK_FALSE(ChromosomeId::parse("MT"));
  CHECK_FALSE(ChromosomeId::parse("chrM"));
  CHECK_FALSE(ChromosomeId::parse("0"));
  CHECK_FALSE(ChromosomeId::parse("25"));
  CHECK_FALSE(ChromosomeId::parse("GL000220.1"));
  CHECK(ChromosomeId(22).name() == "X");
  for (auto len : grch38_lengths()) CHECK(len > 10'000'000u);
  CHECK(grch38_lengths()[0] == 248'956'422u);
}

TEST_CASE("fixture with transcripts and an indel") {
  const ParseResult r = parse_file("small.tsv");
  CHECK(r.records.size() == 6);
  CHECK(r.total_rows == 9);
  CHECK(r.rejects.counts.size() == 2);
  CHECK(r.rejects.counts.at(reject_reason::kAlternativeTranscript) == 2);
  CHECK(r.rejects.counts.at(reject_reason::kNotSubstitution) == 1);
  CHECK(r.rejects.total() + r.records.size() == r.total_rows);
  for (const auto& m : r.records) CHECK(m.gene.find("_ENST") == std::string::npos);
}

TEST_CASE("reject reasons") {
  const ParseResult r = parse_text(kHeader +
                                   "TP53_ENST00000269305\t17\tC\tT\tlung\n"
                                   "TP53\t17\tC\tC\tlung\n"
                                   "TP53\tMT\tC\tT\tlung\n"
                                   "\t17\tC\tT\tlung\n"
                                   "TP53\t17\n"
                                   "TP53\t17\tC\tT\tlung\n");
  CHECK(r.records.size() == 1);
  CHECK(r.rejects.counts.at(reject_reason::kAlternativeTranscript) == 1);
  CHECK(r.rejects.counts.at(reject_reason::kNotSubstitution) == 1);
  CHECK(r.rejects.counts.at(reject_reason::kNonCanonicalChromosome) == 1);
  CHECK(r.rejects.counts.at(reject_reason::kMissingField) == 1);
  CHECK(r.rejects.counts.at(reject_reason::kWrongColumnCount) == 1);
  CHECK(r.rejects.total() + r.records.size() == r.total_rows);
}

TEST_CASE("coding change column") {
  ColumnSchema schema;
  const ParseResult r = parse_text("GENE_SYMBOL\tCHROMOSOME\tMUTATION_CDS\tPRIMARY_SITE\n"
                                   "KRAS\t12\tc.35G>T\tlung\n"
                                   "GATA3\t10\tc.1224_1225insT\tbreast\n"
                                   "TP53\t17\tc.215C>G\tbreast\n",
                                   schema);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].substitution == Substitution::GT);
  CHECK(r.records[1].substitution == Substitution::CG);
  CHECK(r.rejects.counts.at(reject_reason::kNotSubstitution) == 1);
}

TEST_CASE("missing column is named") {
  try {
    parse_text("GENE_SYMBOL\tREF\tALT\tPRIMARY_SITE\nTP53\tC\tT\tlung\n");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("CHROMOSOME") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_text(""), InputError);
}

TEST_CASE("sharded parse merges in any order") {
  const std::string a = kHeader + "TP53\t17\tC\tT\tlung\nTP53\tMT\tC\tT\tlung\n";
  const std::string b = kHeader + "KRAS\t12\tG\tT\tlung\nKRAS\t12\tG\tGT\tlung\n";
  ParseResult ab = parse_text(a);
  ab += parse_text(b);
  ParseResult ba = parse_text(b);
  ba += parse_text(a);
  CHECK(ab.rejects.counts == ba.rejects.counts);
  CHECK(ab.total_rows == ba.total_rows);
  CHECK(build_gene_view(ab.records).flat() == build_gene_view(ba.records).flat());
}

TEST_CASE("gene view ordering and counts") {
  std::vector<MutationRecord> records;
  for (int i = 0; i < 3; ++i) records.push_back(rec("TP53", 16, Substitution::CT));
  records.push_back(rec("TP53", 16, Substitution::GA));
  records.push_back(rec("KRAS", 11, Substitution::GT));
  records.push_back(rec("KRAS", 11, Substitution::GT));
  const GeneView v = build_gene_view(records);
  CHECK(v.genes[0] == "TP53");
  CHECK(v.genes[1] == "KRAS");
  CHECK(v.genes[2] == "");
  const Eigen::VectorXd flat = v.flat();
  CHECK(flat.size() == 300);
  CHECK(flat(0 * 12 + index_of(Substitution::CT)) == 3);
  CHECK(flat(0 * 12 + index_of(Substitution::GA)) == 1);
  CHECK(flat(1 * 12 + index_of(Substitution::GT)) == 2);
  CHECK(flat.sum() == 6);
  for (Eigen::Index i = 0; i < 25; ++i) {
    for (Eigen::Index j = 0; j < 12; ++j) CHECK(flat(i * 12 + j) == static_cast<double>(v.counts(i, j)));
  }
  CHECK_FALSE(v.empty);
}

TEST_CASE("gene view ties and empty input") {
  const GeneView tie = build_gene_view(std::vector<MutationRecord>{rec("BBB", 0, Substitution::AG), rec("AAA", 0, Substitution::AG)});
  CHECK(tie.genes[0] == "AAA");
  CHECK(tie.genes[1] == "BBB");
  const GeneView empty = build_gene_view(std::vector<MutationRecord>{});
  CHECK(empty.empty);
  CHECK(empty.flat().isZero());
}

TEST_CASE("gene view keeps 25 genes") {
  std::vector<MutationRecord> records;
  for (int g = 0; g < 30; ++g) {
    for (int k = 0; k <= g; ++k) records.push_back(rec("G" + std::to_string(100 + g), 0, Substitution::CT));
  }
  const GeneView v = build_gene_view(records);
  CHECK(v.genes[0] == "G129");
  CHECK(v.genes[24] == "G105");
  CHECK(v.flat().sum() < static_cast<double>(records.size()));
}

TEST_CASE("chromosome view rates") {
  const ChromosomeView one = build_chromosome_view(std::vector<MutationRecord>{rec("A", 0, Substitution::CT), rec("B", 0, Substitution::CT)});
  CHECK(one.rates(0, index_of(Substitution::CT)) == 2.0 / 248956422.0);
  CHECK(one.rates(0, index_of(Substitution::CT)) == doctest::Approx(8.034e-9).epsilon(1e-3));
  CHECK(one.flat().size() == 288);

  std::vector<MutationRecord> y;
  for (std::size_t s = 0; s < 12; ++s) y.push_back(rec("SRY", 23, substitution_at(s)));
  const ChromosomeView yv = build_chromosome_view(y);
  for (Eigen::Index s = 0; s < 12; ++s) CHECK(yv.rates(23, s) == 1.0 / 57227415.0);
  CHECK(yv.rates.topRows(23).isZero());
  CHECK(build_chromosome_view(std::vector<MutationRecord>{}).flat().isZero());
}

TEST_CASE("chromosome view is invariant to record order") {
  const ParseResult r = parse_file("handcount.tsv");
  std::vector<MutationRecord> reversed(r.records.rbegin(), r.records.rend());
  CHECK(build_chromosome_view(r.records).flat() == build_chromosome_view(reversed).flat());
}

TEST_CASE("scaling") {
  auto profile = [](const std::string& name, std::int64_t count) {
    CohortProfile p;
    p.name = name;
    p.gene.counts(0, 0) = count;
    return p;
  };
  SUBCASE("zero variance maps to zero") {
    const CohortDataset ds = scale_features({profile("a", 0), profile("b", 0), profile("c", 0)});
    CHECK(ds.scaled_gene.isZero());
    CHECK(ds.scaled_chrom.isZero());
  }
  SUBCASE("log1p then population z-score") {
    CohortProfile a = profile("a", 0);
    CohortProfile b = profile("b", 0);
    b.chrom.rates(0, 0) = (std::exp(1.0) - 1.0) / 1e6;
    const CohortDataset ds = scale_features({a, b});
    CHECK(ds.scaled_chrom(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ds.scaled_chrom(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(scale_features({profile("a", 1)}), "cannot standardize one sample", InputError);
    CHECK_THROWS_AS(scale_features({profile("a", 1), profile("a", 2)}), InputError);
  }
}

TEST_CASE("scaled columns are centered") {
  const CohortDataset ds = generate_synthetic_cohorts(12, 3, 1.0).dataset;
  for (Eigen::Index j = 0; j < ds.scaled_gene.cols(); ++j) CHECK(std::abs(ds.scaled_gene.col(j).mean()) < 1e-9);
  for (Eigen::Index j = 0; j < ds.scaled_chrom.cols(); ++j) CHECK(std::abs(ds.scaled_chrom.col(j).mean()) < 1e-9);
  CHECK(ds.scaled_gene.allFinite());
  CHECK(ds.log_features().minCoeff() >= 0.0);
}

TEST_CASE("feature names") {
  const auto g = gene_feature_names();
  const auto c = chrom_feature_names();
  REQUIRE(g.size() == 300);
  REQUIRE(c.size() == 288);
  CHECK(g[0] == "rank01|A>C");
  CHECK(g[299] == "rank25|T>G");
  CHECK(c[18 * 12 + index_of(Substitution::GA)] == "chr19|G>A");
  CHECK(c[287] == "chrY|T>G");
}

TEST_CASE("synthetic cohorts") {
  const SyntheticCohorts a = generate_synthetic_cohorts(40, 7, 3.0);
  const SyntheticCohorts b = generate_synthetic_cohorts(40, 7, 3.0);
  CHECK(a.dataset.scaled_gene == b.dataset.scaled_gene);
  CHECK(a.dataset.scaled_chrom == b.dataset.scaled_chrom);
  CHECK(a.dataset.gene_counts() == b.dataset.gene_counts());
  CHECK(a.labels == b.labels);
  CHECK(a.dataset.size() == 40);

  double total[2] = {0, 0};
  const Eigen::MatrixXd counts = a.dataset.gene_counts();
  for (std::size_t i = 0; i < a.labels.size(); ++i) total[a.labels[i]] += counts.row(static_cast<Eigen::Index>(i)).sum();
  CHECK(total[0] / 20 > total[1] / 20);

  CHECK_THROWS_AS(generate_synthetic_cohorts(41, 7, 3.0), InputError);
  CHECK_THROWS_AS(generate_synthetic_cohorts(2, 7, 3.0), InputError);
  CHECK_THROWS_AS(generate_synthetic_cohorts(40, 7, -1.0), InputError);
}

TEST_CASE("synthetic control without separation") {
  const SyntheticCohorts s = generate_synthetic_cohorts(40, 7, 0.0);
  Eigen::MatrixXd x(40, 588);
  x << s.dataset.scaled_gene, s.dataset.scaled_chrom;
  const ClusterAssignment km = kmeans(x, 2, 11);
  CHECK(std::abs(adjusted_rand_index(km.labels, s.labels)) < 0.2);
}
