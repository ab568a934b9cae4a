#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "contab/mutation.hpp"

namespace contab {

inline constexpr std::size_t kTopGenes = 25;
inline constexpr std::size_t kGeneFeatures = kTopGenes * kSubstitutionCount;         // 300
inline constexpr std::size_t kChromFeatures = kChromosomeCount * kSubstitutionCount;  // 288

/// Logical-to-physical column names for a mutation export. Either `ref`/`alt`
/// or `cds` (an HGVS coding change such as "c.215C>G") must be present.
struct ColumnSchema {
  std::string gene = "GENE_SYMBOL";
  std::string chromosome = "CHROMOSOME";
  std::string ref = "REF";
  std::string alt = "ALT";
  std::string cds = "MUTATION_CDS";
  std::string cohort = "PRIMARY_SITE";
};

namespace reject_reason {
inline constexpr const char* kAlternativeTranscript = "alternative transcript";
inline constexpr const char* kNotSubstitution = "not a substitution";
inline constexpr const char* kNonCanonicalChromosome = "non-canonical chromosome";
inline constexpr const char* kMissingField = "missing field";
inline constexpr const char* kWrongColumnCount = "wrong column count";
}  // namespace reject_reason

/// Reason -> row count. Merging is pure addition, so shards combine in any order.
struct RejectTally {
  std::map<std::string, std::size_t> counts;

  void add(const std::string& reason, std::size_t n = 1) { counts[reason] += n; }
  std::size_t total() const;
  RejectTally& operator+=(const RejectTally& other);
};

struct ParseResult {
  std::vector<MutationRecord> records;
  RejectTally rejects;
  std::size_t total_rows = 0;

  ParseResult& operator+=(const ParseResult& other);
};

/// Parse a tab-separated export with a header row. Throws InputError when a
/// required column is missing from the header.
ParseResult parse_mutations(std::istream& source, const ColumnSchema& schema = {});

/// Per-gene substitution tallies of one cohort.
using GeneTally = std::map<std::string, std::array<std::int64_t, kSubstitutionCount>>;

struct GeneView {
  /// Top genes by descending total count, lexicographic tie-break; "" marks padding rows.
  std::array<std::string, kTopGenes> genes{};
  Eigen::Matrix<std::int64_t, kTopGenes, kSubstitutionCount, Eigen::RowMajor> counts =
      decltype(counts)::Zero();
  /// Set when the cohort had no records at all.
  bool empty = false;

  /// Gene-major, substitution-minor: flat[i * 12 + j] == counts(i, j).
  Eigen::VectorXd flat() const;
};

struct ChromosomeView {
  /// Substitutions per base pair, one row per chromosome.
  Eigen::Matrix<double, kChromosomeCount, kSubstitutionCount, Eigen::RowMajor> rates =
      decltype(rates)::Zero();

  Eigen::VectorXd flat() const;
};

GeneTally tally_genes(const std::vector<MutationRecord>& records);
GeneView build_gene_view(const GeneTally& tally);
GeneView build_gene_view(const std::vector<MutationRecord>& records);

using ChromosomeCounts = Eigen::Matrix<std::int64_t, kChromosomeCount, kSubstitutionCount, Eigen::RowMajor>;
ChromosomeView build_chromosome_view(const ChromosomeCounts& counts,
                                     const ChromosomeLengths& lengths = grch38_lengths());
ChromosomeView build_chromosome_view(const std::vector<MutationRecord>& records,
                                     const ChromosomeLengths& lengths = grch38_lengths());

struct CohortProfile {
  std::string name;
  GeneView gene;
  ChromosomeView chrom;
};

/// Group records by cohort (ordered by name) and build both views for each.
std::vector<CohortProfile> build_profiles(const std::vector<MutationRecord>& records,
                                          const ChromosomeLengths& lengths = grch38_lengths());

struct FeatureScaling {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stddev;  // population standard deviation
};

struct ScalingParams {
  FeatureScaling gene;
  FeatureScaling chrom;
  static constexpr double kStdGuard = 1e-8;
  static constexpr double kRatePrescale = 1e6;
};

struct CohortDataset {
  std::vector<CohortProfile> cohorts;
  Eigen::MatrixXd scaled_gene;   // n x 300
  Eigen::MatrixXd scaled_chrom;  // n x 288
  ScalingParams scaling;

  std::size_t size() const { return cohorts.size(); }
  std::vector<std::string> names() const;
  /// Raw gene counts, n x 300.
  Eigen::MatrixXd gene_counts() const;
  /// Raw chromosome rates, n x 288.
  Eigen::MatrixXd chrom_rates() const;
  /// Non-negative log1p features [log1p(counts) | log1p(rates * 1e6)], n x 588.
  Eigen::MatrixXd log_features() const;
};

/// Gene view: log1p then per-feature z-score. Chromosome view: rates * 1e6,
/// log1p, z-score. Throws InputError for fewer than two cohorts or duplicate names.
CohortDataset scale_features(std::vector<CohortProfile> cohorts);

/// Column header names: "rank01|C>T" for the gene view, "chr19|G>A" for the chromosome view.
std::vector<std::string> gene_feature_names();
std::vector<std::string> chrom_feature_names();

}  // namespace contab
