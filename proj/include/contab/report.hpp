#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contab/analysis.hpp"
#include "contab/cluster.hpp"
#include "contab/contrastive.hpp"

namespace contab {

/// Quality indices of one labelling; a metric that cannot be computed is nullopt.
struct QualityMetrics {
  std::optional<double> silhouette;
  std::optional<double> silhouette_cosine;
  std::optional<double> davies_bouldin;
  std::optional<double> calinski_harabasz;  // may be +inf when the within-cluster scatter is 0
  std::vector<std::string> notes;           // why a metric is missing
};

QualityMetrics quality_metrics(const Eigen::MatrixXd& x, const std::vector<int>& labels);
nlohmann::json to_json(const QualityMetrics& m);

struct ClusterReport {
  std::vector<std::string> names;
  ClusterAssignment assignment;
  QualityMetrics metrics;
  SimilarityStats similarity;
  std::vector<std::vector<Neighbor>> neighbors;
  Eigen::MatrixXd pca;
  std::optional<double> ari;  // against reference labels when given
  // Present when the cohort features are available.
  std::optional<Eigen::MatrixXd> spectra;
  std::optional<Eigen::MatrixXd> chrom_load;
  std::optional<TopGenesReport> top_genes;
};

struct EvaluateOptions {
  int k = 2;
  std::uint64_t seed = 42;
  std::size_t top_k_neighbors = 3;
  std::size_t top_genes = 20;
};

/// Runs k-means and every downstream analysis. `dataset` must list the same
/// cohorts in the same order as `embeddings` when given.
ClusterReport evaluate_embeddings(const EmbeddingMatrix& embeddings, const EvaluateOptions& options,
                                  const CohortDataset* dataset = nullptr,
                                  const std::vector<int>* reference_labels = nullptr);

nlohmann::json to_json(const ClusterReport& report);
/// report.json, labels.csv, cosine_matrix.csv, neighbors.csv, pca2.csv, heatmap.svg,
/// plus spectra.csv, chrom_load.csv and top_genes_<c>.csv when available.
void write_cluster_report(const ClusterReport& report, const std::filesystem::path& dir);

/// Blue-white-red ramp over [-1, 1] as "#rrggbb"; values outside are clamped.
std::string diverging_color(double value);
/// Cluster-ordered cosine heatmap; one <rect class="cell"> per matrix entry.
std::string render_heatmap_svg(const Eigen::MatrixXd& ordered_cosine, const std::vector<std::string>& ordered_names,
                               const std::vector<int>& ordered_labels);

struct ComparisonRow {
  std::string method;
  QualityMetrics metrics;
  std::optional<double> ari;
};

struct ComparisonTable {
  std::string space = "original-embeddings";
  std::vector<ComparisonRow> rows;
};

/// Published silhouette / Davies-Bouldin / Calinski-Harabasz per method on the
/// full cohort snapshot, carried as reference metadata.
nlohmann::json published_reference();
std::string comparison_csv(const ComparisonTable& table);
nlohmann::json to_json(const ComparisonTable& table);

}  // namespace contab
