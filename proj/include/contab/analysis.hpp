#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "contab/contrastive.hpp"
#include "contab/ingest.hpp"

namespace contab {

struct SimilarityStats {
  /// Mean off-diagonal cosine inside each cluster; nullopt for singletons.
  std::vector<std::optional<double>> within;
  /// Mean cosine across cluster blocks; nullopt with a single cluster.
  std::optional<double> between;
  /// Per cluster, the cohort with the highest mean cosine to the rest of its cluster.
  std::vector<std::size_t> prototypes;
  /// Cohort indices, cluster-contiguous (cluster id, then name).
  std::vector<std::size_t> order;
  /// Cosine matrix with rows/columns permuted by `order`.
  Eigen::MatrixXd ordered_cosine;
};

/// Dense cosine similarity of the rows of `x` (zero rows give NumericalError).
Eigen::MatrixXd cosine_similarity(const Eigen::MatrixXd& x);

SimilarityStats similarity_stats(const EmbeddingMatrix& embeddings, const std::vector<int>& labels);

struct Neighbor {
  std::size_t index;
  double similarity;
};

/// Top-k cosine neighbors per cohort, self excluded, ties by cohort name.
/// Throws InputError unless n > top_k.
std::vector<std::vector<Neighbor>> nearest_neighbors(const EmbeddingMatrix& embeddings, std::size_t top_k = 3);

/// Per cluster, mean over cohorts of raw gene-view counts summed over genes (k x 12).
Eigen::MatrixXd cluster_spectra(const CohortDataset& dataset, const std::vector<int>& labels);
/// Per cluster, mean over cohorts of chromosome load: substitution rates summed per chromosome (k x 24).
Eigen::MatrixXd cluster_chrom_load(const CohortDataset& dataset, const std::vector<int>& labels);

struct GeneRecurrence {
  std::string gene;
  std::size_t cohorts;  // cohorts in the cluster listing this gene among their top genes
};

struct TopGenesReport {
  std::vector<std::vector<GeneRecurrence>> per_cluster;  // ranked, truncated to top_n
  /// Over the complete top-gene sets of clusters 0 and 1.
  std::size_t shared = 0;
  std::size_t unique_first = 0;
  std::size_t unique_second = 0;
};

TopGenesReport top_genes_by_cluster(const CohortDataset& dataset, const std::vector<int>& labels,
                                    std::size_t top_n = 20);

/// Projection onto the top two principal axes, found by power iteration with
/// deflation from a fixed start vector. Axis signs make the largest-magnitude
/// loading positive. Throws InputError for fewer than 3 rows or a rank-0 matrix.
Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& x);

}  // namespace contab
