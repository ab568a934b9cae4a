#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "contab/ingest.hpp"
#include "contab/tabnet.hpp"

namespace contab {

/// Which terms the NT-Xent denominator sums over, besides the anchor itself.
enum class Denominator {
  ExcludeSelf,      // all k != i (positive included); standard form
  ExcludePositive,  // all k != i and k != positive; the indicator as literally printed
};

enum class Fusion { Mean, Concat };
enum class EmbeddingSource { Latent, Projection };

std::string to_string(Denominator d);
std::string to_string(Fusion f);
std::string to_string(EmbeddingSource s);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3;
  double temperature = 0.5;
  std::uint64_t seed = 42;
  Denominator denominator = Denominator::ExcludeSelf;
  Fusion fusion = Fusion::Mean;
  EmbeddingSource source = EmbeddingSource::Latent;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});

/// NT-Xent over 2N views ordered [view_a_1..view_a_N, view_b_1..view_b_N]; the
/// positive of view i is view i +- N. Rows are L2-normalized first. Returns the
/// mean of the per-anchor losses as a 1x1 node.
Var nt_xent_loss(Var embeddings, double temperature, Denominator denominator = Denominator::ExcludeSelf);
double nt_xent_value(const Matrix& embeddings, double temperature, Denominator denominator = Denominator::ExcludeSelf);

/// Seeded partition of 0..n-1 into chunks of batch_size for one epoch. A final
/// chunk with a single cohort is merged into the previous chunk.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n_cohorts, std::size_t batch_size, std::uint64_t epoch,
                                                   std::uint64_t seed);

/// Rows of `m` selected by `index`.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& index);

struct TrainedModel {
  TabNetEncoder gene;
  TabNetEncoder chrom;
  std::vector<double> loss_history;  // epoch means
};

/// Joint training of the gene-view and chromosome-view encoders. Architecture
/// comes from `arch` with input_dim overridden per view. Throws NumericalError
/// naming the epoch and batch if the loss becomes non-finite.
TrainedModel train(const CohortDataset& dataset, const TrainConfig& cfg, const TabNetConfig& arch = {});

struct EmbeddingMatrix {
  std::vector<std::string> names;
  Matrix vectors;
  std::string fusion;  // "mean", "concat", or a baseline tag
};

/// Eval-mode embeddings per cohort: each view's vector L2-normalized, then
/// averaged (mean) or concatenated.
EmbeddingMatrix embed_cohorts(TabNetEncoder& gene, TabNetEncoder& chrom, const CohortDataset& dataset, Fusion fusion,
                              EmbeddingSource source = EmbeddingSource::Latent);
EmbeddingMatrix fuse_views(const std::vector<std::string>& names, const Matrix& gene_latent, const Matrix& chrom_latent,
                           Fusion fusion);

}  // namespace contab
