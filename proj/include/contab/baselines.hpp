#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "contab/contrastive.hpp"
#include "contab/ingest.hpp"
#include "contab/rng.hpp"

namespace contab {

/// [scaled gene | scaled chromosome], n x 588.
Matrix concat_features(const CohortDataset& dataset);

struct NmfResult {
  Matrix w;  // n x r, the embedding
  Matrix h;  // r x m
  std::vector<double> objective;  // ||X - WH||_F^2 after each iteration
};

/// Lee-Seung multiplicative updates for ||X - WH||_F^2 from a seeded uniform(0,1]
/// start. Throws InputError for negative entries or rank outside [1, min(n, m)].
NmfResult nmf_fit(const Matrix& x, int rank, int iterations, std::uint64_t seed);

struct AeConfig {
  int hidden = 64;
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 42;
};

struct SimclrConfig {
  int hidden = 256;
  int latent = 64;
  int projection = 64;
  int epochs = 100;
  int batch_size = 8;
  double lr = 1e-3;
  double temperature = 0.5;
  double drop_prob = 0.1;
  std::uint64_t seed = 42;
};

struct DeepClusterConfig {
  int hidden = 256;
  int latent = 64;
  int k_pseudo = 2;
  int epochs = 50;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 42;
};

struct BaselineConfig {
  int nmf_rank = 2;
  int nmf_iterations = 500;
  AeConfig ae;
  SimclrConfig simclr;
  DeepClusterConfig deepcluster;
  std::uint64_t seed = 42;  // root for every method's named stream

  /// Per-method configs with seeds derived from the root.
  AeConfig ae_config() const;
  SimclrConfig simclr_config() const;
  DeepClusterConfig deepcluster_config() const;
};

nlohmann::json to_json(const BaselineConfig& cfg);
BaselineConfig baseline_config_from_json(const nlohmann::json& doc, BaselineConfig base = {});

struct TrainedEmbedding {
  EmbeddingMatrix embedding;
  std::vector<double> loss_history;
};

/// Single-bottleneck autoencoder x -> ReLU(x W1 + b1) -> (.) W2 + b2 with MSE loss.
/// The bottleneck activations are the embedding.
TrainedEmbedding ae_train(const Matrix& x, const std::vector<std::string>& names, const AeConfig& cfg);

/// Two augmented copies of `x`: every feature independently zeroed with probability p.
std::pair<Matrix, Matrix> dropout_views(const Matrix& x, double p, Rng& rng);

/// MLP d -> hidden (ReLU) -> latent with a projection head latent -> projection,
/// trained with NT-Xent between two dropout views. Embeddings are latents of the
/// clean input. Throws InputError unless drop_prob lies in (0, 1).
TrainedEmbedding simclr_mlp_train(const Matrix& x, const std::vector<std::string>& names, const SimclrConfig& cfg);

struct DeepClusterResult {
  EmbeddingMatrix embedding;
  std::vector<std::vector<int>> pseudo_labels;  // per epoch
  std::vector<double> head_checksums;           // classifier head parameter sum at each re-init
  std::vector<double> loss_history;
};

/// Alternates k-means pseudo-labelling of the current latents with one epoch of
/// cross-entropy training of the MLP and a freshly initialized linear head.
/// Throws InputError if k_pseudo > n or k_pseudo < 2.
DeepClusterResult deepcluster_train(const Matrix& x, const std::vector<std::string>& names,
                                    const DeepClusterConfig& cfg);

struct Dendrogram {
  struct Merge {
    int a;  // cluster ids: 0..n-1 leaves, n+i the i-th merge
    int b;
    double height;
    int size;
  };
  int leaves = 0;
  std::vector<Merge> merges;
};

/// Ward agglomeration through the Lance-Williams recurrence on squared Euclidean
/// distances. Merge heights are Ward distances (sqrt of the recurrence value).
Dendrogram ward_linkage(const Matrix& x);
/// Labels after the first n - k merges, canonicalized by first occurrence.
std::vector<int> cut_dendrogram(const Dendrogram& tree, int k);
std::vector<int> hierarchical_labels(const Matrix& x, int k);

}  // namespace contab
