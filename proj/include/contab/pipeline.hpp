#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contab/baselines.hpp"
#include "contab/contrastive.hpp"
#include "contab/ingest.hpp"
#include "contab/report.hpp"
#include "contab/synthetic.hpp"
#include "contab/tabnet.hpp"

namespace contab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

/// Everything a run depends on besides its inputs. One root seed feeds every
/// component through named sub-streams.
struct PipelineConfig {
  std::uint64_t seed = 42;
  TrainConfig train;
  TabNetConfig tabnet;
  BaselineConfig baselines;
  EvaluateOptions evaluate;

  /// Pushes the root seed into the component configs.
  void apply_seed(std::uint64_t root);
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// {"schema_version": 1, "seed": .., "train": {..}, "tabnet": {..}, "baselines": {..}, "evaluate": {..}};
/// missing sections keep their defaults. Throws InputError on an unknown schema version.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);
/// Defaults, then the file if given, then CONTAB_SEED if set.
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& path);
/// Parsed CONTAB_SEED, if set. Throws InputError when it is not an unsigned integer.
std::optional<std::uint64_t> seed_from_environment();

/// Column schema plus optional chromosome length overrides:
/// {"gene": .., "chromosome": .., "ref": .., "alt": .., "cds": .., "cohort": .., "chromosome_lengths": {"1": ..}}
struct InputSchema {
  ColumnSchema columns;
  ChromosomeLengths lengths = grch38_lengths();
};
InputSchema input_schema_from_json(const nlohmann::json& doc);

/// Controls the manifest timestamp: none by default (so outputs are
/// byte-reproducible), SOURCE_DATE_EPOCH when set, wall clock when stamp is true.
struct RunOptions {
  bool stamp = false;
};

/// Feature directory layout: gene.csv and chrom.csv (scaled), gene_counts.csv and
/// chrom_rates.csv (raw), genes.csv (top-gene names per cohort), scaling.json.
void write_features(const CohortDataset& dataset, const std::filesystem::path& dir,
                    const ParseResult* parse = nullptr);
/// Reads the raw views and re-derives the scaled matrices.
CohortDataset load_features(const std::filesystem::path& dir);

/// Reads a "cohort,cluster" CSV into labels ordered like `names`.
std::vector<int> read_labels(const std::filesystem::path& path, const std::vector<std::string>& names);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& embeddings, const std::filesystem::path& path);

struct FeaturizeArgs {
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> schema;
};
struct TrainArgs {
  std::filesystem::path features;
  std::optional<std::filesystem::path> config;
};
struct EvaluateArgs {
  std::filesystem::path embeddings;
  int k = 2;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> config;
};
struct CompareArgs {
  std::filesystem::path features;
  std::vector<std::string> methods;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> config;
};
struct SynthArgs {
  int cohorts = 40;
  std::uint64_t seed = 42;
  double separation = 3.0;
};

ParseResult cmd_featurize(const FeaturizeArgs& args, const std::filesystem::path& out, const RunOptions& run = {});
TrainedModel cmd_train(const TrainArgs& args, const std::filesystem::path& out, const RunOptions& run = {});
ClusterReport cmd_evaluate(const EvaluateArgs& args, const std::filesystem::path& out, const RunOptions& run = {});
ComparisonTable cmd_compare(const CompareArgs& args, const std::filesystem::path& out, const RunOptions& run = {});
SyntheticCohorts cmd_synth(const SynthArgs& args, const std::filesystem::path& out, const RunOptions& run = {});

/// Re-runs the command recorded in a manifest into `out`, after checking that
/// the recorded input digests still match. Returns true when every recorded
/// output digest is reproduced.
bool cmd_replay(const std::filesystem::path& manifest, const std::filesystem::path& out);

/// Method names accepted by cmd_compare: ms-contab, nmf, nmf@<rank>, nmf@n
/// (rank = cohort count), hierarchical, ae, simclr, deepcluster.
bool is_known_method(const std::string& method);

}  // namespace contab
