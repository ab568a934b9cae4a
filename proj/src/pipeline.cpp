#include "contab/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>

#include "contab/analysis.hpp"
#include "contab/cluster.hpp"
#include "contab/error.hpp"
#include "contab/io.hpp"
#include "contab/snapshot.hpp"
#include "contab/synthetic.hpp"

namespace contab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

json timestamp(const RunOptions& run) {
  if (run.stamp) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    return std::chrono::duration_cast<std::chrono::seconds>(now).count();
  }
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    if (auto v = parse_u64(epoch)) return *v;
  }
  return nullptr;
}

json path_or_null(const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

std::optional<fs::path> optional_path(const json& v) {
  if (v.is_null()) return std::nullopt;
  return fs::path(v.get<std::string>());
}

json input_digest(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("input not found: " + p.string());
  return {{"path", p.generic_string()}, {"sha256", fs::is_directory(p) ? sha256_tree(p) : sha256_file(p)}};
}

json output_digests(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    files[fs::relative(entry.path(), out).generic_string()] = sha256_file(entry.path());
  }
  return files;
}

void write_manifest(const fs::path& out, const std::string& command, json arguments, json inputs,
                    const json& config, std::uint64_t seed, std::size_t cohorts, const RunOptions& run,
                    json extra = json::object()) {
  json m{{"tool", "contab"},
         {"version", kToolVersion},
         {"command", command},
         {"arguments", std::move(arguments)},
         {"inputs", std::move(inputs)},
         {"config", config},
         {"seed", seed},
         {"timestamp", timestamp(run)},
         {"cohorts", cohorts},
         {"outputs", output_digests(out)}};
  for (auto& [key, value] : extra.items()) m[key] = value;
  write_json(out / "manifest.json", m);
}

json fscaling_json(const FeatureScaling& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"stddev", std::vector<double>(s.stddev.data(), s.stddev.data() + s.stddev.size())}};
}

json rejects_json(const RejectTally& tally) {
  json doc = json::object();
  for (const auto& [reason, count] : tally.counts) doc[reason] = count;
  return doc;
}

std::vector<std::string> dim_names(Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < d; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "dim%02d", static_cast<int>(i + 1));
    names.push_back(buf);
  }
  return names;
}

void write_labels(const std::vector<std::string>& names, const std::vector<int>& labels, const fs::path& path) {
  std::string text = csv_line({"cohort", "cluster"});
  for (std::size_t i = 0; i < names.size(); ++i) text += csv_line({names[i], std::to_string(labels[i])});
  write_text_atomic(path, text);
}

ParseResult parse_inputs(const std::vector<fs::path>& inputs, const ColumnSchema& schema) {
  if (inputs.empty()) throw InputError("featurize: no input files");
  ParseResult total;
  for (const auto& path : inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    try {
      total += parse_mutations(in, schema);
    } catch (const InputError& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  return total;
}

// ---- command bodies with resolved configuration ----

ParseResult run_featurize(const std::vector<fs::path>& inputs, const std::optional<fs::path>& schema_path,
                          const fs::path& out, const RunOptions& run) {
  InputSchema schema;
  if (schema_path) schema = input_schema_from_json(read_json(*schema_path));
  ParseResult parsed = parse_inputs(inputs, schema.columns);
  CohortDataset dataset = scale_features(build_profiles(parsed.records, schema.lengths));
  write_features(dataset, out, &parsed);

  json inputs_doc = json::array();
  for (const auto& p : inputs) inputs_doc.push_back(input_digest(p));
  json args{{"inputs", json::array()}, {"schema", path_or_null(schema_path)}};
  for (const auto& p : inputs) args["inputs"].push_back(p.generic_string());
  json config{{"columns",
               {{"gene", schema.columns.gene},
                {"chromosome", schema.columns.chromosome},
                {"ref", schema.columns.ref},
                {"alt", schema.columns.alt},
                {"cds", schema.columns.cds},
                {"cohort", schema.columns.cohort}}},
              {"chromosome_lengths", schema.lengths},
              {"scaling", {{"recipe", "gene: log1p, z-score; chromosome: rate*1e6, log1p, z-score"},
                           {"stddev", "population"},
                           {"std_guard", ScalingParams::kStdGuard},
                           {"rate_prescale", ScalingParams::kRatePrescale}}}};
  if (schema_path) inputs_doc.push_back(input_digest(*schema_path));
  write_manifest(out, "featurize", args, inputs_doc, config, 0, dataset.size(), run,
                 {{"rejects", rejects_json(parsed.rejects)},
                  {"total_rows", parsed.total_rows},
                  {"accepted", parsed.records.size()}});
  return parsed;
}

Matrix importance_rows(TabNetEncoder& encoder, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Encoding enc = encode(encoder, x.row(i), Mode::Eval);
    out.row(i) = feature_importances(enc.trace).weights.transpose();
  }
  return out;
}

EmbeddingMatrix train_and_embed(const CohortDataset& dataset, const PipelineConfig& cfg, TrainedModel* keep) {
  TrainedModel model = train(dataset, cfg.train, cfg.tabnet);
  EmbeddingMatrix e = embed_cohorts(model.gene, model.chrom, dataset, cfg.train.fusion, cfg.train.source);
  if (keep) *keep = std::move(model);
  return e;
}

TrainedModel run_train(const fs::path& features, const PipelineConfig& cfg, const fs::path& out,
                       const RunOptions& run) {
  const CohortDataset dataset = load_features(features);
  TrainedModel model;
  const EmbeddingMatrix emb = train_and_embed(dataset, cfg, &model);
  write_embeddings(emb, out / "embeddings.csv");

  std::string loss = csv_line({"epoch", "loss"});
  for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
    loss += csv_line({std::to_string(e + 1), format_double(model.loss_history[e])});
  }
  write_text_atomic(out / "loss.csv", loss);

  const auto gene_state = model.gene.state("gene.");
  const auto chrom_state = model.chrom.state("chrom.");
  write_json(out / "model.json", {{"format", "contab.model"},
                                  {"train", to_json(cfg.train)},
                                  {"gene_encoder", to_json(model.gene.config())},
                                  {"chrom_encoder", to_json(model.chrom.config())},
                                  {"gene", snapshot_to_json(gene_state)},
                                  {"chrom", snapshot_to_json(chrom_state)}});

  const auto names = dataset.names();
  write_text_atomic(out / "gene_importance.csv",
                    to_csv(NamedTable{"cohort", gene_feature_names(), names, importance_rows(model.gene, dataset.scaled_gene)}));
  write_text_atomic(out / "chrom_importance.csv",
                    to_csv(NamedTable{"cohort", chrom_feature_names(), names, importance_rows(model.chrom, dataset.scaled_chrom)}));

  write_manifest(out, "train", {{"features", features.generic_string()}}, json::array({input_digest(features)}),
                 to_json(cfg), cfg.seed, dataset.size(), run,
                 {{"final_loss", model.loss_history.empty() ? json(nullptr) : json(model.loss_history.back())}});
  return model;
}

ClusterReport run_evaluate(const fs::path& embeddings, int k, const std::optional<fs::path>& features,
                           const std::optional<fs::path>& labels, const PipelineConfig& cfg, const fs::path& out,
                           const RunOptions& run) {
  const EmbeddingMatrix emb = read_embeddings(embeddings);
  EvaluateOptions options = cfg.evaluate;
  options.k = k;
  std::optional<CohortDataset> dataset;
  if (features) dataset = load_features(*features);
  std::optional<std::vector<int>> reference;
  if (labels) reference = read_labels(*labels, emb.names);
  ClusterReport report = evaluate_embeddings(emb, options, dataset ? &*dataset : nullptr, reference ? &*reference : nullptr);
  write_cluster_report(report, out);

  json inputs = json::array({input_digest(embeddings)});
  if (features) inputs.push_back(input_digest(*features));
  if (labels) inputs.push_back(input_digest(*labels));
  write_manifest(out, "evaluate",
                 {{"embeddings", embeddings.generic_string()},
                  {"k", k},
                  {"features", path_or_null(features)},
                  {"labels", path_or_null(labels)}},
                 inputs, to_json(cfg), cfg.seed, emb.names.size(), run);
  return report;
}

struct MethodRun {
  EmbeddingMatrix space;
  std::optional<std::vector<int>> labels;  // set when the method clusters directly
  json extra = json::object();
};

int nmf_rank(const std::string& method, std::size_t n_cohorts, int default_rank) {
  if (method == "nmf") return default_rank;
  const std::string suffix = method.substr(4);
  if (suffix == "n") return static_cast<int>(n_cohorts);
  const auto v = parse_u64(suffix);
  if (!v || *v == 0) throw InputError("unknown method: " + method);
  return static_cast<int>(*v);
}

MethodRun run_method(const std::string& method, const CohortDataset& dataset, const PipelineConfig& cfg) {
  const auto names = dataset.names();
  MethodRun r;
  if (method == "ms-contab") {
    TrainedModel model;
    r.space = train_and_embed(dataset, cfg, &model);
    r.extra["final_loss"] = model.loss_history.back();
  } else if (method.rfind("nmf", 0) == 0) {
    const int rank = nmf_rank(method, dataset.size(), cfg.baselines.nmf_rank);
    const NmfResult fit = nmf_fit(dataset.log_features(), rank, cfg.baselines.nmf_iterations,
                                  derive_seed(cfg.baselines.seed, "baseline/nmf"));
    r.space = EmbeddingMatrix{names, fit.w, "nmf"};
    r.extra["rank"] = rank;
    r.extra["final_objective"] = fit.objective.empty() ? json(nullptr) : json(fit.objective.back());
  } else if (method == "hierarchical") {
    r.space = EmbeddingMatrix{names, concat_features(dataset), "features"};
    r.labels = hierarchical_labels(r.space.vectors, cfg.evaluate.k);
    r.extra["linkage"] = "ward";
  } else if (method == "ae") {
    auto t = ae_train(concat_features(dataset), names, cfg.baselines.ae_config());
    r.space = std::move(t.embedding);
    r.extra["final_loss"] = t.loss_history.back();
  } else if (method == "simclr") {
    auto t = simclr_mlp_train(concat_features(dataset), names, cfg.baselines.simclr_config());
    r.space = std::move(t.embedding);
    r.extra["final_loss"] = t.loss_history.back();
  } else if (method == "deepcluster") {
    auto t = deepcluster_train(concat_features(dataset), names, cfg.baselines.deepcluster_config());
    r.space = std::move(t.embedding);
    r.extra["final_loss"] = t.loss_history.back();
    r.extra["head_checksums"] = t.head_checksums;
  } else {
    throw InputError("unknown method: " + method);
  }
  return r;
}

ComparisonTable run_compare(const fs::path& features, const std::vector<std::string>& methods,
                            const std::optional<fs::path>& labels, const PipelineConfig& cfg, const fs::path& out,
                            const RunOptions& run) {
  if (methods.empty()) throw InputError("compare: no methods given");
  for (const auto& m : methods) {
    if (!is_known_method(m)) throw InputError("unknown method: " + m);
  }
  const CohortDataset dataset = load_features(features);
  std::optional<std::vector<int>> reference;
  if (labels) reference = read_labels(*labels, dataset.names());
  if (cfg.evaluate.k < 2 || static_cast<std::size_t>(cfg.evaluate.k) > dataset.size()) {
    throw InputError("compare: k must lie in [2, cohort count]");
  }

  ComparisonTable table;
  for (const auto& method : methods) {
    MethodRun result = run_method(method, dataset, cfg);
    ComparisonRow row;
    row.method = method;
    std::vector<int> assigned;
    if (result.labels) {
      assigned = *result.labels;
    } else {
      assigned = kmeans(result.space.vectors, cfg.evaluate.k, cfg.evaluate.seed).labels;
    }
    row.metrics = quality_metrics(result.space.vectors, assigned);
    if (reference) row.ari = adjusted_rand_index(*reference, assigned);
    table.rows.push_back(row);

    const fs::path dir = out / method;
    write_embeddings(result.space, dir / "embeddings.csv");
    write_labels(result.space.names, assigned, dir / "labels.csv");
    json metrics = to_json(row.metrics);
    if (row.ari) metrics["ari"] = *row.ari;
    write_json(dir / "metrics.json", metrics);
    write_manifest(dir, "compare/" + method, {{"features", features.generic_string()}, {"method", method}},
                   json::array({input_digest(features)}), to_json(cfg), cfg.seed, dataset.size(), run,
                   {{"details", result.extra}});
  }
  write_text_atomic(out / "comparison.csv", comparison_csv(table));
  write_json(out / "comparison.json", to_json(table));

  json inputs = json::array({input_digest(features)});
  if (labels) inputs.push_back(input_digest(*labels));
  write_manifest(out, "compare",
                 {{"features", features.generic_string()}, {"methods", methods}, {"labels", path_or_null(labels)}},
                 inputs, to_json(cfg), cfg.seed, dataset.size(), run);
  return table;
}

SyntheticCohorts run_synth(int cohorts, std::uint64_t seed, double separation, const fs::path& out,
                           const RunOptions& run) {
  SyntheticCohorts synth = generate_synthetic_cohorts(cohorts, seed, separation);
  write_features(synth.dataset, out);
  write_labels(synth.dataset.names(), synth.labels, out / "planted_labels.csv");
  write_manifest(out, "synth", {{"cohorts", cohorts}, {"seed", seed}, {"separation", separation}}, json::array(),
                 json::object(), seed, synth.dataset.size(), run);
  return synth;
}

}  // namespace

// ---- configuration ----

void PipelineConfig::apply_seed(std::uint64_t root) {
  seed = root;
  train.seed = root;
  baselines.seed = root;
  evaluate.seed = derive_seed(root, "evaluate/kmeans");
}

json to_json(const PipelineConfig& cfg) {
  return {{"schema_version", kConfigSchemaVersion},
          {"seed", cfg.seed},
          {"train", to_json(cfg.train)},
          {"tabnet", to_json(cfg.tabnet)},
          {"baselines", to_json(cfg.baselines)},
          {"evaluate",
           {{"k", cfg.evaluate.k},
            {"kmeans_seed", cfg.evaluate.seed},
            {"kmeans_n_init", 10},
            {"kmeans_max_iter", 300},
            {"neighbors", cfg.evaluate.top_k_neighbors},
            {"top_genes", cfg.evaluate.top_genes}}}};
}

PipelineConfig pipeline_config_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("config: expected a JSON object");
  const int version = doc.value("schema_version", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion) throw InputError("config: unsupported schema_version " + std::to_string(version));
  PipelineConfig cfg;
  try {
    cfg.apply_seed(doc.value("seed", cfg.seed));
    if (doc.contains("train")) cfg.train = train_config_from_json(doc["train"], cfg.train);
    if (doc.contains("tabnet")) cfg.tabnet = tabnet_config_from_json(doc["tabnet"], cfg.tabnet);
    if (doc.contains("baselines")) cfg.baselines = baseline_config_from_json(doc["baselines"], cfg.baselines);
    // Component seeds follow the root unless a section pins its own.
    if (!(doc.contains("train") && doc["train"].contains("seed"))) cfg.train.seed = cfg.seed;
    if (!(doc.contains("baselines") && doc["baselines"].contains("seed"))) cfg.baselines.seed = cfg.seed;
    if (doc.contains("evaluate")) {
      const auto& e = doc["evaluate"];
      cfg.evaluate.k = e.value("k", cfg.evaluate.k);
      cfg.evaluate.seed = e.value("kmeans_seed", cfg.evaluate.seed);
      cfg.evaluate.top_k_neighbors = e.value("neighbors", cfg.evaluate.top_k_neighbors);
      cfg.evaluate.top_genes = e.value("top_genes", cfg.evaluate.top_genes);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.train.validate();
  return cfg;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* text = std::getenv("CONTAB_SEED");
  if (!text) return std::nullopt;
  auto v = parse_u64(text);
  if (!v) throw InputError(std::string("CONTAB_SEED is not an unsigned integer: ") + text);
  return v;
}

PipelineConfig load_pipeline_config(const std::optional<fs::path>& path) {
  PipelineConfig cfg;
  if (path) cfg = pipeline_config_from_json(read_json(*path));
  if (auto seed = seed_from_environment()) {
    cfg.apply_seed(*seed);
  }
  return cfg;
}

InputSchema input_schema_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("schema: expected a JSON object");
  InputSchema s;
  auto& c = s.columns;
  try {
    c.gene = doc.value("gene", c.gene);
    c.chromosome = doc.value("chromosome", c.chromosome);
    c.ref = doc.value("ref", c.ref);
    c.alt = doc.value("alt", c.alt);
    c.cds = doc.value("cds", c.cds);
    c.cohort = doc.value("cohort", c.cohort);
    if (doc.contains("chromosome_lengths")) {
      for (const auto& [key, value] : doc["chromosome_lengths"].items()) {
        const auto id = ChromosomeId::parse(key);
        if (!id) throw InputError("schema: unknown chromosome '" + key + "'");
        const auto len = value.get<std::uint64_t>();
        if (len == 0) throw InputError("schema: chromosome length must be positive");
        s.lengths[id->index()] = len;
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
  return s;
}

// ---- feature directory ----

void write_features(const CohortDataset& ds, const fs::path& dir, const ParseResult* parse) {
  const auto names = ds.names();
  write_text_atomic(dir / "gene.csv", to_csv(NamedTable{"cohort", gene_feature_names(), names, ds.scaled_gene}));
  write_text_atomic(dir / "chrom.csv", to_csv(NamedTable{"cohort", chrom_feature_names(), names, ds.scaled_chrom}));
  write_text_atomic(dir / "gene_counts.csv", to_csv(NamedTable{"cohort", gene_feature_names(), names, ds.gene_counts()}));
  write_text_atomic(dir / "chrom_rates.csv", to_csv(NamedTable{"cohort", chrom_feature_names(), names, ds.chrom_rates()}));

  std::vector<std::string> header{"cohort"};
  for (std::size_t r = 0; r < kTopGenes; ++r) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "rank%02zu", r + 1);
    header.push_back(buf);
  }
  std::string genes = csv_line(header);
  for (const auto& c : ds.cohorts) {
    std::vector<std::string> row{c.name};
    row.insert(row.end(), c.gene.genes.begin(), c.gene.genes.end());
    genes += csv_line(row);
  }
  write_text_atomic(dir / "genes.csv", genes);

  json scaling{{"gene", fscaling_json(ds.scaling.gene)},
               {"chrom", fscaling_json(ds.scaling.chrom)},
               {"std_guard", ScalingParams::kStdGuard},
               {"rate_prescale", ScalingParams::kRatePrescale},
               {"stddev", "population"}};
  if (parse) {
    scaling["rejects"] = rejects_json(parse->rejects);
    scaling["total_rows"] = parse->total_rows;
    scaling["accepted"] = parse->records.size();
  }
  write_json(dir / "scaling.json", scaling);
}

CohortDataset load_features(const fs::path& dir) {
  const NamedTable counts = read_csv_table(dir / "gene_counts.csv");
  const NamedTable rates = read_csv_table(dir / "chrom_rates.csv");
  const auto gene_rows = parse_csv_rows(read_text(dir / "genes.csv"));
  if (counts.values.cols() != static_cast<Eigen::Index>(kGeneFeatures) ||
      rates.values.cols() != static_cast<Eigen::Index>(kChromFeatures)) {
    throw InputError(dir.string() + ": feature files have the wrong width");
  }
  if (rates.rows != counts.rows || gene_rows.size() != counts.rows.size() + 1) {
    throw InputError(dir.string() + ": feature files list different cohorts");
  }
  std::vector<CohortProfile> cohorts;
  for (std::size_t i = 0; i < counts.rows.size(); ++i) {
    const auto& names = gene_rows[i + 1];
    if (names.size() != kTopGenes + 1 || names[0] != counts.rows[i]) {
      throw InputError(dir.string() + "/genes.csv: row " + std::to_string(i + 2) + " does not match gene_counts.csv");
    }
    CohortProfile p;
    p.name = counts.rows[i];
    for (std::size_t g = 0; g < kTopGenes; ++g) p.gene.genes[g] = names[g + 1];
    p.gene.empty = true;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kGeneFeatures); ++j) {
      const double v = counts.values(static_cast<Eigen::Index>(i), j);
      if (v < 0.0 || v != std::floor(v)) throw InputError(dir.string() + "/gene_counts.csv: counts must be non-negative integers");
      p.gene.counts(j / static_cast<Eigen::Index>(kSubstitutionCount), j % static_cast<Eigen::Index>(kSubstitutionCount)) =
          static_cast<std::int64_t>(v);
      if (v > 0.0) p.gene.empty = false;
    }
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kChromFeatures); ++j) {
      const double v = rates.values(static_cast<Eigen::Index>(i), j);
      if (!(v >= 0.0)) throw InputError(dir.string() + "/chrom_rates.csv: rates must be non-negative");
      p.chrom.rates(j / static_cast<Eigen::Index>(kSubstitutionCount), j % static_cast<Eigen::Index>(kSubstitutionCount)) = v;
    }
    cohorts.push_back(std::move(p));
  }
  return scale_features(std::move(cohorts));
}

std::vector<int> read_labels(const fs::path& path, const std::vector<std::string>& names) {
  const NamedTable t = read_csv_table(path);
  if (t.values.cols() != 1) throw InputError(path.string() + ": expected two columns (cohort, cluster)");
  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < t.rows.size(); ++i) by_name[t.rows[i]] = static_cast<int>(t.values(static_cast<Eigen::Index>(i), 0));
  std::vector<int> labels;
  for (const auto& n : names) {
    auto it = by_name.find(n);
    if (it == by_name.end()) throw InputError(path.string() + ": no label for cohort " + n);
    labels.push_back(it->second);
  }
  return labels;
}

EmbeddingMatrix read_embeddings(const fs::path& path) {
  NamedTable t = read_csv_table(path);
  if (t.rows.empty() || t.values.cols() == 0) throw InputError(path.string() + ": no embeddings");
  return EmbeddingMatrix{t.rows, t.values, "file"};
}

void write_embeddings(const EmbeddingMatrix& e, const fs::path& path) {
  write_text_atomic(path, to_csv(NamedTable{"cohort", dim_names(e.vectors.cols()), e.names, e.vectors}));
}

// ---- commands ----

ParseResult cmd_featurize(const FeaturizeArgs& args, const fs::path& out, const RunOptions& run) {
  return run_featurize(args.inputs, args.schema, out, run);
}

TrainedModel cmd_train(const TrainArgs& args, const fs::path& out, const RunOptions& run) {
  return run_train(args.features, load_pipeline_config(args.config), out, run);
}

ClusterReport cmd_evaluate(const EvaluateArgs& args, const fs::path& out, const RunOptions& run) {
  return run_evaluate(args.embeddings, args.k, args.features, args.labels, load_pipeline_config(args.config), out, run);
}

ComparisonTable cmd_compare(const CompareArgs& args, const fs::path& out, const RunOptions& run) {
  return run_compare(args.features, args.methods, args.labels, load_pipeline_config(args.config), out, run);
}

SyntheticCohorts cmd_synth(const SynthArgs& args, const fs::path& out, const RunOptions& run) {
  std::uint64_t seed = args.seed;
  if (auto env = seed_from_environment()) seed = *env;
  return run_synth(args.cohorts, seed, args.separation, out, run);
}

bool is_known_method(const std::string& m) {
  if (m == "ms-contab" || m == "nmf" || m == "hierarchical" || m == "ae" || m == "simclr" || m == "deepcluster") {
    return true;
  }
  if (m.rfind("nmf@", 0) == 0) {
    const std::string suffix = m.substr(4);
    if (suffix == "n") return true;
    const auto v = parse_u64(suffix);
    return v && *v > 0;
  }
  return false;
}

bool cmd_replay(const fs::path& manifest_path, const fs::path& out) {
  const json m = read_json(manifest_path);
  try {
    for (const auto& input : m.at("inputs")) {
      const fs::path p = input.at("path").get<std::string>();
      const json now = input_digest(p);
      if (now["sha256"] != input.at("sha256")) throw InputError("replay: input digest mismatch for " + p.string());
    }
    const std::string command = m.at("command");
    const json& a = m.at("arguments");
    const RunOptions run;
    if (command == "featurize") {
      std::vector<fs::path> inputs;
      for (const auto& p : a.at("inputs")) inputs.emplace_back(p.get<std::string>());
      run_featurize(inputs, optional_path(a.at("schema")), out, run);
    } else if (command == "synth") {
      run_synth(a.at("cohorts"), a.at("seed"), a.at("separation"), out, run);
    } else {
      const PipelineConfig cfg = pipeline_config_from_json(m.at("config"));
      if (command == "train") {
        run_train(a.at("features").get<std::string>(), cfg, out, run);
      } else if (command == "evaluate") {
        run_evaluate(a.at("embeddings").get<std::string>(), a.at("k"), optional_path(a.at("features")),
                     optional_path(a.at("labels")), cfg, out, run);
      } else if (command == "compare") {
        run_compare(a.at("features").get<std::string>(), a.at("methods").get<std::vector<std::string>>(),
                    optional_path(a.at("labels")), cfg, out, run);
      } else {
        throw InputError("replay: cannot replay command '" + command + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("replay: malformed manifest: ") + e.what());
  }
  return output_digests(out) == m.at("outputs");
}

}  // namespace contab
