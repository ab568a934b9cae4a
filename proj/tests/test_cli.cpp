#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "contab/cli.hpp"
#include "contab/io.hpp"
#include "contab/pipeline.hpp"
#include "contab/report.hpp"

using namespace contab;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CONTAB_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("contab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::vector<std::string>& args) { return cli_main(args); }

struct Process {
  int code;
  std::string err;
};

Process run_binary(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(CONTAB_CLI) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text(err)};
}

// Tiny architecture and epoch counts so the end-to-end commands run in seconds.
fs::path fast_config(const fs::path& dir, double lr = 1e-3) {
  const nlohmann::json doc{
      {"schema_version", 1},
      {"seed", 42},
      {"train", {{"epochs", 3}, {"lr", lr}}},
      {"tabnet", {{"n_steps", 2}, {"n_d", 8}, {"n_a", 8}, {"latent_dim", 8}, {"projection_dim", 8}}},
      {"baselines",
       {{"nmf", {{"iterations", 50}}},
        {"ae", {{"epochs", 3}, {"hidden", 8}}},
        {"simclr", {{"epochs", 3}, {"hidden", 16}, {"latent", 8}, {"projection", 8}}},
        {"deepcluster", {{"epochs", 3}, {"hidden", 16}, {"latent", 8}}}}}};
  const fs::path p = dir / "config.json";
  write_json(p, doc);
  return p;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK(parse_double(" 1.5 ") == 1.5);
  CHECK_THROWS_AS(parse_double("1.5x"), InputError);
  CHECK_THROWS_AS(parse_double(""), InputError);
}

TEST_CASE("csv tables") {
  NamedTable t{"cohort", {"a", "b"}, {"x", "y"}, Eigen::MatrixXd(2, 2)};
  t.values << 1.25, -3, 0.1, 1e-9;
  const NamedTable back = parse_csv_table(to_csv(t), "t");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.values == t.values);
  CHECK_THROWS_AS(parse_csv_table("cohort,a\nx,1,2\n", "t"), InputError);
  CHECK_THROWS_AS(parse_csv_table("cohort,a\nx,abc\n", "t"), InputError);
  CHECK_THROWS_AS(csv_line({"a,b"}), InputError);
}

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("diverging colors") {
  CHECK(diverging_color(-1.0) == "#2166ac");
  CHECK(diverging_color(0.0) == "#ffffff");
  CHECK(diverging_color(1.0) == "#b2182b");
  CHECK(diverging_color(5.0) == "#b2182b");
}

TEST_CASE("pipeline config") {
  PipelineConfig cfg;
  cfg.apply_seed(7);
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.baselines.seed == 7);
  const PipelineConfig back = pipeline_config_from_json(to_json(cfg));
  CHECK(back.seed == 7);
  CHECK(back.evaluate.seed == cfg.evaluate.seed);
  CHECK_THROWS_AS(pipeline_config_from_json({{"schema_version", 99}}), InputError);
}

TEST_CASE("featurize the three-cohort fixture") {
  const fs::path out = scratch("featurize");
  REQUIRE(run({"featurize", "--input", (kData / "three_cohorts.tsv").string(), "--schema",
               (kData / "three_cohorts_schema.json").string(), "--out", (out / "a").string()}) == kExitOk);
  const auto rows = parse_csv_rows(read_text(out / "a" / "gene.csv"));
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) CHECK(row.size() == 301);
  CHECK(parse_csv_rows(read_text(out / "a" / "chrom.csv"))[1].size() == 289);
  const nlohmann::json manifest = read_json(out / "a" / "manifest.json");
  CHECK(manifest["command"] == "featurize");
  CHECK(manifest["cohorts"] == 3);
  CHECK(manifest["timestamp"].is_null());

  REQUIRE(run({"featurize", "--input", (kData / "three_cohorts.tsv").string(), "--schema",
               (kData / "three_cohorts_schema.json").string(), "--out", (out / "b").string()}) == kExitOk);
  CHECK(read_json(out / "b" / "manifest.json")["outputs"] == manifest["outputs"]);
  CHECK(read_text(out / "a" / "manifest.json") == read_text(out / "b" / "manifest.json"));
  CHECK(cmd_replay(out / "a" / "manifest.json", out / "c"));
}

TEST_CASE("exit codes from the installed binary") {
  const fs::path out = scratch("exit");
  std::ofstream(out / "bad.tsv") << "GENE_SYMBOL\tREF\tALT\tPRIMARY_SITE\nTP53\tC\tT\tlung\n";
  const Process missing = run_binary("featurize --input " + (out / "bad.tsv").string() + " --out " + (out / "f").string(), out);
  CHECK(missing.code == kExitInput);
  CHECK(missing.err.find("CHROMOSOME") != std::string::npos);

  CHECK(run_binary("frobnicate", out).code == kExitInput);
  CHECK(run_binary("synth --cohorts 5 --out " + (out / "s").string(), out).code == kExitInput);
  CHECK(run_binary("--version", out).code == kExitOk);

  REQUIRE(run_binary("synth --cohorts 8 --out " + (out / "s").string(), out).code == kExitOk);
  const Process unknown = run_binary("compare --features " + (out / "s").string() + " --methods ms-contab,pca --out " +
                                         (out / "c").string(),
                                     out);
  CHECK(unknown.code == kExitInput);
  CHECK(unknown.err.find("pca") != std::string::npos);

  const Process diverged = run_binary("train --features " + (out / "s").string() + " --config " +
                                          fast_config(out, 1e300).string() + " --out " + (out / "t").string(),
                                      out);
  CHECK(diverged.code == kExitNumerical);
}

TEST_CASE("evaluate on orthogonal blocks") {
  const fs::path out = scratch("evaluate");
  const std::string csv =
      "cohort,dim01,dim02,dim03\n"
      "a1,1,0,0\na2,0.9,0.1,0\na3,1,0.05,0\n"
      "b1,0,0,1\nb2,0,0.1,0.9\n";
  write_text_atomic(out / "emb.csv", csv);
  REQUIRE(run({"evaluate", "--embeddings", (out / "emb.csv").string(), "--k", "2", "--out", (out / "r1").string()}) ==
          kExitOk);
  const std::string svg = read_text(out / "r1" / "heatmap.svg");
  CHECK(count(svg, "class=\"cell\"") == 25);
  const nlohmann::json report = read_json(out / "r1" / "report.json");
  for (const char* key : {"silhouette", "davies_bouldin", "calinski_harabasz", "within", "between", "prototypes"}) {
    CHECK_MESSAGE(report.contains(key), key);
  }
  CHECK(report["between"].get<double>() < 0.2);

  REQUIRE(run({"evaluate", "--embeddings", (out / "emb.csv").string(), "--k", "2", "--out", (out / "r2").string()}) ==
          kExitOk);
  CHECK(read_text(out / "r2" / "heatmap.svg") == svg);
  CHECK(run({"evaluate", "--embeddings", (out / "emb.csv").string(), "--k", "6", "--out", (out / "r3").string()}) ==
        kExitInput);
  CHECK(run({"evaluate", "--embeddings", (out / "missing.csv").string(), "--out", (out / "r4").string()}) == kExitInput);
}

TEST_CASE("synth, train, evaluate, compare and replay") {
  const fs::path out = scratch("pipeline");
  const fs::path config = fast_config(out);
  REQUIRE(run({"synth", "--cohorts", "12", "--seed", "3", "--out", (out / "data").string()}) == kExitOk);
  CHECK(fs::exists(out / "data" / "planted_labels.csv"));

  REQUIRE(run({"train", "--features", (out / "data").string(), "--config", config.string(), "--out",
               (out / "train").string()}) == kExitOk);
  const EmbeddingMatrix emb = read_embeddings(out / "train" / "embeddings.csv");
  CHECK(emb.vectors.rows() == 12);
  CHECK(parse_csv_rows(read_text(out / "train" / "loss.csv")).size() == 4);
  for (const char* f : {"model.json", "gene_importance.csv", "chrom_importance.csv", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(out / "train" / f), f);
  }

  nlohmann::json reseeded = read_json(config);
  reseeded["seed"] = 43;
  write_json(out / "config43.json", reseeded);
  REQUIRE(run({"train", "--features", (out / "data").string(), "--config", (out / "config43.json").string(), "--out",
               (out / "train43").string()}) == kExitOk);
  CHECK(sha256_file(out / "train43" / "embeddings.csv") != sha256_file(out / "train" / "embeddings.csv"));

  REQUIRE(run({"evaluate", "--embeddings", (out / "train" / "embeddings.csv").string(), "--features",
               (out / "data").string(), "--labels", (out / "data" / "planted_labels.csv").string(), "--out",
               (out / "eval").string()}) == kExitOk);
  const nlohmann::json report = read_json(out / "eval" / "report.json");
  CHECK(report.contains("ari"));
  CHECK(fs::exists(out / "eval" / "spectra.csv"));

  REQUIRE(run({"compare", "--features", (out / "data").string(), "--methods", "ms-contab,ae", "--config",
               config.string(), "--out", (out / "cmp").string()}) == kExitOk);
  const auto table = parse_csv_rows(read_text(out / "cmp" / "comparison.csv"));
  CHECK(table.size() == 3);
  const nlohmann::json cmp = read_json(out / "cmp" / "comparison.json");
  CHECK(cmp.contains("paper_reference"));
  CHECK(cmp["rows"].size() == 2);

  CHECK(cmd_replay(out / "train" / "manifest.json", out / "train_replay"));
  CHECK(cmd_replay(out / "cmp" / "manifest.json", out / "cmp_replay"));
  CHECK(sha256_tree(out / "cmp") == sha256_tree(out / "cmp_replay"));
}

TEST_CASE("all compare methods are recognized") {
  for (const char* m : {"ms-contab", "nmf", "nmf@3", "nmf@n", "hierarchical", "ae", "simclr", "deepcluster"}) {
    CHECK_MESSAGE(is_known_method(m), m);
  }
  CHECK_FALSE(is_known_method("nmf@0"));
  CHECK_FALSE(is_known_method("pca"));
}
