#include "contab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

#include "contab/error.hpp"
#include "contab/pipeline.hpp"

namespace contab {

namespace fs = std::filesystem;

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Multi-scale mutation-signature contrastive clustering"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  RunOptions run;
  app.add_flag("--stamp", run.stamp, "Record the wall-clock time in manifests");

  fs::path out;

  FeaturizeArgs featurize;
  auto* f = app.add_subcommand("featurize", "Parse mutation exports into gene and chromosome feature views");
  f->add_option("--input", featurize.inputs, "Tab-separated mutation export(s)")->required()->check(CLI::ExistingFile);
  f->add_option("--schema", featurize.schema, "Column schema JSON")->check(CLI::ExistingFile);
  f->add_option("--out", out, "Output directory")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train both view encoders contrastively and export embeddings");
  t->add_option("--features", train.features, "Feature directory from featurize or synth")->required();
  t->add_option("--config", train.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  t->add_option("--out", out, "Output directory")->required();

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Cluster embeddings and write the analysis report");
  e->add_option("--embeddings", evaluate.embeddings, "Embeddings CSV")->required();
  e->add_option("--k", evaluate.k, "Number of clusters")->capture_default_str();
  e->add_option("--features", evaluate.features, "Feature directory for spectra and top-gene tables");
  e->add_option("--labels", evaluate.labels, "Reference labels CSV (cohort,cluster) for ARI");
  e->add_option("--config", evaluate.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  e->add_option("--out", out, "Output directory")->required();

  CompareArgs compare;
  std::string methods = "ms-contab,nmf,hierarchical,ae,simclr,deepcluster";
  auto* c = app.add_subcommand("compare", "Run MS-ConTab and baselines and tabulate cluster quality");
  c->add_option("--features", compare.features, "Feature directory")->required();
  c->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
  c->add_option("--labels", compare.labels, "Reference labels CSV (cohort,cluster) for ARI");
  c->add_option("--config", compare.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  c->add_option("--out", out, "Output directory")->required();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a planted two-cluster feature directory");
  s->add_option("--cohorts", synth.cohorts, "Number of cohorts (even, >= 4)")->capture_default_str();
  s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  s->add_option("--separation", synth.separation, "Cluster separation")->capture_default_str();
  s->add_option("--out", out, "Output directory")->required();

  fs::path manifest;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest and compare outputs");
  r->add_option("--manifest", manifest, "manifest.json of a previous run")->required()->check(CLI::ExistingFile);
  r->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (f->parsed()) {
      const ParseResult parsed = cmd_featurize(featurize, out, run);
      std::cout << "accepted " << parsed.records.size() << " of " << parsed.total_rows << " rows; rejected "
                << parsed.rejects.total() << "\n";
    } else if (t->parsed()) {
      const TrainedModel model = cmd_train(train, out, run);
      std::cout << "trained " << model.loss_history.size() << " epochs; final loss "
                << (model.loss_history.empty() ? 0.0 : model.loss_history.back()) << "\n";
    } else if (e->parsed()) {
      const ClusterReport report = cmd_evaluate(evaluate, out, run);
      std::cout << "k=" << report.assignment.k << " silhouette="
                << (report.metrics.silhouette ? std::to_string(*report.metrics.silhouette) : "n/a") << "\n";
    } else if (c->parsed()) {
      std::stringstream ss(methods);
      for (std::string m; std::getline(ss, m, ',');) {
        if (!m.empty()) compare.methods.push_back(m);
      }
      const ComparisonTable table = cmd_compare(compare, out, run);
      std::cout << "compared " << table.rows.size() << " methods\n";
    } else if (s->parsed()) {
      const SyntheticCohorts data = cmd_synth(synth, out, run);
      std::cout << "generated " << data.dataset.size() << " cohorts\n";
    } else if (r->parsed()) {
      const bool same = cmd_replay(manifest, out);
      std::cout << (same ? "replay reproduced every recorded output\n" : "replay outputs differ from the manifest\n");
      return same ? kExitOk : kExitNumerical;
    }
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("contab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace contab
