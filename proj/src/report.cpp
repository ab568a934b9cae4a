#include "contab/report.hpp"

#include <cmath>
#include <cstdio>

#include "contab/io.hpp"

namespace contab {

namespace fs = std::filesystem;

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <class F>
std::optional<double> try_metric(F&& f, const char* name, std::vector<std::string>& notes) {
  try {
    return f();
  } catch (const std::exception& e) {
    notes.push_back(std::string(name) + ": " + e.what());
    return std::nullopt;
  }
}

std::string label_name(int cluster) { return "cluster_" + std::to_string(cluster); }

}  // namespace

QualityMetrics quality_metrics(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  QualityMetrics m;
  m.silhouette = try_metric([&] { return silhouette(x, labels); }, "silhouette", m.notes);
  m.silhouette_cosine = try_metric([&] { return silhouette(x, labels, Distance::Cosine); }, "silhouette_cosine", m.notes);
  m.davies_bouldin = try_metric([&] { return davies_bouldin(x, labels); }, "davies_bouldin", m.notes);
  m.calinski_harabasz = try_metric([&] { return calinski_harabasz(x, labels); }, "calinski_harabasz", m.notes);
  return m;
}

nlohmann::json to_json(const QualityMetrics& m) {
  nlohmann::json doc{{"silhouette", optional_number(m.silhouette)},
                     {"silhouette_cosine", optional_number(m.silhouette_cosine)},
                     {"davies_bouldin", optional_number(m.davies_bouldin)},
                     {"calinski_harabasz", optional_number(m.calinski_harabasz)}};
  if (!m.notes.empty()) doc["notes"] = m.notes;
  return doc;
}

ClusterReport evaluate_embeddings(const EmbeddingMatrix& embeddings, const EvaluateOptions& options,
                                  const CohortDataset* dataset, const std::vector<int>* reference_labels) {
  const Eigen::MatrixXd& x = embeddings.vectors;
  if (options.k < 2) throw InputError("evaluate: k must be >= 2");
  if (options.k > x.rows()) {
    throw InputError("evaluate: k=" + std::to_string(options.k) + " exceeds cohort count " + std::to_string(x.rows()));
  }
  ClusterReport r;
  r.names = embeddings.names;
  r.assignment = kmeans(x, options.k, options.seed);
  r.metrics = quality_metrics(x, r.assignment.labels);
  r.similarity = similarity_stats(embeddings, r.assignment.labels);
  if (static_cast<std::size_t>(x.rows()) > options.top_k_neighbors) {
    r.neighbors = nearest_neighbors(embeddings, options.top_k_neighbors);
  }
  if (x.rows() >= 3) r.pca = pca_2d(x);
  if (reference_labels) r.ari = adjusted_rand_index(*reference_labels, r.assignment.labels);
  if (dataset) {
    if (dataset->names() != embeddings.names) throw InputError("evaluate: feature cohorts do not match embedding rows");
    r.spectra = cluster_spectra(*dataset, r.assignment.labels);
    r.chrom_load = cluster_chrom_load(*dataset, r.assignment.labels);
    r.top_genes = top_genes_by_cluster(*dataset, r.assignment.labels, options.top_genes);
  }
  return r;
}

nlohmann::json to_json(const ClusterReport& r) {
  nlohmann::json doc = to_json(r.metrics);
  doc["k"] = r.assignment.k;
  doc["inertia"] = r.assignment.inertia;
  doc["degenerate"] = r.assignment.degenerate;
  doc["cohorts"] = r.names.size();
  nlohmann::json within = nlohmann::json::array();
  for (const auto& w : r.similarity.within) within.push_back(optional_number(w));
  doc["within"] = within;
  doc["between"] = optional_number(r.similarity.between);
  nlohmann::json prototypes = nlohmann::json::array();
  for (std::size_t p : r.similarity.prototypes) prototypes.push_back(r.names[p]);
  doc["prototypes"] = prototypes;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(r.assignment.k), 0);
  for (int l : r.assignment.labels) ++sizes[static_cast<std::size_t>(l)];
  doc["cluster_sizes"] = sizes;
  if (r.ari) doc["ari"] = *r.ari;
  if (r.top_genes) {
    doc["overlap"] = {{"shared", r.top_genes->shared},
                      {"unique_first", r.top_genes->unique_first},
                      {"unique_second", r.top_genes->unique_second}};
  }
  doc["reference"] = {{"within", {0.591, 0.965}},
                      {"between", -0.287},
                      {"prototypes", {"Thyroid", "Haematopoietic and Lymphoid"}},
                      {"silhouette", 0.561},
                      {"davies_bouldin", 0.655},
                      {"calinski_harabasz", 43.1},
                      {"overlap", {{"shared", 117}, {"unique_first", 73}, {"unique_second", 148}}}};
  return doc;
}

std::string diverging_color(double value) {
  const double v = std::clamp(std::isfinite(value) ? value : 0.0, -1.0, 1.0);
  // -1 -> (33, 102, 172), 0 -> white, +1 -> (178, 24, 43)
  const double lo[3] = {33, 102, 172};
  const double hi[3] = {178, 24, 43};
  const double* end = v < 0 ? lo : hi;
  const double t = std::abs(v);
  int rgb[3];
  for (int i = 0; i < 3; ++i) rgb[i] = static_cast<int>(std::lround(255.0 + (end[i] - 255.0) * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string render_heatmap_svg(const Eigen::MatrixXd& m, const std::vector<std::string>& names,
                               const std::vector<int>& labels) {
  const Eigen::Index n = m.rows();
  constexpr int cell = 12;
  constexpr int margin = 160;
  const int side = margin + static_cast<int>(n) * cell + 20;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(side) + "\" height=\"" +
         std::to_string(side) + "\" font-family=\"sans-serif\" font-size=\"9\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = margin + static_cast<int>(i) * cell;
    svg += "<text x=\"" + std::to_string(margin - 4) + "\" y=\"" + std::to_string(y + cell - 3) +
           "\" text-anchor=\"end\">" + names[static_cast<std::size_t>(i)] + "</text>\n";
    svg += "<text transform=\"translate(" + std::to_string(y + cell - 3) + "," + std::to_string(margin - 4) +
           ") rotate(-90)\">" + names[static_cast<std::size_t>(i)] + "</text>\n";
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      svg += "<rect class=\"cell\" x=\"" + std::to_string(margin + static_cast<int>(j) * cell) + "\" y=\"" +
             std::to_string(margin + static_cast<int>(i) * cell) + "\" width=\"" + std::to_string(cell) +
             "\" height=\"" + std::to_string(cell) + "\" fill=\"" + diverging_color(m(i, j)) + "\"><title>" +
             names[static_cast<std::size_t>(i)] + " / " + names[static_cast<std::size_t>(j)] + ": " +
             format_double(m(i, j)) + "</title></rect>\n";
    }
  }
  // Cluster block outlines.
  std::size_t start = 0;
  for (std::size_t i = 1; i <= labels.size(); ++i) {
    if (i == labels.size() || labels[i] != labels[start]) {
      const int off = margin + static_cast<int>(start) * cell;
      const int len = static_cast<int>(i - start) * cell;
      svg += "<rect class=\"block\" x=\"" + std::to_string(off) + "\" y=\"" + std::to_string(off) + "\" width=\"" +
             std::to_string(len) + "\" height=\"" + std::to_string(len) +
             "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
      start = i;
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_cluster_report(const ClusterReport& r, const fs::path& dir) {
  write_json(dir / "report.json", to_json(r));

  std::string labels = csv_line({"cohort", "cluster"});
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    labels += csv_line({r.names[i], std::to_string(r.assignment.labels[i])});
  }
  write_text_atomic(dir / "labels.csv", labels);

  std::vector<std::string> ordered_names;
  std::vector<int> ordered_labels;
  for (std::size_t i : r.similarity.order) {
    ordered_names.push_back(r.names[i]);
    ordered_labels.push_back(r.assignment.labels[i]);
  }
  write_text_atomic(dir / "cosine_matrix.csv",
                    to_csv(NamedTable{"cohort", ordered_names, ordered_names, r.similarity.ordered_cosine}));
  write_text_atomic(dir / "heatmap.svg", render_heatmap_svg(r.similarity.ordered_cosine, ordered_names, ordered_labels));

  std::string neighbors = csv_line({"cohort", "rank", "neighbor", "similarity"});
  for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
    for (std::size_t k = 0; k < r.neighbors[i].size(); ++k) {
      neighbors += csv_line({r.names[i], std::to_string(k + 1), r.names[r.neighbors[i][k].index],
                             format_double(r.neighbors[i][k].similarity)});
    }
  }
  write_text_atomic(dir / "neighbors.csv", neighbors);

  if (r.pca.rows() > 0) write_text_atomic(dir / "pca2.csv", to_csv(NamedTable{"cohort", {"pc1", "pc2"}, r.names, r.pca}));

  std::vector<std::string> cluster_names;
  for (int c = 0; c < r.assignment.k; ++c) cluster_names.push_back(label_name(c));
  if (r.spectra) {
    std::vector<std::string> cols;
    for (std::size_t j = 0; j < kSubstitutionCount; ++j) cols.emplace_back(to_string(substitution_at(j)));
    write_text_atomic(dir / "spectra.csv", to_csv(NamedTable{"cluster", cols, cluster_names, *r.spectra}));
  }
  if (r.chrom_load) {
    std::vector<std::string> cols;
    for (std::size_t c = 0; c < kChromosomeCount; ++c) cols.push_back("chr" + ChromosomeId(static_cast<int>(c)).name());
    write_text_atomic(dir / "chrom_load.csv", to_csv(NamedTable{"cluster", cols, cluster_names, *r.chrom_load}));
  }
  if (r.top_genes) {
    for (std::size_t c = 0; c < r.top_genes->per_cluster.size(); ++c) {
      std::string text = csv_line({"rank", "gene", "cohorts"});
      const auto& genes = r.top_genes->per_cluster[c];
      for (std::size_t g = 0; g < genes.size(); ++g) {
        text += csv_line({std::to_string(g + 1), genes[g].gene, std::to_string(genes[g].cohorts)});
      }
      write_text_atomic(dir / ("top_genes_" + std::to_string(c) + ".csv"), text);
    }
  }
}

nlohmann::json published_reference() {
  auto row = [](double s, double db, double ch) {
    return nlohmann::json{{"silhouette", s}, {"davies_bouldin", db}, {"calinski_harabasz", ch}};
  };
  return {{"source_space", "original-embeddings, k-means k=2, 43 cancer-type cohorts"},
          {"rows",
           {{"ms-contab", row(0.561, 0.655, 43.106)},
            {"nmf@43", row(0.141, 3.011, 2.680)},
            {"hierarchical", row(0.697, 0.194, 16.275)},
            {"ae", row(0.187, 1.866, 2.385)},
            {"simclr", row(0.239, 1.378, 4.721)},
            {"deepcluster", row(0.216, 1.60, 3.16)}}}};
}

std::string comparison_csv(const ComparisonTable& t) {
  std::string out = csv_line({"method", "space", "silhouette", "davies_bouldin", "calinski_harabasz", "ari"});
  for (const auto& row : t.rows) {
    out += csv_line({row.method, t.space, optional_cell(row.metrics.silhouette), optional_cell(row.metrics.davies_bouldin),
                     optional_cell(row.metrics.calinski_harabasz), optional_cell(row.ari)});
  }
  return out;
}

nlohmann::json to_json(const ComparisonTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = to_json(row.metrics);
    r["method"] = row.method;
    if (row.ari) r["ari"] = *row.ari;
    rows.push_back(r);
  }
  return {{"space", t.space}, {"rows", rows}, {"paper_reference", published_reference()}};
}

}  // namespace contab
