#include "contab/analysis.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "contab/cluster.hpp"
#include "contab/error.hpp"

namespace contab {
namespace {

std::vector<std::size_t> cluster_sizes(const std::vector<int>& labels, int k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

void require_nonempty_clusters(const std::vector<int>& labels, int k, const char* op) {
  for (std::size_t s : cluster_sizes(labels, k)) {
    if (s == 0) throw InputError(std::string(op) + ": empty cluster");
  }
}

}  // namespace

Eigen::MatrixXd cosine_similarity(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) throw NumericalError("cosine similarity: zero-norm row " + std::to_string(i));
  }
  const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * x;
  Eigen::MatrixXd s = unit * unit.transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    s(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      const double v = std::clamp(0.5 * (s(i, j) + s(j, i)), -1.0, 1.0);
      s(i, j) = s(j, i) = v;
    }
  }
  return s;
}

SimilarityStats similarity_stats(const EmbeddingMatrix& embeddings, const std::vector<int>& labels) {
  const Eigen::Index n = embeddings.vectors.rows();
  detail::check_labels(n, labels);
  if (embeddings.names.size() != static_cast<std::size_t>(n)) throw InputError("similarity_stats: name count mismatch");
  const int k = label_count(labels);
  require_nonempty_clusters(labels, k, "similarity_stats");
  const Eigen::MatrixXd cos = cosine_similarity(embeddings.vectors);
  const auto& names = embeddings.names;

  SimilarityStats out;
  std::vector<double> within_sum(static_cast<std::size_t>(k), 0.0);
  std::vector<double> within_pairs(static_cast<std::size_t>(k), 0.0);
  double between_sum = 0.0;
  double between_pairs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int li = labels[static_cast<std::size_t>(i)];
      const int lj = labels[static_cast<std::size_t>(j)];
      if (li == lj) {
        within_sum[static_cast<std::size_t>(li)] += cos(i, j);
        within_pairs[static_cast<std::size_t>(li)] += 1.0;
      } else {
        between_sum += cos(i, j);
        between_pairs += 1.0;
      }
    }
  }
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    out.within.push_back(within_pairs[cc] > 0 ? std::optional<double>(within_sum[cc] / within_pairs[cc]) : std::nullopt);
  }
  if (between_pairs > 0) out.between = between_sum / between_pairs;

  const auto sizes = cluster_sizes(labels, k);
  out.prototypes.assign(static_cast<std::size_t>(k), 0);
  std::vector<double> best(static_cast<std::size_t>(k), -std::numeric_limits<double>::infinity());
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    double score = 0.0;
    if (sizes[c] > 1) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i && static_cast<std::size_t>(labels[static_cast<std::size_t>(j)]) == c) score += cos(i, j);
      }
      score /= static_cast<double>(sizes[c] - 1);
    }
    const auto ui = static_cast<std::size_t>(i);
    if (!seen[c] || score > best[c] || (score == best[c] && names[ui] < names[out.prototypes[c]])) {
      best[c] = score;
      out.prototypes[c] = ui;
      seen[c] = true;
    }
  }

  out.order.resize(static_cast<std::size_t>(n));
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    if (names[a] != names[b]) return names[a] < names[b];
    return a < b;
  });
  out.ordered_cosine.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.ordered_cosine(i, j) = cos(static_cast<Eigen::Index>(out.order[static_cast<std::size_t>(i)]),
                                     static_cast<Eigen::Index>(out.order[static_cast<std::size_t>(j)]));
    }
  }
  return out;
}

std::vector<std::vector<Neighbor>> nearest_neighbors(const EmbeddingMatrix& embeddings, std::size_t top_k) {
  const auto n = static_cast<std::size_t>(embeddings.vectors.rows());
  if (n <= top_k) throw InputError("nearest_neighbors: need more cohorts than top_k");
  const Eigen::MatrixXd cos = cosine_similarity(embeddings.vectors);
  const auto& names = embeddings.names;
  std::vector<std::vector<Neighbor>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Neighbor> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.push_back({j, cos(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
    std::sort(all.begin(), all.end(), [&](const Neighbor& a, const Neighbor& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      if (names[a.index] != names[b.index]) return names[a.index] < names[b.index];
      return a.index < b.index;
    });
    all.resize(top_k);
    out[i] = std::move(all);
  }
  return out;
}

namespace {

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& per_cohort, const std::vector<int>& labels, const char* op) {
  detail::check_labels(per_cohort.rows(), labels);
  const int k = label_count(labels);
  require_nonempty_clusters(labels, k, op);
  std::vector<int> sizes;
  return detail::centroids(per_cohort, labels, k, sizes);
}

}  // namespace

Eigen::MatrixXd cluster_spectra(const CohortDataset& dataset, const std::vector<int>& labels) {
  Eigen::MatrixXd totals(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(kSubstitutionCount));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    totals.row(static_cast<Eigen::Index>(i)) = dataset.cohorts[i].gene.counts.colwise().sum().cast<double>();
  }
  return cluster_means(totals, labels, "cluster_spectra");
}

Eigen::MatrixXd cluster_chrom_load(const CohortDataset& dataset, const std::vector<int>& labels) {
  Eigen::MatrixXd loads(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(kChromosomeCount));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    loads.row(static_cast<Eigen::Index>(i)) = dataset.cohorts[i].chrom.rates.rowwise().sum().transpose();
  }
  return cluster_means(loads, labels, "cluster_chrom_load");
}

TopGenesReport top_genes_by_cluster(const CohortDataset& dataset, const std::vector<int>& labels, std::size_t top_n) {
  detail::check_labels(static_cast<Eigen::Index>(dataset.size()), labels);
  const int k = label_count(labels);
  std::vector<std::map<std::string, std::size_t>> recurrence(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (const auto& gene : dataset.cohorts[i].gene.genes) {
      if (!gene.empty()) ++recurrence[static_cast<std::size_t>(labels[i])][gene];
    }
  }
  TopGenesReport out;
  for (const auto& table : recurrence) {
    std::vector<GeneRecurrence> ranked;
    for (const auto& [gene, count] : table) ranked.push_back({gene, count});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const GeneRecurrence& a, const GeneRecurrence& b) { return a.cohorts > b.cohorts; });
    if (ranked.size() > top_n) ranked.resize(top_n);
    out.per_cluster.push_back(std::move(ranked));
  }
  if (k >= 2) {
    for (const auto& [gene, count] : recurrence[0]) {
      if (recurrence[1].count(gene)) ++out.shared;
      else ++out.unique_first;
    }
    for (const auto& [gene, count] : recurrence[1]) {
      if (!recurrence[0].count(gene)) ++out.unique_second;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd power_iteration(const Eigen::MatrixXd& c) {
  const Eigen::Index d = c.rows();
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = 1.0 + static_cast<double>(j) / static_cast<double>(d);
  v.normalize();
  for (int iter = 0; iter < 200000; ++iter) {
    Eigen::VectorXd next = c * v;
    const double norm = next.norm();
    if (!(norm > 0.0)) return v;
    next /= norm;
    const double change = (next - v).norm();
    v = next;
    if (change < 1e-14) break;
  }
  return v;
}

}  // namespace

Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& x) {
  if (x.rows() < 3) throw InputError("pca_2d: need at least 3 rows");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw InputError("pca_2d: rank-0 input");

  Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(x.cols(), 2);
  for (int comp = 0; comp < 2 && comp < x.cols(); ++comp) {
    Eigen::VectorXd v = power_iteration(cov);
    const double eigenvalue = v.dot(cov * v);
    if (!(eigenvalue > 1e-12 * trace)) break;
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    axes.col(comp) = v;
    cov -= eigenvalue * v * v.transpose();
  }
  return centered * axes;
}

}  // namespace contab
