#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "contab/error.hpp"
#include "contab/rng.hpp"

namespace contab {

struct ClusterAssignment {
  std::vector<int> labels;  // in [0, k)
  int k = 0;
  double inertia = 0.0;
  bool degenerate = false;  // some cluster ended empty
};

enum class Distance { Euclidean, Cosine };

/// Number of clusters implied by labels (max + 1). Throws on negative labels.
int label_count(const std::vector<int>& labels);
/// Relabel so clusters are numbered by first occurrence.
std::vector<int> canonical_labels(const std::vector<int>& labels);
/// Pair-counting adjusted Rand index. Two constant labelings score 1.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

namespace detail {

template <class Derived>
double squared_distance(const Eigen::MatrixBase<Derived>& x, Eigen::Index i, Eigen::Index j) {
  return static_cast<double>((x.row(i) - x.row(j)).squaredNorm());
}

template <class Derived>
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixBase<Derived>& x, Distance metric) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (metric == Distance::Euclidean) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = std::sqrt(squared_distance(x, i, j));
    }
  } else {
    const Eigen::MatrixXd xd = x.template cast<double>();
    const Eigen::VectorXd norms = xd.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double denom = norms(i) * norms(j);
        const double cosine = denom > 0.0 ? xd.row(i).dot(xd.row(j)) / denom : 0.0;
        d(i, j) = d(j, i) = std::max(0.0, 1.0 - cosine);
      }
    }
  }
  return d;
}

inline void check_labels(Eigen::Index n, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != n) throw InputError("labels and points differ in length");
}

template <class Derived>
Eigen::MatrixXd centroids(const Eigen::MatrixBase<Derived>& x, const std::vector<int>& labels, int k,
                          std::vector<int>& sizes) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, x.cols());
  sizes.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(labels[static_cast<std::size_t>(i)]) += x.row(i).template cast<double>();
    ++sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int j = 0; j < k; ++j) {
    if (sizes[static_cast<std::size_t>(j)] > 0) c.row(j) /= static_cast<double>(sizes[static_cast<std::size_t>(j)]);
  }
  return c;
}

// Hartigan single-point moves: relocate a point whenever the exact change in
// within-cluster sum of squares, n_j/(n_j+1) |x-c_j|^2 - n_i/(n_i-1) |x-c_i|^2,
// is negative.
inline void hartigan_refine(const Eigen::MatrixXd& x, std::vector<int>& labels, int k) {
  const Eigen::Index n = x.rows();
  std::vector<int> sizes;
  Eigen::MatrixXd c = centroids(x, labels, k, sizes);
  for (Eigen::Index pass = 0; pass < 100 * n + 100; ++pass) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int own = labels[static_cast<std::size_t>(i)];
      const double n_own = sizes[static_cast<std::size_t>(own)];
      if (n_own <= 1) continue;
      const double remove = n_own / (n_own - 1.0) * (x.row(i) - c.row(own)).squaredNorm();
      int target = own;
      double best = remove;
      for (int j = 0; j < k; ++j) {
        if (j == own) continue;
        const double n_j = sizes[static_cast<std::size_t>(j)];
        const double add = n_j / (n_j + 1.0) * (x.row(i) - c.row(j)).squaredNorm();
        if (add < best) {
          best = add;
          target = j;
        }
      }
      if (target == own || !(best < remove - 1e-12 * std::max(1.0, remove))) continue;
      labels[static_cast<std::size_t>(i)] = target;
      c = centroids(x, labels, k, sizes);
      moved = true;
    }
    if (!moved) break;
  }
}

// One k-means++ seeded Lloyd run, refined by Hartigan moves.
template <class Derived>
ClusterAssignment lloyd(const Eigen::MatrixBase<Derived>& x, int k, int max_iter, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd xd = x.template cast<double>();
  Eigen::MatrixXd centers(k, xd.cols());

  // greedy k-means++ seeding: 2 + floor(ln k) candidates per center, keep the
  // one that leaves the smallest potential
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  centers.row(0) = xd.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd closest = (xd.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index pick = 0;
    Eigen::VectorXd pick_closest = closest;
    double pick_potential = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      Eigen::Index candidate = n - 1;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        for (Eigen::Index i = 0; i < n; ++i) {
          target -= closest(i);
          if (target < 0.0 && closest(i) > 0.0) {
            candidate = i;
            break;
          }
        }
      } else {
        candidate = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
      }
      const Eigen::VectorXd updated = closest.cwiseMin((xd.rowwise() - xd.row(candidate)).rowwise().squaredNorm());
      const double potential = updated.sum();
      if (potential < pick_potential) {
        pick_potential = potential;
        pick = candidate;
        pick_closest = updated;
      }
    }
    centers.row(c) = xd.row(pick);
    closest = pick_closest;
  }

  ClusterAssignment result;
  result.k = k;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd dist(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (xd.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist(i) = best_d;
      if (result.labels[static_cast<std::size_t>(i)] != best) {
        result.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    std::vector<int> sizes;
    Eigen::MatrixXd updated = centroids(xd, result.labels, k, sizes);
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      // Empty cluster: reseed from the point farthest from its centroid.
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      updated.row(c) = xd.row(far);
      dist(far) = 0.0;
      changed = true;
    }
    centers = updated;
    if (!changed) break;
  }

  hartigan_refine(xd, result.labels, k);

  std::vector<int> sizes;
  const Eigen::MatrixXd final_centers = centroids(xd, result.labels, k, sizes);
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.inertia += (xd.row(i) - final_centers.row(result.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  result.degenerate = std::any_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; });
  return result;
}

}  // namespace detail

/// Lloyd's algorithm from greedy k-means++ seeds, refined by Hartigan moves; best
/// of n_init restarts by inertia.
/// Restart r draws from derive_seed(seed, "kmeans", r). Throws InputError unless 1 <= k <= n.
template <class Derived>
ClusterAssignment kmeans(const Eigen::MatrixBase<Derived>& x, int k, std::uint64_t seed, int n_init = 10,
                         int max_iter = 300) {
  if (k < 1 || k > x.rows()) {
    throw InputError("kmeans: need 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(x.rows()) + ")");
  }
  if (n_init < 1 || max_iter < 1) throw InputError("kmeans: n_init and max_iter must be positive");
  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_init; ++r) {
    Rng rng(derive_seed(seed, "kmeans", static_cast<std::uint64_t>(r)));
    ClusterAssignment run = detail::lloyd(x, k, max_iter, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

/// Mean silhouette (b - a) / max(a, b). Points in singleton clusters score 0, as do
/// points with a = b = 0. Requires at least two clusters.
template <class Derived>
double silhouette(const Eigen::MatrixBase<Derived>& x, const std::vector<int>& labels,
                  Distance metric = Distance::Euclidean) {
  detail::check_labels(x.rows(), labels);
  const int k = label_count(labels);
  if (k < 2) throw InputError("silhouette: need at least 2 clusters");
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd d = detail::pairwise_distances(x, metric);
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] <= 1) continue;
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += d(i, j);
    }
    const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own && sizes[static_cast<std::size_t>(c)] > 0) b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

/// (1/k) sum_i max_{j != i} (s_i + s_j) / d(c_i, c_j), s_i the mean distance to centroid.
/// Throws NumericalError("degenerate centroids") if two centroids coincide.
template <class Derived>
double davies_bouldin(const Eigen::MatrixBase<Derived>& x, const std::vector<int>& labels) {
  detail::check_labels(x.rows(), labels);
  const int k = label_count(labels);
  if (k < 2) throw InputError("davies_bouldin: need at least 2 clusters");
  std::vector<int> sizes;
  const Eigen::MatrixXd c = detail::centroids(x, labels, k, sizes);
  if (std::any_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; })) {
    throw InputError("davies_bouldin: empty cluster");
  }
  Eigen::VectorXd scatter = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    scatter(l) += (x.row(i).template cast<double>() - c.row(l)).norm();
  }
  for (int j = 0; j < k; ++j) scatter(j) /= sizes[static_cast<std::size_t>(j)];
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double sep = (c.row(i) - c.row(j)).norm();
      if (!(sep > 0.0)) throw NumericalError("degenerate centroids");
      worst = std::max(worst, (scatter(i) + scatter(j)) / sep);
    }
    total += worst;
  }
  return total / k;
}

/// [B / (k - 1)] / [W / (n - k)]. Returns +infinity when W = 0.
template <class Derived>
double calinski_harabasz(const Eigen::MatrixBase<Derived>& x, const std::vector<int>& labels) {
  detail::check_labels(x.rows(), labels);
  const int k = label_count(labels);
  const Eigen::Index n = x.rows();
  if (k < 2) throw InputError("calinski_harabasz: need at least 2 clusters");
  if (n <= k) throw InputError("calinski_harabasz: need more points than clusters");
  std::vector<int> sizes;
  const Eigen::MatrixXd c = detail::centroids(x, labels, k, sizes);
  const Eigen::RowVectorXd overall = x.template cast<double>().colwise().mean();
  double between = 0.0;
  for (int j = 0; j < k; ++j) between += sizes[static_cast<std::size_t>(j)] * (c.row(j) - overall).squaredNorm();
  double within = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    within += (x.row(i).template cast<double>() - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  if (!(within > 0.0)) return std::numeric_limits<double>::infinity();
  return (between / (k - 1)) / (within / static_cast<double>(n - k));
}

}  // namespace contab
