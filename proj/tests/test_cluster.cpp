#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "contab/analysis.hpp"
#include "contab/cluster.hpp"
#include "contab/error.hpp"
#include "contab/synthetic.hpp"

using namespace contab;

namespace {

Eigen::MatrixXd line_fixture() {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 100.0, 101.0;
  return x;
}

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

double sse(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
  std::vector<int> sizes;
  const Eigen::MatrixXd c = detail::centroids(x, labels, k, sizes);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += (x.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

double best_two_partition(const Eigen::MatrixXd& x) {
  const auto n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << (n - 1)); ++mask) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    best = std::min(best, sse(x, labels, 2));
  }
  return best;
}

EmbeddingMatrix embedding(const Eigen::MatrixXd& v) {
  EmbeddingMatrix e;
  for (Eigen::Index i = 0; i < v.rows(); ++i) e.names.push_back("c" + std::to_string(i));
  e.vectors = v;
  return e;
}

}  // namespace

TEST_CASE("metrics on the line fixture") {
  const Eigen::MatrixXd x = line_fixture();
  const std::vector<int> labels{0, 0, 1, 1};
  // outer points: a = 1, b = 100.5; inner points: a = 1, b = 99.5
  CHECK(silhouette(x, labels) == doctest::Approx((99.5 / 100.5 + 98.5 / 99.5) / 2.0).epsilon(1e-12));
  CHECK(davies_bouldin(x, labels) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(calinski_harabasz(x, labels) == doctest::Approx(20000.0).epsilon(1e-12));
}

TEST_CASE("silhouette edge cases") {
  const Eigen::MatrixXd x = line_fixture();
  CHECK(silhouette(x, std::vector<int>{0, 1, 1, 1}) < silhouette(x, std::vector<int>{0, 0, 1, 1}));
  CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 0, 0, 0}), InputError);
  CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 1}), InputError);
  Eigen::MatrixXd same = Eigen::MatrixXd::Zero(4, 2);
  CHECK(silhouette(same, std::vector<int>{0, 0, 1, 1}) == 0.0);
  Eigen::MatrixXd dirs(4, 2);
  dirs << 1, 0, 2, 0, 0, 1, 0, 3;
  CHECK(silhouette(dirs, std::vector<int>{0, 0, 1, 1}, Distance::Cosine) == doctest::Approx(1.0));
}

TEST_CASE("davies-bouldin and calinski-harabasz degenerate cases") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 0, 5, 5;
  CHECK(calinski_harabasz(x, std::vector<int>{0, 0, 1, 1}) == std::numeric_limits<double>::infinity());
  CHECK(davies_bouldin(x, std::vector<int>{0, 0, 1, 1}) == 0.0);
  Eigen::MatrixXd sym(4, 1);
  sym << -1, 1, -2, 2;
  CHECK_THROWS_AS(davies_bouldin(sym, std::vector<int>{0, 0, 1, 1}), NumericalError);
  CHECK_THROWS_AS(calinski_harabasz(line_fixture().topRows(2), std::vector<int>{0, 1}), InputError);
}

TEST_CASE("kmeans reaches the exhaustive optimum on small fixtures") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Eigen::Index n : {3, 5, 8}) {
      const Eigen::MatrixXd x = random_points(n, 2, seed * 10 + static_cast<std::uint64_t>(n));
      const ClusterAssignment km = kmeans(x, 2, 42);
      CHECK(km.inertia == doctest::Approx(best_two_partition(x)).epsilon(1e-10));
      CHECK(km.inertia == doctest::Approx(sse(x, km.labels, 2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kmeans behaviour") {
  const Eigen::MatrixXd x = random_points(30, 3, 5);
  const ClusterAssignment a = kmeans(x, 3, 1);
  CHECK(a.labels == kmeans(x, 3, 1).labels);
  CHECK(a.k == 3);
  CHECK_FALSE(a.degenerate);
  const ClusterAssignment all = kmeans(x, 30, 1);
  CHECK(all.inertia == doctest::Approx(0.0));
  CHECK_THROWS_AS(kmeans(x, 0, 1), InputError);
  CHECK_THROWS_AS(kmeans(x, 31, 1), InputError);
  const ClusterAssignment dup = kmeans(Eigen::MatrixXd::Ones(5, 2), 2, 1);
  CHECK(dup.inertia == 0.0);
}

TEST_CASE("adjusted rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(adjusted_rand_index({0, 0, 0}, {1, 1, 1}) == 1.0);
  // contingency [[2,0],[1,1]]: index 1, row pairs 2, column pairs 3, total 6, expected 1
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(0.0));
  // contingency [[3,0],[1,2]]: index 4, row pairs 6, column pairs 7, total 15
  CHECK(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 0, 0, 1, 1}) == doctest::Approx((4.0 - 2.8) / (6.5 - 2.8)));
  CHECK(adjusted_rand_index({0, 1, 0, 1}, {0, 0, 1, 1}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(adjusted_rand_index({0, 1}, {0}), InputError);
  CHECK(canonical_labels({5, 5, 2, 7, 2}) == std::vector<int>{0, 0, 1, 2, 1});
  CHECK_THROWS_AS(label_count({0, -1}), InputError);
}

TEST_CASE("cosine similarity and block statistics") {
  Eigen::MatrixXd v(4, 2);
  v << 1, 0, 2, 0, 0, 1, 0, 5;
  const EmbeddingMatrix e = embedding(v);
  const SimilarityStats s = similarity_stats(e, {0, 0, 1, 1});
  CHECK(*s.within[0] == doctest::Approx(1.0));
  CHECK(*s.within[1] == doctest::Approx(1.0));
  CHECK(*s.between == doctest::Approx(0.0));
  CHECK(s.prototypes == std::vector<std::size_t>{0, 2});

  const SimilarityStats r = similarity_stats(e, {1, 0, 1, 0});
  CHECK(r.order == std::vector<std::size_t>{1, 3, 0, 2});
  CHECK(r.ordered_cosine(0, 2) == doctest::Approx(1.0));
  CHECK(r.ordered_cosine(0, 1) == doctest::Approx(0.0));

  const SimilarityStats single = similarity_stats(e, {0, 0, 0, 1});
  CHECK_FALSE(single.within[1].has_value());
  CHECK_THROWS_AS(similarity_stats(e, {0, 0, 2, 2}), InputError);
  CHECK_THROWS_AS(cosine_similarity(Eigen::MatrixXd::Zero(2, 2)), NumericalError);
  const Eigen::MatrixXd c = cosine_similarity(random_points(6, 4, 3));
  CHECK(c.isApprox(c.transpose()));
  CHECK(c.maxCoeff() <= 1.0);
  CHECK(c.minCoeff() >= -1.0);
}

TEST_CASE("nearest neighbors") {
  Eigen::MatrixXd v(4, 2);
  v << 1, 0, 1, 0.1, 0, 1, -1, 0;
  const auto nn = nearest_neighbors(embedding(v), 2);
  CHECK(nn[0][0].index == 1);
  CHECK(nn[0][1].index == 2);
  CHECK(nn[3][0].index == 2);
  for (const auto& row : nn) CHECK(row.size() == 2);
  CHECK_THROWS_AS(nearest_neighbors(embedding(v), 4), InputError);
}

TEST_CASE("cluster profiles on planted data") {
  const SyntheticCohorts s = generate_synthetic_cohorts(20, 4, 3.0);
  const Eigen::MatrixXd spectra = cluster_spectra(s.dataset, s.labels);
  CHECK(spectra.rows() == 2);
  CHECK(spectra.cols() == 12);
  const auto ct = static_cast<Eigen::Index>(index_of(Substitution::CT));
  const auto gt = static_cast<Eigen::Index>(index_of(Substitution::GT));
  CHECK(spectra(0, ct) / spectra.row(0).sum() > spectra(1, ct) / spectra.row(1).sum());
  CHECK(spectra(1, gt) / spectra.row(1).sum() > spectra(0, gt) / spectra.row(0).sum());
  const Eigen::MatrixXd load = cluster_chrom_load(s.dataset, s.labels);
  CHECK(load.cols() == 24);
  CHECK(load.minCoeff() >= 0.0);

  const TopGenesReport top = top_genes_by_cluster(s.dataset, s.labels, 5);
  REQUIRE(top.per_cluster.size() == 2);
  CHECK(top.per_cluster[0].size() == 5);
  for (std::size_t i = 1; i < 5; ++i) CHECK(top.per_cluster[0][i].cohorts <= top.per_cluster[0][i - 1].cohorts);
  CHECK(top.shared + top.unique_first > 0);
}

TEST_CASE("pca projection") {
  Eigen::MatrixXd x(5, 3);
  x << 0, 0, 0, 1, 0, 0, 2, 0, 0, 3, 0, 1, 4, 0, 1;
  const Eigen::MatrixXd p = pca_2d(x);
  CHECK(p.rows() == 5);
  CHECK(p.cols() == 2);
  CHECK(std::abs(p.col(0).sum()) < 1e-10);
  CHECK(std::abs(p.col(0).dot(p.col(1))) < 1e-8);
  CHECK(p.col(0).squaredNorm() >= p.col(1).squaredNorm());
  CHECK(p(4, 0) > p(0, 0));

  const Eigen::MatrixXd z = random_points(12, 5, 2);
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd pz = pca_2d(z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered.transpose() * centered);
  CHECK(pz.col(0).squaredNorm() == doctest::Approx(es.eigenvalues()(4)).epsilon(1e-8));
  CHECK(pz.col(1).squaredNorm() == doctest::Approx(es.eigenvalues()(3)).epsilon(1e-8));
  CHECK_THROWS_AS(pca_2d(z.topRows(2)), InputError);
  CHECK_THROWS_AS(pca_2d(Eigen::MatrixXd::Ones(4, 3)), InputError);
}
