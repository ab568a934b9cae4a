#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "contab/contrastive.hpp"
#include "contab/error.hpp"
#include "contab/grad_check.hpp"
#include "contab/synthetic.hpp"

using namespace contab;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Direct evaluation of the per-anchor softmax losses.
double nt_xent_oracle(const Matrix& z, double tau, bool drop_positive) {
  const Eigen::Index views = z.rows();
  const Eigen::Index n = views / 2;
  Matrix u = z;
  for (Eigen::Index i = 0; i < views; ++i) u.row(i) /= z.row(i).norm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < views; ++i) {
    const Eigen::Index pos = (i + n) % views;
    double denom = 0.0;
    for (Eigen::Index k = 0; k < views; ++k) {
      if (k == i || (drop_positive && k == pos)) continue;
      denom += std::exp(u.row(i).dot(u.row(k)) / tau);
    }
    total += -std::log(std::exp(u.row(i).dot(u.row(pos)) / tau) / denom);
  }
  return total / static_cast<double>(views);
}

CohortDataset tiny_dataset() { return generate_synthetic_cohorts(8, 3, 3.0).dataset; }

TabNetConfig tiny_arch() {
  TabNetConfig a;
  a.n_steps = 2;
  a.n_d = a.n_a = a.latent_dim = 8;
  a.projection_dim = 8;
  a.n_shared = 1;
  a.n_independent = 1;
  return a;
}

}  // namespace

TEST_CASE("nt-xent matches direct evaluation") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix z = random_matrix(8, 5, s);
    CHECK(nt_xent_value(z, 0.5) == doctest::Approx(nt_xent_oracle(z, 0.5, false)).epsilon(1e-12));
    CHECK(nt_xent_value(z, 0.2, Denominator::ExcludePositive) ==
          doctest::Approx(nt_xent_oracle(z, 0.2, true)).epsilon(1e-12));
  }
}

TEST_CASE("nt-xent closed forms") {
  Matrix one(2, 3);
  one << 1, 2, 3, 2, 4, 6;
  CHECK(std::abs(nt_xent_value(one, 0.5)) < 1e-15);

  Matrix orth(4, 2);
  orth << 1, 0, 0, 1, 1, 0, 0, 1;
  CHECK(nt_xent_value(orth, 0.5) == doctest::Approx(std::log(1.0 + 2.0 * std::exp(-2.0))));

  for (int n : {2, 4, 8}) {
    CHECK(nt_xent_value(Matrix::Ones(2 * n, 3), 0.5) == doctest::Approx(std::log(2.0 * n - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("nt-xent gradient and argument checks") {
  const Matrix z = random_matrix(6, 4, 9);
  CHECK(grad_check([](Tape&, Var v) { return nt_xent_loss(v, 0.5); }, z) < 1e-6);
  CHECK(grad_check([](Tape&, Var v) { return nt_xent_loss(v, 0.3, Denominator::ExcludePositive); }, z) < 1e-6);
  CHECK_THROWS_AS(nt_xent_value(random_matrix(3, 4, 1), 0.5), InputError);
  CHECK_THROWS_AS(nt_xent_value(z, 0.0), InputError);
  CHECK_THROWS_AS(nt_xent_value(random_matrix(2, 4, 1), 0.5, Denominator::ExcludePositive), InputError);
}

TEST_CASE("batches partition the cohorts") {
  for (std::size_t n : {2u, 8u, 9u, 17u, 40u}) {
    const auto batches = make_batches(n, 8, 3, 42);
    std::set<std::size_t> seen;
    for (const auto& b : batches) {
      CHECK(b.size() >= 2);
      for (auto i : b) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == n);
  }
  CHECK(make_batches(9, 8, 0, 42).size() == 1);
  CHECK(make_batches(40, 8, 1, 42) == make_batches(40, 8, 1, 42));
  CHECK(make_batches(40, 8, 1, 42) != make_batches(40, 8, 2, 42));
  CHECK_THROWS_AS(make_batches(1, 8, 0, 1), InputError);
  CHECK_THROWS_AS(make_batches(5, 1, 0, 1), InputError);
}

TEST_CASE("train config json") {
  TrainConfig c;
  c.epochs = 7;
  c.fusion = Fusion::Concat;
  c.denominator = Denominator::ExcludePositive;
  const TrainConfig back = train_config_from_json(to_json(c));
  CHECK(back.epochs == 7);
  CHECK(back.fusion == Fusion::Concat);
  CHECK(back.denominator == Denominator::ExcludePositive);
  CHECK_THROWS_AS(train_config_from_json({{"fusion", "sum"}}), InputError);
  CHECK_THROWS_AS(train_config_from_json({{"batch_size", 1}}), InputError);
  CHECK_THROWS_AS(train_config_from_json({{"temperature", 0.0}}), InputError);
}

TEST_CASE("training is seeded and reduces the loss") {
  const CohortDataset ds = tiny_dataset();
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.lr = 1e-2;
  TrainedModel a = train(ds, cfg, tiny_arch());
  TrainedModel b = train(ds, cfg, tiny_arch());
  REQUIRE(a.loss_history.size() == 30);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.loss_history.back() < a.loss_history.front());
  const EmbeddingMatrix ea = embed_cohorts(a.gene, a.chrom, ds, Fusion::Mean);
  const EmbeddingMatrix eb = embed_cohorts(b.gene, b.chrom, ds, Fusion::Mean);
  CHECK(ea.vectors == eb.vectors);
  CHECK(ea.names == ds.names());

  cfg.seed = 43;
  TrainedModel c = train(ds, cfg, tiny_arch());
  CHECK(embed_cohorts(c.gene, c.chrom, ds, Fusion::Mean).vectors != ea.vectors);
}

TEST_CASE("zero epochs leaves an untrained model") {
  TrainConfig cfg;
  cfg.epochs = 0;
  TrainedModel m = train(tiny_dataset(), cfg, tiny_arch());
  CHECK(m.loss_history.empty());
}

TEST_CASE("non-finite training reports a numerical error") {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.lr = 1e300;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(train(tiny_dataset(), cfg, tiny_arch()), NumericalError);
}

TEST_CASE("view fusion") {
  Matrix g(2, 2), c(2, 2);
  g << 3, 4, 1, 0;
  c << 0, 2, 0, 1;
  const EmbeddingMatrix mean = fuse_views({"a", "b"}, g, c, Fusion::Mean);
  CHECK(mean.vectors(0, 0) == doctest::Approx(0.3));
  CHECK(mean.vectors(0, 1) == doctest::Approx(0.9));
  CHECK(mean.fusion == "mean");
  const EmbeddingMatrix cat = fuse_views({"a", "b"}, g, c, Fusion::Concat);
  CHECK(cat.vectors.cols() == 4);
  CHECK(cat.vectors.row(1).norm() == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(fuse_views({"a", "b"}, Matrix::Zero(2, 2), c, Fusion::Mean), NumericalError);
}
