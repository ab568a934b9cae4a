#include <doctest.h>

#include "contab/error.hpp"
#include "contab/grad_check.hpp"
#include "contab/tabnet.hpp"

using namespace contab;

namespace {

TabNetConfig small_config(int input_dim) {
  TabNetConfig c;
  c.input_dim = input_dim;
  c.n_steps = 3;
  c.n_d = 4;
  c.n_a = 4;
  c.latent_dim = 4;
  c.projection_dim = 3;
  return c;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(TabNetEncoder(TabNetConfig{}, 1), InputError);
  TabNetConfig c = small_config(5);
  c.gamma = 0.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = small_config(5);
  c.latent_dim = 8;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = small_config(5);
  c.n_shared = 0;
  c.n_independent = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  const TabNetConfig back = tabnet_config_from_json(to_json(small_config(7)));
  CHECK(back.input_dim == 7);
  CHECK(back.n_d == 4);
  CHECK(back.projection_dim == 3);
}

TEST_CASE("forward shapes and attention masks") {
  TabNetEncoder enc(small_config(10), 3);
  const Matrix x = random_matrix(8, 10, 4);
  const Encoding out = encode(enc, x, Mode::Train);
  CHECK(out.latent.rows() == 8);
  CHECK(out.latent.cols() == 4);
  CHECK(out.projected.cols() == 3);
  REQUIRE(out.trace.masks.size() == 3);
  for (const Matrix& m : out.trace.masks) {
    CHECK(m.rows() == 8);
    CHECK(m.cols() == 10);
    CHECK(m.minCoeff() >= 0.0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) CHECK(m.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  Matrix prior = Matrix::Ones(8, 10);
  for (std::size_t t = 0; t < 3; ++t) {
    prior = prior.cwiseProduct((Matrix::Constant(8, 10, 1.3) - out.trace.masks[t]));
    CHECK((prior - out.trace.priors[t]).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(encode(enc, random_matrix(8, 9, 4), Mode::Train), InputError);
}

TEST_CASE("relaxation of one excludes features already fully used") {
  TabNetConfig c = small_config(6);
  c.gamma = 1.0;
  TabNetEncoder enc(c, 5);
  const Encoding out = encode(enc, 3.0 * random_matrix(16, 6, 6), Mode::Train);
  for (Eigen::Index r = 0; r < 16; ++r) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      bool spent = false;
      for (std::size_t t = 0; t < out.trace.masks.size(); ++t) {
        if (spent) CHECK(out.trace.masks[t](r, j) == 0.0);
        if (out.trace.masks[t](r, j) == 1.0) spent = true;
      }
    }
  }
  for (std::size_t t = 0; t < out.trace.priors.size(); ++t) CHECK(out.trace.priors[t].minCoeff() >= 0.0);
}

TEST_CASE("seeded construction and eval determinism") {
  TabNetEncoder a(small_config(6), 11);
  TabNetEncoder b(small_config(6), 11);
  TabNetEncoder c(small_config(6), 12);
  const Matrix x = random_matrix(5, 6, 1);
  CHECK(encode(a, x, Mode::Eval).latent == encode(b, x, Mode::Eval).latent);
  CHECK(encode(a, x, Mode::Eval).latent != encode(c, x, Mode::Eval).latent);
  const Matrix once = encode(a, x, Mode::Eval).latent;
  CHECK(encode(a, x, Mode::Eval).latent == once);
  CHECK(a.parameter_count() > 0);
}

TEST_CASE("eval after many train passes on one batch matches train normalization") {
  TabNetEncoder enc(small_config(6), 13);
  const Matrix x = random_matrix(12, 6, 2);
  for (int i = 0; i < 400; ++i) encode(enc, x, Mode::Train);
  const Encoding train = encode(enc, x, Mode::Train);
  const Encoding eval = encode(enc, x, Mode::Eval);
  CHECK((train.latent - eval.latent).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("state round trip restores outputs") {
  TabNetEncoder a(small_config(6), 21);
  const Matrix x = random_matrix(7, 6, 3);
  encode(a, x, Mode::Train);
  const nlohmann::json doc = snapshot_to_json(a.state("gene."));
  TabNetEncoder b(small_config(6), 99);
  snapshot_from_json(doc, b.state("gene."));
  CHECK(encode(a, x, Mode::Eval).latent == encode(b, x, Mode::Eval).latent);
  CHECK_THROWS_AS(snapshot_from_json(doc, b.state("chrom.")), InputError);
}

TEST_CASE("encoder gradients") {
  TabNetEncoder enc(small_config(5), 31);
  const Matrix x = random_matrix(6, 5, 7);
  auto loss = [&](Tape& t, Var v) {
    auto out = enc.forward(t, v, Mode::Train);
    return mean(mul(out.projected, out.projected));
  };
  CHECK(grad_check(loss, x) < 1e-4);
  const auto params = enc.parameters();
  CHECK(grad_check_params([&](Tape& t) { return loss(t, t.constant(x)); }, params, 1e-5, 8) < 1e-4);
}

TEST_CASE("feature importances") {
  StepTrace trace;
  Matrix m1(2, 3), m2(2, 3);
  m1 << 1, 0, 0, 0.5, 0.5, 0;
  m2 << 0, 0, 1, 0, 0, 1;
  trace.masks = {m1, m2};
  Vector c1(2), c2(2);
  c1 << 1.0, 2.0;
  c2 << 3.0, 2.0;
  trace.contributions = {c1, c2};
  const FeatureImportances fi = feature_importances(trace);
  // sample 0: (1,0,3)/4; sample 1: (1,1,2)/4; average then normalize
  CHECK(fi.weights(0) == doctest::Approx(0.25));
  CHECK(fi.weights(1) == doctest::Approx(0.125));
  CHECK(fi.weights(2) == doctest::Approx(0.625));
  CHECK_FALSE(fi.uniform_fallback);

  trace.contributions = {Vector::Zero(2), Vector::Zero(2)};
  const FeatureImportances flat = feature_importances(trace);
  CHECK(flat.uniform_fallback);
  CHECK(flat.weights(1) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(feature_importances(StepTrace{}), InputError);
}
