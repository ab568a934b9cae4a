#include "contab/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "contab/error.hpp"

namespace contab {
namespace {

void check_step(double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw InputError("grad_check: step h must lie in [1e-7, 1e-3]");
}

double scalar_of(Var out) {
  if (out.rows() != 1 || out.cols() != 1) throw InputError("grad_check: function output is not scalar");
  return out.value()(0, 0);
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

}  // namespace

double grad_check(const TapeFunction& f, const Matrix& x, double h) {
  check_step(h);
  Matrix analytic;
  {
    Tape tape;
    Var in = tape.variable(x);
    Var out = f(tape, in);
    scalar_of(out);
    tape.backward(out);
    analytic = in.grad();
  }
  auto eval = [&](const Matrix& point) {
    Tape tape;
    return scalar_of(f(tape, tape.variable(point)));
  };
  double worst = 0.0;
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double original = probe(i);
    probe(i) = original + h;
    const double plus = eval(probe);
    probe(i) = original - h;
    const double minus = eval(probe);
    probe(i) = original;
    worst = std::max(worst, relative_error(analytic(i), (plus - minus) / (2.0 * h)));
  }
  return worst;
}

double grad_check_params(const std::function<Var(Tape&)>& f, std::span<Parameter* const> params, double h,
                         Eigen::Index max_coords) {
  check_step(h);
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var out = f(tape);
    scalar_of(out);
    tape.backward(out);
  }
  std::vector<Matrix> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto eval = [&] {
    Tape tape;
    return scalar_of(f(tape));
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& value = params[k]->value;
    const Eigen::Index stride = std::max<Eigen::Index>(1, value.size() / std::max<Eigen::Index>(1, max_coords));
    for (Eigen::Index i = 0; i < value.size(); i += stride) {
      const double original = value(i);
      value(i) = original + h;
      const double plus = eval();
      value(i) = original - h;
      const double minus = eval();
      value(i) = original;
      worst = std::max(worst, relative_error(analytic[k](i), (plus - minus) / (2.0 * h)));
    }
  }
  return worst;
}

}  // namespace contab
