#include "contab/optim.hpp"

#include <cmath>

#include "contab/error.hpp"

namespace contab {

AdamState::AdamState(std::span<Parameter* const> params, AdamConfig cfg) : config(cfg) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Parameter* p : params) {
    m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (params.size() != state.m.size() || params.size() != state.v.size()) {
    throw InputError("adam_step: parameter count does not match optimizer state");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    const bool ok = p.grad.rows() == p.value.rows() && p.grad.cols() == p.value.cols() &&
                    state.m[i].rows() == p.value.rows() && state.m[i].cols() == p.value.cols();
    if (!ok) throw InputError("adam_step: shape mismatch for parameter " + p.name);
  }

  ++state.t;
  const AdamConfig& c = state.config;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * p.grad;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * p.grad.cwiseAbs2();
    const auto m_hat = state.m[i].array() / bias1;
    const auto v_hat = state.v[i].array() / bias2;
    p.value.array() -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
  }
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace contab
