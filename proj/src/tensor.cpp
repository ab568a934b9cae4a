#include "contab/tensor.hpp"

#include <cmath>
#include <string>

#include "contab/error.hpp"
#include "contab/sparsemax.hpp"

namespace contab {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(op) + ": shape mismatch " + shape(a.value()) + " vs " + shape(b.value()));
  }
}

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw InputError("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw InputError("operands recorded on different tapes");
  return tape_of(a);
}

bool any_grad(Tape& t, const Var& a) { return t.requires_grad(a); }
bool any_grad(Tape& t, const Var& a, const Var& b) { return t.requires_grad(a) || t.requires_grad(b); }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) { return record("constant", std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return record("variable", std::move(value), true, nullptr); }

Var Tape::param(Parameter& parameter) {
  Var v = record(parameter.name.c_str(), parameter.value, true, nullptr);
  nodes_.back().parameter = &parameter;
  nodes_.back().op = "param";
  return v;
}

Var Tape::record(const char* op, Matrix value, bool requires_grad, Backward backward) {
  if (!value.allFinite()) throw NumericalError(std::string("non-finite value produced by ") + op);
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(int id, const Matrix& grad) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = grad;
  } else {
    node.grad += grad;
  }
}

void Tape::backward(Var output) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw InputError("backward: output must be 1x1, got " + shape(output.value()));
  }
  for (auto& node : nodes_) node.grad.resize(0, 0);
  accumulate(output.id(), Matrix::Ones(1, 1));
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.size() == 0) continue;
    if (node.backward) {
      const Matrix g = node.grad;
      node.backward(g, *this);
    }
    if (node.parameter != nullptr) {
      Parameter& p = *node.parameter;
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
      p.grad += node.grad;
    }
  }
  for (auto& node : nodes_) {
    if (node.grad.size() == 0 && node.requires_grad) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw InputError("matmul: inner dimensions differ " + shape(a.value()) + " * " + shape(b.value()));
  }
  return t.record("matmul", a.value() * b.value(), any_grad(t, a, b), [a, b](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g * b.value().transpose());
    tp.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  return t.record("transpose", a.value().transpose(), any_grad(t, a),
                  [a](const Matrix& g, Tape& tp) { tp.accumulate(a, g.transpose()); });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a, b);
  return t.record("add", a.value() + b.value(), any_grad(t, a, b), [a, b](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a, b);
  return t.record("sub", a.value() - b.value(), any_grad(t, a, b), [a, b](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g);
    tp.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape("mul", a, b);
  return t.record("mul", a.value().cwiseProduct(b.value()), any_grad(t, a, b), [a, b](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g.cwiseProduct(b.value()));
    tp.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw InputError("add_row: expected 1x" + std::to_string(a.cols()) + " row, got " + shape(row.value()));
  }
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record("add_row", std::move(out), any_grad(t, a, row), [a, row](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g);
    tp.accumulate(row, g.colwise().sum());
  });
}

Var affine_scalar(Var a, double scale, double shift) {
  Tape& t = tape_of(a);
  Matrix out = (a.value() * scale).array() + shift;
  return t.record("affine_scalar", std::move(out), any_grad(t, a),
                  [a, scale](const Matrix& g, Tape& tp) { tp.accumulate(a, g * scale); });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  return t.record("relu", a.value().cwiseMax(0.0), any_grad(t, a), [a](const Matrix& g, Tape& tp) {
    tp.accumulate(a, (a.value().array() > 0.0).select(g, 0.0));
  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  Matrix s = a.value().unaryExpr(&sigmoid_scalar);
  return t.record("sigmoid", s, any_grad(t, a), [a, s](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g.array() * s.array() * (1.0 - s.array()));
  });
}

Var affine(Var x, Var weight, Var bias) { return add_row(matmul(x, weight), bias); }

Var glu(Var z) {
  Tape& t = tape_of(z);
  if (z.cols() % 2 != 0) throw InputError("glu: pre-activation width must be even, got " + std::to_string(z.cols()));
  const Eigen::Index half = z.cols() / 2;
  Matrix linear = z.value().leftCols(half);
  Matrix gate = z.value().rightCols(half).unaryExpr(&sigmoid_scalar);
  Matrix out = linear.cwiseProduct(gate);
  return t.record("glu", std::move(out), any_grad(t, z), [z, half, linear, gate](const Matrix& g, Tape& tp) {
    Matrix dz(g.rows(), 2 * half);
    dz.leftCols(half) = g.cwiseProduct(gate);
    dz.rightCols(half) = g.array() * linear.array() * gate.array() * (1.0 - gate.array());
    tp.accumulate(z, dz);
  });
}

Var glu(Var x, Var weight, Var bias) { return glu(affine(x, weight, bias)); }

Var cols(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.cols()) throw InputError("cols: range out of bounds");
  const Eigen::Index rows = a.rows();
  const Eigen::Index width = a.cols();
  return t.record("cols", a.value().middleCols(start, count), any_grad(t, a),
                  [a, start, count, rows, width](const Matrix& g, Tape& tp) {
                    Matrix full = Matrix::Zero(rows, width);
                    full.middleCols(start, count) = g;
                    tp.accumulate(a, full);
                  });
}

Var vstack(Var top, Var bottom) {
  Tape& t = tape_of(top, bottom);
  if (top.cols() != bottom.cols()) throw InputError("vstack: column counts differ");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top.value(), bottom.value();
  const Eigen::Index split = top.rows();
  return t.record("vstack", std::move(out), any_grad(t, top, bottom),
                  [top, bottom, split](const Matrix& g, Tape& tp) {
                    tp.accumulate(top, g.topRows(split));
                    tp.accumulate(bottom, g.bottomRows(g.rows() - split));
                  });
}

Var hstack(Var left, Var right) {
  Tape& t = tape_of(left, right);
  if (left.rows() != right.rows()) throw InputError("hstack: row counts differ");
  Matrix out(left.rows(), left.cols() + right.cols());
  out << left.value(), right.value();
  const Eigen::Index split = left.cols();
  return t.record("hstack", std::move(out), any_grad(t, left, right),
                  [left, right, split](const Matrix& g, Tape& tp) {
                    tp.accumulate(left, g.leftCols(split));
                    tp.accumulate(right, g.rightCols(g.cols() - split));
                  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows(), c = a.cols();
  return t.record("sum", std::move(out), any_grad(t, a),
                  [a, r, c](const Matrix& g, Tape& tp) { tp.accumulate(a, Matrix::Constant(r, c, g(0, 0))); });
}

Var mean(Var a) { return affine_scalar(sum(a), 1.0 / static_cast<double>(a.value().size()), 0.0); }

Var mse(Var prediction, Var target) {
  require_same_shape("mse", prediction, target);
  Var diff = sub(prediction, target);
  return mean(mul(diff, diff));
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  Tape& t = tape_of(logits);
  const Eigen::Index n = logits.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw InputError("softmax_cross_entropy: label count mismatch");
  Matrix probs(n, logits.cols());
  double loss = 0.0;
  std::vector<int> target(labels.begin(), labels.end());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = target[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw InputError("softmax_cross_entropy: label out of range");
    const double shift = logits.value().row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.value().row(i).array() - shift).exp().matrix();
    const double z = e.sum();
    probs.row(i) = e / z;
    loss += -(logits.value()(i, y) - shift - std::log(z));
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(n);
  return t.record("softmax_cross_entropy", std::move(out), any_grad(t, logits),
                  [logits, probs, target](const Matrix& g, Tape& tp) {
                    Matrix d = probs;
                    for (std::size_t i = 0; i < target.size(); ++i) d(static_cast<Eigen::Index>(i), target[i]) -= 1.0;
                    tp.accumulate(logits, d * (g(0, 0) / static_cast<double>(target.size())));
                  });
}

Var l2_normalize_rows(Var a) {
  Tape& t = tape_of(a);
  Vector norms = a.value().rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) throw NumericalError("l2_normalize_rows: zero-norm row " + std::to_string(i));
  }
  Matrix y = norms.cwiseInverse().asDiagonal() * a.value();
  return t.record("l2_normalize_rows", y, any_grad(t, a), [a, y, norms](const Matrix& g, Tape& tp) {
    const Vector dots = (g.cwiseProduct(y)).rowwise().sum();
    Matrix d = g - dots.asDiagonal() * y;
    tp.accumulate(a, norms.cwiseInverse().asDiagonal() * d);
  });
}

Var cosine_matrix(Var a, Var b) {
  if (a.cols() != b.cols()) throw InputError("cosine_matrix: embedding widths differ");
  return matmul(l2_normalize_rows(a), transpose(l2_normalize_rows(b)));
}

Var sparsemax(Var logits) {
  return sparsemax(logits, Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Zero(logits.rows(), logits.cols()));
}

Var sparsemax(Var logits, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& exclude) {
  Tape& t = tape_of(logits);
  if (logits.cols() == 0) throw InputError("sparsemax: empty row");
  if (exclude.rows() != logits.rows() || exclude.cols() != logits.cols()) {
    throw InputError("sparsemax: exclusion mask shape mismatch");
  }
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    out.row(r) = sparsemax_project(logits.value().row(r), exclude.row(r)).transpose();
  }
  return t.record("sparsemax", out, any_grad(t, logits), [logits, out](const Matrix& g, Tape& tp) {
    Matrix d = Matrix::Zero(out.rows(), out.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      double total = 0.0;
      int support = 0;
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (out(r, c) > 0.0) {
          total += g(r, c);
          ++support;
        }
      }
      const double avg = support > 0 ? total / support : 0.0;
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (out(r, c) > 0.0) d(r, c) = g(r, c) - avg;
      }
    }
    tp.accumulate(logits, d);
  });
}

BatchNorm::BatchNorm(const std::string& name, Eigen::Index width, double momentum_)
    : gamma(name + ".gamma", Matrix::Ones(1, width)),
      beta(name + ".beta", Matrix::Zero(1, width)),
      running_mean(RowVector::Zero(width)),
      running_var(RowVector::Ones(width)),
      momentum(momentum_) {}

Var mul_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw InputError("mul_row: expected 1x" + std::to_string(a.cols()) + " row, got " + shape(row.value()));
  }
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return t.record("mul_row", std::move(out), any_grad(t, a, row), [a, row](const Matrix& g, Tape& tp) {
    tp.accumulate(a, g.array().rowwise() * row.value().row(0).array());
    tp.accumulate(row, g.cwiseProduct(a.value()).colwise().sum());
  });
}

Var batch_norm(Tape& tape, Var x, BatchNorm& bn, Mode mode) {
  const Eigen::Index n = x.rows();
  const Eigen::Index width = x.cols();
  if (bn.gamma.value.cols() != width) {
    throw InputError("batch_norm: width " + std::to_string(width) + " does not match parameters " +
                     std::to_string(bn.gamma.value.cols()));
  }
  Var normalized;
  if (mode == Mode::Eval) {
    const RowVector inv_std = (bn.running_var.array() + bn.eps).rsqrt().matrix();
    Matrix xhat = (x.value().rowwise() - bn.running_mean).array().rowwise() * inv_std.array();
    normalized = tape.record("batch_norm_eval", std::move(xhat), tape.requires_grad(x),
                             [x, inv_std](const Matrix& g, Tape& tp) {
                               tp.accumulate(x, (g.array().rowwise() * inv_std.array()).matrix());
                             });
  } else {
    if (n < 2) throw InputError("batch_norm: train mode needs at least 2 rows, got " + std::to_string(n));
    const double count = static_cast<double>(n);
    const RowVector mu = x.value().colwise().sum() / count;
    const Matrix centered = x.value().rowwise() - mu;
    const RowVector var = centered.colwise().squaredNorm() / count;
    const RowVector inv_std = (var.array() + bn.eps).rsqrt().matrix();
    Matrix xhat = centered.array().rowwise() * inv_std.array();
    bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mu;
    bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var;
    normalized = tape.record("batch_norm_train", xhat, tape.requires_grad(x),
                             [x, xhat, inv_std, count](const Matrix& g, Tape& tp) {
                               const RowVector g_sum = g.colwise().sum();
                               const RowVector gx_sum = g.cwiseProduct(xhat).colwise().sum();
                               Matrix d = (g * count).rowwise() - g_sum;
                               d -= (xhat.array().rowwise() * gx_sum.array()).matrix();
                               tp.accumulate(x, (d.array().rowwise() * (inv_std.array() / count)).matrix());
                             });
  }
  return add_row(mul_row(normalized, tape.param(bn.gamma)), tape.param(bn.beta));
}

}  // namespace contab
