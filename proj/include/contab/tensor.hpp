#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace contab {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

/// A trainable dense array with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode gradient record. Nodes are appended in evaluation order, so
/// recording order is a topological order and backward() walks it in reverse,
/// visiting each node once. Single-threaded.
class Tape {
 public:
  using Backward = std::function<void(const Matrix& out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value with no gradient.
  Var constant(Matrix value);
  /// Differentiable input; its gradient is readable through Var::grad().
  Var variable(Matrix value);
  /// Binds a parameter; backward() adds into parameter.grad.
  Var param(Parameter& parameter);

  /// Append an op result. Throws NumericalError if `value` has non-finite entries.
  /// `backward` may be empty when no input requires a gradient.
  Var record(const char* op, Matrix value, bool requires_grad, Backward backward);

  /// Seeds d(output)/d(output) = 1 for a 1x1 output and propagates.
  void backward(Var output);

  /// Adds `grad` into the gradient of node `id` if that node requires one.
  void accumulate(int id, const Matrix& grad);
  template <class Expr>
  void accumulate(const Var& v, const Expr& grad) {
    if (requires_grad(v)) accumulate(v.id(), Matrix(grad));
  }

  bool requires_grad(const Var& v) const { return nodes_[static_cast<std::size_t>(v.id())].requires_grad; }
  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  /// Name of the op that produced node `id` ("param" for bound parameters).
  const char* op(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const char* op = "";
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* parameter = nullptr;
  };
  std::vector<Node> nodes_;
};

// Elementwise and linear algebra ops. Shapes are checked; mismatches throw InputError.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a + row, with `row` (1 x cols) broadcast over rows.
Var add_row(Var a, Var row);
/// a * row, with `row` (1 x cols) broadcast over rows.
Var mul_row(Var a, Var row);
/// scale * a + shift
Var affine_scalar(Var a, double scale, double shift);
Var relu(Var a);
Var sigmoid(Var a);
/// x W + b
Var affine(Var x, Var weight, Var bias);
/// Gated linear unit on a pre-activation [a | g]: a * sigmoid(g). Width must be even.
Var glu(Var z);
/// glu(x W + b)
Var glu(Var x, Var weight, Var bias);
Var cols(Var a, Eigen::Index start, Eigen::Index count);
Var vstack(Var top, Var bottom);
Var hstack(Var left, Var right);
Var sum(Var a);
Var mean(Var a);
/// Mean squared error over all entries.
Var mse(Var prediction, Var target);
/// Mean softmax cross-entropy of row-wise logits against integer labels.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

/// Row-wise unit L2 normalization. Throws NumericalError naming a zero row.
Var l2_normalize_rows(Var a);
/// Pairwise cosine similarity, a.rows() x b.rows().
Var cosine_matrix(Var a, Var b);

/// Row-wise sparsemax. Entries where `exclude` is nonzero are held at 0 and
/// left out of the projection (an all-excluded row falls back to the full row).
/// The backward rule on support S is g - mean_S(g) on S and 0 elsewhere;
/// at support-change boundaries this is the one-sided rule of the identified support.
Var sparsemax(Var logits);
Var sparsemax(Var logits, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& exclude);

enum class Mode { Train, Eval };

/// Per-column batch normalization with running statistics.
struct BatchNorm {
  Parameter gamma;
  Parameter beta;
  RowVector running_mean;
  RowVector running_var;
  /// running <- momentum * running + (1 - momentum) * batch
  double momentum = 0.9;
  double eps = 1e-5;

  BatchNorm() = default;
  BatchNorm(const std::string& name, Eigen::Index width, double momentum = 0.9);
};

/// Train mode normalizes by the batch mean and population variance (gradients flow
/// through both) and updates the running statistics; eval mode uses the running
/// statistics. Train mode needs at least two rows.
Var batch_norm(Tape& tape, Var x, BatchNorm& bn, Mode mode);

}  // namespace contab
