#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "graphdialog/parameter.hpp"
#include "graphdialog/tensor.hpp"

namespace graphdialog {

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Every op appends a node holding its value and a closure
// that pushes the output gradient back to its inputs. Nodes are appended in
// dependency order, so backward is a single reverse sweep.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self, const Matrix& grad)>;

  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var zeros(Eigen::Index rows, Eigen::Index cols) { return constant(Matrix::Zero(rows, cols)); }

  // Leaf bound to a parameter; the same parameter always maps to one node.
  Var parameter(Parameter& p);

  // Accumulates dLoss/dParam into every reachable Parameter::gradient.
  void backward(const Var& loss);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Op plumbing.
  Var record(Matrix value, bool requires_grad, Backward backward);
  void accumulate(int id, const Matrix& g);
  template <typename Derived>
  void accumulate_block(int id, Eigen::Index row, Eigen::Index col, const Eigen::MatrixBase<Derived>& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  bool backward_done_ = false;
};

template <typename Derived>
void Tape::accumulate_block(int id, Eigen::Index row, Eigen::Index col, const Eigen::MatrixBase<Derived>& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  n.grad.block(row, col, g.rows(), g.cols()) += g;
}

inline const Matrix& Var::value() const { return tape_->value(id_); }

// Elementwise and linear-algebra ops. All take and return tape handles and
// throw DimensionError on shape mismatch.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var divide(const Var& a, double s);
Var one_minus(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);
Var sum(const Var& a);
Var dot(const Var& a, const Var& b);
Var square(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }

// Structural ops.
Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var column(const Var& a, Eigen::Index j);
Var row_as_column(const Var& table, Eigen::Index i);
Var gather_rows(const Var& table, std::span<const int> ids);

// Sum of vectors in list order.
Var add_all(const std::vector<Var>& terms);
// sum_j weights[j] * keys[j], accumulated in list order.
Var weighted_sum(const std::vector<Var>& keys, const Var& weights);

// weights * rows where every output entry is an ordered_sum, so permuting
// the rows together with the weight columns leaves the result bit-identical.
Var weighted_rows(const Var& weights, const Var& rows);
// s_i + t_j for column vectors s (n) and t (m): an n x m matrix.
Var outer_sum(const Var& s, const Var& t);

Var masked_softmax(const Var& logits, std::span<const std::uint8_t> mask);
Var softmax(const Var& logits);
// Row-wise softmax of a matrix; mask is row-major with the matrix's shape.
Var masked_row_softmax(const Var& logits, std::span<const std::uint8_t> mask);

// -log softmax(logits)[target] as a 1x1 value.
Var softmax_cross_entropy(const Var& logits, Eigen::Index target);

// Multiplies by a fixed mask (already scaled for inverted dropout).
Var apply_dropout(const Var& a, const Matrix& keep_scale);

}  // namespace graphdialog
