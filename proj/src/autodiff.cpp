#include "graphdialog/autodiff.hpp"

#include <string>

namespace graphdialog {
namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw ContractError("operands recorded on different tapes");
  return t;
}

bool needs(const Tape& t, const Var& v) { return t.requires_grad(v.id()); }

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

void require_column(const char* op, const Matrix& a) {
  if (a.cols() != 1) throw DimensionError(std::string(op) + ": expected a column vector, got " + shape_string(a));
}

}  // namespace

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ContractError("scalar() on non-scalar value " + shape_string(v));
  return v(0, 0);
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::parameter(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Var v = record(p.value, true, nullptr);
  nodes_.back().param = &p;
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  if (!value.allFinite()) {
    throw NumericError("non-finite value produced on tape (node " + std::to_string(nodes_.size()) + ")");
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  const Matrix& lv = value(loss.id());
  if (lv.size() != 1) throw ContractError("backward: loss must be scalar, got " + shape_string(lv));
  if (backward_done_) throw ContractError("backward: tape already consumed");
  backward_done_ = true;
  if (!requires_grad(loss.id())) return;
  nodes_[static_cast<std::size_t>(loss.id())].grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id, n.grad);
    if (n.param != nullptr) n.param->gradient += n.grad;
  }
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(av) + " * " + shape_string(bv));
  }
  const int ia = a.id(), ib = b.id();
  return t.record(av * bv, needs(t, a) || needs(t, b), [ia, ib](Tape& tp, int, const Matrix& g) {
    if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
    if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
  });
}

Var transpose(const Var& a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record(a.value().transpose(), needs(t, a),
                  [ia](Tape& tp, int, const Matrix& g) { tp.accumulate(ia, g.transpose()); });
}

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape("add", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), needs(t, a) || needs(t, b), [ia, ib](Tape& tp, int, const Matrix& g) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape("sub", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), needs(t, a) || needs(t, b), [ia, ib](Tape& tp, int, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ib)) tp.accumulate(ib, -g);
  });
}

Var hadamard(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_same_shape("hadamard", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), needs(t, a) || needs(t, b),
                  [ia, ib](Tape& tp, int, const Matrix& g) {
                    if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
                    if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
                  });
}

Var scale(const Var& a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record(a.value() * s, needs(t, a), [ia, s](Tape& tp, int, const Matrix& g) { tp.accumulate(ia, g * s); });
}

Var divide(const Var& a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record(a.value() / s, needs(t, a), [ia, s](Tape& tp, int, const Matrix& g) { tp.accumulate(ia, g / s); });
}

Var one_minus(const Var& a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record((1.0 - a.value().array()).matrix(), needs(t, a),
                  [ia](Tape& tp, int, const Matrix& g) { tp.accumulate(ia, -g); });
}

Var sigmoid(const Var& a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return graphdialog::sigmoid(x); });
  return t.record(std::move(out), needs(t, a), [ia](Tape& tp, int self, const Matrix& g) {
    const auto y = tp.value(self).array();
    tp.accumulate(ia, (g.array() * y * (1.0 - y)).matrix());
  });
}

Var tanh(const Var& a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.record(a.value().array().tanh().matrix(), needs(t, a), [ia](Tape& tp, int self, const Matrix& g) {
    const auto y = tp.value(self).array();
    tp.accumulate(ia, (g.array() * (1.0 - y * y)).matrix());
  });
}

Var leaky_relu(const Var& a, double negative_slope) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Matrix out = a.value().unaryExpr([negative_slope](double x) { return graphdialog::leaky_relu(x, negative_slope); });
  return t.record(std::move(out), needs(t, a), [ia, negative_slope](Tape& tp, int, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    Matrix d = g;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!(x(i) > 0.0)) d(i) *= negative_slope;
    }
    tp.accumulate(ia, d);
  });
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), needs(t, a), [ia](Tape& tp, int, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    tp.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var dot(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  require_column("dot", a.value());
  require_same_shape("dot", a.value(), b.value());
  const int ia = a.id(), ib = b.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().col(0).dot(b.value().col(0));
  return t.record(std::move(out), needs(t, a) || needs(t, b), [ia, ib](Tape& tp, int, const Matrix& g) {
    if (tp.requires_grad(ia)) tp.accumulate(ia, tp.value(ib) * g(0, 0));
    if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia) * g(0, 0));
  });
}

Var square(const Var& a) { return hadamard(a, a); }

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  Tape& t = tape_of(parts.front());
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  bool grad = false;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    tape_of(parts.front(), p);
    if (p.cols() != cols) throw DimensionError("concat_rows: column counts disagree " + shape_string(p.value()));
    rows += p.rows();
    grad = grad || needs(t, p);
    ids.push_back(p.id());
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return t.record(std::move(out), grad, [ids](Tape& tp, int, const Matrix& g) {
    Eigen::Index r0 = 0;
    for (int id : ids) {
      const Eigen::Index n = tp.value(id).rows();
      if (tp.requires_grad(id)) tp.accumulate(id, g.middleRows(r0, n));
      r0 += n;
    }
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") out of " + shape_string(a.value()));
  }
  const int ia = a.id();
  return t.record(a.value().middleRows(start, count), needs(t, a), [ia, start](Tape& tp, int, const Matrix& g) {
    tp.accumulate_block(ia, start, 0, g);
  });
}

Var column(const Var& a, Eigen::Index j) {
  Tape& t = tape_of(a);
  if (j < 0 || j >= a.cols()) throw DimensionError("column: index " + std::to_string(j) + " out of " + shape_string(a.value()));
  const int ia = a.id();
  return t.record(a.value().col(j), needs(t, a), [ia, j](Tape& tp, int, const Matrix& g) {
    tp.accumulate_block(ia, 0, j, g);
  });
}

Var row_as_column(const Var& table, Eigen::Index i) {
  Tape& t = tape_of(table);
  if (i < 0 || i >= table.rows()) {
    throw DimensionError("row_as_column: index " + std::to_string(i) + " out of " + shape_string(table.value()));
  }
  const int it = table.id();
  return t.record(table.value().row(i).transpose(), needs(t, table), [it, i](Tape& tp, int, const Matrix& g) {
    tp.accumulate_block(it, i, 0, g.transpose());
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  Tape& t = tape_of(table);
  const Matrix& tv = table.value();
  Matrix out(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || ids[k] >= tv.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(ids[k]) + " out of " + shape_string(tv));
    }
    out.row(static_cast<Eigen::Index>(k)) = tv.row(ids[k]);
  }
  const int it = table.id();
  std::vector<int> rows(ids.begin(), ids.end());
  return t.record(std::move(out), needs(t, table), [it, rows](Tape& tp, int, const Matrix& g) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      tp.accumulate_block(it, rows[k], 0, g.row(static_cast<Eigen::Index>(k)));
    }
  });
}

Var add_all(const std::vector<Var>& terms) {
  if (terms.empty()) throw ContractError("add_all: no inputs");
  Tape& t = tape_of(terms.front());
  Matrix out = terms.front().value();
  bool grad = needs(t, terms.front());
  std::vector<int> ids{terms.front().id()};
  for (std::size_t k = 1; k < terms.size(); ++k) {
    tape_of(terms.front(), terms[k]);
    require_same_shape("add_all", out, terms[k].value());
    out += terms[k].value();
    grad = grad || needs(t, terms[k]);
    ids.push_back(terms[k].id());
  }
  return t.record(std::move(out), grad, [ids](Tape& tp, int, const Matrix& g) {
    for (int id : ids) tp.accumulate(id, g);
  });
}

Var weighted_sum(const std::vector<Var>& keys, const Var& weights) {
  if (keys.empty()) throw ContractError("weighted_sum: no keys");
  Tape& t = tape_of(weights);
  require_column("weighted_sum", weights.value());
  if (weights.rows() != static_cast<Eigen::Index>(keys.size())) {
    throw DimensionError("weighted_sum: " + std::to_string(keys.size()) + " keys but weights " +
                         shape_string(weights.value()));
  }
  const Matrix& w = weights.value();
  Matrix out = Matrix::Zero(keys.front().rows(), keys.front().cols());
  bool grad = needs(t, weights);
  std::vector<int> ids;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    tape_of(weights, keys[j]);
    require_same_shape("weighted_sum", out, keys[j].value());
    out += w(static_cast<Eigen::Index>(j), 0) * keys[j].value();
    grad = grad || needs(t, keys[j]);
    ids.push_back(keys[j].id());
  }
  const int iw = weights.id();
  return t.record(std::move(out), grad, [ids, iw](Tape& tp, int, const Matrix& g) {
    const Matrix& wv = tp.value(iw);
    Matrix gw(static_cast<Eigen::Index>(ids.size()), 1);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (tp.requires_grad(ids[j])) tp.accumulate(ids[j], wv(jj, 0) * g);
      gw(jj, 0) = g.cwiseProduct(tp.value(ids[j])).sum();
    }
    tp.accumulate(iw, gw);
  });
}

Var weighted_rows(const Var& weights, const Var& rows) {
  Tape& t = tape_of(weights, rows);
  const Matrix& w = weights.value();
  const Matrix& r = rows.value();
  if (w.cols() != r.rows()) {
    throw DimensionError("weighted_rows: inner dimensions disagree " + shape_string(w) + " * " + shape_string(r));
  }
  Matrix out(w.rows(), r.cols());
  std::vector<double> terms(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) terms[static_cast<std::size_t>(j)] = w(i, j) * r(j, k);
      out(i, k) = ordered_sum(terms);
    }
  }
  const int iw = weights.id(), ir = rows.id();
  return t.record(std::move(out), needs(t, weights) || needs(t, rows), [iw, ir](Tape& tp, int, const Matrix& g) {
    if (tp.requires_grad(iw)) tp.accumulate(iw, g * tp.value(ir).transpose());
    if (tp.requires_grad(ir)) tp.accumulate(ir, tp.value(iw).transpose() * g);
  });
}

Var outer_sum(const Var& s, const Var& t_) {
  Tape& t = tape_of(s, t_);
  require_column("outer_sum", s.value());
  require_column("outer_sum", t_.value());
  const Eigen::Index n = s.rows(), m = t_.rows();
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = s.value()(i, 0) + t_.value()(j, 0);
  }
  const int is = s.id(), it = t_.id();
  return t.record(std::move(out), needs(t, s) || needs(t, t_), [is, it](Tape& tp, int, const Matrix& g) {
    tp.accumulate(is, g.rowwise().sum());
    tp.accumulate(it, g.colwise().sum().transpose());
  });
}

namespace {

// Softmax Jacobian-vector product: p * (g - <p, g>).
Matrix softmax_backward(const Matrix& p, const Matrix& g) {
  const double inner = p.cwiseProduct(g).sum();
  return (p.array() * (g.array() - inner)).matrix();
}

}  // namespace

Var masked_softmax(const Var& logits, std::span<const std::uint8_t> mask) {
  Tape& t = tape_of(logits);
  require_column("masked_softmax", logits.value());
  Vector p = graphdialog::masked_softmax(logits.value().col(0), mask);
  const int il = logits.id();
  return t.record(std::move(p), needs(t, logits), [il](Tape& tp, int self, const Matrix& g) {
    tp.accumulate(il, softmax_backward(tp.value(self), g));
  });
}

Var softmax(const Var& logits) {
  Mask keep(static_cast<std::size_t>(logits.rows()), 1);
  return masked_softmax(logits, keep);
}

Var masked_row_softmax(const Var& logits, std::span<const std::uint8_t> mask) {
  Tape& t = tape_of(logits);
  const Matrix& l = logits.value();
  if (static_cast<Eigen::Index>(mask.size()) != l.size()) {
    throw DimensionError("masked_row_softmax: mask size " + std::to_string(mask.size()) + " for " + shape_string(l));
  }
  Matrix out(l.rows(), l.cols());
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const auto row_mask = mask.subspan(static_cast<std::size_t>(i * l.cols()), static_cast<std::size_t>(l.cols()));
    out.row(i) = graphdialog::masked_softmax(l.row(i).transpose(), row_mask).transpose();
  }
  const int il = logits.id();
  return t.record(std::move(out), needs(t, logits), [il](Tape& tp, int self, const Matrix& g) {
    const Matrix& p = tp.value(self);
    Matrix d(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      d.row(i) = softmax_backward(p.row(i), g.row(i));
    }
    tp.accumulate(il, d);
  });
}

Var softmax_cross_entropy(const Var& logits, Eigen::Index target) {
  Tape& t = tape_of(logits);
  require_column("softmax_cross_entropy", logits.value());
  const Matrix& l = logits.value();
  if (target < 0 || target >= l.rows()) {
    throw DimensionError("softmax_cross_entropy: target " + std::to_string(target) + " out of " + shape_string(l));
  }
  Matrix out(1, 1);
  out(0, 0) = log_sum_exp(l.col(0)) - l(target, 0);
  const int il = logits.id();
  return t.record(std::move(out), needs(t, logits), [il, target](Tape& tp, int, const Matrix& g) {
    Matrix d = graphdialog::softmax(tp.value(il).col(0));
    d(target, 0) -= 1.0;
    tp.accumulate(il, d * g(0, 0));
  });
}

Var apply_dropout(const Var& a, const Matrix& keep_scale) {
  Tape& t = tape_of(a);
  require_same_shape("apply_dropout", a.value(), keep_scale);
  const int ia = a.id();
  return t.record(a.value().cwiseProduct(keep_scale), needs(t, a), [ia, keep_scale](Tape& tp, int, const Matrix& g) {
    tp.accumulate(ia, g.cwiseProduct(keep_scale));
  });
}

}  // namespace graphdialog
