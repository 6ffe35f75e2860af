#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "graphdialog/error.hpp"

namespace graphdialog {

// Dense storage for every quantity in the model. Vectors are column
// matrices; all arithmetic is 64-bit.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// Mask entries: nonzero keeps the slot, zero drops it.
using Mask = std::vector<std::uint8_t>;

template <typename Derived>
std::string shape_string(const Eigen::MatrixBase<Derived>& m) {
  std::ostringstream os;
  os << "[" << m.rows() << "x" << m.cols() << "]";
  return os.str();
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar leaky_relu(Scalar x, Scalar negative_slope) {
  return x > Scalar(0) ? x : negative_slope * x;
}

// Sum that does not depend on the order of its terms: ascending sort, then
// left-to-right accumulation.
template <typename Scalar>
Scalar ordered_sum(std::vector<Scalar> terms) {
  std::sort(terms.begin(), terms.end());
  Scalar total = 0;
  for (Scalar t : terms) total += t;
  return total;
}

// Softmax over the kept entries of a vector. Dropped entries have their
// logit replaced by -inf, so they come out as exact zeros.
template <typename Derived>
VectorX<typename Derived::Scalar> masked_softmax(const Eigen::MatrixBase<Derived>& logits,
                                                 std::span<const std::uint8_t> mask) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = logits.size();
  if (static_cast<Eigen::Index>(mask.size()) != n) {
    throw DimensionError("masked_softmax: mask length " + std::to_string(mask.size()) +
                         " does not match logits length " + std::to_string(n));
  }
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  VectorX<Scalar> masked(n);
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    masked[i] = mask[i] ? logits(i) : kNegInf;
    any = any || mask[i];
  }
  if (!any) throw InvalidMaskError("masked_softmax: every entry is masked");
  Scalar max_logit = kNegInf;
  for (Eigen::Index i = 0; i < n; ++i) max_logit = std::max(max_logit, masked[i]);
  VectorX<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = std::exp(masked[i] - max_logit);
  const Scalar total = ordered_sum(std::vector<Scalar>(out.data(), out.data() + n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] /= total;
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  Mask keep(static_cast<std::size_t>(logits.size()), 1);
  return masked_softmax(logits, keep);
}

// log(sum(exp(logits))) without overflow.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = logits.maxCoeff();
  Scalar total = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) total += std::exp(logits(i) - m);
  return m + std::log(total);
}

// Lowest index among the maxima.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

}  // namespace graphdialog
