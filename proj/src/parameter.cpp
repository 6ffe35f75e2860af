#include "graphdialog/parameter.hpp"

#include <cmath>

namespace graphdialog {

Parameter& ParameterStore::add(const std::string& name, Matrix value) {
  if (index_.count(name) != 0) throw ContractError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter: " + name);
  return *params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->gradient.setZero();
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Matrix seeded_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, InitScheme scheme, double bound) {
  Matrix m = Matrix::Zero(rows, cols);
  if (scheme == InitScheme::kZeros) return m;
  std::uint64_t state = seed;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;  // [0, 1)
      m(r, c) = bound * (2.0 * u - 1.0);
    }
  }
  return m;
}

Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  return seeded_init(rows, cols, seed, InitScheme::kUniformRange, 1.0 / std::sqrt(static_cast<double>(cols)));
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = base ^ h;
  return splitmix64(state);
}

AdamState::AdamState(const ParameterStore& store, AdamOptions options) : options_(options) {
  for (const auto& p : store) {
    first_.emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    second_.emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamState::step(ParameterStore& store) {
  for (const auto& p : store) {
    if (first_.count(p->name) == 0) throw ContractError("adam: no optimizer state for parameter " + p->name);
    if (p->gradient.rows() != p->value.rows() || p->gradient.cols() != p->value.cols()) {
      throw ContractError("adam: missing gradient for parameter " + p->name);
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (auto& p : store) {
    Matrix& m = first_.at(p->name);
    Matrix& v = second_.at(p->name);
    const Matrix& g = p->gradient;
    m = options_.beta1 * m + (1.0 - options_.beta1) * g;
    v = options_.beta2 * v + (1.0 - options_.beta2) * g.cwiseProduct(g);
    p->value.array() -=
        options_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.epsilon);
    p->gradient.setZero();
  }
}

}  // namespace graphdialog
