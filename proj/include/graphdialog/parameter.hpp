#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "graphdialog/tensor.hpp"

namespace graphdialog {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix gradient;  // same shape as value

  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), gradient(Matrix::Zero(value.rows(), value.cols())) {}
};

// Named parameters in insertion order. References stay valid for the
// lifetime of the store.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

enum class InitScheme { kUniformRange, kZeros };

// Deterministic initialization: identical (rows, cols, seed, scheme, bound)
// gives bit-identical output on every platform (no std distributions).
Matrix seeded_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, InitScheme scheme,
                   double bound = 0.0);

// Uniform in +-1/sqrt(cols): the bound for a matrix applied to a column vector.
Matrix fan_in_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Stable per-name seed so adding a parameter does not perturb the others.
std::uint64_t derive_seed(std::uint64_t base, const std::string& name);

// Adam with bias correction.
struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(const ParameterStore& store, AdamOptions options);

  // Updates every parameter from its gradient, then zeroes the gradients.
  void step(ParameterStore& store);

  std::uint64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const Matrix& first_moment(const std::string& name) const { return first_.at(name); }
  const Matrix& second_moment(const std::string& name) const { return second_.at(name); }

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::map<std::string, Matrix> first_;
  std::map<std::string, Matrix> second_;
};

}  // namespace graphdialog
