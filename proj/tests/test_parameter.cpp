#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "graphdialog/parameter.hpp"

using namespace graphdialog;

TEST(SeededInit, ZerosScheme) {
  EXPECT_EQ(seeded_init(3, 4, 99, InitScheme::kZeros), Matrix::Zero(3, 4));
}

TEST(SeededInit, SameSeedIsBitIdentical) {
  const Matrix a = seeded_init(5, 7, 42, InitScheme::kUniformRange, 0.3);
  const Matrix b = seeded_init(5, 7, 42, InitScheme::kUniformRange, 0.3);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())));
  EXPECT_NE(a, seeded_init(5, 7, 43, InitScheme::kUniformRange, 0.3));
}

TEST(SeededInit, UniformStaysInRange) {
  const double bound = 0.25;
  const Matrix m = seeded_init(40, 50, 3, InitScheme::kUniformRange, bound);
  EXPECT_LE(m.maxCoeff(), bound);
  EXPECT_GE(m.minCoeff(), -bound);
  EXPECT_GT(m.maxCoeff(), 0.2);
  EXPECT_LT(m.minCoeff(), -0.2);
}

TEST(SeededInit, FanInBound) {
  const Matrix m = fan_in_uniform(10, 16, 1);
  EXPECT_LE(m.cwiseAbs().maxCoeff(), 0.25);
}

TEST(DeriveSeed, DependsOnName) {
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
}

TEST(ParameterStore, DuplicateNameRejected) {
  ParameterStore s;
  s.add("w", Matrix::Zero(1, 1));
  EXPECT_THROW(s.add("w", Matrix::Zero(1, 1)), ContractError);
  EXPECT_EQ(s.size(), 1U);
  EXPECT_EQ(&s.get("w"), &s[0]);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterStore s;
  Parameter& p = s.add("p", Matrix::Constant(2, 2, 0.5));
  AdamState adam(s, {});
  adam.step(s);
  EXPECT_EQ(p.value, Matrix::Constant(2, 2, 0.5));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore s;
  Parameter& p = s.add("p", Matrix::Constant(1, 1, 1.0));
  AdamOptions o;
  o.learning_rate = 0.1;
  AdamState adam(s, o);
  p.gradient(0, 0) = 1.0;
  adam.step(s);
  const double expected = 1.0 - 0.1 * 1.0 / (std::sqrt(1.0) + o.epsilon);
  EXPECT_NEAR(p.value(0, 0), expected, 1e-15);
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-8);
  EXPECT_EQ(p.gradient(0, 0), 0.0);
  EXPECT_EQ(adam.step_count(), 1U);
}

TEST(Adam, SecondStepMatchesHandEvaluation) {
  ParameterStore s;
  Parameter& p = s.add("p", Matrix::Constant(1, 1, 0.0));
  AdamOptions o;
  AdamState adam(s, o);
  p.gradient(0, 0) = 2.0;
  adam.step(s);
  p.gradient(0, 0) = -1.0;
  adam.step(s);
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? 2.0 : -1.0;
    m = o.beta1 * m + (1 - o.beta1) * g;
    v = o.beta2 * v + (1 - o.beta2) * g * g;
    const double mh = m / (1 - std::pow(o.beta1, t));
    const double vh = v / (1 - std::pow(o.beta2, t));
    x -= o.learning_rate * mh / (std::sqrt(vh) + o.epsilon);
  }
  EXPECT_NEAR(p.value(0, 0), x, 1e-15);
}

TEST(Adam, IdenticalParametersStayIdentical) {
  ParameterStore s;
  Parameter& a = s.add("a", Matrix::Constant(2, 1, 0.3));
  Parameter& b = s.add("b", Matrix::Constant(2, 1, 0.3));
  AdamState adam(s, {});
  for (int i = 0; i < 3; ++i) {
    a.gradient << 0.1 * i, -0.2;
    b.gradient = a.gradient;
    adam.step(s);
  }
  EXPECT_EQ(a.value, b.value);
}

TEST(Adam, MissingGradientIsContractError) {
  ParameterStore s;
  Parameter& p = s.add("p", Matrix::Zero(2, 2));
  AdamState adam(s, {});
  p.gradient.resize(0, 0);
  EXPECT_THROW(adam.step(s), ContractError);
  ParameterStore other;
  other.add("q", Matrix::Zero(1, 1));
  EXPECT_THROW(adam.step(other), ContractError);
}
