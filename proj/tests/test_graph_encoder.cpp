#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include "graphdialog/graph_encoder.hpp"
#include "reference.hpp"
#include "test_support.hpp"

using namespace graphdialog;
using gdtest::random_matrix;

namespace {

struct Cell {
  ParameterStore store;
  EncoderCellParams params;
  Cell(int in, int hidden, std::uint64_t seed, bool bias = false) {
    params = EncoderCellParams::create(store, "cell", in, hidden, bias, seed);
  }
  void zero() {
    for (auto& p : store) p->value.setZero();
  }
};

std::vector<Var> constants(Tape& t, const std::vector<Matrix>& ms) {
  std::vector<Var> out;
  for (const auto& m : ms) out.push_back(t.constant(m));
  return out;
}

}  // namespace

TEST(ResetGates, ZeroParametersGiveHalf) {
  Cell c(3, 2, 1);
  c.zero();
  Tape t;
  BoundCell b(t, c.params);
  std::mt19937_64 rng(1);
  auto gates = reset_gates(b, t.constant(random_matrix(rng, 3, 1)), constants(t, {random_matrix(rng, 2, 1)}));
  EXPECT_EQ(gates[0].value(), Matrix::Constant(2, 1, 0.5));
}

TEST(ResetGates, DuplicatePredecessorsShareGate) {
  Cell c(3, 2, 2);
  Tape t;
  BoundCell b(t, c.params);
  std::mt19937_64 rng(2);
  Var h = t.constant(random_matrix(rng, 2, 1));
  auto gates = reset_gates(b, t.constant(random_matrix(rng, 3, 1)), {h, h});
  EXPECT_EQ(gates[0].value(), gates[1].value());
}

TEST(ResetGates, TwoDimHandEvaluation) {
  Cell c(2, 2, 3);
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(rng, 2, 1), h = random_matrix(rng, 2, 1);
  Tape t;
  BoundCell b(t, c.params);
  auto gates = reset_gates(b, t.constant(x), {t.constant(h)});
  const Matrix& wr = c.params.w_r->value;
  const Matrix& ur = c.params.u_r->value;
  for (int i = 0; i < 2; ++i) {
    const double s = wr(i, 0) * x(0) + wr(i, 1) * x(1) + ur(i, 0) * h(0) + ur(i, 1) * h(1);
    EXPECT_NEAR(gates[0].value()(i), 1.0 / (1.0 + std::exp(-s)), 1e-15);
  }
}

TEST(CandidateState, ClosedGatesDropHistory) {
  Cell c(3, 4, 4);
  std::mt19937_64 rng(4);
  Tape t;
  BoundCell b(t, c.params);
  const Matrix x = random_matrix(rng, 3, 1);
  Var zero_gate = t.zeros(4, 1);
  Var cand = candidate_state(b, t.constant(x), constants(t, {random_matrix(rng, 4, 1)}), {zero_gate});
  const Matrix expected = (c.params.w_n->value * x).array().tanh().matrix();
  EXPECT_LT((cand.value() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CandidateState, EqualTermsAverageToSingle) {
  Cell c(3, 4, 5);
  std::mt19937_64 rng(5);
  Tape t;
  BoundCell b(t, c.params);
  Var x = t.constant(random_matrix(rng, 3, 1));
  Var h = t.constant(random_matrix(rng, 4, 1));
  auto g1 = reset_gates(b, x, {h});
  auto g2 = reset_gates(b, x, {h, h});
  const Matrix one = candidate_state(b, x, {h}, g1).value();
  const Matrix two = candidate_state(b, x, {h, h}, g2).value();
  EXPECT_LT((one - two).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AttentionPool, ZeroScorerGivesUniformWeights) {
  Cell c(3, 4, 6);
  c.params.v->value.setZero();
  std::mt19937_64 rng(6);
  Tape t;
  BoundCell b(t, c.params);
  const Matrix h = random_matrix(rng, 4, 1), cand = random_matrix(rng, 4, 1);
  Mask mask{1, 0, 0};
  auto r = attention_pool(b, t.constant(random_matrix(rng, 3, 1)), {t.constant(h), t.zeros(4, 1), t.zeros(4, 1)},
                          t.constant(cand), mask);
  const Matrix expected = 0.5 * (c.params.u_z->value * h + cand);
  EXPECT_LT((r.hidden.value() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.alpha.value()(1), 0.0);
  EXPECT_EQ(r.alpha.value()(2), 0.0);
}

TEST(AttentionPool, OnlyCandidateUnmasked) {
  Cell c(3, 4, 7);
  std::mt19937_64 rng(7);
  Tape t;
  BoundCell b(t, c.params);
  const Matrix cand = random_matrix(rng, 4, 1);
  Mask mask{0, 0};
  auto r = attention_pool(b, t.constant(random_matrix(rng, 3, 1)), {t.zeros(4, 1), t.zeros(4, 1)}, t.constant(cand),
                          mask);
  EXPECT_EQ(r.alpha.value()(2), 1.0);
  EXPECT_EQ(r.hidden.value(), cand);
}

TEST(CellStep, MatchesDirectEvaluation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Cell c(5, 6, 100 + trial);
    const Vector x = random_matrix(rng, 5, 1);
    std::vector<Vector> preds;
    std::vector<Matrix> states;
    for (int k = 0; k < 3; ++k) {
      preds.push_back(random_matrix(rng, 6, 1));
      states.push_back(preds.back());
    }
    Tape t;
    BoundCell b(t, c.params);
    auto out = cell_step(b, t.constant(x), {0, 1, 2, PredecessorTable::kPad}, {1, 1, 1, 0}, constants(t, states));
    const auto ref = gdref::cell_reference(gdref::CellWeights(c.params), x, preds);
    EXPECT_LT((out.hidden.value().col(0) - ref.hidden).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(out.alpha.value()(0), ref.alpha(0), 1e-12);
    EXPECT_EQ(out.alpha.value()(3), 0.0);
    EXPECT_NEAR(out.alpha.value()(4), ref.alpha(3), 1e-12);
  }
}

TEST(CellStep, OutputInConvexHullOfKeys) {
  std::mt19937_64 rng(9);
  Cell c(4, 5, 9);
  Tape t;
  BoundCell b(t, c.params);
  std::vector<Matrix> states{random_matrix(rng, 5, 1), random_matrix(rng, 5, 1)};
  Var x = t.constant(random_matrix(rng, 4, 1));
  auto out = cell_step(b, x, {0, 1}, {1, 1}, constants(t, states));
  auto gates = reset_gates(b, x, constants(t, states));
  const Matrix cand = candidate_state(b, x, constants(t, states), gates).value();
  for (Eigen::Index i = 0; i < 5; ++i) {
    std::vector<double> comps{(c.params.u_z->value * states[0])(i), (c.params.u_z->value * states[1])(i), cand(i)};
    EXPECT_GE(out.hidden.value()(i), *std::min_element(comps.begin(), comps.end()) - 1e-15);
    EXPECT_LE(out.hidden.value()(i), *std::max_element(comps.begin(), comps.end()) + 1e-15);
  }
}

TEST(CellStep, PadStateGradientIsExactlyZero) {
  std::mt19937_64 rng(10);
  Cell c(3, 4, 10);
  ParameterStore extra;
  Parameter& real = extra.add("real", random_matrix(rng, 4, 1));
  Parameter& pad = extra.add("pad", random_matrix(rng, 4, 1));
  Tape t;
  BoundCell b(t, c.params);
  auto out = cell_step(b, t.constant(random_matrix(rng, 3, 1)), {0, 1}, {1, 0}, {t.parameter(real), t.parameter(pad)});
  t.backward(sum(out.hidden));
  EXPECT_EQ(pad.gradient, Matrix::Zero(4, 1));
  EXPECT_NE(real.gradient, Matrix::Zero(4, 1));
}

TEST(EncodeDirection, SingleTokenUsesVirtualZeroState) {
  Cell c(3, 4, 11);
  std::mt19937_64 rng(11);
  const Matrix x = random_matrix(rng, 3, 1);
  const auto g = build_graph(TokenSeq::from_tokens({"a"}), {});
  const auto [fwd, bwd] = split_directional(g);
  Tape t;
  BoundCell b(t, c.params);
  auto r = encode_direction(b, pad_predecessors(fwd, 2), Direction::kForward, {t.constant(x)});
  const auto ref = gdref::cell_reference(gdref::CellWeights(c.params), x, {Vector::Zero(4)});
  EXPECT_LT((r.final_state.value().col(0) - ref.hidden).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EncodeDirection, ChainMatchesReferenceBitForBit) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Cell c(4, 3, 200 + trial);
    const int n = 2 + trial;
    std::vector<Matrix> xs;
    for (int i = 0; i < n; ++i) xs.push_back(random_matrix(rng, 4, 1));
    const auto g = build_graph(TokenSeq::from_tokens(std::vector<std::string>(static_cast<std::size_t>(n), "w")), {});
    const auto [fwd, bwd] = split_directional(g);
    Tape t;
    BoundCell b(t, c.params);
    auto inputs = constants(t, xs);
    const Matrix f = encode_direction(b, pad_predecessors(fwd, 3), Direction::kForward, inputs).final_state.value();
    const Matrix bk = encode_direction(b, pad_predecessors(bwd, 3), Direction::kBackward, inputs).final_state.value();
    const gdref::CellWeights w(c.params);
    const Matrix rf = gdref::chain_reference(w, xs, true);
    const Matrix rb = gdref::chain_reference(w, xs, false);
    EXPECT_EQ(0, std::memcmp(f.data(), rf.data(), sizeof(double) * 3));
    EXPECT_EQ(0, std::memcmp(bk.data(), rb.data(), sizeof(double) * 3));
  }
}

TEST(EncodeDirection, PermutationAndPaddingInvariance) {
  std::mt19937_64 rng(13);
  Cell c(4, 5, 13);
  std::vector<Matrix> states;
  for (int i = 0; i < 4; ++i) states.push_back(random_matrix(rng, 5, 1));
  const Matrix x = random_matrix(rng, 4, 1);
  Tape t;
  BoundCell b(t, c.params);
  auto vs = constants(t, states);
  Var vx = t.constant(x);
  const Matrix base = cell_step(b, vx, {0, 1, 2, 3}, {1, 1, 1, 1}, vs).hidden.value();
  const Matrix perm = cell_step(b, vx, {2, 0, 3, 1}, {1, 1, 1, 1}, vs).hidden.value();
  const Matrix padded = cell_step(b, vx, {3, -2, 1, -2, 0, 2, -2}, {1, 0, 1, 0, 1, 1, 0}, vs).hidden.value();
  EXPECT_EQ(base, perm);
  EXPECT_EQ(base, padded);
}

TEST(EncodeDirection, IdenticalInputsIdenticalOutputs) {
  Cell c(3, 3, 14);
  std::mt19937_64 rng(14);
  std::vector<Matrix> xs{random_matrix(rng, 3, 1), random_matrix(rng, 3, 1), random_matrix(rng, 3, 1)};
  std::vector<DepEdge> deps{{2, 0, "x"}};
  const auto g = build_graph(TokenSeq::from_tokens({"a", "b", "c"}), deps);
  const auto [fwd, bwd] = split_directional(g);
  Tape t1, t2;
  BoundCell b1(t1, c.params), b2(t2, c.params);
  EXPECT_EQ(encode_direction(b1, pad_predecessors(fwd, 2), Direction::kForward, constants(t1, xs)).final_state.value(),
            encode_direction(b2, pad_predecessors(fwd, 2), Direction::kForward, constants(t2, xs)).final_state.value());
}

TEST(EncodeDirection, RejectsPredecessorsOutOfOrder) {
  Cell c(3, 3, 15);
  PredecessorTable table;
  table.positions = 2;
  table.k_max = 1;
  table.slots = {1, 0};
  table.mask = {1, 1};
  Tape t;
  BoundCell b(t, c.params);
  EXPECT_THROW(encode_direction(b, table, Direction::kForward, {t.zeros(3, 1), t.zeros(3, 1)}), ContractError);
}

TEST(EncodeBidirectional, ShapeAndHalves) {
  ParameterStore s;
  auto f = EncoderCellParams::create(s, "f", 3, 2, false, 1);
  auto bk = EncoderCellParams::create(s, "b", 3, 2, false, 2);
  std::mt19937_64 rng(16);
  const auto g = build_graph(TokenSeq::from_tokens({"a", "b", "c"}), {});
  const auto [fwd, bwd] = split_directional(g);
  Tape t;
  BoundCell bf(t, f), bb(t, bk);
  std::vector<Var> xs{t.constant(random_matrix(rng, 3, 1)), t.constant(random_matrix(rng, 3, 1)),
                      t.constant(random_matrix(rng, 3, 1))};
  const auto ft = pad_predecessors(fwd, 2), btab = pad_predecessors(bwd, 2);
  Var h = encode_bidirectional(bf, bb, ft, btab, xs);
  ASSERT_EQ(h.rows(), 4);
  EXPECT_EQ(h.value().topRows(2), encode_direction(bf, ft, Direction::kForward, xs).final_state.value());
}

TEST(EncodeBidirectional, PalindromeWithTiedCellsIsSymmetric) {
  ParameterStore s;
  auto cell = EncoderCellParams::create(s, "c", 3, 4, false, 17);
  std::mt19937_64 rng(17);
  const Matrix a = random_matrix(rng, 3, 1), b = random_matrix(rng, 3, 1), m = random_matrix(rng, 3, 1);
  std::vector<DepEdge> deps{{2, 0, "x"}, {2, 4, "x"}};
  const auto g = build_graph(TokenSeq::from_tokens({"a", "b", "m", "b", "a"}), deps);
  const auto [fwd, bwd] = split_directional(g);
  Tape t;
  BoundCell bc(t, cell);
  Var h = encode_bidirectional(bc, bc, pad_predecessors(fwd, 3), pad_predecessors(bwd, 3),
                               constants(t, {a, b, m, b, a}));
  EXPECT_EQ(h.value().topRows(4), h.value().bottomRows(4));
}

TEST(EncodeBidirectional, ZeroEverythingGivesZero) {
  ParameterStore s;
  auto cell = EncoderCellParams::create(s, "c", 3, 2, false, 18);
  for (auto& p : s) p->value.setZero();
  const auto g = build_graph(TokenSeq::from_tokens({"a", "b"}), {});
  const auto [fwd, bwd] = split_directional(g);
  Tape t;
  BoundCell bc(t, cell);
  Var h = encode_bidirectional(bc, bc, pad_predecessors(fwd, 2), pad_predecessors(bwd, 2), {t.zeros(3, 1), t.zeros(3, 1)});
  EXPECT_EQ(h.value(), Matrix::Zero(4, 1));
}

TEST(EncoderCell, GradientsMatchFiniteDifferences) {
  ParameterStore s;
  auto cell = EncoderCellParams::create(s, "c", 3, 4, true, 19);
  std::mt19937_64 rng(19);
  std::vector<Matrix> xs{random_matrix(rng, 3, 1), random_matrix(rng, 3, 1), random_matrix(rng, 3, 1),
                         random_matrix(rng, 3, 1)};
  std::vector<DepEdge> deps{{3, 0, "x"}, {1, 3, "y"}};
  const auto g = build_graph(TokenSeq::from_tokens({"a", "b", "c", "d"}), deps);
  const auto [fwd, bwd] = split_directional(g);
  const auto ft = pad_predecessors(fwd, 3), bt = pad_predecessors(bwd, 3);
  auto check = gdtest::check_gradients(s, [&](Tape& t) {
    BoundCell bc(t, cell);
    return sum(encode_bidirectional(bc, bc, ft, bt, constants(t, xs)));
  });
  EXPECT_LT(check.max_rel_error, 1e-6) << check.worst;
}
