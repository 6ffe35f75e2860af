#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphdialog/autodiff.hpp"
#include "graphdialog/dialogue_graph.hpp"
#include "graphdialog/parameter.hpp"

namespace graphdialog {

// Weights of the graph recurrent cell. W_* act on the input embedding, U_*
// on predecessor states, v scores attention keys.
struct EncoderCellParams {
  Parameter* w_r = nullptr;
  Parameter* u_r = nullptr;
  Parameter* w_n = nullptr;
  Parameter* u_n = nullptr;
  Parameter* w_z = nullptr;
  Parameter* u_z = nullptr;
  Parameter* v = nullptr;
  Parameter* b_r = nullptr;  // optional gate biases
  Parameter* b_n = nullptr;

  int input_dim() const { return static_cast<int>(w_r->value.cols()); }
  int hidden_dim() const { return static_cast<int>(w_r->value.rows()); }

  static EncoderCellParams create(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                                  bool with_bias, std::uint64_t seed);
  // Looks up parameters previously created under `prefix`.
  static EncoderCellParams find(ParameterStore& store, const std::string& prefix);
};

// Cell parameters as tape leaves.
struct BoundCell {
  Var w_r, u_r, w_n, u_n, w_z, u_z, v, b_r, b_n;
  bool has_bias = false;

  BoundCell(Tape& tape, const EncoderCellParams& p);
};

// r_j = sigmoid(W_r x + U_r h_j) for each predecessor state.
std::vector<Var> reset_gates(const BoundCell& cell, const Var& x, const std::vector<Var>& predecessors);

// tanh(W_n x + mean_j r_j * (U_n h_j)).
Var candidate_state(const BoundCell& cell, const Var& x, const std::vector<Var>& predecessors,
                    const std::vector<Var>& gates);

struct PoolResult {
  Var hidden;
  Var alpha;  // k_max + 1 weights; the last entry belongs to the candidate
};

// Masked attention over {U_z h_j} plus the untransformed candidate, queried
// by W_z x. `slots` has one entry per predecessor slot (pads included).
PoolResult attention_pool(const BoundCell& cell, const Var& x, const std::vector<Var>& slots, const Var& candidate,
                          std::span<const std::uint8_t> mask);

struct CellOutput {
  Var hidden;
  Var alpha;
};

// One cell step. Slots are canonicalised (real by position, then pads)
// before evaluation, so slot order never affects the result.
CellOutput cell_step(const BoundCell& cell, const Var& x, std::vector<int> slot_positions, Mask mask,
                     const std::vector<Var>& states);

struct DirectionResult {
  std::vector<Var> states;  // indexed by position
  std::vector<Var> alphas;  // indexed by position
  Var final_state;          // last visited position
};

// Runs the cell over positions in ascending (forward) or descending
// (backward) order. `inputs` holds one embedding column per position.
DirectionResult encode_direction(const BoundCell& cell, const PredecessorTable& table, Direction direction,
                                 const std::vector<Var>& inputs);

// [forward final state ; backward final state].
Var encode_bidirectional(const BoundCell& forward_cell, const BoundCell& backward_cell,
                         const PredecessorTable& forward_table, const PredecessorTable& backward_table,
                         const std::vector<Var>& inputs);

}  // namespace graphdialog
