#include "graphdialog/graph_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graphdialog {

EncoderCellParams EncoderCellParams::create(ParameterStore& store, const std::string& prefix, int input_dim,
                                            int hidden_dim, bool with_bias, std::uint64_t seed) {
  auto make = [&](const std::string& name, int rows, int cols) -> Parameter* {
    const std::string full = prefix + "." + name;
    return &store.add(full, fan_in_uniform(rows, cols, derive_seed(seed, full)));
  };
  EncoderCellParams p;
  p.w_r = make("W_r", hidden_dim, input_dim);
  p.u_r = make("U_r", hidden_dim, hidden_dim);
  p.w_n = make("W_n", hidden_dim, input_dim);
  p.u_n = make("U_n", hidden_dim, hidden_dim);
  p.w_z = make("W_z", hidden_dim, input_dim);
  p.u_z = make("U_z", hidden_dim, hidden_dim);
  // v enters through a d-dimensional dot product.
  p.v = &store.add(prefix + ".v", seeded_init(hidden_dim, 1, derive_seed(seed, prefix + ".v"),
                                               InitScheme::kUniformRange, 1.0 / std::sqrt(double(hidden_dim))));
  if (with_bias) {
    p.b_r = &store.add(prefix + ".b_r", Matrix::Zero(hidden_dim, 1));
    p.b_n = &store.add(prefix + ".b_n", Matrix::Zero(hidden_dim, 1));
  }
  return p;
}

EncoderCellParams EncoderCellParams::find(ParameterStore& store, const std::string& prefix) {
  EncoderCellParams p;
  p.w_r = &store.get(prefix + ".W_r");
  p.u_r = &store.get(prefix + ".U_r");
  p.w_n = &store.get(prefix + ".W_n");
  p.u_n = &store.get(prefix + ".U_n");
  p.w_z = &store.get(prefix + ".W_z");
  p.u_z = &store.get(prefix + ".U_z");
  p.v = &store.get(prefix + ".v");
  if (store.contains(prefix + ".b_r")) {
    p.b_r = &store.get(prefix + ".b_r");
    p.b_n = &store.get(prefix + ".b_n");
  }
  return p;
}

BoundCell::BoundCell(Tape& tape, const EncoderCellParams& p)
    : w_r(tape.parameter(*p.w_r)),
      u_r(tape.parameter(*p.u_r)),
      w_n(tape.parameter(*p.w_n)),
      u_n(tape.parameter(*p.u_n)),
      w_z(tape.parameter(*p.w_z)),
      u_z(tape.parameter(*p.u_z)),
      v(tape.parameter(*p.v)),
      has_bias(p.b_r != nullptr) {
  if (has_bias) {
    b_r = tape.parameter(*p.b_r);
    b_n = tape.parameter(*p.b_n);
  }
}

namespace {

Var reset_gate_from(const BoundCell& cell, const Var& wx, const Var& h) {
  Var pre = wx + matmul(cell.u_r, h);
  return sigmoid(pre);
}

Var candidate_from(const BoundCell& cell, const Var& x, const std::vector<Var>& predecessors,
                   const std::vector<Var>& gates) {
  if (predecessors.empty() || predecessors.size() != gates.size()) {
    throw ContractError("candidate_state: need one gate per predecessor (k >= 1)");
  }
  std::vector<Var> terms;
  terms.reserve(predecessors.size());
  for (std::size_t j = 0; j < predecessors.size(); ++j) {
    terms.push_back(hadamard(gates[j], matmul(cell.u_n, predecessors[j])));
  }
  Var mean = divide(add_all(terms), static_cast<double>(terms.size()));
  Var pre = matmul(cell.w_n, x) + mean;
  if (cell.has_bias) pre = pre + cell.b_n;
  return tanh(pre);
}

}  // namespace

std::vector<Var> reset_gates(const BoundCell& cell, const Var& x, const std::vector<Var>& predecessors) {
  if (predecessors.empty()) throw ContractError("reset_gates: need at least one predecessor");
  Var wx = matmul(cell.w_r, x);
  if (cell.has_bias) wx = wx + cell.b_r;
  std::vector<Var> gates;
  gates.reserve(predecessors.size());
  for (const Var& h : predecessors) gates.push_back(reset_gate_from(cell, wx, h));
  return gates;
}

Var candidate_state(const BoundCell& cell, const Var& x, const std::vector<Var>& predecessors,
                    const std::vector<Var>& gates) {
  return candidate_from(cell, x, predecessors, gates);
}

PoolResult attention_pool(const BoundCell& cell, const Var& x, const std::vector<Var>& slots, const Var& candidate,
                          std::span<const std::uint8_t> mask) {
  if (mask.size() != slots.size()) {
    throw DimensionError("attention_pool: " + std::to_string(slots.size()) + " slots but mask of " +
                         std::to_string(mask.size()));
  }
  Tape& tape = *x.tape();
  const Eigen::Index d = candidate.rows();
  Var query = matmul(cell.w_z, x);
  std::vector<Var> keys;
  std::vector<Var> logits;
  keys.reserve(slots.size() + 1);
  logits.reserve(slots.size() + 1);
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (mask[j]) {
      Var key = matmul(cell.u_z, slots[j]);
      keys.push_back(key);
      logits.push_back(dot(cell.v, tanh(query + key)));
    } else {
      // Pad keys never receive weight; their logit is replaced by -inf.
      keys.push_back(tape.zeros(d, 1));
      logits.push_back(tape.zeros(1, 1));
    }
  }
  keys.push_back(candidate);
  logits.push_back(dot(cell.v, tanh(query + candidate)));
  Mask full(mask.begin(), mask.end());
  full.push_back(1);
  Var alpha = masked_softmax(concat_rows(logits), full);
  return {weighted_sum(keys, alpha), alpha};
}

CellOutput cell_step(const BoundCell& cell, const Var& x, std::vector<int> slot_positions, Mask mask,
                     const std::vector<Var>& states) {
  const std::size_t width = slot_positions.size();
  if (mask.size() != width) throw DimensionError("cell_step: slot/mask size mismatch");
  std::vector<std::size_t> order(width);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mask[a] != mask[b]) return mask[a] > mask[b];
    return mask[a] && slot_positions[a] < slot_positions[b];
  });
  Tape& tape = *x.tape();
  const Eigen::Index d = cell.w_r.rows();
  std::vector<Var> slots;
  std::vector<Var> real;
  Mask sorted_mask;
  for (std::size_t idx : order) {
    sorted_mask.push_back(mask[idx]);
    if (!mask[idx]) {
      slots.push_back(tape.zeros(d, 1));
      continue;
    }
    const int pos = slot_positions[idx];
    Var h = pos == PredecessorTable::kVirtual ? tape.zeros(d, 1) : states.at(static_cast<std::size_t>(pos));
    if (!h.valid()) throw ContractError("cell_step: predecessor state at " + std::to_string(pos) + " not computed yet");
    slots.push_back(h);
    real.push_back(h);
  }
  if (real.empty()) throw InvalidMaskError("cell_step: no real predecessor slot");
  std::vector<Var> gates = reset_gates(cell, x, real);
  Var candidate = candidate_state(cell, x, real, gates);
  PoolResult pooled = attention_pool(cell, x, slots, candidate, sorted_mask);
  return {pooled.hidden, pooled.alpha};
}

DirectionResult encode_direction(const BoundCell& cell, const PredecessorTable& table, Direction direction,
                                 const std::vector<Var>& inputs) {
  const int n = table.positions;
  if (static_cast<int>(inputs.size()) != n) {
    throw DimensionError("encode_direction: " + std::to_string(inputs.size()) + " inputs for " + std::to_string(n) +
                         " positions");
  }
  if (n == 0) throw ContractError("encode_direction: empty sequence");
  DirectionResult out;
  out.states.resize(static_cast<std::size_t>(n));
  out.alphas.resize(static_cast<std::size_t>(n));
  const bool forward = direction == Direction::kForward;
  for (int step = 0; step < n; ++step) {
    const int t = forward ? step : n - 1 - step;
    std::vector<int> positions(table.slots.begin() + t * table.k_max, table.slots.begin() + (t + 1) * table.k_max);
    Mask mask(table.mask.begin() + t * table.k_max, table.mask.begin() + (t + 1) * table.k_max);
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const int p = positions[j];
      if (mask[j] && p != PredecessorTable::kVirtual && (forward ? p >= t : p <= t)) {
        throw ContractError("encode_direction: predecessor " + std::to_string(p) + " of " + std::to_string(t) +
                            " violates the traversal order");
      }
    }
    CellOutput o = cell_step(cell, inputs[static_cast<std::size_t>(t)], std::move(positions), std::move(mask), out.states);
    out.states[static_cast<std::size_t>(t)] = o.hidden;
    out.alphas[static_cast<std::size_t>(t)] = o.alpha;
    out.final_state = o.hidden;
  }
  return out;
}

Var encode_bidirectional(const BoundCell& forward_cell, const BoundCell& backward_cell,
                         const PredecessorTable& forward_table, const PredecessorTable& backward_table,
                         const std::vector<Var>& inputs) {
  DirectionResult f = encode_direction(forward_cell, forward_table, Direction::kForward, inputs);
  DirectionResult b = encode_direction(backward_cell, backward_table, Direction::kBackward, inputs);
  return concat_rows({f.final_state, b.final_state});
}

}  // namespace graphdialog
