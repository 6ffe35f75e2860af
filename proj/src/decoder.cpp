#include "graphdialog/decoder.hpp"

#include <cmath>

namespace graphdialog {

DecoderParams DecoderParams::create(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                                    int vocab_size, int query_dim, std::uint64_t seed) {
  auto mat = [&](const std::string& name, int rows, int cols) {
    const std::string full = prefix + "." + name;
    return &store.add(full, fan_in_uniform(rows, cols, derive_seed(seed, full)));
  };
  auto bias = [&](const std::string& name, int rows) { return &store.add(prefix + "." + name, Matrix::Zero(rows, 1)); };
  DecoderParams p;
  p.w_z = mat("W_z", hidden_dim, input_dim);
  p.u_z = mat("U_z", hidden_dim, hidden_dim);
  p.b_z = bias("b_z", hidden_dim);
  p.w_r = mat("W_r", hidden_dim, input_dim);
  p.u_r = mat("U_r", hidden_dim, hidden_dim);
  p.b_r = bias("b_r", hidden_dim);
  p.w_n = mat("W_n", hidden_dim, input_dim);
  p.u_n = mat("U_n", hidden_dim, hidden_dim);
  p.b_n = bias("b_n", hidden_dim);
  p.w_o = mat("W_o", vocab_size, hidden_dim);
  p.w_q = mat("W_q", query_dim, hidden_dim);
  return p;
}

DecoderParams DecoderParams::find(ParameterStore& store, const std::string& prefix) {
  DecoderParams p;
  p.w_z = &store.get(prefix + ".W_z");
  p.u_z = &store.get(prefix + ".U_z");
  p.b_z = &store.get(prefix + ".b_z");
  p.w_r = &store.get(prefix + ".W_r");
  p.u_r = &store.get(prefix + ".U_r");
  p.b_r = &store.get(prefix + ".b_r");
  p.w_n = &store.get(prefix + ".W_n");
  p.u_n = &store.get(prefix + ".U_n");
  p.b_n = &store.get(prefix + ".b_n");
  p.w_o = &store.get(prefix + ".W_o");
  p.w_q = &store.get(prefix + ".W_q");
  return p;
}

BoundDecoder::BoundDecoder(Tape& tape, const DecoderParams& p)
    : w_z(tape.parameter(*p.w_z)),
      u_z(tape.parameter(*p.u_z)),
      b_z(tape.parameter(*p.b_z)),
      w_r(tape.parameter(*p.w_r)),
      u_r(tape.parameter(*p.u_r)),
      b_r(tape.parameter(*p.b_r)),
      w_n(tape.parameter(*p.w_n)),
      u_n(tape.parameter(*p.u_n)),
      b_n(tape.parameter(*p.b_n)),
      w_o(tape.parameter(*p.w_o)),
      w_q(tape.parameter(*p.w_q)) {}

Var init_hidden(const Var& encoder_state, const Var& kg_output) { return concat_rows({encoder_state, kg_output}); }

Var gru_step(const BoundDecoder& dec, const Var& input, const Var& hidden) {
  Var z = sigmoid(matmul(dec.w_z, input) + matmul(dec.u_z, hidden) + dec.b_z);
  Var r = sigmoid(matmul(dec.w_r, input) + matmul(dec.u_r, hidden) + dec.b_r);
  Var n = tanh(matmul(dec.w_n, input) + matmul(dec.u_n, hadamard(r, hidden)) + dec.b_n);
  return hadamard(one_minus(z), hidden) + hadamard(z, n);
}

Var vocab_logits(const BoundDecoder& dec, const Var& hidden) { return matmul(dec.w_o, hidden); }

Var vocab_dist(const BoundDecoder& dec, const Var& hidden) { return softmax(vocab_logits(dec, hidden)); }

std::optional<GraphDist> graph_dist(const BoundDecoder& dec, const Var& hidden, const std::optional<KgMemory>& memory) {
  if (!memory) return std::nullopt;
  MultiHopResult hop = multi_hop(matmul(dec.w_q, hidden), *memory);
  return GraphDist{hop.last_logits, hop.last_p, std::move(hop.trace)};
}

Emission copy_or_generate(const Vector& p_vocab, const std::optional<Vector>& p_graph, const Vocabulary& vocab,
                          const KnowledgeGraph& graph) {
  Emission e;
  e.sketch_id = static_cast<int>(argmax(p_vocab));
  e.token = vocab.word(e.sketch_id);
  if (!vocab.is_tag(e.sketch_id)) return e;
  if (!p_graph || p_graph->size() == 0 || graph.empty()) {
    e.copy_failure = true;
    return e;
  }
  e.copied_node = static_cast<int>(argmax(*p_graph));
  e.token = graph.nodes.at(static_cast<std::size_t>(e.copied_node)).token;
  return e;
}

Var joint_loss(const std::vector<Var>& vocab_logits, const std::vector<std::optional<Var>>& graph_logits,
               const std::vector<StepTarget>& targets) {
  if (vocab_logits.size() != targets.size() || graph_logits.size() != targets.size()) {
    throw DimensionError("joint_loss: logits and targets are not aligned");
  }
  std::vector<Var> word_terms, node_terms;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const StepTarget& tgt = targets[t];
    if (!tgt.real) continue;
    if (tgt.word < 0 || tgt.word >= vocab_logits[t].rows()) {
      throw DataError("joint_loss: word id " + std::to_string(tgt.word) + " out of range at timestep " +
                      std::to_string(t));
    }
    word_terms.push_back(softmax_cross_entropy(vocab_logits[t], tgt.word));
    if (tgt.node == kNoLabel) continue;
    if (!graph_logits[t] || tgt.node < 0 || tgt.node >= graph_logits[t]->rows()) {
      throw DataError("joint_loss: node label " + std::to_string(tgt.node) + " out of range at timestep " +
                      std::to_string(t));
    }
    node_terms.push_back(softmax_cross_entropy(*graph_logits[t], tgt.node));
  }
  if (word_terms.empty()) throw ContractError("joint_loss: no real timesteps");
  Var loss = divide(add_all(word_terms), static_cast<double>(word_terms.size()));
  if (!node_terms.empty()) loss = loss + divide(add_all(node_terms), static_cast<double>(node_terms.size()));
  return loss;
}

}  // namespace graphdialog
