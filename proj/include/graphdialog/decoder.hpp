#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphdialog/autodiff.hpp"
#include "graphdialog/corpus.hpp"
#include "graphdialog/knowledge_graph.hpp"

namespace graphdialog {

// GRU weights (update z, reset r, candidate n), the vocabulary projection
// W_o and the projection of decoder states into the KG query space.
struct DecoderParams {
  Parameter* w_z = nullptr;
  Parameter* u_z = nullptr;
  Parameter* b_z = nullptr;
  Parameter* w_r = nullptr;
  Parameter* u_r = nullptr;
  Parameter* b_r = nullptr;
  Parameter* w_n = nullptr;
  Parameter* u_n = nullptr;
  Parameter* b_n = nullptr;
  Parameter* w_o = nullptr;
  Parameter* w_q = nullptr;

  int hidden_dim() const { return static_cast<int>(u_z->value.rows()); }

  static DecoderParams create(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                              int vocab_size, int query_dim, std::uint64_t seed);
  static DecoderParams find(ParameterStore& store, const std::string& prefix);
};

struct BoundDecoder {
  Var w_z, u_z, b_z, w_r, u_r, b_r, w_n, u_n, b_n, w_o, w_q;
  BoundDecoder(Tape& tape, const DecoderParams& p);
};

// h_0 = [h_n^e || o^K].
Var init_hidden(const Var& encoder_state, const Var& kg_output);

// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
// n = tanh(W_n x + U_n (r * h) + b_n), h' = (1 - z) * h + z * n.
Var gru_step(const BoundDecoder& dec, const Var& input, const Var& hidden);

Var vocab_logits(const BoundDecoder& dec, const Var& hidden);
Var vocab_dist(const BoundDecoder& dec, const Var& hidden);

struct GraphDist {
  Var logits;
  Var p;
  HopTrace trace;
};

// Last-hop node attention for the projected decoder state; nullopt when
// there is no knowledge graph (copying disabled).
std::optional<GraphDist> graph_dist(const BoundDecoder& dec, const Var& hidden, const std::optional<KgMemory>& memory);

struct Emission {
  std::string token;
  int sketch_id = 0;
  int copied_node = kNoLabel;
  bool copy_failure = false;  // tag predicted with nothing to copy from
};

// Argmax of P_vocab; tags are replaced by the surface form of the argmax
// node of P_graph. Ties resolve to the lowest id.
Emission copy_or_generate(const Vector& p_vocab, const std::optional<Vector>& p_graph, const Vocabulary& vocab,
                          const KnowledgeGraph& graph);

// One decoder timestep of supervision.
struct StepTarget {
  int word = 0;
  int node = kNoLabel;
  bool real = true;  // false on padding
};

// Mean cross-entropy of P_vocab over real timesteps plus mean
// cross-entropy of P_graph over real timesteps that carry a node label.
// `graph_logits[t]` may be empty when the example has no graph.
Var joint_loss(const std::vector<Var>& vocab_logits, const std::vector<std::optional<Var>>& graph_logits,
               const std::vector<StepTarget>& targets);

}  // namespace graphdialog
