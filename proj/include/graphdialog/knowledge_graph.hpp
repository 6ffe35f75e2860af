#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphdialog/autodiff.hpp"
#include "graphdialog/parameter.hpp"

namespace graphdialog {

struct KbTriple {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const KbTriple&, const KbTriple&) = default;
};

struct KgNode {
  std::string token;
  int row = 0;  // node id of the subject this node belongs to (itself for subjects)
  bool is_subject = false;
};

// Undirected entity graph. Subjects are one node per distinct string;
// attribute values are one node per (value, subject) pair.
struct KnowledgeGraph {
  std::vector<KgNode> nodes;
  std::vector<std::vector<int>> neighbors;  // ascending, always contains the node itself
  std::map<std::pair<int, int>, std::vector<std::string>> relations;  // key (min id, max id)

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  // Row-major n x n adjacency mask (self-loops included).
  Mask adjacency() const;
  // Node ids whose surface token equals `token`, ascending.
  std::vector<int> find(const std::string& token) const;
  // Copy with node ids relabelled: new id of old node i is permutation[i].
  KnowledgeGraph permuted(std::span<const int> permutation) const;
};

KnowledgeGraph build_kb_graph(std::span<const KbTriple> records);

// Hop embeddings C^1..C^{K+1} (entity vocabulary x d_e) and attention
// vectors V^1..V^{K+1} (2 d_e).
struct KgParams {
  std::vector<Parameter*> embeddings;
  std::vector<Parameter*> attention;

  int hops() const { return static_cast<int>(embeddings.size()) - 1; }
  int dim() const { return static_cast<int>(embeddings.front()->value.cols()); }

  static KgParams create(ParameterStore& store, const std::string& prefix, int entity_vocab, int dim, int hops,
                         std::uint64_t seed);
  static KgParams find(ParameterStore& store, const std::string& prefix, int hops);
};

// Which attention vector updates the write-side nodes of hop k.
enum class WriteAttention {
  kNextHop,  // V^{k+1}: hop k's write nodes are hop k+1's read nodes
  kSameHop,  // V^k
};

inline constexpr double kKgLeakySlope = 0.2;

// alpha_ij = softmax over j in N_i of LeakyReLU(V . [C_i || C_j]).
Var neighbor_attention(const Var& node_embeddings, const Var& attention, std::span<const std::uint8_t> adjacency);

// (C_i)' = sum_j alpha_ij C_j.
Var node_update(const Var& node_embeddings, const Var& alpha);

// Distribution over nodes from q . (C_i)'; nullopt for an empty graph.
std::optional<Var> query_attend(const Var& query, const Var& read_nodes);
Var query_logits(const Var& query, const Var& read_nodes);

// o = sum_i p_i (C_i)'.
Var readout(const Var& p, const Var& write_nodes);

// Updated node matrices per hop, computed once per graph.
struct KgMemory {
  std::vector<Var> read;         // hop k (0-based): (C^{k+1})' updated for reading
  std::vector<Var> write;        // hop k: nodes read out into o^k
  std::vector<Var> read_alpha;   // neighbour attention behind read[k]
  std::vector<Var> write_alpha;  // neighbour attention behind write[k]
  int hops() const { return static_cast<int>(read.size()); }
};

KgMemory build_memory(Tape& tape, const KgParams& params, const KnowledgeGraph& graph,
                      std::span<const int> entity_ids, WriteAttention mode = WriteAttention::kNextHop);

struct HopTrace {
  std::vector<Matrix> alpha;  // read-side neighbour attention per hop
  std::vector<Vector> p;
  std::vector<Vector> o;
  std::vector<Vector> q;  // q^1..q^{K+1}
};

struct MultiHopResult {
  Var output;       // o^K
  Var last_logits;  // pre-softmax scores behind p^K
  Var last_p;       // p^K, the graph distribution
  HopTrace trace;
};

// K hops with q^{k+1} = q^k + o^k. Throws ConfigError for K < 1 and
// ContractError for an empty graph.
MultiHopResult multi_hop(const Var& query, const KgMemory& memory);

}  // namespace graphdialog
