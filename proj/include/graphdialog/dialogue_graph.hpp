#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphdialog/tensor.hpp"

namespace graphdialog {

enum class Speaker { kUser, kSystem };

// Dialogue history tokens with per-token speaker and turn index.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<Speaker> speakers;
  std::vector<int> turns;

  std::size_t size() const { return tokens.size(); }
  static TokenSeq from_tokens(std::vector<std::string> tokens, Speaker speaker = Speaker::kUser);
};

struct DepEdge {
  int head = 0;
  int dependent = 0;
  std::string label;
};

enum class EdgeType { kNext, kPre, kDep, kDepInverse };

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeType type = EdgeType::kNext;
  std::string label;  // dependency label; empty for sequential edges

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Token sequence plus Next/Pre edges between neighbours and a mirrored pair
// of edges per dependency relation.
struct DialogueGraph {
  TokenSeq tokens;
  std::vector<Edge> edges;  // sorted by (src, dst, type)

  std::size_t size() const { return tokens.size(); }
  bool has_edge(int src, int dst, EdgeType type) const;
};

enum class Direction { kForward, kBackward };

struct DirectionalView {
  Direction direction = Direction::kForward;
  // predecessors[t]: distinct source positions of edges into t, ascending.
  std::vector<std::vector<int>> predecessors;

  std::size_t size() const { return predecessors.size(); }
};

// Fixed-width predecessor slots, row-major (position, slot).
struct PredecessorTable {
  static constexpr int kVirtual = -1;  // zero-state stand-in at sequence boundaries
  static constexpr int kPad = -2;

  int positions = 0;
  int k_max = 0;
  std::vector<int> slots;
  Mask mask;

  int slot(int t, int j) const { return slots[static_cast<std::size_t>(t * k_max + j)]; }
  bool real(int t, int j) const { return mask[static_cast<std::size_t>(t * k_max + j)] != 0; }
  int real_count(int t) const;
};

// Throws InputError (naming the offending edge index) for out-of-range or
// self-loop dependency edges, and for an empty token sequence.
DialogueGraph build_graph(TokenSeq tokens, std::span<const DepEdge> deps);

std::pair<DirectionalView, DirectionalView> split_directional(const DialogueGraph& g);

// Pads every P(t) to k_max slots. Empty sets get one virtual predecessor;
// sets larger than k_max keep the k_max positions nearest to t.
PredecessorTable pad_predecessors(const DirectionalView& view, int k_max);

// Largest |P(t)| in a view.
int max_predecessors(const DirectionalView& view);

struct EdgeDistanceReport {
  // Buckets: distance 1, 2-9, 10-14, >=15.
  static constexpr std::array<const char*, 4> kLabels = {"1", "2-9", "10-14", ">=15"};
  std::array<long, 4> counts{};
  std::array<double, 4> percent{};
  long total = 0;
};

// Counts each sequential neighbour pair once and each dependency relation
// once; distance is |i - j| along the token sequence.
EdgeDistanceReport edge_distance_distribution(std::span<const DialogueGraph> graphs);

}  // namespace graphdialog
