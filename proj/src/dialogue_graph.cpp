#include "graphdialog/dialogue_graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <tuple>

namespace graphdialog {

TokenSeq TokenSeq::from_tokens(std::vector<std::string> tokens, Speaker speaker) {
  TokenSeq seq;
  seq.speakers.assign(tokens.size(), speaker);
  seq.turns.assign(tokens.size(), 0);
  seq.tokens = std::move(tokens);
  return seq;
}

bool DialogueGraph::has_edge(int src, int dst, EdgeType type) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const Edge& e) { return e.src == src && e.dst == dst && e.type == type; });
}

DialogueGraph build_graph(TokenSeq tokens, std::span<const DepEdge> deps) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) throw InputError("build_graph: empty token sequence");
  if (tokens.speakers.size() != tokens.tokens.size() || tokens.turns.size() != tokens.tokens.size()) {
    throw InputError("build_graph: speaker/turn annotations do not cover every token");
  }
  DialogueGraph g;
  for (int i = 0; i + 1 < n; ++i) {
    g.edges.push_back({i, i + 1, EdgeType::kNext, {}});
    g.edges.push_back({i + 1, i, EdgeType::kPre, {}});
  }
  std::set<std::pair<int, int>> seen;  // unordered dependency pairs
  for (std::size_t k = 0; k < deps.size(); ++k) {
    const DepEdge& d = deps[k];
    if (d.head < 0 || d.head >= n || d.dependent < 0 || d.dependent >= n) {
      throw InputError("build_graph: dependency edge " + std::to_string(k) + " (" + std::to_string(d.head) + " -> " +
                       std::to_string(d.dependent) + ") is outside " + std::to_string(n) + " tokens");
    }
    if (d.head == d.dependent) {
      throw InputError("build_graph: dependency edge " + std::to_string(k) + " is a self-loop at " +
                       std::to_string(d.head));
    }
    if (!seen.insert(std::minmax(d.head, d.dependent)).second) continue;
    g.edges.push_back({d.head, d.dependent, EdgeType::kDep, d.label});
    g.edges.push_back({d.dependent, d.head, EdgeType::kDepInverse, d.label});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst, a.type) < std::tie(b.src, b.dst, b.type);
  });
  g.tokens = std::move(tokens);
  return g;
}

std::pair<DirectionalView, DirectionalView> split_directional(const DialogueGraph& g) {
  const std::size_t n = g.size();
  DirectionalView fwd{Direction::kForward, std::vector<std::vector<int>>(n)};
  DirectionalView bwd{Direction::kBackward, std::vector<std::vector<int>>(n)};
  for (const Edge& e : g.edges) {
    auto& preds = (e.src < e.dst ? fwd : bwd).predecessors[static_cast<std::size_t>(e.dst)];
    preds.push_back(e.src);
  }
  for (auto* view : {&fwd, &bwd}) {
    for (auto& preds : view->predecessors) {
      std::sort(preds.begin(), preds.end());
      preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    }
  }
  return {std::move(fwd), std::move(bwd)};
}

int max_predecessors(const DirectionalView& view) {
  std::size_t m = 0;
  for (const auto& p : view.predecessors) m = std::max(m, p.size());
  return static_cast<int>(m);
}

int PredecessorTable::real_count(int t) const {
  int c = 0;
  for (int j = 0; j < k_max; ++j) c += real(t, j) ? 1 : 0;
  return c;
}

PredecessorTable pad_predecessors(const DirectionalView& view, int k_max) {
  if (k_max < 1) throw ContractError("pad_predecessors: k_max must be at least 1");
  PredecessorTable table;
  table.positions = static_cast<int>(view.size());
  table.k_max = k_max;
  table.slots.assign(view.size() * static_cast<std::size_t>(k_max), PredecessorTable::kPad);
  table.mask.assign(table.slots.size(), 0);
  for (std::size_t t = 0; t < view.size(); ++t) {
    std::vector<int> preds = view.predecessors[t];
    if (preds.empty()) preds.push_back(PredecessorTable::kVirtual);
    if (static_cast<int>(preds.size()) > k_max) {
      const int pos = static_cast<int>(t);
      std::stable_sort(preds.begin(), preds.end(),
                       [pos](int a, int b) { return std::abs(pos - a) < std::abs(pos - b); });
      preds.resize(static_cast<std::size_t>(k_max));
      std::sort(preds.begin(), preds.end());
    }
    for (std::size_t j = 0; j < preds.size(); ++j) {
      table.slots[t * static_cast<std::size_t>(k_max) + j] = preds[j];
      table.mask[t * static_cast<std::size_t>(k_max) + j] = 1;
    }
  }
  return table;
}

EdgeDistanceReport edge_distance_distribution(std::span<const DialogueGraph> graphs) {
  if (graphs.empty()) throw ContractError("edge_distance_distribution: empty corpus");
  EdgeDistanceReport report;
  for (const DialogueGraph& g : graphs) {
    for (const Edge& e : g.edges) {
      if (e.type != EdgeType::kNext && e.type != EdgeType::kDep) continue;
      const int d = std::abs(e.src - e.dst);
      const int bucket = d == 1 ? 0 : d < 10 ? 1 : d < 15 ? 2 : 3;
      ++report.counts[static_cast<std::size_t>(bucket)];
      ++report.total;
    }
  }
  if (report.total == 0) throw ContractError("edge_distance_distribution: corpus has no edges");
  for (std::size_t b = 0; b < report.counts.size(); ++b) {
    report.percent[b] = 100.0 * static_cast<double>(report.counts[b]) / static_cast<double>(report.total);
  }
  return report;
}

}  // namespace graphdialog
