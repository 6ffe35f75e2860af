#include "graphdialog/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace graphdialog {

Mask KnowledgeGraph::adjacency() const {
  const std::size_t n = size();
  Mask m(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : neighbors[i]) m[i * n + static_cast<std::size_t>(j)] = 1;
  }
  return m;
}

std::vector<int> KnowledgeGraph::find(const std::string& token) const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].token == token) ids.push_back(static_cast<int>(i));
  }
  return ids;
}

KnowledgeGraph KnowledgeGraph::permuted(std::span<const int> permutation) const {
  if (permutation.size() != size()) throw DimensionError("KnowledgeGraph::permuted: permutation size mismatch");
  KnowledgeGraph g;
  g.nodes.resize(size());
  g.neighbors.resize(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto ni = static_cast<std::size_t>(permutation[i]);
    g.nodes[ni] = nodes[i];
    g.nodes[ni].row = permutation[static_cast<std::size_t>(nodes[i].row)];
    for (int j : neighbors[i]) g.neighbors[ni].push_back(permutation[static_cast<std::size_t>(j)]);
    std::sort(g.neighbors[ni].begin(), g.neighbors[ni].end());
  }
  for (const auto& [key, labels] : relations) {
    const int a = permutation[static_cast<std::size_t>(key.first)];
    const int b = permutation[static_cast<std::size_t>(key.second)];
    g.relations[std::minmax(a, b)] = labels;
  }
  return g;
}

KnowledgeGraph build_kb_graph(std::span<const KbTriple> records) {
  KnowledgeGraph g;
  std::map<std::string, int> subjects;
  std::map<std::pair<std::string, int>, int> values;
  std::vector<std::set<int>> adj;
  auto new_node = [&](const std::string& token, int row, bool is_subject) {
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({token, row < 0 ? id : row, is_subject});
    adj.push_back({id});
    return id;
  };
  for (const KbTriple& t : records) {
    auto sit = subjects.find(t.subject);
    const int s = sit != subjects.end() ? sit->second : subjects[t.subject] = new_node(t.subject, -1, true);
    auto vit = values.find({t.object, s});
    const int o = vit != values.end() ? vit->second : values[{t.object, s}] = new_node(t.object, s, false);
    if (s == o) continue;
    adj[static_cast<std::size_t>(s)].insert(o);
    adj[static_cast<std::size_t>(o)].insert(s);
    auto& labels = g.relations[std::minmax(s, o)];
    if (std::find(labels.begin(), labels.end(), t.relation) == labels.end()) labels.push_back(t.relation);
  }
  for (const auto& a : adj) g.neighbors.emplace_back(a.begin(), a.end());
  return g;
}

KgParams KgParams::create(ParameterStore& store, const std::string& prefix, int entity_vocab, int dim, int hops,
                          std::uint64_t seed) {
  if (hops < 1) throw ConfigError("knowledge graph needs at least one hop, got " + std::to_string(hops));
  KgParams p;
  for (int k = 1; k <= hops + 1; ++k) {
    const std::string c = prefix + ".C" + std::to_string(k);
    const std::string v = prefix + ".V" + std::to_string(k);
    p.embeddings.push_back(&store.add(c, fan_in_uniform(entity_vocab, dim, derive_seed(seed, c))));
    p.attention.push_back(&store.add(v, fan_in_uniform(2 * dim, 1, derive_seed(seed, v))));
  }
  return p;
}

KgParams KgParams::find(ParameterStore& store, const std::string& prefix, int hops) {
  if (hops < 1) throw ConfigError("knowledge graph needs at least one hop, got " + std::to_string(hops));
  KgParams p;
  for (int k = 1; k <= hops + 1; ++k) {
    p.embeddings.push_back(&store.get(prefix + ".C" + std::to_string(k)));
    p.attention.push_back(&store.get(prefix + ".V" + std::to_string(k)));
  }
  return p;
}

Var neighbor_attention(const Var& node_embeddings, const Var& attention, std::span<const std::uint8_t> adjacency) {
  const Eigen::Index d = node_embeddings.cols();
  if (attention.rows() != 2 * d || attention.cols() != 1) {
    throw DimensionError("neighbor_attention: attention vector " + shape_string(attention.value()) +
                         " for node width " + std::to_string(d));
  }
  // V . [C_i || C_j] = (C a)_i + (C b)_j with V = [a; b].
  Var own = matmul(node_embeddings, slice_rows(attention, 0, d));
  Var other = matmul(node_embeddings, slice_rows(attention, d, d));
  Var logits = leaky_relu(outer_sum(own, other), kKgLeakySlope);
  return masked_row_softmax(logits, adjacency);
}

Var node_update(const Var& node_embeddings, const Var& alpha) { return weighted_rows(alpha, node_embeddings); }

Var query_logits(const Var& query, const Var& read_nodes) {
  if (query.rows() != read_nodes.cols()) {
    throw DimensionError("query_attend: query " + shape_string(query.value()) + " vs nodes " +
                         shape_string(read_nodes.value()));
  }
  return matmul(read_nodes, query);
}

std::optional<Var> query_attend(const Var& query, const Var& read_nodes) {
  if (read_nodes.rows() == 0) return std::nullopt;
  return softmax(query_logits(query, read_nodes));
}

Var readout(const Var& p, const Var& write_nodes) { return transpose(weighted_rows(transpose(p), write_nodes)); }

KgMemory build_memory(Tape& tape, const KgParams& params, const KnowledgeGraph& graph,
                      std::span<const int> entity_ids, WriteAttention mode) {
  const int hops = params.hops();
  if (hops < 1) throw ConfigError("knowledge graph needs at least one hop");
  if (graph.empty()) throw ContractError("build_memory: empty knowledge graph");
  if (entity_ids.size() != graph.size()) throw DimensionError("build_memory: one entity id per node required");
  const Mask adjacency = graph.adjacency();
  auto update = [&](int c_index, int v_index, Var* alpha_out) {
    Var table = tape.parameter(*params.embeddings[static_cast<std::size_t>(c_index)]);
    Var nodes = gather_rows(table, entity_ids);
    Var alpha = neighbor_attention(nodes, tape.parameter(*params.attention[static_cast<std::size_t>(v_index)]), adjacency);
    *alpha_out = alpha;
    return node_update(nodes, alpha);
  };
  KgMemory m;
  if (mode == WriteAttention::kNextHop) {
    std::vector<Var> updated, alphas;
    for (int k = 0; k <= hops; ++k) {
      Var a;
      updated.push_back(update(k, k, &a));
      alphas.push_back(a);
    }
    for (int k = 0; k < hops; ++k) {
      m.read.push_back(updated[static_cast<std::size_t>(k)]);
      m.read_alpha.push_back(alphas[static_cast<std::size_t>(k)]);
      m.write.push_back(updated[static_cast<std::size_t>(k + 1)]);
      m.write_alpha.push_back(alphas[static_cast<std::size_t>(k + 1)]);
    }
  } else {
    for (int k = 0; k < hops; ++k) {
      Var ra, wa;
      m.read.push_back(update(k, k, &ra));
      m.write.push_back(update(k + 1, k, &wa));
      m.read_alpha.push_back(ra);
      m.write_alpha.push_back(wa);
    }
  }
  return m;
}

MultiHopResult multi_hop(const Var& query, const KgMemory& memory) {
  if (memory.hops() < 1) throw ConfigError("multi_hop: K must be at least 1");
  if (memory.read.front().rows() == 0) throw ContractError("multi_hop: empty knowledge graph");
  MultiHopResult r;
  Var q = query;
  r.trace.q.push_back(q.value().col(0));
  for (int k = 0; k < memory.hops(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    Var logits = query_logits(q, memory.read[kk]);
    Var p = softmax(logits);
    Var o = readout(p, memory.write[kk]);
    r.trace.alpha.push_back(memory.read_alpha[kk].value());
    r.trace.p.push_back(p.value().col(0));
    r.trace.o.push_back(o.value().col(0));
    r.last_logits = logits;
    r.last_p = p;
    r.output = o;
    q = q + o;
    r.trace.q.push_back(q.value().col(0));
  }
  return r;
}

}  // namespace graphdialog
