// Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//
//   acceptance            criteria 1-10 (SMD-backed ones skip without data)
//   acceptance --smd      criteria 8 and 9 only; exit 77 when data is absent

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "graphdialog/checkpoint.hpp"
#include "graphdialog/graph_encoder.hpp"
#include "graphdialog/toy_corpus.hpp"
#include "graphdialog/trainer.hpp"
#include "reference.hpp"
#include "test_support.hpp"

using namespace graphdialog;
using gdtest::random_matrix;
namespace fs = std::filesystem;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::kSkip, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Status::kPass : Status::kFail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Tally {
  int passed = 0, failed = 0, skipped = 0;

  void run(int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::printf("%s %2d %-28s %s\n", tag, id, name, o.detail.c_str());
    std::fflush(stdout);
    (o.status == Status::kPass ? passed : o.status == Status::kFail ? failed : skipped)++;
  }
};

fs::path source_dir() { return GRAPHDIALOG_SOURCE_DIR; }

fs::path smd_dir() {
  if (const char* root = std::getenv("GRAPHDIALOG_DATA_DIR")) return fs::path(root) / "data/smd";
  return source_dir() / "data/smd";
}

bool smd_available() {
  const fs::path d = smd_dir();
  return fs::exists(d / "train.txt") && fs::exists(d / "dev.txt") && fs::exists(d / "test.txt");
}

std::vector<DepEdge> random_deps(std::mt19937_64& rng, int n, int count) {
  std::vector<DepEdge> deps;
  if (n < 2) return deps;
  std::uniform_int_distribution<int> pos(0, n - 1);
  for (int e = 0; e < count; ++e) {
    const int h = pos(rng);
    int d = pos(rng);
    if (d == h) d = (h + 1) % n;
    deps.push_back({h, d, "dep"});
  }
  return deps;
}

DialogueGraph random_graph(std::mt19937_64& rng, int n, int deps) {
  return build_graph(TokenSeq::from_tokens(std::vector<std::string>(static_cast<std::size_t>(n), "w")),
                     random_deps(rng, n, deps));
}

std::vector<Var> constants(Tape& t, const std::vector<Matrix>& ms) {
  std::vector<Var> out;
  for (const auto& m : ms) out.push_back(t.constant(m));
  return out;
}

std::vector<KbTriple> random_kb(std::mt19937_64& rng, int rows) {
  static const std::vector<std::string> rels{"distance", "address", "poi_type", "traffic"};
  static const std::vector<std::string> vals{"1_miles", "2_miles", "home", "cafe", "heavy", "no_traffic"};
  std::vector<KbTriple> kb;
  for (int r = 0; r < rows; ++r) {
    const std::string subj = "place_" + std::to_string(r);
    const int attrs = 1 + static_cast<int>(rng() % 3);
    for (int a = 0; a < attrs; ++a) kb.push_back({subj, rels[rng() % rels.size()], vals[rng() % vals.size()]});
  }
  return kb;
}

Outcome published_scale() {
  return skip("published SMD targets (BLEU 13.66, Entity F1 57.42) need full GPU-scale training; configs/smd.cfg records them as a reference, not a gate");
}

Outcome gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = gdtest::tiny_fixture();
  GraphDialogModel model(f.config, f.vocab, f.entities);
  const std::vector<TrainingExample> examples{f.example};
  const std::vector<PreparedInput> inputs{model.prepare(f.example)};
  const Batch batch = make_batches(examples, f.vocab, 1, 0).at(0);
  const auto check = gdtest::check_gradients(model.params(), [&](Tape& t) {
    return model.batch_loss(t, examples, inputs, batch, nullptr);
  });
  const double secs = seconds_since(t0);
  const bool shape = f.config.hidden == 4 && f.config.kg_dim == 8 && f.vocab.size() == 12 && f.example.graph.size() == 3 &&
                     f.config.hops == 2 && f.example.history.size() <= 8;
  return verdict(shape && check.max_rel_error < 1e-4 && secs < 60.0,
                 fmt("max rel error %.2e over %ld scalars (worst %s), |V|=%d, %.2f s", check.max_rel_error, check.checked,
                     check.worst.c_str(), f.vocab.size(), secs));
}

Outcome chain_equivalence() {
  std::mt19937_64 rng(3);
  int identical = 0;
  for (int draw = 0; draw < 100; ++draw) {
    ParameterStore store;
    const int in = 2 + draw % 5, hid = 2 + draw % 4;
    auto cell = EncoderCellParams::create(store, "cell", in, hid, false, 1000 + static_cast<std::uint64_t>(draw));
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<Matrix> xs;
    for (int i = 0; i < n; ++i) xs.push_back(random_matrix(rng, in, 1));
    const auto g = build_graph(TokenSeq::from_tokens(std::vector<std::string>(static_cast<std::size_t>(n), "w")), {});
    const auto [fwd, bwd] = split_directional(g);
    Tape t;
    BoundCell b(t, cell);
    const auto inputs = constants(t, xs);
    const auto rf = encode_direction(b, pad_predecessors(fwd, 1 + draw % 4), Direction::kForward, inputs);
    const auto rb = encode_direction(b, pad_predecessors(bwd, 1 + draw % 4), Direction::kBackward, inputs);
    const gdref::CellWeights w(cell);
    const Matrix ef = gdref::chain_reference(w, xs, true), eb = gdref::chain_reference(w, xs, false);
    const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(hid);
    if (std::memcmp(rf.final_state.value().data(), ef.data(), bytes) == 0 &&
        std::memcmp(rb.final_state.value().data(), eb.data(), bytes) == 0) {
      ++identical;
    }
  }
  return verdict(identical == 100, fmt("%d/100 draws bit-identical in both directions", identical));
}

Outcome normalization_suite() {
  std::mt19937_64 rng(4);
  double worst_sum = 0.0;
  long pad_leaks = 0, telescope_breaks = 0, off_neighbourhood = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const auto g = random_graph(rng, n, static_cast<int>(rng() % 8));
    const auto [fwd, bwd] = split_directional(g);
    ParameterStore store;
    auto cell = EncoderCellParams::create(store, "cell", 3, 4, inst % 2 == 0, 5000 + static_cast<std::uint64_t>(inst));
    for (auto& p : store) p->value *= 1.0 + static_cast<double>(inst % 7);
    std::vector<Matrix> xs;
    for (int i = 0; i < n; ++i) xs.push_back(random_matrix(rng, 3, 1, 2.0));
    const int k_max = 1 + static_cast<int>(rng() % 5);
    Tape t;
    BoundCell b(t, cell);
    const auto inputs = constants(t, xs);
    for (const auto& view : {fwd, bwd}) {
      const auto table = pad_predecessors(view, k_max);
      const auto r = encode_direction(b, table, view.direction, inputs);
      for (int pos = 0; pos < n; ++pos) {
        const Matrix& a = r.alphas[static_cast<std::size_t>(pos)].value();
        worst_sum = std::max(worst_sum, std::abs(a.sum() - 1.0));
        for (int j = table.real_count(pos); j < k_max; ++j) pad_leaks += a(j) != 0.0 ? 1 : 0;
      }
    }

    const auto kb = random_kb(rng, 1 + static_cast<int>(rng() % 4));
    const auto kg = build_kb_graph(kb);
    const int dim = 2 + static_cast<int>(rng() % 4), hops = 1 + static_cast<int>(rng() % 4);
    ParameterStore ks;
    auto kp = KgParams::create(ks, "kg", static_cast<int>(kg.size()), dim, hops, 9000 + static_cast<std::uint64_t>(inst));
    for (auto& p : ks) p->value *= 1.0 + static_cast<double>(inst % 5);
    std::vector<int> ids(kg.size());
    std::iota(ids.begin(), ids.end(), 0);
    const auto mem = build_memory(t, kp, kg, ids);
    const auto hop = multi_hop(t.constant(random_matrix(rng, dim, 1, 2.0)), mem);
    for (int k = 0; k < hops; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const Matrix& alpha = hop.trace.alpha[ku];
      for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
        worst_sum = std::max(worst_sum, std::abs(alpha.row(i).sum() - 1.0));
        const auto& nb = kg.neighbors[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
          if (std::find(nb.begin(), nb.end(), static_cast<int>(j)) == nb.end() && alpha(i, j) != 0.0) ++off_neighbourhood;
        }
      }
      worst_sum = std::max(worst_sum, std::abs(hop.trace.p[ku].sum() - 1.0));
      if (hop.trace.q[ku + 1] != (hop.trace.q[ku] + hop.trace.o[ku]).eval()) ++telescope_breaks;
    }
  }
  const bool ok = worst_sum <= 1e-9 && pad_leaks == 0 && telescope_breaks == 0 && off_neighbourhood == 0;
  return verdict(ok, fmt("worst |sum-1| %.2e, nonzero pad weights %ld, off-neighbourhood weights %ld, query update mismatches %ld",
                         worst_sum, pad_leaks, off_neighbourhood, telescope_breaks));
}

Outcome invariance_suite() {
  std::mt19937_64 rng(5);
  int padding_ok = 0, permutation_ok = 0, relabel_ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const auto g = random_graph(rng, n, 1 + static_cast<int>(rng() % 10));
    const auto [fwd, bwd] = split_directional(g);
    ParameterStore store;
    auto fc = EncoderCellParams::create(store, "fwd", 3, 4, false, 20000 + static_cast<std::uint64_t>(trial));
    auto bc = EncoderCellParams::create(store, "bwd", 3, 4, false, 30000 + static_cast<std::uint64_t>(trial));
    std::vector<Matrix> xs;
    for (int i = 0; i < n; ++i) xs.push_back(random_matrix(rng, 3, 1));
    const int k_full = std::max(max_predecessors(fwd), max_predecessors(bwd));
    Tape t;
    BoundCell bf(t, fc), bb(t, bc);
    const auto inputs = constants(t, xs);
    const auto ft = pad_predecessors(fwd, k_full), btab = pad_predecessors(bwd, k_full);
    const Matrix base = encode_bidirectional(bf, bb, ft, btab, inputs).value();

    const int extra = 1 + static_cast<int>(rng() % 4);
    const Matrix wider =
        encode_bidirectional(bf, bb, pad_predecessors(fwd, k_full + extra), pad_predecessors(bwd, k_full + extra), inputs).value();
    if (std::memcmp(base.data(), wider.data(), sizeof(double) * static_cast<std::size_t>(base.size())) == 0) ++padding_ok;

    auto shuffle_slots = [&](PredecessorTable table) {
      for (int p = 0; p < table.positions; ++p) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(table.k_max));
        std::iota(idx.begin(), idx.end(), static_cast<std::size_t>(p * table.k_max));
        auto shuffled = idx;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto slots = table.slots;
        const auto mask = table.mask;
        for (std::size_t j = 0; j < idx.size(); ++j) {
          table.slots[idx[j]] = slots[shuffled[j]];
          table.mask[idx[j]] = mask[shuffled[j]];
        }
      }
      return table;
    };
    const Matrix permuted =
        encode_bidirectional(bf, bb, shuffle_slots(pad_predecessors(fwd, k_full + extra)),
                             shuffle_slots(pad_predecessors(bwd, k_full + extra)), inputs)
            .value();
    if (std::memcmp(base.data(), permuted.data(), sizeof(double) * static_cast<std::size_t>(base.size())) == 0) ++permutation_ok;

    const auto kg = build_kb_graph(random_kb(rng, 1 + static_cast<int>(rng() % 4)));
    const auto nodes = kg.size();
    ParameterStore ks;
    const int hops = 1 + trial % 3;
    auto kp = KgParams::create(ks, "kg", static_cast<int>(nodes), 4, hops, 40000 + static_cast<std::uint64_t>(trial));
    std::vector<int> ids(nodes), perm(nodes), pids(nodes);
    std::iota(ids.begin(), ids.end(), 0);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < nodes; ++i) pids[static_cast<std::size_t>(perm[i])] = ids[i];
    const Matrix q = random_matrix(rng, 4, 1);
    const auto a = multi_hop(t.constant(q), build_memory(t, kp, kg, ids));
    const auto b = multi_hop(t.constant(q), build_memory(t, kp, kg.permuted(perm), pids));
    bool same = a.output.value() == b.output.value();
    for (std::size_t i = 0; i < nodes; ++i) {
      same = same && a.last_p.value()(static_cast<Eigen::Index>(i)) == b.last_p.value()(perm[i]);
    }
    relabel_ok += same ? 1 : 0;
  }
  return verdict(padding_ok == 200 && permutation_ok == 200 && relabel_ok == 200,
                 fmt("exact: padding %d/200, predecessor order %d/200, node relabelling %d/200", padding_ok, permutation_ok,
                     relabel_ok));
}

struct ToyRun {
  GraphDialogModel model;
  TrainSummary summary;
  EvalReport train_report;
  EvalReport test_report;
  double seconds = 0.0;
};

ToyRun toy_run(const RunConfig& config, const Corpus& corpus) {
  const auto t0 = std::chrono::steady_clock::now();
  GraphDialogModel model(config, corpus.vocab, corpus.entities);
  auto summary = train_model(model, corpus);
  const double secs = seconds_since(t0);
  auto train = evaluate(model, corpus.train, corpus.lexicon, corpus.domains).report;
  auto test = evaluate(model, corpus.test, corpus.lexicon, corpus.domains).report;
  return {std::move(model), std::move(summary), train, test, secs};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct ToyContext {
  fs::path dir;
  RunConfig config;
  std::optional<Corpus> corpus;
  std::optional<ToyRun> first;

  ToyContext() {
    dir = fs::temp_directory_path() / ("graphdialog_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    write_toy_dataset(dir / "toy");
    config = RunConfig::load(source_dir() / "configs/toy.cfg");
    config.dataset = (dir / "toy").string();
    corpus = load_corpus(config);
  }
  ~ToyContext() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

Outcome overfit(ToyContext& ctx) {
  ctx.first = toy_run(ctx.config, *ctx.corpus);
  const auto& r = *ctx.first;
  int reached = 0;
  for (const auto& e : r.summary.epochs) {
    if (e.improved) reached = e.epoch;
  }
  const bool ok = ctx.corpus->train.size() == 60 && r.train_report.sketch_accuracy >= 0.99 && r.train_report.entity_f1 == 1.0 &&
                  ctx.config.epochs <= 300 && r.seconds < 300.0;
  return verdict(ok, fmt("20 dialogues, %zu train responses: sketch acc %.4f, entity F1 %.4f, BLEU %.2f after %d epochs (best %d), %.1f s",
                         ctx.corpus->train.size(), r.train_report.sketch_accuracy, r.train_report.entity_f1,
                         r.train_report.bleu, ctx.config.epochs, reached, r.seconds));
}

Outcome metric_fidelity() {
  auto split = [](const std::string& s) {
    Sentence out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
  };
  const double hand = 100.0 * std::exp((std::log(4.0 / 8) + std::log(3.0 / 7) + std::log(2.0 / 6) + std::log(1.0 / 5)) / 4);
  const double got = corpus_bleu({split("a b c d e f g h")}, {split("a b c d")});
  const double same = corpus_bleu({split("the car is parked at home")}, {split("the car is parked at home")});
  const double disjoint = corpus_bleu({split("a b c d")}, {split("w x y z")});

  const EntityLexicon lex({"home", "5_miles", "cafe", "rain"});
  const std::vector<Sentence> hyp{split("home is 5_miles away"), split("cafe cafe"), split("no idea"), split("rain")};
  const std::vector<Sentence> gold{split("home is 5_miles away"), split("cafe is near home"), split("it is rain"), split("hello")};
  const auto f = entity_f1(hyp, gold, lex);
  // Tally: {home,5_miles} exact; {cafe,cafe} vs {cafe,home} 1 tp 1 fp 1 fn;
  // {} vs {rain} 1 fn; {rain} vs {} 1 fp.
  const bool tally = f.true_positive == 3 && f.false_positive == 2 && f.false_negative == 2 && f.f1() == 2.0 * 3 / (2.0 * 3 + 2 + 2);
  const bool ok = std::abs(got - hand) <= 0.01 && same == 100.0 && disjoint == 0.0 && tally;
  return verdict(ok, fmt("BLEU example %.4f (hand %.4f), identity %.1f, disjoint %.1f, entity tally tp/fp/fn %ld/%ld/%ld F1 %.4f",
                         got, hand, same, disjoint, f.true_positive, f.false_positive, f.false_negative, f.f1()));
}

Outcome data_fidelity() {
  if (!smd_available()) return skip("SMD split files not found under " + smd_dir().string());
  RunConfig config = RunConfig::load(source_dir() / "configs/smd.cfg");
  config.dataset = smd_dir().string();
  const auto ds = load_dataset(smd_dir(), parse_dataset_format(config.format));
  const auto corpus = build_corpus(ds, config);
  const double rel = std::abs(corpus.vocab.size() - 1601.0) / 1601.0;
  const bool ok = ds.train.size() == 2425 && ds.dev.size() == 302 && ds.test.size() == 304 && rel <= 0.05;
  return verdict(ok, fmt("dialogues %zu/%zu/%zu, vocabulary %d (%.1f%% from 1601)", ds.train.size(), ds.dev.size(),
                         ds.test.size(), corpus.vocab.size(), 100.0 * rel));
}

std::vector<DialogueGraph> utterance_graphs(const std::vector<Dialogue>& dialogues, bool with_deps) {
  std::vector<DialogueGraph> graphs;
  for (const auto& d : dialogues) {
    for (const auto& turn : d.turns) {
      const std::vector<DepEdge> none;
      graphs.push_back(build_graph(TokenSeq::from_tokens(turn.tokens, turn.speaker), with_deps ? turn.deps : none));
    }
  }
  return graphs;
}

Outcome edge_distance() {
  const auto chain = edge_distance_distribution(utterance_graphs(toy_dialogues(20, 7), false));
  const bool chain_ok = chain.total > 0 && chain.percent[0] == 100.0;
  const std::string chain_detail = fmt("chain corpus bucket-1 share %.2f%% over %ld edges", chain.percent[0], chain.total);
  if (!chain_ok) return fail(chain_detail);
  if (!smd_available() || !fs::exists(smd_dir() / "train_deps.jsonl")) {
    return skip(chain_detail + "; SMD dependency files not found under " + smd_dir().string());
  }
  RunConfig config = RunConfig::load(source_dir() / "configs/smd.cfg");
  const auto ds = load_dataset(smd_dir(), parse_dataset_format(config.format));
  std::vector<Dialogue> all = ds.train;
  all.insert(all.end(), ds.dev.begin(), ds.dev.end());
  all.insert(all.end(), ds.test.begin(), ds.test.end());
  const auto r = edge_distance_distribution(utterance_graphs(all, true));
  const std::array<double, 4> target{52.82, 33.68, 10.61, 2.89};
  bool ok = true;
  for (std::size_t b = 0; b < 4; ++b) ok = ok && std::abs(r.percent[b] - target[b]) <= 3.0;
  return verdict(ok, chain_detail + fmt("; SMD buckets %.2f/%.2f/%.2f/%.2f vs 52.82/33.68/10.61/2.89", r.percent[0],
                                        r.percent[1], r.percent[2], r.percent[3]));
}

Outcome determinism(ToyContext& ctx) {
  if (!ctx.first) ctx.first = toy_run(ctx.config, *ctx.corpus);
  const ToyRun second = toy_run(ctx.config, *ctx.corpus);
  const fs::path a = ctx.dir / "a.ckpt", b = ctx.dir / "b.ckpt";
  save_checkpoint(ctx.first->model, a);
  save_checkpoint(second.model, b);
  const std::string ba = slurp(a), bb = slurp(b);
  const bool bytes = !ba.empty() && ba == bb;
  const bool reports = ctx.first->train_report == second.train_report && ctx.first->test_report == second.test_report;
  return verdict(bytes && reports, fmt("checkpoints %s (%zu bytes), eval reports %s", bytes ? "bit-identical" : "differ",
                                       ba.size(), reports ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  const bool smd_only = argc > 1 && std::strcmp(argv[1], "--smd") == 0;
  Tally tally;
  if (smd_only) {
    if (!smd_available()) {
      std::printf("SKIP  8 data fidelity             SMD split files not found under %s\n", smd_dir().string().c_str());
      std::printf("SKIP  9 edge-distance diagnostic  SMD split files not found\n");
      return 77;
    }
    tally.run(8, "data fidelity", data_fidelity);
    tally.run(9, "edge-distance diagnostic", edge_distance);
  } else {
    ToyContext toy;
    tally.run(1, "published-scale results", published_scale);
    tally.run(2, "gradient oracle", gradient_oracle);
    tally.run(3, "chain-graph equivalence", chain_equivalence);
    tally.run(4, "attention normalization", normalization_suite);
    tally.run(5, "padding/permutation", invariance_suite);
    tally.run(6, "overfit oracle", [&] { return overfit(toy); });
    tally.run(7, "metric fidelity", metric_fidelity);
    tally.run(8, "data fidelity", data_fidelity);
    tally.run(9, "edge-distance diagnostic", edge_distance);
    tally.run(10, "determinism", [&] { return determinism(toy); });
  }
  std::printf("%d passed, %d failed, %d skipped\n", tally.passed, tally.failed, tally.skipped);
  return tally.failed == 0 ? 0 : 1;
}
