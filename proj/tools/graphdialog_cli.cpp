#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "graphdialog/checkpoint.hpp"
#include "graphdialog/toy_corpus.hpp"
#include "graphdialog/trainer.hpp"

namespace fs = std::filesystem;
using namespace graphdialog;

namespace {

struct Overrides {
  std::string config;
  std::string dataset;
  std::uint64_t seed = 0;
  int hops = 0;
  int hidden = 0;
  int epochs = -1;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run config file (key = value lines)");
  cmd->add_option("--dataset", o.dataset, "dataset directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--hops", o.hops, "KG hops K");
  cmd->add_option("--hidden", o.hidden, "encoder size d; d_e follows as 2d unless query_projection is set");
  cmd->add_option("--epochs", o.epochs, "training epochs");
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (!o.dataset.empty()) c.dataset = o.dataset;
  if (o.seed != 0) c.seed = o.seed;
  if (o.hops != 0) c.hops = o.hops;
  if (o.hidden != 0) {
    c.hidden = o.hidden;
    if (!c.query_projection) c.kg_dim = 2 * o.hidden;
  }
  if (o.epochs >= 0) c.epochs = o.epochs;
  c.validate();
  return c;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    nlohmann::ordered_json extra = {}) {
  auto m = run_manifest(command, config);
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / "manifest.json", m);
}

// Config of a checkpointed model with --dataset applied.
RunConfig effective_config(const GraphDialogModel& model, const std::string& dataset) {
  RunConfig c = model.config();
  if (!dataset.empty()) c.dataset = dataset;
  return c;
}

Corpus corpus_for(const GraphDialogModel& model, const std::string& dataset) {
  Corpus corpus = load_corpus(effective_config(model, dataset));
  corpus.vocab = model.vocab();
  corpus.entities = model.entities();
  return corpus;
}

int run_train(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  Corpus corpus = load_corpus(config);
  GraphDialogModel model(config, corpus.vocab, corpus.entities);
  std::cerr << "train: " << corpus.train.size() << " examples, vocab " << corpus.vocab.size() << ", entities "
            << corpus.entities.size() << ", " << model.params().scalar_count() << " parameters\n";
  std::ofstream log(out / "epochs.jsonl");
  const auto summary = train_model(model, corpus, [&](const EpochRecord& r) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["selection_bleu"] = r.selection_bleu;
    j["improved"] = r.improved;
    log << j.dump() << "\n" << std::flush;
    std::cerr << "epoch " << r.epoch << " loss " << r.train_loss << " bleu " << r.selection_bleu
              << (r.improved ? " *" : "") << "\n";
  });
  save_checkpoint(model, out / "model.ckpt");
  nlohmann::ordered_json extra;
  extra["best_epoch"] = summary.best_epoch;
  extra["best_selection_bleu"] = summary.best_bleu;
  extra["selection_split"] = corpus.dev.empty() ? "train" : "dev";
  write_manifest(out, "train", config, extra);
  std::cout << "checkpoint " << (out / "model.ckpt").string() << " (epoch " << summary.best_epoch << ")\n";
  return 0;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_inspection(std::ostream& os, const TrainingExample& ex, const GraphDialogModel::Decoded& d) {
  os << "dialogue " << ex.dialogue_id << " turn " << ex.turn_index << "\n";
  os << "nodes:";
  for (std::size_t i = 0; i < ex.graph.nodes.size(); ++i) os << "  [" << i << "] " << ex.graph.nodes[i].token;
  os << "\n";
  os << std::left << std::setw(5) << "step" << std::setw(24) << "token" << std::setw(5) << "tag" << std::setw(8)
     << "copied" << "P_graph\n";
  for (std::size_t t = 0; t < d.steps.size(); ++t) {
    const auto& s = d.steps[t];
    os << std::setw(5) << t << std::setw(24) << s.token << std::setw(5) << (s.is_tag ? "yes" : "no") << std::setw(8)
       << (s.copied_node == kNoLabel ? std::string("-") : std::to_string(s.copied_node));
    for (Eigen::Index i = 0; i < s.p_graph.size(); ++i) os << (i ? " " : "") << fixed(s.p_graph(i), 4);
    os << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GraphDialog: dependency-graph dialogue encoder with multi-hop KG copying"};
  app.require_subcommand(1);

  Overrides train_o;
  std::string train_out = "runs/latest";
  std::string grid;
  auto* train = app.add_subcommand("train", "train a model and keep the best-BLEU checkpoint");
  add_overrides(train, train_o);
  train->add_option("--out", train_out, "output directory");
  train->add_option("--grid", grid, "enumerate configs, e.g. \"hops=1,2,3;dropout=0.1,0.2\"");

  std::string ckpt;
  std::string dataset;
  std::string split = "test";
  std::string out;
  auto* eval = app.add_subcommand("eval", "greedy decode a split and report BLEU and Entity F1");
  eval->add_option("--checkpoint", ckpt, "model checkpoint")->required();
  eval->add_option("--dataset", dataset, "dataset directory (default: the one in the checkpoint)");
  eval->add_option("--split", split, "train, dev or test");
  eval->add_option("--out", out, "directory for report.json, report.txt and manifest.json");

  auto* infer = app.add_subcommand("infer", "decode a split and write sketches, responses and P_graph");
  infer->add_option("--checkpoint", ckpt, "model checkpoint")->required();
  infer->add_option("--dataset", dataset, "dataset directory (default: the one in the checkpoint)");
  infer->add_option("--split", split, "train, dev or test");
  infer->add_option("--out", out, "output directory")->required();

  std::string dialogue;
  int turn = -1;
  auto* inspect = app.add_subcommand("inspect", "per-step copy attention for one dialogue");
  inspect->add_option("--checkpoint", ckpt, "model checkpoint")->required();
  inspect->add_option("--dataset", dataset, "dataset directory (default: the one in the checkpoint)");
  inspect->add_option("--split", split, "train, dev or test");
  inspect->add_option("--dialogue", dialogue, "dialogue id")->required();
  inspect->add_option("--turn", turn, "system turn index (default: every turn)");
  inspect->add_option("--out", out, "directory for attention.json and manifest.json");

  Overrides stats_o;
  std::string stats_split = "all";
  auto* stats = app.add_subcommand("graph-stats", "edge path distance distribution of a dataset");
  add_overrides(stats, stats_o);
  stats->add_option("--split", stats_split, "train, dev, test or all");
  std::string stats_out;
  stats->add_option("--out", stats_out, "directory for stats.json and manifest.json");

  std::string toy_out = "data/toy";
  auto* toy = app.add_subcommand("toy-corpus", "write the synthetic overfit corpus");
  toy->add_option("--out", toy_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const RunConfig base = resolve_config(train_o);
      if (grid.empty()) return run_train(base, train_out);
      const auto configs = expand_grid(base, grid);
      for (std::size_t i = 0; i < configs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "grid_%03zu", i);
        std::cerr << "== " << name << "\n";
        run_train(configs[i], fs::path(train_out) / name);
      }
      return 0;
    }
    if (*eval) {
      const GraphDialogModel model = load_checkpoint(ckpt);
      const Corpus corpus = corpus_for(model, dataset);
      const auto result = evaluate(model, corpus.split(split), corpus.lexicon, corpus.domains);
      std::cout << result.report.to_text();
      if (!out.empty()) {
        fs::create_directories(out);
        write_json(fs::path(out) / "report.json", result.report.to_json());
        std::ofstream(fs::path(out) / "report.txt") << result.report.to_text();
        nlohmann::ordered_json extra;
        extra["checkpoint"] = ckpt;
        extra["split"] = split;
        write_manifest(out, "eval", effective_config(model, dataset), extra);
      }
      return 0;
    }
    if (*infer) {
      const GraphDialogModel model = load_checkpoint(ckpt);
      const Corpus corpus = corpus_for(model, dataset);
      const auto& examples = corpus.split(split);
      fs::create_directories(out);
      std::ofstream file(fs::path(out) / "decoded.jsonl");
      for (const auto& ex : examples) {
        const auto d = model.greedy_decode(ex, model.prepare(ex), model.config().max_decode_len);
        file << decode_to_json(ex, d).dump() << "\n";
      }
      nlohmann::ordered_json extra;
      extra["checkpoint"] = ckpt;
      extra["split"] = split;
      write_manifest(out, "infer", effective_config(model, dataset), extra);
      std::cout << examples.size() << " responses written to " << (fs::path(out) / "decoded.jsonl").string() << "\n";
      return 0;
    }
    if (*inspect) {
      const GraphDialogModel model = load_checkpoint(ckpt);
      const Corpus corpus = corpus_for(model, dataset);
      auto dump = nlohmann::ordered_json::array();
      for (const auto& ex : corpus.split(split)) {
        if (ex.dialogue_id != dialogue || (turn >= 0 && ex.turn_index != turn)) continue;
        const auto d = model.greedy_decode(ex, model.prepare(ex), model.config().max_decode_len);
        print_inspection(std::cout, ex, d);
        dump.push_back(decode_to_json(ex, d));
      }
      if (dump.empty()) throw InputError("dialogue '" + dialogue + "' not found in split " + split);
      if (!out.empty()) {
        fs::create_directories(out);
        write_json(fs::path(out) / "attention.json", dump);
        nlohmann::ordered_json extra;
        extra["checkpoint"] = ckpt;
        extra["split"] = split;
        extra["dialogue"] = dialogue;
        extra["turn"] = turn;
        write_manifest(out, "inspect", effective_config(model, dataset), extra);
      }
      return 0;
    }
    if (*stats) {
      const RunConfig config = resolve_config(stats_o);
      std::filesystem::path dir = config.dataset;
      if (const char* root = std::getenv("GRAPHDIALOG_DATA_DIR"); root != nullptr && dir.is_relative()) {
        dir = fs::path(root) / dir;
      }
      const Dataset ds = load_dataset(dir, parse_dataset_format(config.format));
      std::vector<DialogueGraph> graphs;
      for (const char* name : {"train", "dev", "test"}) {
        if (stats_split != "all" && stats_split != name) continue;
        for (const auto& d : ds.split(name)) {
          for (const auto& t : d.turns) graphs.push_back(build_graph(TokenSeq::from_tokens(t.tokens), t.deps));
        }
      }
      const auto report = edge_distance_distribution(graphs);
      std::cout << "edges " << report.total << "\n";
      for (std::size_t b = 0; b < report.counts.size(); ++b) {
        std::cout << std::left << std::setw(8) << EdgeDistanceReport::kLabels[b] << std::setw(10) << report.counts[b]
                  << fixed(report.percent[b], 2) << "%\n";
      }
      if (!stats_out.empty()) {
        fs::create_directories(stats_out);
        nlohmann::ordered_json j;
        j["edges"] = report.total;
        for (std::size_t b = 0; b < report.counts.size(); ++b) {
          j["buckets"][EdgeDistanceReport::kLabels[b]] = {{"count", report.counts[b]}, {"percent", report.percent[b]}};
        }
        write_json(fs::path(stats_out) / "stats.json", j);
        nlohmann::ordered_json extra;
        extra["split"] = stats_split;
        write_manifest(stats_out, "graph-stats", config, extra);
      }
      return 0;
    }
    if (*toy) {
      write_toy_dataset(toy_out);
      std::cout << "toy corpus written to " << toy_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
