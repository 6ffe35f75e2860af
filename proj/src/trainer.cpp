#include "graphdialog/trainer.hpp"

#include <cstdlib>

#include "graphdialog/checkpoint.hpp"

#ifndef GRAPHDIALOG_CODE_VERSION
#define GRAPHDIALOG_CODE_VERSION "unknown"
#endif

namespace graphdialog {

const std::vector<TrainingExample>& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev" || name == "val") return dev;
  if (name == "test") return test;
  throw ConfigError("unknown split '" + name + "' (expected train, dev or test)");
}

Corpus build_corpus(const Dataset& dataset, const RunConfig& config) {
  Corpus c;
  c.ontology = dataset.ontology;
  ExampleOptions options;
  options.speaker_markers = config.speaker_markers;
  options.sequential_only = config.sequential_only;
  c.train = build_examples(dataset.train, c.ontology, options);
  c.dev = build_examples(dataset.dev, c.ontology, options);
  c.test = build_examples(dataset.test, c.ontology, options);
  c.vocab = build_vocab(c.train, c.ontology);
  c.entities = build_entity_vocab(c.train);
  for (const auto& v : c.ontology.values()) c.lexicon.add(v);
  for (const auto* split : {&c.train, &c.dev, &c.test}) {
    for (const auto& ex : *split) {
      for (const auto& n : ex.graph.nodes) c.lexicon.add(n.token);
      c.domains.insert(ex.domain);
    }
  }
  return c;
}

Corpus load_corpus(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("no dataset configured");
  std::filesystem::path dir = config.dataset;
  if (const char* root = std::getenv("GRAPHDIALOG_DATA_DIR"); root != nullptr && dir.is_relative()) {
    dir = std::filesystem::path(root) / dir;
  }
  return build_corpus(load_dataset(dir, parse_dataset_format(config.format)), config);
}

EvalOutput evaluate(const GraphDialogModel& model, const std::vector<TrainingExample>& examples,
                    const EntityLexicon& lexicon, const std::set<std::string>& domains) {
  if (examples.empty()) throw DataError("evaluation split is empty");
  EvalOutput out;
  std::vector<Sentence> hyps;
  std::vector<Sentence> golds;
  std::vector<std::string> labels;
  long steps = 0;
  long failures = 0;
  long correct = 0;
  long positions = 0;
  for (const auto& ex : examples) {
    auto decoded = model.greedy_decode(ex, model.prepare(ex), model.config().max_decode_len);
    hyps.push_back(decoded.surface);
    golds.push_back(ex.response);
    labels.push_back(ex.domain);
    steps += static_cast<long>(decoded.steps.size());
    failures += decoded.copy_failures;
    std::vector<std::string> got = decoded.sketch;
    got.push_back(model.vocab().word(Vocabulary::kEos));
    std::vector<std::string> want = ex.sketch;
    want.push_back(model.vocab().word(Vocabulary::kEos));
    for (std::size_t t = 0; t < want.size(); ++t) {
      if (t < got.size() && got[t] == want[t]) ++correct;
    }
    positions += static_cast<long>(want.size());
    out.decoded.push_back(std::move(decoded));
  }
  EvalReport& r = out.report;
  r.responses = static_cast<long>(examples.size());
  r.bleu = corpus_bleu(hyps, golds);
  r.entity_f1 = entity_f1(hyps, golds, lexicon).f1();
  for (const auto& [domain, counts] : per_domain_f1(hyps, golds, labels, lexicon, domains)) {
    r.domain_f1[domain] = counts.f1();
  }
  r.copy_failure_rate = steps == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(steps);
  r.duplicate_entity_rate = duplicate_entity_rate(hyps, lexicon);
  r.sketch_accuracy = static_cast<double>(correct) / static_cast<double>(positions);
  return out;
}

TrainSummary train_model(GraphDialogModel& model, const Corpus& corpus,
                         const std::function<void(const EpochRecord&)>& on_epoch) {
  const RunConfig& cfg = model.config();
  if (corpus.train.empty()) throw DataError("training split is empty");
  const auto& selection = corpus.dev.empty() ? corpus.train : corpus.dev;

  std::vector<PreparedInput> inputs;
  inputs.reserve(corpus.train.size());
  for (const auto& ex : corpus.train) inputs.push_back(model.prepare(ex));

  AdamOptions adam_options;
  adam_options.learning_rate = cfg.learning_rate;
  AdamState adam(model.params(), adam_options);
  DropoutSource dropout(cfg.dropout, derive_seed(cfg.seed, "dropout"));

  TrainSummary summary;
  std::vector<Matrix> best;
  for (const auto& p : model.params()) best.push_back(p->value);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = make_batches(corpus.train, model.vocab(), static_cast<std::size_t>(cfg.batch_size),
                                      derive_seed(cfg.seed, "epoch " + std::to_string(epoch)));
    double total = 0.0;
    for (const auto& batch : batches) {
      Tape tape;
      Var loss = model.batch_loss(tape, corpus.train, inputs, batch, &dropout);
      total += loss.scalar();
      tape.backward(loss);
      adam.step(model.params());
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(batches.size());
    rec.selection_bleu = evaluate(model, selection, corpus.lexicon, corpus.domains).report.bleu;
    rec.improved = summary.best_epoch == 0 || rec.selection_bleu > summary.best_bleu;
    if (rec.improved) {
      summary.best_epoch = epoch;
      summary.best_bleu = rec.selection_bleu;
      std::size_t i = 0;
      for (const auto& p : model.params()) best[i++] = p->value;
    }
    summary.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  std::size_t i = 0;
  for (auto& p : model.params()) p->value = best[i++];
  return summary;
}

const char* code_version() { return GRAPHDIALOG_CODE_VERSION; }

nlohmann::ordered_json run_manifest(const std::string& command, const RunConfig& config) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["code_version"] = code_version();
  m["seed"] = config.seed;
  m["checkpoint_format"] = kCheckpointVersion;
  m["config"] = config.to_text();
  return m;
}

nlohmann::ordered_json decode_to_json(const TrainingExample& example, const GraphDialogModel::Decoded& decoded) {
  nlohmann::ordered_json j;
  j["dialogue"] = example.dialogue_id;
  j["turn"] = example.turn_index;
  j["sketch"] = decoded.sketch;
  j["response"] = decoded.surface;
  j["gold"] = example.response;
  std::vector<std::string> nodes;
  for (const auto& n : example.graph.nodes) nodes.push_back(n.token);
  j["nodes"] = nodes;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : decoded.steps) {
    nlohmann::ordered_json step;
    step["token"] = s.token;
    step["sketch_token"] = s.sketch_token;
    step["tag"] = s.is_tag;
    step["copied_node"] = s.copied_node;
    step["copy_failure"] = s.copy_failure;
    if (s.p_graph.size() > 0) {
      step["p_graph_argmax"] = argmax(s.p_graph);
      step["p_graph"] = std::vector<double>(s.p_graph.data(), s.p_graph.data() + s.p_graph.size());
    }
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j;
}

}  // namespace graphdialog
