#pragma once

#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphdialog/metrics.hpp"
#include "graphdialog/model.hpp"

namespace graphdialog {

// Examples, vocabularies and the entity lexicon for one run.
struct Corpus {
  Ontology ontology;
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> dev;
  std::vector<TrainingExample> test;
  Vocabulary vocab;
  Vocabulary entities;
  EntityLexicon lexicon;  // KB surface forms of every split plus ontology values
  std::set<std::string> domains;

  const std::vector<TrainingExample>& split(const std::string& name) const;
};

// Vocabularies come from the training split only.
Corpus build_corpus(const Dataset& dataset, const RunConfig& config);
Corpus load_corpus(const RunConfig& config);

struct EvalOutput {
  EvalReport report;
  std::vector<GraphDialogModel::Decoded> decoded;
};

// Greedy decode of every example followed by the metric suite. Sketch
// accuracy compares decoded and gold sketches position by position,
// eos included.
EvalOutput evaluate(const GraphDialogModel& model, const std::vector<TrainingExample>& examples,
                    const EntityLexicon& lexicon, const std::set<std::string>& domains);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double selection_bleu = 0.0;
  bool improved = false;
};

struct TrainSummary {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0: initial parameters
  double best_bleu = 0.0;
};

// Adam over seeded batches; after every epoch the model is scored by BLEU
// on the dev split (the training split when there is no dev data) and
// the best parameters are restored at the end.
TrainSummary train_model(GraphDialogModel& model, const Corpus& corpus,
                         const std::function<void(const EpochRecord&)>& on_epoch = {});

const char* code_version();

// Config snapshot, seed and code version.
nlohmann::ordered_json run_manifest(const std::string& command, const RunConfig& config);

// Per-step record of one decoded example, with P_graph weights.
nlohmann::ordered_json decode_to_json(const TrainingExample& example, const GraphDialogModel::Decoded& decoded);

}  // namespace graphdialog
