#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphdialog/config.hpp"
#include "graphdialog/corpus.hpp"
#include "graphdialog/decoder.hpp"
#include "graphdialog/graph_encoder.hpp"
#include "graphdialog/knowledge_graph.hpp"

namespace graphdialog {

// Inverted dropout with a deterministic mask stream.
class DropoutSource {
 public:
  DropoutSource(double rate, std::uint64_t seed) : rate_(rate), state_(seed) {}
  Matrix mask(Eigen::Index rows, Eigen::Index cols);
  double rate() const { return rate_; }

 private:
  double rate_;
  std::uint64_t state_;
};

// Tape-independent per-example inputs, computed once and reused.
struct PreparedInput {
  std::vector<int> token_ids;
  PredecessorTable forward;
  PredecessorTable backward;
  std::vector<int> entity_ids;
};

class GraphDialogModel {
 public:
  GraphDialogModel(RunConfig config, Vocabulary vocab, Vocabulary entities);

  const RunConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const Vocabulary& vocab() const { return vocab_; }
  const Vocabulary& entities() const { return entities_; }
  int decoder_hidden() const { return 2 * config_.hidden + config_.kg_dim; }

  const EncoderCellParams& forward_cell() const { return forward_; }
  const EncoderCellParams& backward_cell() const { return backward_; }
  const KgParams& kg_params() const { return kg_; }
  const DecoderParams& decoder_params() const { return decoder_; }

  PreparedInput prepare(const TrainingExample& ex) const;

  struct Context {
    Var encoder_state;  // h_n^e
    std::optional<KgMemory> memory;
    Var kg_output;  // o^K, zero without a graph
    Var initial_hidden;
    std::optional<HopTrace> initial_trace;
  };
  Context encode(Tape& tape, const TrainingExample& ex, const PreparedInput& in, DropoutSource* dropout) const;

  struct StepOutputs {
    std::vector<Var> vocab_logits;
    std::vector<std::optional<Var>> graph_logits;
  };
  // Teacher forcing: inputs <sos>, y_1, ..., y_{T-1}. Graph logits are
  // produced at steps with a node label, or at every step when `all_graph`.
  StepOutputs teacher_force(Tape& tape, const Context& ctx, const std::vector<int>& targets,
                            const std::vector<int>& labels, bool all_graph = false) const;

  // Token-mean joint loss over every real timestep of the batch.
  Var batch_loss(Tape& tape, const std::vector<TrainingExample>& examples, const std::vector<PreparedInput>& inputs,
                 const Batch& batch, DropoutSource* dropout) const;

  struct DecodeStep {
    std::string sketch_token;
    std::string token;
    bool is_tag = false;
    int copied_node = kNoLabel;
    bool copy_failure = false;
    Vector p_graph;  // empty without a graph
  };
  struct Decoded {
    std::vector<DecodeStep> steps;
    std::vector<std::string> sketch;
    std::vector<std::string> surface;
    int copy_failures = 0;
  };
  Decoded greedy_decode(const TrainingExample& ex, const PreparedInput& in, int max_len) const;

 private:
  RunConfig config_;
  Vocabulary vocab_;
  Vocabulary entities_;
  ParameterStore params_;
  Parameter* word_embedding_ = nullptr;
  Parameter* encoder_query_ = nullptr;
  EncoderCellParams forward_;
  EncoderCellParams backward_;
  KgParams kg_;
  DecoderParams decoder_;
};

}  // namespace graphdialog
