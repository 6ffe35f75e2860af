#include "graphdialog/model.hpp"

#include <algorithm>

namespace graphdialog {

Matrix DropoutSource::mask(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  const double keep = 1.0 - rate_;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const std::uint64_t r = derive_seed(state_++, "dropout");
    const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    m(i) = u < keep ? 1.0 / keep : 0.0;
  }
  return m;
}

GraphDialogModel::GraphDialogModel(RunConfig config, Vocabulary vocab, Vocabulary entities)
    : config_(std::move(config)), vocab_(std::move(vocab)), entities_(std::move(entities)) {
  config_.validate();
  const std::uint64_t seed = config_.seed;
  const int d = config_.hidden;
  word_embedding_ = &params_.add("embedding.word", fan_in_uniform(vocab_.size(), d, derive_seed(seed, "embedding.word")));
  forward_ = EncoderCellParams::create(params_, "encoder.fwd", d, d, config_.encoder_bias, seed);
  backward_ = config_.tie_directions ? forward_
                                     : EncoderCellParams::create(params_, "encoder.bwd", d, d, config_.encoder_bias, seed);
  if (config_.query_projection) {
    encoder_query_ = &params_.add("encoder.query_proj",
                                  fan_in_uniform(config_.kg_dim, 2 * d, derive_seed(seed, "encoder.query_proj")));
  }
  kg_ = KgParams::create(params_, "kg", entities_.size(), config_.kg_dim, config_.hops, seed);
  decoder_ = DecoderParams::create(params_, "decoder", d, decoder_hidden(), vocab_.size(), config_.kg_dim, seed);
}

PreparedInput GraphDialogModel::prepare(const TrainingExample& ex) const {
  PreparedInput in;
  for (const auto& tok : ex.history.tokens.tokens) in.token_ids.push_back(vocab_.id(tok));
  auto [fwd, bwd] = split_directional(ex.history);
  in.forward = pad_predecessors(fwd, config_.k_max);
  in.backward = pad_predecessors(bwd, config_.k_max);
  for (const auto& n : ex.graph.nodes) in.entity_ids.push_back(entities_.id(n.token));
  return in;
}

GraphDialogModel::Context GraphDialogModel::encode(Tape& tape, const TrainingExample& ex, const PreparedInput& in,
                                                   DropoutSource* dropout) const {
  Var table = tape.parameter(*word_embedding_);
  Var embedded = transpose(gather_rows(table, in.token_ids));  // d x n
  if (dropout != nullptr && dropout->rate() > 0.0) {
    embedded = apply_dropout(embedded, dropout->mask(embedded.rows(), embedded.cols()));
  }
  std::vector<Var> inputs;
  inputs.reserve(in.token_ids.size());
  for (Eigen::Index j = 0; j < embedded.cols(); ++j) inputs.push_back(column(embedded, j));

  BoundCell fwd(tape, forward_);
  BoundCell bwd(tape, backward_);
  Context ctx;
  ctx.encoder_state = encode_bidirectional(fwd, bwd, in.forward, in.backward, inputs);
  if (dropout != nullptr && dropout->rate() > 0.0) {
    ctx.encoder_state = apply_dropout(ctx.encoder_state, dropout->mask(ctx.encoder_state.rows(), 1));
  }

  if (ex.graph.empty()) {
    ctx.kg_output = tape.zeros(config_.kg_dim, 1);
  } else {
    const WriteAttention mode = config_.kg_write_attention == "same" ? WriteAttention::kSameHop : WriteAttention::kNextHop;
    ctx.memory = build_memory(tape, kg_, ex.graph, in.entity_ids, mode);
    Var query = encoder_query_ != nullptr ? matmul(tape.parameter(*encoder_query_), ctx.encoder_state) : ctx.encoder_state;
    MultiHopResult hop = multi_hop(query, *ctx.memory);
    ctx.kg_output = hop.output;
    ctx.initial_trace = std::move(hop.trace);
  }
  ctx.initial_hidden = init_hidden(ctx.encoder_state, ctx.kg_output);
  return ctx;
}

GraphDialogModel::StepOutputs GraphDialogModel::teacher_force(Tape& tape, const Context& ctx,
                                                              const std::vector<int>& targets,
                                                              const std::vector<int>& labels, bool all_graph) const {
  if (targets.size() != labels.size()) throw DimensionError("teacher_force: targets and labels differ in length");
  BoundDecoder dec(tape, decoder_);
  Var table = tape.parameter(*word_embedding_);
  StepOutputs out;
  Var hidden = ctx.initial_hidden;
  int previous = Vocabulary::kSos;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    hidden = gru_step(dec, row_as_column(table, previous), hidden);
    out.vocab_logits.push_back(vocab_logits(dec, hidden));
    if (ctx.memory && (all_graph || labels[t] != kNoLabel)) {
      out.graph_logits.push_back(graph_dist(dec, hidden, ctx.memory)->logits);
    } else {
      out.graph_logits.push_back(std::nullopt);
    }
    previous = targets[t];
  }
  return out;
}

Var GraphDialogModel::batch_loss(Tape& tape, const std::vector<TrainingExample>& examples,
                                 const std::vector<PreparedInput>& inputs, const Batch& batch,
                                 DropoutSource* dropout) const {
  std::vector<Var> vocab;
  std::vector<std::optional<Var>> graph;
  std::vector<StepTarget> targets;
  for (std::size_t b = 0; b < batch.examples.size(); ++b) {
    const std::size_t idx = batch.examples[b];
    const auto& mask = batch.masks[b];
    const auto real = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
    std::vector<int> tgt(batch.targets[b].begin(), batch.targets[b].begin() + static_cast<long>(real));
    std::vector<int> lab(batch.labels[b].begin(), batch.labels[b].begin() + static_cast<long>(real));
    Context ctx = encode(tape, examples[idx], inputs[idx], dropout);
    StepOutputs steps = teacher_force(tape, ctx, tgt, lab);
    for (std::size_t t = 0; t < real; ++t) {
      vocab.push_back(steps.vocab_logits[t]);
      graph.push_back(steps.graph_logits[t]);
      targets.push_back({tgt[t], lab[t], true});
    }
  }
  return joint_loss(vocab, graph, targets);
}

GraphDialogModel::Decoded GraphDialogModel::greedy_decode(const TrainingExample& ex, const PreparedInput& in,
                                                          int max_len) const {
  Tape tape;
  Context ctx = encode(tape, ex, in, nullptr);
  BoundDecoder dec(tape, decoder_);
  Var table = tape.parameter(*word_embedding_);
  Decoded out;
  Var hidden = ctx.initial_hidden;
  int previous = Vocabulary::kSos;
  for (int t = 0; t < max_len; ++t) {
    hidden = gru_step(dec, row_as_column(table, previous), hidden);
    const Vector p_vocab = vocab_dist(dec, hidden).value().col(0);
    std::optional<Vector> p_graph;
    if (auto g = graph_dist(dec, hidden, ctx.memory)) p_graph = g->p.value().col(0);
    const Emission e = copy_or_generate(p_vocab, p_graph, vocab_, ex.graph);
    if (e.sketch_id == Vocabulary::kEos) break;
    DecodeStep step;
    step.sketch_token = vocab_.word(e.sketch_id);
    step.token = e.token;
    step.is_tag = vocab_.is_tag(e.sketch_id);
    step.copied_node = e.copied_node;
    step.copy_failure = e.copy_failure;
    if (p_graph) step.p_graph = *p_graph;
    out.copy_failures += e.copy_failure ? 1 : 0;
    out.sketch.push_back(step.sketch_token);
    out.surface.push_back(step.token);
    out.steps.push_back(std::move(step));
    previous = e.sketch_id;
  }
  return out;
}

}  // namespace graphdialog
