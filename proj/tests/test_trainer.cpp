#include <gtest/gtest.h>

#include <filesystem>

#include "graphdialog/checkpoint.hpp"
#include "graphdialog/toy_corpus.hpp"
#include "graphdialog/trainer.hpp"

using namespace graphdialog;
namespace fs = std::filesystem;

namespace {

Corpus toy_corpus(RunConfig& config) {
  Dataset ds;
  ds.train = toy_dialogues(6, 2);
  ds.test = toy_dialogues(2, 40, "held");
  ds.ontology = toy_ontology();
  config.hidden = 6;
  config.kg_dim = 12;
  config.hops = 2;
  config.batch_size = 4;
  config.learning_rate = 0.01;
  return build_corpus(ds, config);
}

}  // namespace

TEST(Trainer, ZeroEpochsKeepsInitialParameters) {
  RunConfig config;
  const Corpus corpus = toy_corpus(config);
  config.epochs = 0;
  GraphDialogModel fresh(config, corpus.vocab, corpus.entities);
  GraphDialogModel trained(config, corpus.vocab, corpus.entities);
  const auto summary = train_model(trained, corpus);
  EXPECT_TRUE(summary.epochs.empty());
  EXPECT_EQ(summary.best_epoch, 0);
  for (std::size_t i = 0; i < fresh.params().size(); ++i) EXPECT_EQ(fresh.params()[i].value, trained.params()[i].value);
}

TEST(Trainer, SeededRunsAreIdentical) {
  RunConfig config;
  const Corpus corpus = toy_corpus(config);
  config.epochs = 3;
  GraphDialogModel a(config, corpus.vocab, corpus.entities), b(config, corpus.vocab, corpus.entities);
  const auto sa = train_model(a, corpus), sb = train_model(b, corpus);
  ASSERT_EQ(sa.epochs.size(), 3U);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(sa.epochs[e].train_loss, sb.epochs[e].train_loss);
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].value, b.params()[i].value);
  EXPECT_EQ(evaluate(a, corpus.test, corpus.lexicon, corpus.domains).report,
            evaluate(b, corpus.test, corpus.lexicon, corpus.domains).report);
}

TEST(Evaluate, RepeatableAndMatchesHandScoring) {
  RunConfig config;
  const Corpus corpus = toy_corpus(config);
  config.epochs = 2;
  GraphDialogModel model(config, corpus.vocab, corpus.entities);
  train_model(model, corpus);
  const auto out = evaluate(model, corpus.train, corpus.lexicon, corpus.domains);
  EXPECT_EQ(out.report, evaluate(model, corpus.train, corpus.lexicon, corpus.domains).report);
  ASSERT_EQ(out.decoded.size(), corpus.train.size());

  long correct = 0, positions = 0, failures = 0, steps = 0;
  std::vector<Sentence> hyp, gold;
  for (std::size_t i = 0; i < out.decoded.size(); ++i) {
    auto g = corpus.train[i].sketch;
    g.push_back("<eos>");
    auto d = out.decoded[i].sketch;
    d.push_back("<eos>");
    for (std::size_t p = 0; p < g.size(); ++p) {
      ++positions;
      if (p < d.size() && g[p] == d[p]) ++correct;
    }
    for (const auto& s : out.decoded[i].steps) {
      ++steps;
      failures += s.copy_failure ? 1 : 0;
    }
    hyp.push_back(out.decoded[i].surface);
    gold.push_back(corpus.train[i].response);
  }
  EXPECT_NEAR(out.report.sketch_accuracy, static_cast<double>(correct) / positions, 1e-12);
  EXPECT_EQ(out.report.bleu, corpus_bleu(hyp, gold));
  EXPECT_EQ(out.report.entity_f1, entity_f1(hyp, gold, corpus.lexicon).f1());
  EXPECT_EQ(out.report.responses, static_cast<long>(corpus.train.size()));
  EXPECT_GE(out.report.copy_failure_rate, 0.0);
  EXPECT_LE(out.report.copy_failure_rate, 1.0);
}

TEST(Evaluate, GoldAsPredictionIsPerfect) {
  RunConfig config;
  const Corpus corpus = toy_corpus(config);
  std::vector<Sentence> gold;
  for (const auto& ex : corpus.test) gold.push_back(ex.response);
  EXPECT_EQ(corpus_bleu(gold, gold), 100.0);
  EXPECT_EQ(entity_f1(gold, gold, corpus.lexicon).f1(), 1.0);
}

TEST(Corpus, SplitNamesAndLexicon) {
  RunConfig config;
  const Corpus corpus = toy_corpus(config);
  EXPECT_EQ(&corpus.split("val"), &corpus.dev);
  EXPECT_EQ(&corpus.split("test"), &corpus.test);
  EXPECT_THROW(corpus.split("nope"), ConfigError);
  for (const auto& ex : corpus.test) {
    for (const auto& t : ex.kb) EXPECT_TRUE(corpus.lexicon.contains(t.object));
  }
}

TEST(Manifest, RecordsConfigSeedAndVersion) {
  RunConfig config;
  config.seed = 42;
  const auto m = run_manifest("train", config);
  EXPECT_EQ(m.at("command"), "train");
  EXPECT_EQ(m.at("seed"), 42);
  EXPECT_EQ(m.at("code_version"), code_version());
  EXPECT_EQ(RunConfig::parse(m.at("config").get<std::string>()).to_text(), config.to_text());
}
