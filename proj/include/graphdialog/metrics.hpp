#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace graphdialog {

using Sentence = std::vector<std::string>;

// Corpus BLEU (0-100) as computed by Moses multi-bleu.perl with a single
// reference: clipped 1-4-gram counts pooled over the corpus, geometric
// mean, brevity penalty exp(1 - r/c) when c < r, and 0 when any order has
// no match. Throws ContractError on an empty corpus or count mismatch.
double corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references);

// Exact-token entity matcher shared with delexicalization.
class EntityLexicon {
 public:
  EntityLexicon() = default;
  explicit EntityLexicon(std::set<std::string> entities) : entities_(std::move(entities)) {}
  void add(const std::string& entity) { entities_.insert(entity); }
  bool contains(const std::string& token) const { return entities_.count(token) != 0; }
  Sentence extract(const Sentence& tokens) const;
  std::size_t size() const { return entities_.size(); }

 private:
  std::set<std::string> entities_;
};

struct F1Counts {
  long true_positive = 0;
  long false_positive = 0;
  long false_negative = 0;

  // A corpus with no gold and no predicted entities scores 1.0.
  double precision() const;
  double recall() const;
  double f1() const;
  F1Counts& operator+=(const F1Counts& o);
};

// Multiset overlap of one response's entities.
F1Counts entity_counts(const Sentence& hypothesis, const Sentence& gold, const EntityLexicon& lexicon);

// Micro-averaged: counts are pooled over responses before dividing, so
// entity-free responses (gold and prediction) contribute nothing.
F1Counts entity_f1(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& golds,
                   const EntityLexicon& lexicon);

// entity_f1 per domain label. Labels outside `known_domains` raise DataError
// (an empty set accepts every label).
std::map<std::string, F1Counts> per_domain_f1(const std::vector<Sentence>& hypotheses,
                                              const std::vector<Sentence>& golds,
                                              const std::vector<std::string>& domains, const EntityLexicon& lexicon,
                                              const std::set<std::string>& known_domains = {});

// Fraction of responses that repeat a KB entity.
double duplicate_entity_rate(const std::vector<Sentence>& hypotheses, const EntityLexicon& lexicon);

struct EvalReport {
  double bleu = 0.0;
  double entity_f1 = 0.0;
  std::map<std::string, double> domain_f1;
  double copy_failure_rate = 0.0;
  double duplicate_entity_rate = 0.0;
  double sketch_accuracy = 0.0;
  long responses = 0;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

}  // namespace graphdialog
