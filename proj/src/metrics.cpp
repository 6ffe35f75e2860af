#include "graphdialog/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "graphdialog/error.hpp"

namespace graphdialog {

namespace {

using NgramCounts = std::map<std::vector<std::string>, long>;

NgramCounts ngrams(const Sentence& s, std::size_t n) {
  NgramCounts c;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++c[Sentence(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + n))];
  return c;
}

std::map<std::string, long> bag(const Sentence& s) {
  std::map<std::string, long> b;
  for (const auto& t : s) ++b[t];
  return b;
}

}  // namespace

double corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references) {
  if (hypotheses.empty()) throw ContractError("corpus_bleu: empty corpus");
  if (hypotheses.size() != references.size()) {
    throw ContractError("corpus_bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                        std::to_string(references.size()) + " references");
  }
  constexpr std::size_t kOrder = 4;
  std::array<long, kOrder> matched{}, total{};
  long hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    hyp_len += static_cast<long>(hypotheses[s].size());
    ref_len += static_cast<long>(references[s].size());
    for (std::size_t n = 1; n <= kOrder; ++n) {
      const NgramCounts h = ngrams(hypotheses[s], n);
      const NgramCounts r = ngrams(references[s], n);
      for (const auto& [g, c] : h) {
        auto it = r.find(g);
        matched[n - 1] += std::min(c, it == r.end() ? 0L : it->second);
        total[n - 1] += c;
      }
    }
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kOrder; ++n) {
    if (matched[n] == 0 || total[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)) : 1.0;
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(kOrder));
}

Sentence EntityLexicon::extract(const Sentence& tokens) const {
  Sentence out;
  for (const auto& t : tokens) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

double F1Counts::precision() const {
  const long d = true_positive + false_positive;
  if (d == 0) return false_negative == 0 ? 1.0 : 0.0;
  return static_cast<double>(true_positive) / static_cast<double>(d);
}

double F1Counts::recall() const {
  const long d = true_positive + false_negative;
  if (d == 0) return false_positive == 0 ? 1.0 : 0.0;
  return static_cast<double>(true_positive) / static_cast<double>(d);
}

double F1Counts::f1() const {
  const long d = 2 * true_positive + false_positive + false_negative;
  if (d == 0) return 1.0;
  return 2.0 * static_cast<double>(true_positive) / static_cast<double>(d);
}

F1Counts& F1Counts::operator+=(const F1Counts& o) {
  true_positive += o.true_positive;
  false_positive += o.false_positive;
  false_negative += o.false_negative;
  return *this;
}

F1Counts entity_counts(const Sentence& hypothesis, const Sentence& gold, const EntityLexicon& lexicon) {
  const auto predicted = bag(lexicon.extract(hypothesis));
  const auto expected = bag(lexicon.extract(gold));
  F1Counts c;
  for (const auto& [e, n] : predicted) {
    auto it = expected.find(e);
    const long hit = std::min(n, it == expected.end() ? 0L : it->second);
    c.true_positive += hit;
    c.false_positive += n - hit;
  }
  for (const auto& [e, n] : expected) {
    auto it = predicted.find(e);
    c.false_negative += n - std::min(n, it == predicted.end() ? 0L : it->second);
  }
  return c;
}

F1Counts entity_f1(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& golds,
                   const EntityLexicon& lexicon) {
  if (hypotheses.size() != golds.size()) throw ContractError("entity_f1: hypothesis/gold count mismatch");
  F1Counts total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += entity_counts(hypotheses[i], golds[i], lexicon);
  return total;
}

std::map<std::string, F1Counts> per_domain_f1(const std::vector<Sentence>& hypotheses,
                                              const std::vector<Sentence>& golds,
                                              const std::vector<std::string>& domains, const EntityLexicon& lexicon,
                                              const std::set<std::string>& known_domains) {
  if (hypotheses.size() != golds.size() || hypotheses.size() != domains.size()) {
    throw ContractError("per_domain_f1: hypothesis/gold/domain count mismatch");
  }
  std::map<std::string, F1Counts> out;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (!known_domains.empty() && known_domains.count(domains[i]) == 0) {
      throw DataError("per_domain_f1: unknown domain label \"" + domains[i] + "\"");
    }
    out[domains[i]] += entity_counts(hypotheses[i], golds[i], lexicon);
  }
  return out;
}

double duplicate_entity_rate(const std::vector<Sentence>& hypotheses, const EntityLexicon& lexicon) {
  if (hypotheses.empty()) return 0.0;
  long dup = 0;
  for (const auto& h : hypotheses) {
    const auto b = bag(lexicon.extract(h));
    dup += std::any_of(b.begin(), b.end(), [](const auto& kv) { return kv.second > 1; }) ? 1 : 0;
  }
  return static_cast<double>(dup) / static_cast<double>(hypotheses.size());
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["responses"] = responses;
  j["bleu"] = bleu;
  j["entity_f1"] = entity_f1;
  j["domain_f1"] = domain_f1;
  j["sketch_accuracy"] = sketch_accuracy;
  j["copy_failure_rate"] = copy_failure_rate;
  j["duplicate_entity_rate"] = duplicate_entity_rate;
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "responses              " << responses << "\n";
  os << "BLEU                   " << bleu << "\n";
  os << "Entity F1              " << entity_f1 << "\n";
  for (const auto& [d, f] : domain_f1) os << "  " << std::left << std::setw(21) << (d + " F1") << f << "\n";
  os << "sketch token accuracy  " << sketch_accuracy << "\n";
  os << "copy failure rate      " << copy_failure_rate << "\n";
  os << "duplicate entity rate  " << duplicate_entity_rate << "\n";
  return os.str();
}

}  // namespace graphdialog
