#include "graphdialog/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace graphdialog {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_split_punct(char c) { return c == '.' || c == ',' || c == '?' || c == '!' || c == ';' || c == ':'; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

Speaker parse_speaker(const std::string& s, const std::string& where) {
  if (s == "user") return Speaker::kUser;
  if (s == "system") return Speaker::kSystem;
  throw DataError(where + ": speaker must be \"user\" or \"system\", got \"" + s + "\"");
}

std::vector<DepEdge> parse_deps(const json& j, const std::string& where) {
  std::vector<DepEdge> deps;
  if (j.is_null()) return deps;
  if (!j.is_array()) throw DataError(where + ": deps must be an array");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw DataError(where + ": dependency edge must be [head, dependent, label]");
    deps.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<std::string>()});
  }
  return deps;
}

std::vector<KbTriple> rows_to_triples(const ordered_json& rows) {
  static const std::vector<std::string> kSubjectKeys = {"poi", "event", "location"};
  std::vector<KbTriple> out;
  for (const auto& row : rows) {
    if (!row.is_object() || row.empty()) continue;
    std::string subject_key = row.begin().key();
    for (const auto& k : kSubjectKeys) {
      if (row.contains(k)) {
        subject_key = k;
        break;
      }
    }
    const std::string subject = normalize_entity(row.at(subject_key).get<std::string>());
    for (const auto& [key, value] : row.items()) {
      if (key == subject_key || !value.is_string()) continue;
      const std::string v = normalize_entity(value.get<std::string>());
      if (v.empty() || v == "-") continue;
      out.push_back({subject, key, v});
    }
  }
  return out;
}

Dialogue parse_dialogue(const ordered_json& j, const std::string& where) {
  Dialogue d;
  d.id = j.at("id").get<std::string>();
  d.domain = j.value("domain", std::string{});
  if (j.contains("kb")) {
    for (const auto& t : j.at("kb")) {
      if (!t.is_array() || t.size() != 3) throw DataError(where + ": kb entries must be [subject, relation, object]");
      d.kb.push_back({normalize_entity(t[0].get<std::string>()), t[1].get<std::string>(),
                      normalize_entity(t[2].get<std::string>())});
    }
  }
  if (j.contains("kb_rows")) {
    auto more = rows_to_triples(j.at("kb_rows"));
    d.kb.insert(d.kb.end(), more.begin(), more.end());
  }
  for (const auto& t : j.at("turns")) {
    Turn turn;
    turn.speaker = parse_speaker(t.at("speaker").get<std::string>(), where);
    if (t.contains("tokens")) {
      turn.tokens = t.at("tokens").get<std::vector<std::string>>();
    } else {
      turn.tokens = tokenize(t.at("text").get<std::string>());
    }
    if (turn.tokens.empty()) throw DataError(where + ": empty utterance");
    if (t.contains("deps")) turn.deps = parse_deps(t.at("deps"), where);
    d.turns.push_back(std::move(turn));
  }
  return d;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  for (const std::string& raw : split_ws(lower(text))) {
    std::size_t b = 0, e = raw.size();
    std::vector<std::string> trailing;
    while (b < e && is_split_punct(raw[b])) out.emplace_back(1, raw[b++]);
    while (e > b && is_split_punct(raw[e - 1])) trailing.emplace_back(1, raw[--e]);
    if (e > b) out.push_back(raw.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

std::string normalize_entity(const std::string& value) {
  std::string s = lower(trim(value));
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back('_');
    space = false;
    out.push_back(c);
  }
  return out;
}

void Ontology::add(const std::string& slot, const std::string& value) {
  const std::string v = normalize_entity(value);
  if (v.empty()) return;
  if (slot_of_.emplace(v, slot).second) slots_[slot].push_back(v);
}

std::optional<std::string> Ontology::slot_for(const std::string& token) const {
  auto it = slot_of_.find(token);
  if (it == slot_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Ontology::tags() const {
  std::vector<std::string> t;
  for (const auto& [slot, values] : slots_) t.push_back("@" + slot);
  return t;
}

std::set<std::string> Ontology::values() const {
  std::set<std::string> out;
  for (const auto& [v, slot] : slot_of_) out.insert(v);
  return out;
}

Ontology Ontology::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw DataError(std::string("ontology: ") + e.what());
  }
  if (!j.is_object()) throw DataError("ontology: top level must be an object of slot -> values");
  Ontology o;
  for (const auto& [slot, values] : j.items()) {
    if (!values.is_array()) throw DataError("ontology: values of slot " + slot + " must be an array");
    for (const auto& v : values) {
      if (v.is_string()) {
        o.add(slot, v.get<std::string>());
      } else if (v.is_object()) {
        for (const auto& [field, fv] : v.items()) {
          if (!fv.is_string()) continue;
          o.add(field == "type" ? slot + "_type" : field, fv.get<std::string>());
        }
      } else if (v.is_number()) {
        o.add(slot, v.dump());
      }
    }
  }
  return o;
}

Ontology Ontology::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Delexicalized delexicalize(const std::vector<std::string>& response, const KnowledgeGraph& graph,
                           const Ontology& ontology) {
  // First pass: which tokens are entities at all.
  std::vector<std::optional<std::string>> slot(response.size());
  for (std::size_t i = 0; i < response.size(); ++i) {
    const std::string& tok = response[i];
    slot[i] = ontology.slot_for(tok);
    if (slot[i]) continue;
    const auto nodes = graph.find(tok);
    if (nodes.empty()) continue;
    const KgNode& n = graph.nodes[static_cast<std::size_t>(nodes.front())];
    if (n.is_subject) {
      slot[i] = "entity";
    } else {
      slot[i] = graph.relations.at(std::minmax(nodes.front(), n.row)).front();
    }
  }
  Delexicalized out;
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (!slot[i]) {
      out.sketch.push_back(response[i]);
      out.labels.push_back(kNoLabel);
      continue;
    }
    out.sketch.push_back("@" + *slot[i]);
    const auto candidates = graph.find(response[i]);
    int best = kNoLabel, best_score = -1;
    for (int c : candidates) {
      const int row = graph.nodes[static_cast<std::size_t>(c)].row;
      int score = 0;
      for (std::size_t k = 0; k < response.size(); ++k) {
        if (k == i || !slot[k] || response[k] == response[i]) continue;
        const bool in_row = std::any_of(graph.nodes.begin(), graph.nodes.end(),
                                        [&](const KgNode& m) { return m.row == row && m.token == response[k]; });
        score += in_row ? 1 : 0;
      }
      if (score > best_score) {
        best = c;
        best_score = score;
      }
    }
    out.labels.push_back(best);
  }
  return out;
}

std::vector<std::string> relexicalize(const std::vector<std::string>& sketch, const std::vector<int>& labels,
                                      const KnowledgeGraph& graph) {
  if (sketch.size() != labels.size()) throw DimensionError("relexicalize: sketch/label length mismatch");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sketch.size(); ++i) {
    out.push_back(labels[i] == kNoLabel ? sketch[i] : graph.nodes.at(static_cast<std::size_t>(labels[i])).token);
  }
  return out;
}

DialogueGraph history_graph(const Dialogue& dialogue, std::size_t end, const ExampleOptions& options) {
  TokenSeq seq;
  std::vector<DepEdge> deps;
  for (std::size_t ti = 0; ti < end && ti < dialogue.turns.size(); ++ti) {
    const Turn& turn = dialogue.turns[ti];
    auto push = [&](const std::string& tok) {
      seq.tokens.push_back(tok);
      seq.speakers.push_back(turn.speaker);
      seq.turns.push_back(static_cast<int>(ti));
    };
    if (options.speaker_markers) push(turn.speaker == Speaker::kUser ? kUserMarker : kSystemMarker);
    const int offset = static_cast<int>(seq.tokens.size());
    for (const auto& tok : turn.tokens) push(tok);
    if (options.sequential_only) continue;
    const int n = static_cast<int>(turn.tokens.size());
    for (const DepEdge& d : turn.deps) {
      if (d.head < 0 || d.head >= n || d.dependent < 0 || d.dependent >= n) {
        throw DataError("dialogue " + dialogue.id + " turn " + std::to_string(ti) + ": dependency edge (" +
                        std::to_string(d.head) + ", " + std::to_string(d.dependent) + ") outside utterance of " +
                        std::to_string(n) + " tokens");
      }
      deps.push_back({d.head + offset, d.dependent + offset, d.label});
    }
  }
  return build_graph(std::move(seq), deps);
}

std::vector<TrainingExample> build_examples(const std::vector<Dialogue>& dialogues, const Ontology& ontology,
                                            const ExampleOptions& options) {
  std::vector<TrainingExample> out;
  for (const Dialogue& d : dialogues) {
    const KnowledgeGraph graph = build_kb_graph(d.kb);
    for (std::size_t ti = 1; ti < d.turns.size(); ++ti) {
      if (d.turns[ti].speaker != Speaker::kSystem) continue;
      TrainingExample ex;
      ex.dialogue_id = d.id;
      ex.domain = d.domain;
      ex.turn_index = static_cast<int>(ti);
      ex.history = history_graph(d, ti, options);
      ex.kb = d.kb;
      ex.graph = graph;
      ex.response = d.turns[ti].tokens;
      Delexicalized delex = delexicalize(ex.response, graph, ontology);
      ex.sketch = std::move(delex.sketch);
      ex.labels = std::move(delex.labels);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

const std::vector<std::string>& Vocabulary::specials() {
  static const std::vector<std::string> s = {"<pad>", "<sos>", "<eos>", "<unk>"};
  return s;
}

Vocabulary::Vocabulary() {
  for (const auto& w : specials()) push(w);
}

void Vocabulary::push(const std::string& w) {
  if (index_.count(w) != 0) return;
  index_.emplace(w, static_cast<int>(words_.size()));
  words_.push_back(w);
}

Vocabulary Vocabulary::from_counts(const std::map<std::string, long>& counts, const std::vector<std::string>& tags) {
  std::map<std::string, long> all = counts;
  for (const auto& t : tags) all.emplace(t, 0);
  for (const auto& s : specials()) all.erase(s);
  std::vector<std::pair<std::string, long>> order(all.begin(), all.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [w, c] : order) v.push(w);
  for (const auto& t : tags) v.tag_ids_.insert(v.index_.at(t));
  return v;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words, const std::set<std::string>& tags) {
  Vocabulary v;
  v.words_.clear();
  v.index_.clear();
  for (const auto& w : words) v.push(w);
  const auto& sp = specials();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (i >= v.words_.size() || v.words_[i] != sp[i]) throw DataError("vocabulary: special tokens missing or misplaced");
  }
  for (const auto& t : tags) {
    auto it = v.index_.find(t);
    if (it != v.index_.end()) v.tag_ids_.insert(it->second);
  }
  return v;
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::set<std::string> Vocabulary::tag_words() const {
  std::set<std::string> out;
  for (int id : tag_ids_) out.insert(words_[static_cast<std::size_t>(id)]);
  return out;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    for (unsigned char c : words_[i]) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= tag_ids_.count(static_cast<int>(i)) ? 0xff : 0x00;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Vocabulary build_vocab(const std::vector<TrainingExample>& examples, const Ontology& ontology) {
  std::map<std::string, long> counts;
  std::set<std::string> tags;
  for (const auto& t : ontology.tags()) tags.insert(t);
  for (const auto& ex : examples) {
    for (const auto& t : ex.history.tokens.tokens) ++counts[t];
    for (std::size_t i = 0; i < ex.sketch.size(); ++i) {
      ++counts[ex.sketch[i]];
      if (ex.labels[i] != kNoLabel) tags.insert(ex.sketch[i]);
    }
  }
  return Vocabulary::from_counts(counts, {tags.begin(), tags.end()});
}

Vocabulary build_entity_vocab(const std::vector<TrainingExample>& examples) {
  std::map<std::string, long> counts;
  std::set<std::string> seen_dialogues;
  for (const auto& ex : examples) {
    if (!seen_dialogues.insert(ex.dialogue_id).second) continue;
    for (const auto& n : ex.graph.nodes) ++counts[n.token];
  }
  return Vocabulary::from_counts(counts, {});
}

std::vector<Batch> make_batches(const std::vector<TrainingExample>& examples, const Vocabulary& vocab,
                                std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::uint64_t r = derive_seed(state++, "shuffle");
    std::swap(order[i - 1], order[static_cast<std::size_t>(r % i)]);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k) b.examples.push_back(order[k]);
    for (std::size_t idx : b.examples) {
      b.target_length = std::max(b.target_length, static_cast<int>(examples[idx].sketch.size()) + 1);
    }
    for (std::size_t idx : b.examples) {
      const TrainingExample& ex = examples[idx];
      std::vector<int> target, labels;
      Mask mask;
      for (std::size_t t = 0; t < ex.sketch.size(); ++t) {
        target.push_back(vocab.id(ex.sketch[t]));
        labels.push_back(ex.labels[t]);
        mask.push_back(1);
      }
      target.push_back(Vocabulary::kEos);
      labels.push_back(kNoLabel);
      mask.push_back(1);
      while (static_cast<int>(target.size()) < b.target_length) {
        target.push_back(Vocabulary::kPad);
        labels.push_back(kNoLabel);
        mask.push_back(0);
      }
      b.targets.push_back(std::move(target));
      b.labels.push_back(std::move(labels));
      b.masks.push_back(std::move(mask));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<Dialogue> load_dialogues_jsonl(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<Dialogue> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      out.push_back(parse_dialogue(ordered_json::parse(line), where));
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
  }
  return out;
}

std::vector<Dialogue> load_kvr(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<Dialogue> out;
  std::optional<Dialogue> cur;
  const std::string stem = path.stem().string();
  auto flush = [&]() {
    if (cur && !cur->turns.empty()) out.push_back(std::move(*cur));
    cur.reset();
  };
  auto start = [&]() {
    cur = Dialogue{};
    cur->id = stem + "-" + std::to_string(out.size());
  };
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const std::string t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.front() == '#') {
      flush();
      start();
      std::string dom = t;
      dom.erase(std::remove(dom.begin(), dom.end(), '#'), dom.end());
      cur->domain = trim(dom);
      continue;
    }
    if (!cur) start();
    const auto sp = t.find(' ');
    if (sp == std::string::npos) throw DataError(where + ": malformed record (no turn number)");
    int nid = 0;
    try {
      nid = std::stoi(t.substr(0, sp));
    } catch (const std::exception&) {
      throw DataError(where + ": malformed record (turn number)");
    }
    const std::string rest = t.substr(sp + 1);
    if (nid == 0) {
      auto f = split_ws(rest);
      if (f.size() < 3) throw DataError(where + ": KB line needs subject relation object");
      for (std::size_t k = 2; k < f.size(); ++k) {
        cur->kb.push_back({normalize_entity(f[0]), f[1], normalize_entity(f[k])});
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(rest);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (fields.size() < 2) throw DataError(where + ": malformed record (need user<TAB>system)");
    Turn user{Speaker::kUser, tokenize(fields[0]), {}};
    Turn system{Speaker::kSystem, tokenize(fields[1]), {}};
    if (user.tokens.empty() || system.tokens.empty()) throw DataError(where + ": empty utterance");
    cur->turns.push_back(std::move(user));
    cur->turns.push_back(std::move(system));
  }
  flush();
  return out;
}

void attach_dependencies(std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  std::map<std::string, Dialogue*> by_id;
  for (auto& d : dialogues) by_id[d.id] = &d;
  auto in = open_or_throw(path);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    const std::string id = j.at("dialogue").is_string() ? j.at("dialogue").get<std::string>()
                                                        : std::to_string(j.at("dialogue").get<long>());
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError(where + ": unknown dialogue " + id);
    const int turn = j.at("turn").get<int>();
    if (turn < 0 || turn >= static_cast<int>(it->second->turns.size())) {
      throw DataError(where + ": turn " + std::to_string(turn) + " out of range for dialogue " + id);
    }
    Turn& target = it->second->turns[static_cast<std::size_t>(turn)];
    if (j.contains("tokens") && j.at("tokens").get<std::vector<std::string>>() != target.tokens) {
      throw DataError(where + ": tokens do not match dialogue " + id + " turn " + std::to_string(turn));
    }
    target.deps = parse_deps(j.at("deps"), where);
  }
}

void save_dialogues_jsonl(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& d : dialogues) {
    ordered_json j;
    j["id"] = d.id;
    j["domain"] = d.domain;
    j["kb"] = json::array();
    for (const auto& t : d.kb) j["kb"].push_back({t.subject, t.relation, t.object});
    j["turns"] = json::array();
    for (const auto& t : d.turns) {
      ordered_json tj;
      tj["speaker"] = t.speaker == Speaker::kUser ? "user" : "system";
      tj["tokens"] = t.tokens;
      j["turns"].push_back(tj);
    }
    out << j.dump() << "\n";
  }
}

void save_dependencies_jsonl(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& d : dialogues) {
    for (std::size_t ti = 0; ti < d.turns.size(); ++ti) {
      ordered_json j;
      j["dialogue"] = d.id;
      j["turn"] = ti;
      j["tokens"] = d.turns[ti].tokens;
      j["deps"] = json::array();
      for (const auto& e : d.turns[ti].deps) j["deps"].push_back({e.head, e.dependent, e.label});
      out << j.dump() << "\n";
    }
  }
}

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::kJsonl;
  if (name == "kvr" || name == "smd") return DatasetFormat::kKvr;
  if (name == "multiwoz" || name == "multiwoz-kvr") return DatasetFormat::kMultiwozKvr;
  throw ConfigError("unknown dataset format: " + name);
}

const std::vector<Dialogue>& Dataset::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev" || name == "val" || name == "valid") return dev;
  if (name == "test") return test;
  throw ConfigError("unknown split: " + name);
}

const std::set<std::string>& multiwoz_kb_domains() {
  static const std::set<std::string> d = {"restaurant", "hotel", "attraction", "train"};
  return d;
}

Dataset load_dataset(const std::filesystem::path& dir, DatasetFormat format) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  Dataset ds;
  const std::string ext = format == DatasetFormat::kJsonl ? ".jsonl" : ".txt";
  auto load_split = [&](const std::string& name, bool required) {
    const fs::path p = dir / (name + ext);
    std::vector<Dialogue> out;
    if (!fs::exists(p)) {
      if (required) throw DataError("missing split file " + p.string());
      return out;
    }
    out = format == DatasetFormat::kJsonl ? load_dialogues_jsonl(p) : load_kvr(p);
    if (format == DatasetFormat::kMultiwozKvr) {
      std::erase_if(out, [](const Dialogue& d) { return multiwoz_kb_domains().count(d.domain) == 0; });
    }
    const fs::path deps = dir / (name + "_deps.jsonl");
    if (fs::exists(deps)) attach_dependencies(out, deps);
    return out;
  };
  ds.train = load_split("train", true);
  ds.dev = load_split("dev", false);
  ds.test = load_split("test", false);
  const fs::path onto = dir / "ontology.json";
  if (fs::exists(onto)) ds.ontology = Ontology::load(onto);
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    auto in = open_or_throw(manifest);
    json m;
    try {
      m = json::parse(in);
    } catch (const std::exception& e) {
      throw DataError(manifest.string() + ": " + e.what());
    }
    for (const char* split : {"train", "dev", "test"}) {
      if (!m.contains(split)) continue;
      const auto expected = m.at(split).get<std::size_t>();
      const auto actual = ds.split(split).size();
      if (expected != actual) {
        throw DataError(std::string("split ") + split + " has " + std::to_string(actual) +
                        " dialogues, manifest expects " + std::to_string(expected));
      }
    }
  }
  return ds;
}

}  // namespace graphdialog
