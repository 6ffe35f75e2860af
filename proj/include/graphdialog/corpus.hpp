#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graphdialog/dialogue_graph.hpp"
#include "graphdialog/knowledge_graph.hpp"

namespace graphdialog {

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::vector<std::string> tokens;
  std::vector<DepEdge> deps;  // indices local to this utterance
};

struct Dialogue {
  std::string id;
  std::string domain;
  std::vector<KbTriple> kb;
  std::vector<Turn> turns;
};

// Lowercases and splits on whitespace, detaching . , ? ! ; : from word edges.
std::vector<std::string> tokenize(const std::string& text);

// Entity normal form: lowercase with spaces replaced by underscores.
std::string normalize_entity(const std::string& value);

// Slot types with their values; every value maps to exactly one slot
// (first declaration wins).
class Ontology {
 public:
  void add(const std::string& slot, const std::string& value);
  std::optional<std::string> slot_for(const std::string& token) const;
  std::vector<std::string> tags() const;  // "@slot", sorted
  const std::map<std::string, std::vector<std::string>>& slots() const { return slots_; }
  std::set<std::string> values() const;

  // {"slot": ["value", ...]}. Object-valued entries are flattened field by
  // field; a "type" field under slot S becomes slot S_type.
  static Ontology load(const std::filesystem::path& path);
  static Ontology from_json_text(const std::string& text);

 private:
  std::map<std::string, std::vector<std::string>> slots_;
  std::map<std::string, std::string> slot_of_;
};

inline constexpr int kNoLabel = -1;

struct TrainingExample {
  std::string dialogue_id;
  std::string domain;
  int turn_index = 0;  // index of the system turn being predicted
  DialogueGraph history;
  std::vector<KbTriple> kb;
  KnowledgeGraph graph;
  std::vector<std::string> response;  // gold surface tokens
  std::vector<std::string> sketch;
  std::vector<int> labels;  // node id or kNoLabel, one per sketch token
};

struct Delexicalized {
  std::vector<std::string> sketch;
  std::vector<int> labels;
};

// Entity tokens become @slot tags; the label is the KB node carrying the
// token, or kNoLabel when the value is only known to the ontology.
Delexicalized delexicalize(const std::vector<std::string>& response, const KnowledgeGraph& graph,
                           const Ontology& ontology);

// Fills tags from their labelled nodes; unlabelled tags stay as tags.
std::vector<std::string> relexicalize(const std::vector<std::string>& sketch, const std::vector<int>& labels,
                                      const KnowledgeGraph& graph);

struct ExampleOptions {
  bool speaker_markers = true;   // prefix each utterance with $u / $s
  bool sequential_only = false;  // drop dependency edges
};

inline const std::string kUserMarker = "$u";
inline const std::string kSystemMarker = "$s";

// Concatenated history of turns [0, end) with per-utterance dependency
// edges shifted to history positions.
DialogueGraph history_graph(const Dialogue& dialogue, std::size_t end, const ExampleOptions& options);

// One example per system turn that has at least one preceding turn.
std::vector<TrainingExample> build_examples(const std::vector<Dialogue>& dialogues, const Ontology& ontology,
                                            const ExampleOptions& options = {});

// Word list with stable ids: specials first, then (frequency desc, word).
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static const std::vector<std::string>& specials();

  Vocabulary();
  static Vocabulary from_counts(const std::map<std::string, long>& counts, const std::vector<std::string>& tags);
  static Vocabulary from_words(const std::vector<std::string>& words, const std::set<std::string>& tags);

  int id(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const { return index_.count(word) != 0; }
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  bool is_tag(int id) const { return tag_ids_.count(id) != 0; }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  std::set<std::string> tag_words() const;
  std::uint64_t fingerprint() const;

 private:
  void push(const std::string& w);
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
  std::set<int> tag_ids_;
};

// History tokens, sketch tokens, every ontology tag and every tag the
// delexicalizer produced from a KB relation.
Vocabulary build_vocab(const std::vector<TrainingExample>& examples, const Ontology& ontology);
// Node tokens of every knowledge graph.
Vocabulary build_entity_vocab(const std::vector<TrainingExample>& examples);

struct Batch {
  std::vector<std::size_t> examples;
  int target_length = 0;                 // padded length including eos
  std::vector<std::vector<int>> targets;  // vocab ids, eos-terminated, kPad padded
  std::vector<std::vector<int>> labels;   // node ids, kNoLabel at pads / eos
  std::vector<Mask> masks;                // 1 on real timesteps
};

// Seeded shuffle, then fixed-size batches padded to their own max length.
std::vector<Batch> make_batches(const std::vector<TrainingExample>& examples, const Vocabulary& vocab,
                                std::size_t batch_size, std::uint64_t seed);

// Loaders. Malformed records raise DataError naming file and line.
std::vector<Dialogue> load_dialogues_jsonl(const std::filesystem::path& path);
// Tab-separated KVR text: "#domain#" header, "0 subj rel obj" KB lines,
// "n user<TAB>system<TAB>[entities]" turn lines, blank line between dialogues.
std::vector<Dialogue> load_kvr(const std::filesystem::path& path);
// Per-turn JSON lines {"dialogue","turn","tokens","deps"} merged into turns.
void attach_dependencies(std::vector<Dialogue>& dialogues, const std::filesystem::path& path);
void save_dialogues_jsonl(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path);
void save_dependencies_jsonl(const std::vector<Dialogue>& dialogues, const std::filesystem::path& path);

enum class DatasetFormat { kJsonl, kKvr, kMultiwozKvr };
DatasetFormat parse_dataset_format(const std::string& name);

struct Dataset {
  std::vector<Dialogue> train, dev, test;
  Ontology ontology;
  const std::vector<Dialogue>& split(const std::string& name) const;
};

// MultiWOZ domains with KB support.
const std::set<std::string>& multiwoz_kb_domains();

// Reads {train,dev,test}.{jsonl|txt}, optional *_deps.jsonl, ontology.json,
// and checks counts against manifest.json when present.
Dataset load_dataset(const std::filesystem::path& dir, DatasetFormat format);

}  // namespace graphdialog
