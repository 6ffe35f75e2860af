#include "graphdialog/toy_corpus.hpp"

#include <fstream>

#include "graphdialog/parameter.hpp"
#include "json.hpp"

namespace graphdialog {
namespace {

const std::vector<std::string> kNames = {"palo_alto_garage", "civic_center_garage", "stanford_oval_parking",
                                         "valero",           "chevron",             "four_seasons",
                                         "pizza_chicago",    "cafe_venetia",        "teavana",
                                         "stanford_express_care", "willows_market", "home"};
const std::vector<std::string> kTypes = {"garage", "gas_station", "hotel", "restaurant", "cafe", "hospital"};
const std::vector<std::string> kStreets = {"alma_st", "el_camino_real", "ames_ave", "university_ave",
                                           "arastradero_rd", "hacienda_way"};

struct Utterance {
  std::vector<std::string> tokens;
  std::vector<DepEdge> deps;
};

Turn make_turn(Speaker s, Utterance u) { return Turn{s, std::move(u.tokens), std::move(u.deps)}; }

}  // namespace

std::vector<Dialogue> toy_dialogues(int count, std::uint64_t seed, const std::string& id_prefix) {
  std::vector<Dialogue> out;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t r = derive_seed(seed, id_prefix + std::to_string(i));
    const std::string name = kNames[(r >> 8) % kNames.size()];
    const std::string type = kTypes[(r >> 16) % kTypes.size()];
    const std::string distance = std::to_string(1 + (r >> 24) % 7) + "_miles";
    const std::string address = std::to_string(100 + (r >> 32) % 800) + "_" + kStreets[(r >> 44) % kStreets.size()];

    Dialogue d;
    d.id = id_prefix + "_" + std::to_string(i);
    d.domain = "navigate";
    d.kb = {{name, "poi_type", type}, {name, "distance", distance}, {name, "address", address}};
    // where is the nearest <type>
    d.turns.push_back(make_turn(Speaker::kUser, {{"where", "is", "the", "nearest", type},
                                                 {{1, 0, "advmod"}, {1, 4, "nsubj"}, {4, 2, "det"}, {4, 3, "amod"}}}));
    // <name> is <distance> away
    d.turns.push_back(make_turn(Speaker::kSystem, {{name, "is", distance, "away"},
                                                   {{1, 0, "nsubj"}, {1, 3, "advmod"}, {3, 2, "npadvmod"}}}));
    // what is the address
    d.turns.push_back(make_turn(Speaker::kUser, {{"what", "is", "the", "address"},
                                                 {{1, 0, "attr"}, {1, 3, "nsubj"}, {3, 2, "det"}}}));
    // <name> is at <address>
    d.turns.push_back(make_turn(Speaker::kSystem, {{name, "is", "at", address},
                                                   {{1, 0, "nsubj"}, {1, 2, "prep"}, {2, 3, "pobj"}}}));
    // thanks
    d.turns.push_back(make_turn(Speaker::kUser, {{"thanks"}, {}}));
    d.turns.push_back(make_turn(Speaker::kSystem, {{"you", "are", "welcome"}, {{1, 0, "nsubj"}, {1, 2, "acomp"}}}));
    out.push_back(std::move(d));
  }
  return out;
}

Ontology toy_ontology() {
  Ontology o;
  for (const auto& n : kNames) o.add("poi", n);
  for (const auto& t : kTypes) o.add("poi_type", t);
  for (int m = 1; m <= 7; ++m) o.add("distance", std::to_string(m) + "_miles");
  return o;
}

void write_toy_dataset(const std::filesystem::path& dir, int train_count, int test_count, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto train = toy_dialogues(train_count, seed, "toy");
  const auto test = toy_dialogues(test_count, seed, "toytest");
  save_dialogues_jsonl(train, dir / "train.jsonl");
  save_dependencies_jsonl(train, dir / "train_deps.jsonl");
  save_dialogues_jsonl(test, dir / "test.jsonl");
  save_dependencies_jsonl(test, dir / "test_deps.jsonl");
  nlohmann::ordered_json onto;
  const Ontology ontology = toy_ontology();
  for (const auto& [slot, values] : ontology.slots()) onto[slot] = values;
  std::ofstream(dir / "ontology.json") << onto.dump(2) << "\n";
  nlohmann::ordered_json manifest;
  manifest["train"] = train_count;
  manifest["dev"] = 0;
  manifest["test"] = test_count;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace graphdialog
