#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "graphdialog/corpus.hpp"

namespace graphdialog {

// Synthetic navigation dialogues: one KB row per dialogue (a poi with
// poi_type, distance and address), two system turns that mention its
// entities, and hand-written dependency edges for every utterance.
std::vector<Dialogue> toy_dialogues(int count, std::uint64_t seed, const std::string& id_prefix = "toy");
Ontology toy_ontology();

// train.jsonl, test.jsonl, ontology.json and manifest.json.
void write_toy_dataset(const std::filesystem::path& dir, int train_count = 20, int test_count = 4,
                       std::uint64_t seed = 7);

}  // namespace graphdialog
