#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace graphdialog {

// Every knob of a run. Serialized as "key = value" lines; '#' starts a
// comment.
struct RunConfig {
  std::string dataset;           // directory with split files
  std::string format = "jsonl";  // jsonl | kvr | multiwoz-kvr
  int hidden = 16;               // d: encoder state and word embedding size
  int kg_dim = 32;               // d_e
  int hops = 3;                  // K
  int k_max = 4;                 // predecessor slots per position
  double dropout = 0.1;
  bool dropout_override = false;  // allow dropout outside [0.1, 0.5]
  double learning_rate = 1e-3;
  int batch_size = 8;
  int epochs = 10;
  std::uint64_t seed = 1;
  bool tie_directions = false;
  bool sequential_only = false;
  bool query_projection = false;  // learned map from h_n^e to the KG query space
  bool encoder_bias = false;
  bool speaker_markers = true;
  std::string kg_write_attention = "next";  // next | same
  int max_decode_len = 40;

  // Throws ConfigError when a field is out of range or d_e != 2d without
  // query_projection.
  void validate() const;

  void set(const std::string& key, const std::string& value);
  std::string to_text() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  static const std::vector<std::string>& keys();
};

// Cartesian product of "key=v1,v2;key2=v3" over a base config.
std::vector<RunConfig> expand_grid(const RunConfig& base, const std::string& grid);

}  // namespace graphdialog
