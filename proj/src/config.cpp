#include "graphdialog/config.hpp"

#include <fstream>
#include <sstream>

#include "graphdialog/error.hpp"

namespace graphdialog {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + key + ": expected a boolean, got \"" + v + "\"");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (!is || !is.eof()) throw ConfigError("config key " + key + ": cannot parse \"" + v + "\"");
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "dataset", "format", "hidden", "kg_dim", "hops", "k_max", "dropout", "dropout_override", "learning_rate",
      "batch_size", "epochs", "seed", "tie_directions", "sequential_only", "query_projection", "encoder_bias",
      "speaker_markers", "kg_write_attention", "max_decode_len"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "dataset") dataset = v;
  else if (key == "format") format = v;
  else if (key == "hidden") hidden = parse_number<int>(key, v);
  else if (key == "kg_dim") kg_dim = parse_number<int>(key, v);
  else if (key == "hops") hops = parse_number<int>(key, v);
  else if (key == "k_max") k_max = parse_number<int>(key, v);
  else if (key == "dropout") dropout = parse_number<double>(key, v);
  else if (key == "dropout_override") dropout_override = parse_bool(key, v);
  else if (key == "learning_rate") learning_rate = parse_number<double>(key, v);
  else if (key == "batch_size") batch_size = parse_number<int>(key, v);
  else if (key == "epochs") epochs = parse_number<int>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "tie_directions") tie_directions = parse_bool(key, v);
  else if (key == "sequential_only") sequential_only = parse_bool(key, v);
  else if (key == "query_projection") query_projection = parse_bool(key, v);
  else if (key == "encoder_bias") encoder_bias = parse_bool(key, v);
  else if (key == "speaker_markers") speaker_markers = parse_bool(key, v);
  else if (key == "kg_write_attention") kg_write_attention = v;
  else if (key == "max_decode_len") max_decode_len = parse_number<int>(key, v);
  else throw ConfigError("unknown config key: " + key);
}

void RunConfig::validate() const {
  if (hidden < 1) throw ConfigError("hidden must be positive");
  if (kg_dim < 1) throw ConfigError("kg_dim must be positive");
  if (!query_projection && kg_dim != 2 * hidden) {
    throw ConfigError("kg_dim must equal 2 * hidden (" + std::to_string(2 * hidden) +
                      ") unless query_projection is enabled");
  }
  if (hops < 1) throw ConfigError("hops (K) must be at least 1");
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (dropout_override) {
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  } else if (dropout < 0.1 || dropout > 0.5) {
    throw ConfigError("dropout must lie in [0.1, 0.5]; set dropout_override = true to go outside");
  }
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (kg_write_attention != "next" && kg_write_attention != "same") {
    throw ConfigError("kg_write_attention must be \"next\" or \"same\"");
  }
  if (max_decode_len < 0) throw ConfigError("max_decode_len must be non-negative");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  auto b = [](bool x) { return x ? "true" : "false"; };
  os << "dataset = " << dataset << "\n"
     << "format = " << format << "\n"
     << "hidden = " << hidden << "\n"
     << "kg_dim = " << kg_dim << "\n"
     << "hops = " << hops << "\n"
     << "k_max = " << k_max << "\n"
     << "dropout = " << fmt_double(dropout) << "\n"
     << "dropout_override = " << b(dropout_override) << "\n"
     << "learning_rate = " << fmt_double(learning_rate) << "\n"
     << "batch_size = " << batch_size << "\n"
     << "epochs = " << epochs << "\n"
     << "seed = " << seed << "\n"
     << "tie_directions = " << b(tie_directions) << "\n"
     << "sequential_only = " << b(sequential_only) << "\n"
     << "query_projection = " << b(query_projection) << "\n"
     << "encoder_bias = " << b(encoder_bias) << "\n"
     << "speaker_markers = " << b(speaker_markers) << "\n"
     << "kg_write_attention = " << kg_write_attention << "\n"
     << "max_decode_len = " << max_decode_len << "\n";
  return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  for (int lineno = 1; std::getline(is, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const std::string& grid) {
  std::vector<RunConfig> out{base};
  std::stringstream axes(grid);
  for (std::string axis; std::getline(axes, axis, ';');) {
    axis = trim(axis);
    if (axis.empty()) continue;
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw ConfigError("grid axis \"" + axis + "\" needs key=v1,v2");
    const std::string key = trim(axis.substr(0, eq));
    std::vector<std::string> values;
    std::stringstream vs(axis.substr(eq + 1));
    for (std::string v; std::getline(vs, v, ',');) values.push_back(trim(v));
    std::vector<RunConfig> next;
    for (const RunConfig& c : out) {
      for (const auto& v : values) {
        RunConfig n = c;
        n.set(key, v);
        next.push_back(n);
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace graphdialog
