#include "graphdialog/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

namespace graphdialog {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw InputError("cannot write checkpoint " + path.string());
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw InputError("failed writing checkpoint " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw InputError("cannot open checkpoint " + path.string());
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw VersionError("truncated checkpoint " + path_.string());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    std::string s(u32(), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_vocab(Writer& w, const Vocabulary& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) {
    w.str(v.word(i));
    w.u32(v.is_tag(i) ? 1U : 0U);
  }
}

Vocabulary read_vocab(Reader& r) {
  const std::uint32_t n = r.u32();
  std::vector<std::string> words;
  std::set<std::string> tags;
  for (std::uint32_t i = 0; i < n; ++i) {
    words.push_back(r.str());
    if (r.u32() != 0) tags.insert(words.back());
  }
  return Vocabulary::from_words(words, tags);
}

}  // namespace

void save_checkpoint(const GraphDialogModel& model, const std::filesystem::path& path) {
  Writer w(path);
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(model.config().to_text());
  write_vocab(w, model.vocab());
  write_vocab(w, model.entities());
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->value.rows()));
    w.u32(static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p->value.cols(); ++j) w.f64(p->value(i, j));
    }
  }
  w.finish(path);
}

GraphDialogModel load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof kCheckpointMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw VersionError(path.string() + " is not a checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  RunConfig config = RunConfig::parse(r.str());
  Vocabulary vocab = read_vocab(r);
  Vocabulary entities = read_vocab(r);
  GraphDialogModel model(std::move(config), std::move(vocab), std::move(entities));

  const std::uint32_t count = r.u32();
  if (count != model.params().size()) {
    throw VersionError("checkpoint holds " + std::to_string(count) + " parameters, model expects " +
                       std::to_string(model.params().size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string name = r.str();
    if (!model.params().contains(name)) throw VersionError("checkpoint parameter " + name + " unknown to the model");
    Parameter& p = model.params().get(name);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw VersionError("checkpoint parameter " + name + " has shape " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", model expects " + shape_string(p.value));
    }
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) p.value(i, j) = r.f64();
    }
  }
  if (!r.at_end()) throw VersionError("trailing bytes in checkpoint " + path.string());
  return model;
}

}  // namespace graphdialog
