#include "authnorm/nn/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "authnorm/error.hpp"

namespace authnorm::nn {

namespace {
constexpr char kMagic[4] = {'A', 'N', 'M', 'C'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;
}  // namespace

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void BinaryWriter::raw(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  bytes_.insert(bytes_.end(), p, p + n);
}

void BinaryReader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw FormatError("unexpected end of file (truncated)");
}

std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t BinaryReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const auto n = u32();
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void BinaryReader::raw(void* out, std::size_t n) {
  need(n);
  std::memcpy(out, bytes_.data() + pos_, n);
  pos_ += n;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> ModelContainer::serialize() const {
  BinaryWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.str(kind);
  w.u32(static_cast<std::uint32_t>(hyper.size()));
  for (const auto& [k, v] : hyper) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto& s : vocab) w.str(s);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.shape().size()));
    for (auto d : t.shape()) w.u64(d);
    for (double x : t.data()) w.f64(x);
  }
  return w.bytes();
}

ModelContainer ModelContainer::deserialize(std::vector<std::uint8_t> bytes) {
  BinaryReader r(std::move(bytes));
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a model container");
  const auto version = r.u32();
  if (version != kVersion) {
    throw FormatError("incompatible model container version " + std::to_string(version) +
                      " (expected " + std::to_string(kVersion) + ")");
  }
  ModelContainer c;
  c.kind = r.str();
  for (auto n = r.u32(); n > 0; --n) {
    auto k = r.str();
    c.hyper[k] = r.str();
  }
  for (auto n = r.u32(); n > 0; --n) c.vocab.push_back(r.str());
  for (auto n = r.u32(); n > 0; --n) {
    auto name = r.str();
    std::vector<std::size_t> shape(r.u32());
    for (auto& d : shape) {
      const auto v = r.u64();
      if (v >= kMaxDim) throw FormatError("tensor dimension out of range");
      d = static_cast<std::size_t>(v);
    }
    Tensor t(shape);
    for (auto& x : t.data()) x = r.f64();
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after model container");
  return c;
}

void ModelContainer::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

ModelContainer ModelContainer::load(const std::filesystem::path& path,
                                    const std::string& expected_kind) {
  auto c = deserialize(read_file(path));
  if (!expected_kind.empty() && c.kind != expected_kind) {
    throw FormatError("expected a " + expected_kind + " container, found " + c.kind);
  }
  return c;
}

void ModelContainer::put(const ParameterList& params) {
  for (const auto* p : params) tensors.emplace_back(p->name, p->value);
}

void ModelContainer::take(const ParameterList& params) const {
  for (auto* p : params) {
    const auto it = std::find_if(tensors.begin(), tensors.end(),
                                 [&](const auto& e) { return e.first == p->name; });
    if (it == tensors.end()) throw FormatError("container lacks tensor " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw FormatError("shape mismatch for tensor " + p->name);
    }
    p->value = it->second;
  }
}

const std::string& ModelContainer::require(const std::string& key) const {
  const auto it = hyper.find(key);
  if (it == hyper.end()) throw FormatError("container lacks hyperparameter " + key);
  return it->second;
}

std::vector<std::string> alphabet_vocab() {
  std::vector<std::string> vocab = {"<pad>", "<unk>", "<s>", "</s>"};
  for (int id = 4; id < alphabet::kSize; ++id) vocab.emplace_back(1, alphabet::char_of(id));
  return vocab;
}

}  // namespace authnorm::nn
