#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "authnorm/nn/tensor.hpp"

namespace authnorm::nn {

/// Little-endian byte sink/source shared by the binary file formats.
class BinaryWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void raw(const void* data, std::size_t n);
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Throws FormatError on truncated input.
class BinaryReader {
 public:
  explicit BinaryReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  void raw(void* out, std::size_t n);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Serialized model: kind tag, hyperparameters, vocabulary and named tensors.
struct ModelContainer {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  std::map<std::string, std::string> hyper;
  std::vector<std::string> vocab;
  std::vector<std::pair<std::string, Tensor>> tensors;

  std::vector<std::uint8_t> serialize() const;
  /// Throws FormatError on bad magic, version mismatch, or truncation.
  static ModelContainer deserialize(std::vector<std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  /// Also checks the kind tag when expected_kind is non-empty.
  static ModelContainer load(const std::filesystem::path& path,
                             const std::string& expected_kind = {});

  void put(const ParameterList& params);
  /// Copies tensors into params by name; shapes must match exactly.
  void take(const ParameterList& params) const;
  const std::string& require(const std::string& key) const;
};

/// Model alphabet as printable strings, for storage in containers.
std::vector<std::string> alphabet_vocab();

}  // namespace authnorm::nn
