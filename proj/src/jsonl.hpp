#pragma once

// Line-delimited JSON helpers shared by the record, fixture and result
// readers. Private to the library.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "authnorm/error.hpp"
#include "json.hpp"

namespace authnorm::detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

/// Calls fn(object, line) for every non-blank line.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(line, "<document>", e.what());
    }
    if (!doc.is_object()) throw SchemaError(line, "<document>", "expected an object");
    fn(doc, line);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
}

inline std::string dump_line(const nlohmann::json& doc) {
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

template <typename Record, typename Emit>
void write_json_lines(const std::filesystem::path& path, const std::vector<Record>& records,
                      Emit emit) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << dump_line(emit(r)) << '\n';
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace authnorm::detail
