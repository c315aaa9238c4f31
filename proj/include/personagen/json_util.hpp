#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "personagen/error.hpp"

namespace pgen {

using json = nlohmann::json;
// Preserves insertion order so serialized artifacts are byte-stable.
using ojson = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InvalidInput("short write: " + path.string());
}

template <class J = json>
J parse_json_file(const std::filesystem::path& path) {
  std::string raw = read_file(path);
  J parsed = J::parse(raw, nullptr, false);
  if (parsed.is_discarded())
    throw InvalidInput("invalid JSON in " + path.string());
  return parsed;
}

inline void write_json_file(const std::filesystem::path& path, const ojson& value) {
  write_file(path, value.dump(2) + "\n");
}

}  // namespace pgen
