#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvgrav/config.hpp"
#include "nvgrav/error.hpp"
#include "nvgrav/params.hpp"

namespace nvgrav::io {

inline constexpr const char* kArtifactName = "nvgrav";
inline constexpr const char* kArtifactVersion = "1.0.0";

[[nodiscard]] inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", v);
  return buf;
}

/// A CSV cell: either a number (written "%.15e") or literal text.
struct Cell {
  Cell(double v) : text(format_number(v)) {}  // NOLINT(google-explicit-constructor)
  Cell(int v) : text(std::to_string(v)) {}    // NOLINT(google-explicit-constructor)
  Cell(std::string s) : text(std::move(s)) {} // NOLINT(google-explicit-constructor)
  Cell(const char* s) : text(s) {}            // NOLINT(google-explicit-constructor)
  std::string text;
};

using Row = std::vector<Cell>;

/// Comma-separated, '.' decimal, LF endings, one header row. Lines in
/// `comments` are written first, each prefixed with "# ".
[[nodiscard]] inline std::string to_csv(const std::vector<std::string>& header,
                                        const std::vector<Row>& rows,
                                        const std::vector<std::string>& comments = {}) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw InvalidArgument("CSV row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i].text;
    out += '\n';
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

/// Resolved configuration as JSON: section -> key -> SI value.
[[nodiscard]] inline nlohmann::ordered_json config_json(const SystemParams& params) {
  SystemParams p = params;
  nlohmann::ordered_json j;
  for (const auto& k : config_keys()) {
    j[std::string(k.section)][std::string(k.key)] = k.field(p);
  }
  for (const auto& k : int_config_keys()) {
    j[std::string(k.section)][std::string(k.key)] = k.field(p);
  }
  return j;
}

/// Sidecar `<file>.meta.json`: artifact, version, command, fingerprint,
/// resolved config, subcommand options and any extra fields. Contains nothing
/// run-specific beyond what determines the data.
inline void write_sidecar(const std::filesystem::path& data_file, const std::string& command,
                          const SystemParams& params, std::uint64_t seed,
                          const nlohmann::ordered_json& options,
                          const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json j;
  j["artifact"] = kArtifactName;
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["file"] = data_file.filename().string();
  j["fingerprint"] = fingerprint(params);
  j["seed"] = seed;
  j["config"] = config_json(params);
  j["options"] = options;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_file(data_file.string() + ".meta.json", j.dump(2) + "\n");
}

}  // namespace nvgrav::io
