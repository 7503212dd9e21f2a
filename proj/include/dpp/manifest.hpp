#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpp/error.hpp"
#include "dpp/version.hpp"

namespace dpp {

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Write-then-rename so readers never observe a half-written artifact.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Provenance record dropped next to every command's outputs: what ran, with
// which resolved settings and seed, over which files. Re-running the same
// command with the recorded config and seed reproduces the outputs
// bit-identically in single-worker mode.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version = kVersion;
  std::string timestamp;
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"command", m.command},       {"config", m.config},
                     {"seed", m.seed},             {"inputs", m.inputs},
                     {"outputs", m.outputs},       {"tool_version", m.tool_version},
                     {"timestamp", m.timestamp}};
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("command").get_to(m.command);
  m.config = j.value("config", nlohmann::json::object());
  j.at("seed").get_to(m.seed);
  m.inputs = j.value("inputs", std::vector<std::string>{});
  m.outputs = j.value("outputs", std::vector<std::string>{});
  j.at("tool_version").get_to(m.tool_version);
  m.timestamp = j.value("timestamp", "");
}

inline void write_manifest(RunManifest manifest,
                           const std::filesystem::path& path) {
  if (manifest.timestamp.empty()) manifest.timestamp = utc_timestamp();
  atomic_write_file(path, nlohmann::json(manifest).dump(2) + "\n");
}

}  // namespace dpp
