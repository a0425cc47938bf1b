#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pidtc/textio.hpp"
#include "pidtc/version.hpp"

namespace pidtc {

// Reproducibility record written alongside every artifact: the command, its
// fully resolved parameters, and content hashes of every input and output.
// Deliberately carries no timestamps or host details, so a bitwise-identical
// rerun produces a bitwise-identical manifest.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

namespace detail {

inline nlohmann::ordered_json hashed_entry(const std::filesystem::path& path) {
  nlohmann::ordered_json e = nlohmann::ordered_json::object();
  e["path"] = path.string();
  e["fnv1a64"] = fnv1a64_hex(read_text_file(path));
  return e;
}

}  // namespace detail

// Hashes happen here, so outputs must exist before serialization.
inline std::string serialize_manifest(const RunManifest& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  j["command"] = m.command;
  j["version"] = kVersion;
  if (m.seed) j["seed"] = *m.seed;
  j["parameters"] = m.parameters;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) j["inputs"].push_back(detail::hashed_entry(p));
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) j["outputs"].push_back(detail::hashed_entry(p));
  return j.dump(2) + "\n";
}

// File outputs get `<file>.manifest.json`; directory outputs get
// `<dir>/manifest.json`.
inline std::filesystem::path manifest_path_for_file(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

inline std::filesystem::path manifest_path_for_dir(const std::filesystem::path& dir) {
  return dir / "manifest.json";
}

inline std::filesystem::path write_manifest_for_file(const std::filesystem::path& output,
                                                     const RunManifest& m) {
  const std::filesystem::path path = manifest_path_for_file(output);
  write_text_file(path, serialize_manifest(m));
  return path;
}

inline std::filesystem::path write_manifest_for_dir(const std::filesystem::path& dir,
                                                    const RunManifest& m) {
  const std::filesystem::path path = manifest_path_for_dir(dir);
  write_text_file(path, serialize_manifest(m));
  return path;
}

}  // namespace pidtc
