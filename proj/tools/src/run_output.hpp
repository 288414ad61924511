#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace ovepg::cli {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes);
std::string hex16(std::uint64_t value);
std::string utc_timestamp();

/// One run directory: <root>/<command>-<config hash>-s<seed>/.
class RunOutput {
 public:
  RunOutput(const std::filesystem::path& root, const std::string& command, const Json& config,
            std::uint64_t seed);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  const std::string& config_hash() const noexcept { return hash_; }

  void add_input(const std::string& path);
  void add_output(const std::string& name);
  /// Writes manifest.json; called once before work starts and again at the end.
  void write_manifest(bool finished);

  /// Appends one compact JSON line to metrics.jsonl.
  void metric(const Json& line);
  void write_json(const std::string& name, const Json& value);

 private:
  std::filesystem::path dir_;
  std::string command_;
  Json config_;
  std::uint64_t seed_;
  std::string hash_;
  Json inputs_ = Json::array();
  std::vector<std::string> outputs_;
  std::string started_at_;
  double started_clock_ = 0.0;
  std::ofstream metrics_;
};

}  // namespace ovepg::cli
