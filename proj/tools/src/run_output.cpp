#include "run_output.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "ovepg/data.hpp"
#include "ovepg/errors.hpp"

#ifndef OVEPG_VERSION
#define OVEPG_VERSION "unknown"
#endif

namespace ovepg::cli {

namespace fs = std::filesystem;

namespace {

double monotonic_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t value) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << value;
  return s.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

RunOutput::RunOutput(const fs::path& root, const std::string& command, const Json& config,
                     std::uint64_t seed)
    : command_(command), config_(config), seed_(seed) {
  hash_ = hex16(fnv1a(config.dump())).substr(0, 12);
  dir_ = root / (command + "-" + hash_ + "-s" + std::to_string(seed));
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw LoadError(LoadErrorKind::io, "cannot create " + dir_.string() + ": " + ec.message());
  started_at_ = utc_timestamp();
  started_clock_ = monotonic_seconds();
  metrics_.open(dir_ / "metrics.jsonl", std::ios::trunc);
  if (!metrics_) throw LoadError(LoadErrorKind::io, "cannot write " + (dir_ / "metrics.jsonl").string());
  outputs_.push_back("manifest.json");
  outputs_.push_back("metrics.jsonl");
}

void RunOutput::add_input(const std::string& path) {
  inputs_.push_back({{"path", path}, {"fnv1a64", hex16(file_digest(path))}});
}

void RunOutput::add_output(const std::string& name) { outputs_.push_back(name); }

void RunOutput::write_manifest(bool finished) {
  Json m;
  m["tool"] = "ovepg";
  m["version"] = OVEPG_VERSION;
  m["command"] = command_;
  m["config_hash"] = hash_;
  m["seed"] = seed_;
  m["config"] = config_;
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  m["started_at"] = started_at_;
  if (finished) {
    m["finished_at"] = utc_timestamp();
    m["wall_time_s"] = monotonic_seconds() - started_clock_;
  }
  write_json("manifest.json", m);
}

void RunOutput::metric(const Json& line) {
  metrics_ << line.dump() << '\n';
  metrics_.flush();
}

void RunOutput::write_json(const std::string& name, const Json& value) {
  std::ofstream out(dir_ / name, std::ios::trunc);
  out << value.dump(2) << '\n';
  if (!out) throw LoadError(LoadErrorKind::io, "cannot write " + (dir_ / name).string());
}

}  // namespace ovepg::cli
