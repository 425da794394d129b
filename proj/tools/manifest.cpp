#include "manifest.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "version.hpp"

namespace crnsim::cli {

namespace {

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm utc{};
  gmtime_r(&secs, &utc);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      t.time_since_epoch())
                      .count() %
                  1000;
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3)
      << std::setfill('0') << ms << 'Z';
  return out.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)),
      argv_(std::move(argv)),
      started_(std::chrono::system_clock::now()),
      started_steady_(std::chrono::steady_clock::now()) {}

void RunManifest::set_network(const std::string& path,
                              std::string_view contents) {
  network_file_ = path;
  network_hash_ = fnv1a64(contents);
}

void RunManifest::fail(std::string message, int exit_code) {
  error_ = std::move(message);
  exit_code_ = exit_code;
}

void RunManifest::write(const std::string& path) {
  const auto ended = std::chrono::system_clock::now();
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - started_steady_)
                          .count();
  nlohmann::ordered_json doc;
  doc["tool"] = "crnsim";
  doc["version"] = kVersion;
  doc["command"] = command_;
  doc["command_line"] = argv_;
  if (!network_file_.empty()) {
    doc["network_file"] = network_file_;
    doc["network_hash"] = "fnv1a64:" + hex64(*network_hash_);
  }
  if (seed_) doc["master_seed"] = *seed_;
  if (workers_) doc["workers"] = *workers_;
  doc["started"] = iso8601(started_);
  doc["finished"] = iso8601(ended);
  doc["wall_time_seconds"] = wall;
  doc["outputs"] = outputs_;
  doc["warnings"] = warnings_;
  doc["status"] = error_ ? "error" : "ok";
  doc["exit_code"] = exit_code_;
  if (error_) doc["error"] = *error_;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << '\n';
}

}  // namespace crnsim::cli
