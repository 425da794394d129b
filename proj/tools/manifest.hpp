#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crnsim::cli {

/// 64-bit FNV-1a; identifies the exact network file a run consumed.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Sidecar JSON describing one CLI invocation. Written next to the primary
/// output as `<out>.manifest.json`, including when the command fails.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_network(const std::string& path, std::string_view contents);
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_workers(unsigned workers) { workers_ = workers; }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void fail(std::string message, int exit_code);

  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Stamps the end time and writes the JSON document to `path`.
  void write(const std::string& path);

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string network_file_;
  std::optional<std::uint64_t> network_hash_;
  std::optional<std::uint64_t> seed_;
  std::optional<unsigned> workers_;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
  std::optional<std::string> error_;
  int exit_code_ = 0;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point started_steady_;
};

}  // namespace crnsim::cli
