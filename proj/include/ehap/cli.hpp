#pragma once

// Command-line front end: simulate / route / lattice / topo / gait.
//
// Exit codes: 0 success, 2 usage, config or validation error, 3 runtime or
// numeric failure. Errors are reported as one JSON object on the error stream.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ehap/error.hpp"

namespace ehap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

std::string_view tool_version();

// Config problem tied to a file and, when known, a dotted key path.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, std::string file, std::string key = {})
      : ValidationError(what), file_(std::move(file)), key_(std::move(key)) {}
  const std::string& file() const { return file_; }
  const std::string& key() const { return key_; }

 private:
  std::string file_;
  std::string key_;
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace ehap::cli
