#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "eofm/error.hpp"
#include "eofm/phantom.hpp"
#include "eofm/pipeline.hpp"

namespace eofm {

/// Parse or validation failure, prefixed with `source:line:`.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// INI-style text of `[section]` headers and `key = value` lines; `#` or `;` starts a comment.
/// Keys are addressed as `section.key`.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    std::string origin;  ///< "file:line" or "--set"
  };

  static ConfigFile parse(std::string_view text, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  /// Applies `section.key=value`.
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& origin);

  const Entry* find(const std::string& key) const;
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  /// Sorted `section.key = value` lines; stable input for hashing and manifests.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;

 private:
  std::map<std::string, Entry> entries_;
};

struct IoPaths {
  std::filesystem::path output_dir = "eofm_out";
  std::filesystem::path frame0;
  std::filesystem::path frame1;
  std::filesystem::path truth;
  std::filesystem::path bubbles;
  std::filesystem::path estimate;
};

struct ExperimentConfig {
  PhantomSpec phantom;
  PipelineOptions pipeline;
  IoPaths io;
  int threads = 0;
  std::string canonical_text;
  std::uint64_t config_hash = 0;
};

/// Builds a validated experiment configuration; unknown keys and out-of-range
/// values raise ConfigError naming the offending line.
ExperimentConfig make_experiment_config(const ConfigFile& file);

/// The defaults of every key as a config file text.
std::string default_config_text();

}  // namespace eofm
