#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thzrel::cli {

/// Anything wrong with the configuration itself. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where a resolved value came from, for the provenance block.
enum class Origin { stated, artifact, preset, file, flag };
std::string to_string(Origin origin);

struct KeySpec {
  std::string name;                   // "section.key"
  std::optional<std::string> value;   // built-in default; empty when the model leaves it open
  Origin origin;                      // stated or artifact for built-in values
  std::string help;
};

/// Every key the tool understands.
const std::vector<KeySpec>& known_keys();

/// Text of the embedded reconstruction preset.
const std::string& reconstruction_preset();

/// Flat "section.key" -> value store with layered overrides:
/// built-ins < preset < config file < command line.
class ExperimentConfig {
 public:
  /// Built-in defaults only (no preset).
  ExperimentConfig();

  /// INI-style text: [section] headers, key = value, '#' or ';' comments.
  /// Keys may also be written fully qualified outside any section. Errors
  /// carry "<source>:<line>:" prefixes.
  void merge_text(const std::string& text, const std::string& source, Origin origin);
  void merge_file(const std::filesystem::path& path);
  /// "section.key=value"
  void set(const std::string& assignment, Origin origin = Origin::flag);
  void set(const std::string& key, const std::string& value, Origin origin);

  bool has(const std::string& key) const;
  /// Throws ConfigError naming the key when it has no value.
  const std::string& raw(const std::string& key) const;
  Origin origin(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// "# key = value  (origin)" lines for every resolved key.
  std::vector<std::string> provenance() const;

 private:
  struct Entry {
    std::string value;
    Origin origin;
  };
  std::map<std::string, Entry> values_;
};

/// Layers built-ins, the named preset ("reconstruction" or "none"), the file
/// and `assignments` in that order. A preset named inside the file is used
/// unless `preset` is given.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::optional<std::string>& preset,
                             const std::vector<std::string>& assignments);

}  // namespace thzrel::cli
