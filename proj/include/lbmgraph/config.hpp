#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lbm {

/// Flat "key = value" settings grouped in [section]s. Keys are addressed as
/// "section.key". Later sources override earlier ones.
class Settings {
 public:
  Settings() = default;

  /// Parses a config file; unknown keys are kept (and reported by
  /// unknown_keys against a schema).
  static Settings parse(const std::string& text, const std::string& source = "<config>");
  static Settings load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  /// Overlays every key from `other`.
  void merge(const Settings& other);

  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  /// Keys not present in `known`.
  std::vector<std::string> unknown_keys(const Settings& known) const;

  /// Serializes back to the sectioned file format (deterministic order).
  std::string dump() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace lbm
