#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "spine/types.hpp"

namespace spine {

// Minimal structured-text config format:
//
//   # comment
//   [section]
//   key = 1.25
//   word = reference
//   flag = true
//   array = [1, 2, 3]
//   rows = [[0, 2], [1, 3]]
//
// Arrays may span multiple lines until their brackets balance. Parse errors
// and unknown-key errors carry "source:line" locations.

struct ConfigValue {
  std::string raw;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, ConfigValue>> entries;

  bool has(const std::string& key) const;
  const ConfigValue* find(const std::string& key) const;
};

struct ConfigDoc {
  std::string source;
  std::vector<ConfigSection> sections;

  const ConfigSection* find_section(const std::string& name) const;
};

ConfigDoc parse_config_text(const std::string& text, const std::string& source);
ConfigDoc load_config_file(const std::string& path);

// Typed, consuming view over one section. Every get_* marks the key as
// consumed; finish() rejects whatever is left, pointing at its line.
class SectionReader {
 public:
  SectionReader(const ConfigDoc& doc, const ConfigSection& section)
      : doc_(doc), section_(section) {}

  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_word(const std::string& key);
  std::string get_word(const std::string& key, const std::string& fallback);
  std::vector<double> get_array(const std::string& key);
  std::vector<double> get_array(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::vector<double>> get_rows(const std::string& key);
  std::vector<std::vector<double>> get_rows(const std::string& key,
                                            const std::vector<std::vector<double>>& fallback);

  bool has(const std::string& key) const { return section_.has(key); }
  bool looks_like_array(const std::string& key) const;
  void finish() const;  // throws ConfigError on unconsumed keys

  std::string location(const std::string& key) const;

 private:
  const ConfigValue& require(const std::string& key);

  const ConfigDoc& doc_;
  const ConfigSection& section_;
  std::set<std::string> consumed_;
};

// Serialization helpers used by the config writers.
std::string format_double(double v);
std::string format_array(const std::vector<double>& v);
std::string format_rows(const std::vector<std::vector<double>>& rows);

}  // namespace spine
