#include "spine/config_text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spine {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

int bracket_delta(const std::string& s) {
  int d = 0;
  for (char c : s) {
    if (c == '[') ++d;
    if (c == ']') --d;
  }
  return d;
}

std::string loc(const std::string& source, int line) {
  return source + ":" + std::to_string(line);
}

bool parse_full_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

// Parses "[a, b, c]" or "[[a, b], [c, d]]". Scalars inside rows are doubles.
std::vector<std::vector<double>> parse_bracketed(const std::string& raw,
                                                 const std::string& where,
                                                 bool& nested) {
  std::vector<std::vector<double>> rows;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
  };
  auto fail = [&](const std::string& msg) -> void {
    throw ConfigError(where, msg + " in '" + raw + "'");
  };

  skip_ws();
  if (i >= raw.size() || raw[i] != '[') fail("expected '['");
  ++i;
  skip_ws();
  nested = i < raw.size() && raw[i] == '[';

  if (!nested) {
    rows.emplace_back();
    while (true) {
      skip_ws();
      if (i < raw.size() && raw[i] == ']') {
        ++i;
        break;
      }
      size_t j = i;
      while (j < raw.size() && raw[j] != ',' && raw[j] != ']') ++j;
      if (j >= raw.size()) fail("unterminated array");
      double v;
      std::string tok = trim(raw.substr(i, j - i));
      if (!parse_full_double(tok, v)) fail("expected a number, got '" + tok + "'");
      rows.back().push_back(v);
      i = j;
      if (raw[i] == ',') ++i;
    }
  } else {
    while (true) {
      skip_ws();
      if (i < raw.size() && raw[i] == ']') {
        ++i;
        break;
      }
      if (i >= raw.size() || raw[i] != '[') fail("expected '[' starting a row");
      size_t close = raw.find(']', i);
      if (close == std::string::npos) fail("unterminated row");
      std::string inner = raw.substr(i, close - i + 1);
      bool inner_nested = false;
      auto sub = parse_bracketed(inner, where, inner_nested);
      rows.push_back(sub.empty() ? std::vector<double>{} : sub.front());
      i = close + 1;
      skip_ws();
      if (i < raw.size() && raw[i] == ',') ++i;
    }
  }
  skip_ws();
  if (i != raw.size()) fail("trailing text after array");
  return rows;
}

}  // namespace

bool ConfigSection::has(const std::string& key) const { return find(key) != nullptr; }

const ConfigValue* ConfigSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const ConfigSection* ConfigDoc::find_section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigDoc parse_config_text(const std::string& text, const std::string& source) {
  ConfigDoc doc;
  doc.source = source;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  ConfigSection* current = nullptr;

  while (std::getline(in, line)) {
    ++lineno;
    int start_line = lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;

    if (body.front() == '[' && body.back() == ']' && bracket_delta(body) == 0 &&
        body.find('=') == std::string::npos) {
      std::string name = trim(body.substr(1, body.size() - 2));
      if (name.empty()) throw ConfigError(loc(source, lineno), "empty section name");
      if (doc.find_section(name))
        throw ConfigError(loc(source, lineno), "duplicate section [" + name + "]");
      doc.sections.push_back(ConfigSection{name, lineno, {}});
      current = &doc.sections.back();
      continue;
    }

    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(loc(source, lineno), "expected 'key = value', got '" + body + "'");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(loc(source, lineno), "missing key before '='");

    // Multi-line arrays: keep consuming until brackets balance.
    int depth = bracket_delta(value);
    while (depth > 0 && std::getline(in, line)) {
      ++lineno;
      std::string more = trim(strip_comment(line));
      value += " " + more;
      depth += bracket_delta(more);
    }
    if (depth > 0)
      throw ConfigError(loc(source, start_line), "unbalanced brackets for key '" + key + "'");

    if (!current) {
      doc.sections.push_back(ConfigSection{"", 0, {}});
      current = &doc.sections.back();
    }
    if (current->has(key))
      throw ConfigError(loc(source, start_line),
                        "duplicate key '" + key + "' in section [" + current->name + "]");
    current->entries.emplace_back(key, ConfigValue{value, start_line});
  }
  return doc;
}

ConfigDoc load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string SectionReader::location(const std::string& key) const {
  const ConfigValue* v = section_.find(key);
  return loc(doc_.source, v ? v->line : section_.line);
}

const ConfigValue& SectionReader::require(const std::string& key) {
  const ConfigValue* v = section_.find(key);
  if (!v)
    throw ConfigError(doc_.source, "missing key '" + key + "' in section [" + section_.name + "]");
  consumed_.insert(key);
  return *v;
}

double SectionReader::get_double(const std::string& key) {
  const ConfigValue& v = require(key);
  double out;
  if (!parse_full_double(v.raw, out))
    throw ConfigError(location(key), "key '" + key + "' expects a number, got '" + v.raw + "'");
  return out;
}

double SectionReader::get_double(const std::string& key, double fallback) {
  return section_.has(key) ? get_double(key) : fallback;
}

int SectionReader::get_int(const std::string& key) {
  double d = get_double(key);
  int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw ConfigError(location(key), "key '" + key + "' expects an integer");
  return i;
}

int SectionReader::get_int(const std::string& key, int fallback) {
  return section_.has(key) ? get_int(key) : fallback;
}

bool SectionReader::get_bool(const std::string& key, bool fallback) {
  if (!section_.has(key)) return fallback;
  std::string w = require(key).raw;
  std::transform(w.begin(), w.end(), w.begin(), ::tolower);
  if (w == "true" || w == "on" || w == "1") return true;
  if (w == "false" || w == "off" || w == "0") return false;
  throw ConfigError(location(key), "key '" + key + "' expects true/false/on/off");
}

std::string SectionReader::get_word(const std::string& key) { return require(key).raw; }

std::string SectionReader::get_word(const std::string& key, const std::string& fallback) {
  return section_.has(key) ? get_word(key) : fallback;
}

std::vector<double> SectionReader::get_array(const std::string& key) {
  const ConfigValue& v = require(key);
  bool nested = false;
  auto rows = parse_bracketed(v.raw, location(key), nested);
  if (nested)
    throw ConfigError(location(key), "key '" + key + "' expects a flat array");
  return rows.empty() ? std::vector<double>{} : rows.front();
}

std::vector<double> SectionReader::get_array(const std::string& key,
                                             const std::vector<double>& fallback) {
  return section_.has(key) ? get_array(key) : fallback;
}

std::vector<std::vector<double>> SectionReader::get_rows(const std::string& key) {
  const ConfigValue& v = require(key);
  bool nested = false;
  auto rows = parse_bracketed(v.raw, location(key), nested);
  if (!nested && !rows.empty() && !rows.front().empty())
    throw ConfigError(location(key), "key '" + key + "' expects an array of rows");
  if (!nested) rows.clear();
  return rows;
}

std::vector<std::vector<double>> SectionReader::get_rows(
    const std::string& key, const std::vector<std::vector<double>>& fallback) {
  return section_.has(key) ? get_rows(key) : fallback;
}

bool SectionReader::looks_like_array(const std::string& key) const {
  const ConfigValue* v = section_.find(key);
  return v && !v->raw.empty() && v->raw.front() == '[';
}

void SectionReader::finish() const {
  for (const auto& [k, v] : section_.entries) {
    if (!consumed_.count(k))
      throw ConfigError(loc(doc_.source, v.line),
                        "unknown key '" + k + "' in section [" + section_.name + "]");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Drop superfluous digits when a short form round-trips exactly.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

std::string format_array(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::string format_rows(const std::vector<std::vector<double>>& rows) {
  std::string out = "[";
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ", ";
    out += format_array(rows[i]);
  }
  return out + "]";
}

}  // namespace spine
