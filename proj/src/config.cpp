#include "lbmgraph/config.hpp"

#include "lbmgraph/common.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace lbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Settings Settings::parse(const std::string& text, const std::string& source) {
  Settings s;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParameterError(source + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParameterError(source + ":" + std::to_string(lineno) + ": empty key");
    s.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings Settings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Settings::merge(const Settings& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string Settings::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ParameterError("missing setting '" + key + "'");
  return it->second;
}

double Settings::get_double(const std::string& key) const {
  const std::string v = get(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("setting '" + key + "' must be a number (got '" + v + "')");
  return out;
}

long long Settings::get_int(const std::string& key) const {
  const std::string v = get(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("setting '" + key + "' must be an integer (got '" + v + "')");
  return out;
}

bool Settings::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParameterError("setting '" + key + "' must be true or false (got '" + v + "')");
}

std::vector<std::string> Settings::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> Settings::unknown_keys(const Settings& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!known.has(k)) out.push_back(k);
  return out;
}

std::string Settings::dump() const {
  std::ostringstream os;
  // Top-level keys first; otherwise they would reparse into the preceding section.
  for (const auto& [key, value] : values_)
    if (key.find('.') == std::string::npos) os << key << " = " << value << '\n';
  std::string current;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = key.substr(0, dot);
    if (section != current) {
      if (os.tellp() > 0) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  return os.str();
}

}  // namespace lbm
