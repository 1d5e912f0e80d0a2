#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace cmest {

ConfigMap parse_config_text(const std::string& text,
                            const std::string& origin) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) +
                                 ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::parse,
           origin + ":" + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // A manifest.json; read its resolved config object.
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse, path + ": " + e.what());
    }
    if (!obj.contains("config") || !obj["config"].is_object())
      fail(ErrorKind::parse, path + ": manifest lacks a 'config' object");
    ConfigMap out;
    for (auto it = obj["config"].begin(); it != obj["config"].end(); ++it) {
      out[it.key()] = it.value().is_string() ? it.value().get<std::string>()
                                             : it.value().dump();
    }
    return out;
  }
  return parse_config_text(text, path);
}

std::string config_get(const ConfigMap& cfg, const std::string& key,
                       const std::string& fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

double config_get_double(const ConfigMap& cfg, const std::string& key,
                         double fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::parse, "config key '" + key + "': not a number: " + s);
  return v;
}

std::int64_t config_get_int(const ConfigMap& cfg, const std::string& key,
                            std::int64_t fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  const std::string& s = it->second;
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::parse, "config key '" + key + "': not an integer: " + s);
  return v;
}

std::uint64_t config_get_u64(const ConfigMap& cfg, const std::string& key,
                             std::uint64_t fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  const std::string& s = it->second;
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::parse,
         "config key '" + key + "': not an unsigned integer: " + s);
  return v;
}

void config_check_keys(const ConfigMap& cfg,
                       const std::vector<std::string>& allowed,
                       const std::string& origin) {
  for (const auto& [key, _] : cfg) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorKind::parse, origin + ": unknown key '" + key + "'");
  }
}

}  // namespace cmest
