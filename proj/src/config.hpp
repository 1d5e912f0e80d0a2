#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cmest {

// Line-based `key=value` configuration ('#' comments, blank lines ok).
// Keys are free-form here; consumers validate against their own key sets.
// `parse_config_file` also accepts a manifest.json produced by the CLI and
// reads its "config" object, so any run can be reproduced from its
// manifest.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text, const std::string& origin);
ConfigMap parse_config_file(const std::string& path);

std::string config_get(const ConfigMap& cfg, const std::string& key,
                       const std::string& fallback);
double config_get_double(const ConfigMap& cfg, const std::string& key,
                         double fallback);
std::int64_t config_get_int(const ConfigMap& cfg, const std::string& key,
                            std::int64_t fallback);
std::uint64_t config_get_u64(const ConfigMap& cfg, const std::string& key,
                             std::uint64_t fallback);

// Rejects keys outside `allowed` so typos fail loudly.
void config_check_keys(const ConfigMap& cfg,
                       const std::vector<std::string>& allowed,
                       const std::string& origin);

}  // namespace cmest
