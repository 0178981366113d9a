#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pal/core/config.hpp"

namespace pal {

/// Parsed settings file: values plus the line each key came from.
struct ConfigText {
  RawConfig values;
  std::map<std::string, int> lines;
};

/// `key = value` per line; blank lines and `#` comments are skipped.
/// Throws ConfigError naming the line for a malformed or repeated key.
ConfigText parse_config_text(const std::string& text);

/// Splits one `K=V` override; throws ConfigError when there is no '='.
std::pair<std::string, std::string> parse_override(const std::string& kv);

/// Reads `path`, applies `overrides` on top, then validates. Validation
/// errors about a key that came from the file carry its line number.
WorkflowConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {},
                           std::vector<std::string>* warnings = nullptr);

}  // namespace pal
