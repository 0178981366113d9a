#include "pal/io/config_file.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

}  // namespace

ConfigText parse_config_text(const std::string& text) {
  ConfigText out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", n), {}, n);
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(fmt::format("line {}: bad key '{}'", n, key), key, n);
    if (out.values.contains(key)) {
      throw ConfigError(fmt::format("line {}: '{}' already set on line {}", n, key, out.lines[key]), key, n);
    }
    out.values[key] = value;
    out.lines[key] = n;
  }
  return out;
}

std::pair<std::string, std::string> parse_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("override '{}' is not key=value", kv));
  auto key = trim(kv.substr(0, eq));
  if (!valid_key(key)) throw ConfigError(fmt::format("override '{}' has a bad key", kv), key);
  return {std::move(key), trim(kv.substr(eq + 1))};
}

WorkflowConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                           std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  auto parsed = parse_config_text(buf.str());
  for (const auto& kv : overrides) {
    auto [key, value] = parse_override(kv);
    const auto canonical = canonical_config_key(key);
    std::erase_if(parsed.values, [&](const auto& entry) { return canonical_config_key(entry.first) == canonical; });
    parsed.values[key] = value;
    parsed.lines.erase(key);
  }
  try {
    return validate_config(parsed.values, warnings);
  } catch (const ConfigError& e) {
    const auto it = parsed.lines.find(e.key());
    if (it == parsed.lines.end() || e.line() != 0) throw;
    throw ConfigError(fmt::format("line {}: {}", it->second, e.what()), e.key(), it->second);
  }
}

}  // namespace pal
