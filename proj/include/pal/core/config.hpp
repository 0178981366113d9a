#pragma once

#include <map>
#include <string>
#include <vector>

#include "pal/core/types.hpp"

namespace pal {

using RawConfig = std::map<std::string, std::string>;

/// Keys every config must define.
const std::vector<std::string>& required_config_keys();

/// Keys from the original settings schema that this implementation accepts
/// but ignores (node placement, GPU lists, buffer backup paths, plugin paths).
const std::vector<std::string>& ignored_config_keys();

/// Builds a WorkflowConfig from string key/value pairs.
///
/// Unknown and ignored keys are not errors; a human-readable note for each is
/// appended to `warnings` when it is non-null. `dynamic_orcale_list` is an
/// alias of `dynamic_oracle_list`, and `orcl_time` of `oracle_latency`.
WorkflowConfig validate_config(const RawConfig& raw, std::vector<std::string>* warnings = nullptr);

/// The primary name of `key` when it is an alias, otherwise `key` itself.
std::string canonical_config_key(const std::string& key);

/// Canonical key=value text for `cfg`. Feeding the output back through the
/// parser and validate_config reproduces `cfg` exactly.
std::string emit_config(const WorkflowConfig& cfg);

/// Stable hex digest of every setting except `result_dir` and `mode`; two
/// runs are comparable when their fingerprints match.
std::string config_fingerprint(const WorkflowConfig& cfg);

}  // namespace pal
