#pragma once

// Study configuration files. Accepted syntax is the TOML subset used by the
// examples in configs/: [table] headers, `key = value` lines, # comments,
// basic strings, integers, floats, booleans and (possibly multi-line)
// arrays of scalars.

#include "dcreact/harness.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dcreact {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TomlScalar = std::variant<bool, long long, double, std::string>;
using TomlValue = std::variant<bool, long long, double, std::string, std::vector<TomlScalar>>;

/// Flat map from dotted key ("table.key") to value.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);

/// Keys: problem, orders, N, n_cells, T, threads, cache_dir;
/// [reference] kind ("exact" | "dc"), order, N;
/// [newton] abs_tol, rel_tol, max_iter, max_halvings, damping ("halving" | "none");
/// [output] csv, json, markdown. Unknown keys are rejected. Relative paths
/// are resolved against `base_dir`.
StudyConfig study_config_from_toml(const std::string& text, const std::filesystem::path& base_dir = {});
StudyConfig load_study_config(const std::filesystem::path& path);

}  // namespace dcreact
