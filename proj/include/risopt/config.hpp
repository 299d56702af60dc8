#pragma once

// Flat key = value configuration files.
//
// One assignment per line, '#' starts a comment, blank lines are ignored.
// Keys are the SystemConfig / SweepSpec field names; an unknown key is an
// error so typos do not silently fall back to defaults. Lists (values,
// methods) are comma separated. `noise_power_dbm` is accepted as an
// alternative to `noise_power` in watts, and `n_elements` sets a near-square
// RIS grid.

#include "risopt/experiments.hpp"

#include <filesystem>
#include <string>

namespace risopt {

/// Applies every assignment in `text` on top of `spec`. Throws ConfigError
/// naming the line for malformed lines, unknown keys, bad numbers and
/// out-of-range values.
void apply_config_text(const std::string &text, SweepSpec &spec);

/// Reads and applies a file. Throws ConfigError if it cannot be read.
void apply_config_file(const std::filesystem::path &path, SweepSpec &spec);

/// Strict number parsing: the whole token must be consumed. Accepts "inf".
double parse_double(const std::string &token, const std::string &key);
long long parse_int(const std::string &token, const std::string &key);

} // namespace risopt
