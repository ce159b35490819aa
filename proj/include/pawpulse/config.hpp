#pragma once

// Plain-text `key=value` configuration mirroring PipelineConfig.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pawpulse/signal_core.hpp"

namespace pawpulse {

/// Names of every accepted configuration key, in canonical order.
const std::vector<std::string_view>& config_keys();

/// Sets one key from its textual value. Unknown keys and malformed values
/// throw ConfigError. Does not validate cross-field invariants.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// Canonical textual value of one key (shortest round-trip for reals).
std::string get_config_value(const PipelineConfig& config, std::string_view key);

/// True when the key holds an integer quantity.
bool config_key_is_integral(std::string_view key);

/// Reads `key = value` lines on top of `base`. `#` starts a comment. Throws
/// ParseError (with line number) on malformed lines and ConfigError on
/// unknown keys or invalid final configurations.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

/// Writes every key in canonical order, one per line.
void write_config(std::ostream& out, const PipelineConfig& config);

}  // namespace pawpulse
