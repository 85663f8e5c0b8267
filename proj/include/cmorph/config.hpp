#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cmorph/morph.hpp"

namespace cmorph {

// Flat "key = value" configuration. Lines starting with '#' and blank lines
// are ignored; times is a comma-separated list. When D is given but
// sigma_max is not, sigma_max = sigma_min * log2(D).
MorphConfig parse_config(std::string_view text);
MorphConfig load_config(const std::string& path);

// Every key, one per line, with shortest round-trip number formatting, so
// parse_config(serialize_config(c)) == c.
std::string serialize_config(const MorphConfig& cfg);

// Applies one "key=value" assignment on top of cfg, with the same derivation
// rule for sigma_max.
void apply_setting(MorphConfig& cfg, const std::string& key, const std::string& value);

// Recognized keys in serialization order.
const std::vector<std::string>& config_keys();

}  // namespace cmorph
