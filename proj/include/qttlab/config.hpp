#pragma once

#include "qttlab/scenario.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qttlab {

// Sectioned key = value text:
//
//   # comment            ; comment
//   [section]
//   key = value          # trailing comment
//
// Sections and keys are case-sensitive; a section may appear more than once and
// a later assignment of the same key wins. `preset = NAME` in [campaign] loads a
// shipped preset first and applies the remaining keys on top of it.
struct ConfigValue {
    std::string text;
    int line = 0;
};

using ConfigSection = std::map<std::string, ConfigValue>;
using ConfigTree = std::map<std::string, ConfigSection>;

// Syntax only; throws ConfigError("line N: ...").
ConfigTree parse_config_tree(std::string_view text);

// Syntax + semantics: unknown keys rejected, defaults filled, Scenario validated.
Scenario parse_config(std::string_view text);

Scenario load_preset(std::string_view name);
std::string_view preset_text(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace qttlab
