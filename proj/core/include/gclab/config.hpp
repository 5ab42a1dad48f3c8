#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gclab {

/// Flat `key = value` configuration. Blank lines and lines starting with `#`
/// are skipped; keys keep their file order and a repeated key keeps every
/// occurrence so the last one wins when applied.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

ConfigEntries parse_config(std::istream& in, const std::string& source = "<config>");
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Turns entries into `--key value...` arguments; whitespace inside a value
/// separates list items (`H = 1 2 3` becomes `--H 1 2 3`).
std::vector<std::string> config_to_args(const ConfigEntries& entries);

}  // namespace gclab
