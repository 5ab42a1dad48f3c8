#include "gclab/config.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "gclab/persistence.hpp"

namespace gclab {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace

ConfigEntries parse_config(std::istream& in, const std::string& source) {
    ConfigEntries out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw FormatError(source, lineno, "expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw FormatError(source, lineno, "empty key");
        for (char c : key) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
                throw FormatError(source, lineno, "invalid character in key '" + key + "'");
            }
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::vector<std::string> config_to_args(const ConfigEntries& entries) {
    std::vector<std::string> args;
    for (const auto& [key, value] : entries) {
        args.push_back("--" + key);
        std::istringstream items(value);
        std::string item;
        while (items >> item) args.push_back(item);
    }
    return args;
}

}  // namespace gclab
