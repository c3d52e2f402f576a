#include "switching/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace switching {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ConfigError("config: '" + key + "' expects a number, got '" + std::string(text) + "'");
    return value;
}

int to_int(const std::string& key, std::string_view text) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("config: '" + key + "' expects an integer, got '" + std::string(text) + "'");
    return value;
}

bool to_bool(const std::string& key, std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "1" || lower == "yes" || lower == "on")
        return true;
    if (lower == "false" || lower == "0" || lower == "no" || lower == "off")
        return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + std::string(text) + "'");
}

struct KeySpec {
    std::string section;
    std::function<void(RunConfig&, const std::string&, std::string_view)> assign;
};

const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = {
        {"N", {"problem", [](RunConfig& c, const std::string& k, std::string_view v) { c.components = to_int(k, v); }}},
        {"alpha", {"problem", [](RunConfig& c, const std::string& k, std::string_view v) { c.alpha = to_double(k, v); }}},
        {"T", {"problem", [](RunConfig& c, const std::string& k, std::string_view v) { c.horizon = to_double(k, v); }}},
        {"time_intervals",
         {"problem", [](RunConfig& c, const std::string& k, std::string_view v) { c.time_intervals = to_int(k, v); }}},
        {"mesh_edge", {"problem", [](RunConfig& c, const std::string& k, std::string_view v) { c.mesh_edge = to_double(k, v); }}},
        {"gamma_start",
         {"homotopy", [](RunConfig& c, const std::string& k, std::string_view v) { c.homotopy.gamma_start = to_double(k, v); }}},
        {"reduction_factor",
         {"homotopy",
          [](RunConfig& c, const std::string& k, std::string_view v) { c.homotopy.reduction_factor = to_double(k, v); }}},
        {"gamma_min",
         {"homotopy", [](RunConfig& c, const std::string& k, std::string_view v) { c.homotopy.gamma_min = to_double(k, v); }}},
        {"warm_start",
         {"homotopy", [](RunConfig& c, const std::string& k, std::string_view v) { c.homotopy.warm_start = to_bool(k, v); }}},
        {"newton_tol_rel",
         {"solver", [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.newton_tol_rel = to_double(k, v); }}},
        {"newton_max_iter",
         {"solver", [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.newton_max_iter = to_int(k, v); }}},
        {"cg_tol_rel",
         {"solver", [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.cg_tol_rel = to_double(k, v); }}},
        {"cg_max_iter",
         {"solver", [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.cg_max_iter = to_int(k, v); }}},
        {"linesearch_factor",
         {"solver",
          [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.linesearch_factor = to_double(k, v); }}},
        {"linesearch_max",
         {"solver", [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.linesearch_max = to_int(k, v); }}},
        {"rounding_floor_factor",
         {"solver",
          [](RunConfig& c, const std::string& k, std::string_view v) { c.solver.rounding_floor_factor = to_double(k, v); }}},
        {"output_dir",
         {"output", [](RunConfig& c, const std::string&, std::string_view v) { c.output_dir = std::string(v); }}},
        {"emit_svg", {"output", [](RunConfig& c, const std::string& k, std::string_view v) { c.emit_svg = to_bool(k, v); }}},
    };
    return table;
}

void assign(RunConfig& config, std::set<std::string>& seen, const std::string& section, std::string key,
            std::string_view value) {
    // "homotopy.gamma_min" is accepted as a qualified spelling.
    std::string qualifier = section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
        qualifier = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("config: unknown key '" + key + "'");
    if (!qualifier.empty() && qualifier != it->second.section)
        throw ConfigError("config: key '" + key + "' belongs to section [" + it->second.section + "]");
    it->second.assign(config, key, value);
    seen.insert(key);
}

} // namespace

void RunConfig::validate() const {
    if (components < 1)
        throw ConfigError("config: N must be a positive integer");
    if (!(alpha > 0.0))
        throw ConfigError("config: alpha must be positive");
    if (!(horizon > 0.0))
        throw ConfigError("config: T must be positive");
    if (time_intervals < 1)
        throw ConfigError("config: time_intervals must be positive");
    if (!(mesh_edge > 0.0) || mesh_edge > 2.0)
        throw ConfigError("config: mesh_edge must lie in (0, 2]");
    try {
        homotopy.validate();
        solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
    RunConfig config;
    std::set<std::string> seen;
    std::string section;

    std::istringstream lines{std::string(text)};
    std::string raw;
    int line_number = 0;
    while (std::getline(lines, raw)) {
        ++line_number;
        std::string_view line = raw;
        if (const auto comment = line.find_first_of("#;"); comment != std::string_view::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header on line " + std::to_string(line_number));
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const std::set<std::string> sections = {"problem", "homotopy", "solver", "output"};
            if (!sections.contains(section))
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config: expected 'key = value' on line " + std::to_string(line_number));
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(line_number));
        assign(config, seen, section, key, value);
    }

    for (const auto& [key, value] : overrides)
        assign(config, seen, "", key, trim(value));

    if (!seen.contains("N"))
        throw ConfigError("config: missing required key 'N'");
    if (!seen.contains("alpha"))
        throw ConfigError("config: missing required key 'alpha'");
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), overrides);
}

} // namespace switching
