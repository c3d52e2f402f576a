#pragma once

#include "switching/homotopy.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace switching {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int components = 0;  // key "N"
    double alpha = 0.0;
    double horizon = 10.0;  // key "T"
    int time_intervals = 200;
    double mesh_edge = 0.1;
    HomotopySchedule homotopy{};
    SolverSettings solver{};
    std::filesystem::path output_dir = ".";
    bool emit_svg = false;

    /// Throws ConfigError.
    void validate() const;
};

/// Key (bare name) -> value, as given on the command line.
using ConfigOverrides = std::map<std::string, std::string>;

/// Parses `key = value` lines. Optional sections [problem], [homotopy],
/// [solver], [output] may group keys; a key listed under the wrong section,
/// an unknown key, or a malformed value is a ConfigError. '#' and ';' start
/// comments. Overrides are applied after the text, then N and alpha are
/// required and everything is validated.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
RunConfig parse_config_file(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

} // namespace switching
