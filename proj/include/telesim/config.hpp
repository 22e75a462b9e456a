#pragma once

#include <string>
#include <vector>

#include "telesim/experiments.hpp"
#include "vendor_json_fwd.hpp"

namespace telesim {

inline constexpr const char* kVersion = "0.1.0";

// Flat JSON config with dotted keys grouped by module, e.g.
// {"source.mu_pair": 0.016, "det.efficiency_1": 0.80, ...}.
// Unknown keys and type mismatches are reported with the offending key.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& flat);

ExperimentConfig default_config();

// Parses a config file; throws std::invalid_argument with file/key context.
ExperimentConfig load_config(const std::string& path);

struct RunManifest {
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string engine;
    std::string version = kVersion;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

// Writes JSON atomically (temp file + rename), UTF-8, sorted keys.
void write_json_file(const std::string& path, const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& text);

std::string format_double(double v);  // stable CSV number formatting

}  // namespace telesim
