#include "telesim/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace telesim {

namespace {

std::string prep_name(InputPrep p) {
    switch (p) {
        case InputPrep::superposition: return "superposition";
        case InputPrep::bin1: return "bin1";
        case InputPrep::bin2: return "bin2";
    }
    return "?";
}

InputPrep prep_of(const std::string& s) {
    if (s == "superposition") return InputPrep::superposition;
    if (s == "bin1") return InputPrep::bin1;
    if (s == "bin2") return InputPrep::bin2;
    throw std::invalid_argument("source.prep: unknown value '" + s + "'");
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["source.mu_pair"] = cfg.source.mu_pair;
    j["source.mu_input"] = cfg.source.mu_input;
    j["source.overlap_xi"] = cfg.source.overlap_xi;
    j["source.theta1"] = cfg.source.theta1;
    j["source.prep"] = prep_name(cfg.source.prep);
    for (int k = 0; k < 4; ++k)
        j["det.efficiency_" + std::to_string(k + 1)] = cfg.det.efficiency[k];
    j["det.dark_rate_cps"] = cfg.det.dark_rate_cps;
    j["det.dead_time_ns"] = cfg.det.dead_time_ns;
    j["det.slot_window_ns"] = cfg.det.slot_window_ns;
    j["det.clock_hz"] = cfg.det.clock_hz;
    j["channel.length_km"] = cfg.channel.length_km;
    j["channel.atten_db_per_km"] = cfg.channel.atten_db_per_km;
    j["channel.bsm_signal_db"] = cfg.channel.bsm_signal_db;
    j["channel.bsm_input_db"] = cfg.channel.bsm_input_db;
    j["channel.mzi2_db"] = cfg.channel.mzi2_db;
    j["channel.connectors_db"] = cfg.channel.connectors_db;
    j["channel.signal_collection_db"] = cfg.channel.signal_collection_db;
    j["channel.input_collection_db"] = cfg.channel.input_collection_db;
    j["channel.idler_collection_db"] = cfg.channel.idler_collection_db;
    j["channel.mzi2_phase_jitter_rad"] = cfg.channel.mzi2_phase_jitter_rad;
    j["run.acquisition_s"] = cfg.acquisition_s;
    j["run.seed"] = cfg.seed;
    j["run.engine"] = cfg.engine == Engine::exact ? "exact" : "monte_carlo";
    j["run.threads"] = cfg.threads;
    j["run.per_mode_cutoff"] = cfg.per_mode_cutoff;
    j["run.total_cutoff"] = cfg.total_cutoff;
    j["run.hom_coherence_ps"] = cfg.hom_coherence_ps;
    j["scan.delays_ps"] = cfg.scan.delays_ps;
    j["scan.theta1_list"] = cfg.scan.theta1_list;
    j["scan.input_states"] = cfg.scan.input_states;
    j["scan.theta2_list"] = cfg.scan.theta2_list;
    j["scan.fringe_theta2"] = cfg.scan.fringe_theta2;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& flat) {
    ExperimentConfig cfg = default_config();
    nlohmann::json defaults = config_to_json(cfg);
    for (const auto& [key, value] : flat.items()) {
        if (!defaults.contains(key))
            throw std::invalid_argument("unknown config key '" + key + "'");
    }

    auto get = [&](const std::string& key, auto& target) {
        if (!flat.contains(key)) return;
        try {
            target = flat.at(key).get<std::decay_t<decltype(target)>>();
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument("config key '" + key +
                                        "' has the wrong type");
        }
    };

    get("source.mu_pair", cfg.source.mu_pair);
    get("source.mu_input", cfg.source.mu_input);
    get("source.overlap_xi", cfg.source.overlap_xi);
    get("source.theta1", cfg.source.theta1);
    if (flat.contains("source.prep"))
        cfg.source.prep = prep_of(flat.at("source.prep").get<std::string>());
    for (int k = 0; k < 4; ++k)
        get("det.efficiency_" + std::to_string(k + 1), cfg.det.efficiency[k]);
    get("det.dark_rate_cps", cfg.det.dark_rate_cps);
    get("det.dead_time_ns", cfg.det.dead_time_ns);
    get("det.slot_window_ns", cfg.det.slot_window_ns);
    get("det.clock_hz", cfg.det.clock_hz);
    get("channel.length_km", cfg.channel.length_km);
    get("channel.atten_db_per_km", cfg.channel.atten_db_per_km);
    get("channel.bsm_signal_db", cfg.channel.bsm_signal_db);
    get("channel.bsm_input_db", cfg.channel.bsm_input_db);
    get("channel.mzi2_db", cfg.channel.mzi2_db);
    get("channel.connectors_db", cfg.channel.connectors_db);
    get("channel.signal_collection_db", cfg.channel.signal_collection_db);
    get("channel.input_collection_db", cfg.channel.input_collection_db);
    get("channel.idler_collection_db", cfg.channel.idler_collection_db);
    get("channel.mzi2_phase_jitter_rad", cfg.channel.mzi2_phase_jitter_rad);
    get("run.acquisition_s", cfg.acquisition_s);
    get("run.seed", cfg.seed);
    if (flat.contains("run.engine")) {
        std::string e = flat.at("run.engine").get<std::string>();
        if (e == "exact") cfg.engine = Engine::exact;
        else if (e == "monte_carlo") cfg.engine = Engine::monte_carlo;
        else throw std::invalid_argument("run.engine: unknown value '" + e + "'");
    }
    get("run.threads", cfg.threads);
    get("run.per_mode_cutoff", cfg.per_mode_cutoff);
    get("run.total_cutoff", cfg.total_cutoff);
    get("run.hom_coherence_ps", cfg.hom_coherence_ps);
    get("scan.delays_ps", cfg.scan.delays_ps);
    get("scan.theta1_list", cfg.scan.theta1_list);
    get("scan.input_states", cfg.scan.input_states);
    get("scan.theta2_list", cfg.scan.theta2_list);
    get("scan.fringe_theta2", cfg.scan.fringe_theta2);

    cfg.validate();
    return cfg;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    for (int d = -50; d <= 50; d += 10)
        cfg.scan.delays_ps.push_back(static_cast<double>(d));
    for (int k = 0; k < 13; ++k)
        cfg.scan.theta1_list.push_back(k * M_PI / 6.0);
    cfg.scan.input_states = {"1", "2", "plus", "minus", "L", "R"};
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config '" + path +
                                    "': top level must be an object");
    return config_from_json(j);
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config"] = config;
    j["seed"] = seed;
    j["engine"] = engine;
    j["version"] = version;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["outputs"] = outputs;
    return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace telesim
