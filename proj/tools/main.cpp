#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "telesim/config.hpp"
#include "telesim/experiments.hpp"
#include "telesim/rng.hpp"
#include "telesim/tomography.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace telesim;

namespace {

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const fs::path& out_dir, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs,
                    const std::string& started) {
    RunManifest m;
    m.config = config_to_json(cfg);
    m.seed = cfg.seed;
    m.engine = cfg.engine == Engine::exact ? "exact" : "monte_carlo";
    m.started_utc = started;
    m.finished_utc = utc_now();
    m.outputs = outputs;
    write_json_file((out_dir / "manifest.json").string(), m.to_json());
}

json fit_to_json(const VisibilityFit& f) {
    return {{"visibility", f.visibility},
            {"visibility_sigma", f.visibility_sigma},
            {"phase", f.phase},
            {"amplitude", f.amplitude},
            {"degenerate", f.degenerate}};
}

int cmd_hom(const ExperimentConfig& cfg, const fs::path& out_dir) {
    std::string started = utc_now();
    auto points = run_hom_scan(cfg, cfg.scan.delays_ps);

    std::ostringstream csv;
    csv << "delay_ps,xi,triple_prob,counts\n";
    for (const auto& p : points)
        csv << format_double(p.delay_ps) << "," << format_double(p.xi) << ","
            << format_double(p.triple_prob) << "," << format_double(p.counts)
            << "\n";
    write_text_file((out_dir / "hom.csv").string(), csv.str());

    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points) pts.push_back({p.delay_ps, p.counts});
    auto fit = fit_hom_visibility(pts, 1000, cfg.seed);
    write_json_file((out_dir / "hom_fit.json").string(), fit_to_json(fit));

    write_manifest(out_dir, cfg, {"hom.csv", "hom_fit.json"}, started);
    return 0;
}

int cmd_fringe(const ExperimentConfig& cfg, const fs::path& out_dir) {
    std::string started = utc_now();
    auto points = run_fringe_scan(cfg, cfg.scan.theta1_list);

    std::ostringstream csv;
    csv << "theta1,counts_det3,counts_det4\n";
    for (const auto& p : points)
        csv << format_double(p.theta1) << "," << format_double(p.counts_det3)
            << "," << format_double(p.counts_det4) << "\n";
    write_text_file((out_dir / "fringe.csv").string(), csv.str());

    std::vector<std::pair<double, double>> p3, p4;
    for (const auto& p : points) {
        p3.push_back({p.theta1, p.counts_det3});
        p4.push_back({p.theta1, p.counts_det4});
    }
    auto f3 = fit_fringe_visibility(p3, 1000, cfg.seed);
    auto f4 = fit_fringe_visibility(p4, 1000, cfg.seed + 1);
    double dphi = std::remainder(f3.phase - f4.phase, 2.0 * M_PI);
    json out = {{"det3", fit_to_json(f3)},
                {"det4", fit_to_json(f4)},
                {"phase_difference", dphi}};
    write_json_file((out_dir / "fringe_fit.json").string(), out);

    write_manifest(out_dir, cfg, {"fringe.csv", "fringe_fit.json"}, started);
    return 0;
}

json count_table_json(const CountTable& t) {
    return {{"counts", t.counts},
            {"total_cycles", t.total_cycles},
            {"ambiguous", t.ambiguous},
            {"herald_count", t.herald_count}};
}

int cmd_qst(const ExperimentConfig& cfg, const fs::path& out_dir) {
    std::string started = utc_now();
    auto states = cfg.scan.input_states;
    auto tables = run_qst(cfg, states);
    auto proj = ProjectionSet::weighted(cfg.det);

    std::vector<std::string> outputs;
    json report;
    double f_sum = 0.0, var_sum = 0.0;
    bool all_converged = true;
    for (const auto& label : states) {
        const CountTable& t = tables.at(label);
        std::string cf = "counts_" + label + ".json";
        write_json_file((out_dir / cf).string(), count_table_json(t));
        outputs.push_back(cf);

        TimeBinQubit target = teleported_target(label);
        auto est = fidelity_with_error(t.counts, proj, target, 1000, cfg.seed);
        all_converged = all_converged && est.mle.converged;

        std::string rf = "rho_" + label + ".json";
        write_json_file((out_dir / rf).string(), est.mle.rho.to_json());
        outputs.push_back(rf);

        auto ev = est.mle.rho.eigenvalues();
        report["states"][label] = {
            {"fidelity", est.fidelity},
            {"sigma", est.sigma},
            {"target", json::array({{target.alpha.real(), target.alpha.imag()},
                                    {target.beta.real(), target.beta.imag()}})},
            {"eigenvalues", json::array({ev[0], ev[1]})},
            {"converged", est.mle.converged},
            {"log_likelihood", est.mle.log_likelihood},
            {"herald_count", t.herald_count},
            {"ambiguous", t.ambiguous}};
        f_sum += est.fidelity;
        var_sum += est.sigma * est.sigma;
    }
    double n = static_cast<double>(states.size());
    double avg_f = f_sum / n;
    double avg_sigma = std::sqrt(var_sum) / n;
    report["average_fidelity"] = avg_f;
    report["average_fidelity_sigma"] = avg_sigma;
    report["classical_bound"] = 2.0 / 3.0;
    report["bound_excess_sigmas"] =
        avg_sigma > 0.0 ? (avg_f - 2.0 / 3.0) / avg_sigma : 0.0;
    write_json_file((out_dir / "report.json").string(), report);
    outputs.push_back("report.json");

    write_manifest(out_dir, cfg, outputs, started);
    return all_converged ? 0 : 2;
}

ExperimentConfig paper_config(std::uint64_t seed, int threads) {
    ExperimentConfig cfg = default_config();
    cfg.engine = Engine::monte_carlo;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
}

int cmd_paper_repro(const fs::path& out_dir, std::uint64_t seed, int threads) {
    std::string started = utc_now();
    ExperimentConfig cfg = paper_config(seed, threads);

    // single free calibration: xi0 against the measured dip visibility
    ExperimentConfig cal_cfg = cfg;
    cal_cfg.engine = Engine::exact;
    auto cal = calibrate_xi0(cal_cfg, 0.769);
    cfg.source.overlap_xi = cal.xi0;

    // interference dip at the calibrated overlap
    ExperimentConfig hom_cfg = cfg;
    hom_cfg.acquisition_s = 600.0;
    auto hom_points = run_hom_scan(hom_cfg, hom_cfg.scan.delays_ps);
    std::vector<std::pair<double, double>> hpts;
    for (const auto& p : hom_points) hpts.push_back({p.delay_ps, p.counts});
    auto hom_fit = fit_hom_visibility(hpts, 1000, cfg.seed);

    // fringe scan without the transmission fiber, 120 s per point
    ExperimentConfig fr_cfg = cfg;
    fr_cfg.acquisition_s = 120.0;
    auto fringe = run_fringe_scan(fr_cfg, fr_cfg.scan.theta1_list);
    std::vector<std::pair<double, double>> p3, p4;
    for (const auto& p : fringe) {
        p3.push_back({p.theta1, p.counts_det3});
        p4.push_back({p.theta1, p.counts_det4});
    }
    auto f3 = fit_fringe_visibility(p3, 1000, cfg.seed);
    auto f4 = fit_fringe_visibility(p4, 1000, cfg.seed + 1);

    // six-state tomography over the fiber, 6000 s per analyzer setting
    ExperimentConfig qst_cfg = cfg;
    qst_cfg.acquisition_s = 6000.0;
    auto tables = run_qst(qst_cfg, qst_cfg.scan.input_states);
    auto proj = ProjectionSet::weighted(cfg.det);
    double f_sum = 0.0, var_sum = 0.0, basis_counts = 0.0;
    for (const auto& label : qst_cfg.scan.input_states) {
        const auto& t = tables.at(label);
        auto est = fidelity_with_error(t.counts, proj,
                                       teleported_target(label), 1000, seed);
        f_sum += est.fidelity;
        var_sum += est.sigma * est.sigma;
        for (const auto& [l, c] : t.counts) basis_counts += c;
    }
    double n_states = static_cast<double>(qst_cfg.scan.input_states.size());
    double avg_f = f_sum / n_states;
    double avg_sigma = std::sqrt(var_sum) / n_states;
    basis_counts /= 6.0 * n_states;

    struct Row {
        const char* metric;
        double paper;
        double simulated;
    };
    std::vector<Row> rows = {
        {"hom_visibility", 0.769, hom_fit.visibility},
        {"fringe_visibility_snspd3", 0.605, f3.visibility},
        {"fringe_visibility_snspd4", 0.575, f4.visibility},
        {"average_fidelity", 0.837, avg_f},
        {"triples_per_basis", 170.0, basis_counts},
    };

    json cmp;
    cmp["calibrated_xi0"] = cal.xi0;
    cmp["calibration_visibility_exact"] = cal.visibility;
    cmp["average_fidelity_sigma"] = avg_sigma;
    for (const auto& r : rows)
        cmp["comparison"][r.metric] = {{"paper", r.paper},
                                       {"simulated", r.simulated}};
    write_json_file((out_dir / "comparison.json").string(), cmp);

    std::printf("calibrated xi0 = %.4f (exact visibility %.4f)\n", cal.xi0,
                cal.visibility);
    std::printf("%-28s %10s %12s\n", "metric", "paper", "simulated");
    for (const auto& r : rows)
        std::printf("%-28s %10.4g %12.4g\n", r.metric, r.paper, r.simulated);

    write_manifest(out_dir, cfg, {"comparison.json"}, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-bin quantum teleportation click-statistics simulator"};
    app.require_subcommand(0, 1);

    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults,
                 "print the default config as flat JSON and exit");

    std::string config_path, out_dir;
    int threads = 0;
    std::uint64_t repro_seed = 7;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("config", config_path, "config file (flat JSON)")
                ->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--threads", threads, "worker threads (default: config)");
    };

    CLI::App* hom = app.add_subcommand("hom", "Hong-Ou-Mandel delay scan");
    add_common(hom, true);
    CLI::App* fringe =
        app.add_subcommand("fringe", "teleportation fringe scan vs theta1");
    add_common(fringe, true);
    CLI::App* qst =
        app.add_subcommand("qst", "six-state tomography of the teleported qubit");
    add_common(qst, true);
    CLI::App* repro = app.add_subcommand(
        "paper-repro", "run the bundled paper-parameter configuration");
    add_common(repro, false);
    repro->add_option("--seed", repro_seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    if (print_defaults) {
        std::cout << config_to_json(default_config()).dump(2) << "\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }

    try {
        fs::create_directories(out_dir);
        if (repro->parsed())
            return cmd_paper_repro(out_dir, repro_seed,
                                   threads > 0 ? threads : 1);

        ExperimentConfig cfg = load_config(config_path);
        if (threads > 0) cfg.threads = threads;
        if (hom->parsed()) return cmd_hom(cfg, out_dir);
        if (fringe->parsed()) return cmd_fringe(cfg, out_dir);
        if (qst->parsed()) return cmd_qst(cfg, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
