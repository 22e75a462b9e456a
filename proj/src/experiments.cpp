#include "telesim/experiments.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "telesim/optim.hpp"
#include "telesim/rng.hpp"

namespace telesim {

void ExperimentConfig::validate() const {
    source.validate();
    det.validate();
    channel.validate();
    if (acquisition_s <= 0.0)
        throw std::invalid_argument("ExperimentConfig: acquisition_s <= 0");
    if (threads < 1)
        throw std::invalid_argument("ExperimentConfig: threads < 1");
    if (per_mode_cutoff < 1 || total_cutoff < per_mode_cutoff)
        throw std::invalid_argument("ExperimentConfig: bad cutoffs");
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

namespace {

ModeMap teleport_mode_map(const ModeRegistry& reg) {
    ModeMap map;
    for (int i = 0; i < reg.size(); ++i) {
        const auto& m = reg.label(i);
        if (m.spatial == kSignal) map[m] = {1, m.bin};
        if (m.spatial == kInput) map[m] = {2, m.bin};
        if (m.spatial == kAnalysisPort3) map[m] = {3, m.bin};
        if (m.spatial == kAnalysisPort4) map[m] = {4, m.bin};
    }
    return map;
}

double pattern_mass(const std::map<ClickPattern, double>& dist,
                    const std::function<bool(const ClickPattern&)>& pred) {
    double p = 0.0;
    for (const auto& [pat, prob] : dist)
        if (pred(pat)) p += prob;
    return p;
}

}  // namespace

CycleDistribution teleport_cycle(const ExperimentConfig& cfg,
                                 const SourceParams& src, double theta2,
                                 bool with_fiber) {
    auto reg = make_source_registry(2, cfg.per_mode_cutoff, cfg.total_cutoff);
    FockState pair = build_spdc_state(src, reg, 2);
    FockState input = build_input_state(src, reg, 2);
    FockState state = product(pair, input);

    const auto& ch = cfg.channel;
    state = path_loss(state, kSignal, ch.signal_collection_db + ch.bsm_signal_db);
    state = path_loss(state, kInput, ch.input_collection_db + ch.bsm_input_db);
    double idler_db = ch.idler_collection_db + ch.mzi2_db;
    if (with_fiber) idler_db += ch.length_km * ch.atten_db_per_km + ch.connectors_db;
    state = path_loss(state, kIdler, idler_db);

    state = bsm_transform(state);

    // Slow analyzer phase drift: average the cycle statistics over a
    // Gaussian-distributed theta2 offset (Gauss–Hermite quadrature; the
    // click probabilities are a low-order trigonometric polynomial in
    // theta2, so 7 nodes are effectively exact for sigma <~ 1 rad).
    static const double gh_x[7] = {0.0,
                                   0.8162878828589647,  -0.8162878828589647,
                                   1.6735516287674714,  -1.6735516287674714,
                                   2.6519613568352334,  -2.6519613568352334};
    static const double gh_w[7] = {0.8102646175568073,
                                   0.4256072526101278,  0.4256072526101278,
                                   0.05451558281912703, 0.05451558281912703,
                                   0.0009717812450995192,
                                   0.0009717812450995192};
    const double sqrt_pi = std::sqrt(M_PI);
    double sigma = ch.mzi2_phase_jitter_rad;
    int nodes = sigma > 0.0 ? 7 : 1;

    CycleDistribution out;
    for (int k = 0; k < nodes; ++k) {
        double w = nodes == 1 ? 1.0 : gh_w[k] / sqrt_pi;
        double th = theta2 + (nodes == 1 ? 0.0 : std::sqrt(2.0) * sigma * gh_x[k]);
        FockState analyzed = mzi2_transform(state, th);
        analyzed = normalize(analyzed).first;
        out.truncated_weight += w * analyzed.truncated_weight();
        auto patterns = click_distribution(analyzed, cfg.det,
                                           teleport_mode_map(analyzed.registry()));
        for (const auto& [pat, p] : patterns) out.patterns[pat] += w * p;
    }
    return out;
}

CycleDistribution hom_cycle(const ExperimentConfig& cfg, double xi) {
    auto reg = make_source_registry(1, cfg.per_mode_cutoff, cfg.total_cutoff);
    SourceParams src = cfg.source;
    src.overlap_xi = xi;
    src.prep = InputPrep::bin1;
    FockState pair = build_spdc_state(src, reg, 1);
    FockState input = build_input_state(src, reg, 1);
    FockState state = product(pair, input);

    const auto& ch = cfg.channel;
    state = path_loss(state, kSignal, ch.signal_collection_db + ch.bsm_signal_db);
    state = path_loss(state, kInput, ch.input_collection_db + ch.bsm_input_db);
    state = path_loss(state, kIdler, ch.idler_collection_db);

    state = bsm_transform(state);
    state = normalize(state).first;

    ModeMap map;
    for (int i = 0; i < state.registry().size(); ++i) {
        const auto& m = state.registry().label(i);
        if (m.spatial == kSignal) map[m] = {1, m.bin};
        if (m.spatial == kInput) map[m] = {2, m.bin};
        if (m.spatial == kIdler) map[m] = {3, m.bin};
    }
    CycleDistribution out;
    out.truncated_weight = state.truncated_weight();
    out.patterns = click_distribution(state, cfg.det, map);
    return out;
}

double xi_at_delay(double xi0, double delay_ps, double coherence_fwhm_ps) {
    double tau = coherence_fwhm_ps / std::sqrt(8.0 * std::log(2.0));
    return xi0 * std::exp(-delay_ps * delay_ps / (2.0 * tau * tau));
}

std::vector<HomPoint> run_hom_scan(const ExperimentConfig& cfg,
                                   const std::vector<double>& delays_ps) {
    cfg.validate();
    if (delays_ps.empty())
        throw std::invalid_argument("run_hom_scan: empty delay list");
    std::vector<HomPoint> out(delays_ps.size());
    parallel_for(static_cast<int>(delays_ps.size()), cfg.threads, [&](int i) {
        double xi = xi_at_delay(cfg.source.overlap_xi, delays_ps[i],
                                cfg.hom_coherence_ps);
        auto dist = hom_cycle(cfg, xi);
        double p = pattern_mass(dist.patterns, [](const ClickPattern& pat) {
            return pat.detector_clicked(1) && pat.detector_clicked(2) &&
                   pat.detector_clicked(3);
        });
        double mean = p * cfg.cycles();
        double counts = mean;
        if (cfg.engine == Engine::monte_carlo) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(i), 0);
            counts = static_cast<double>(rng.poisson(mean));
        }
        out[i] = {delays_ps[i], xi, p, counts};
    });
    return out;
}

std::vector<FringePoint> run_fringe_scan(const ExperimentConfig& cfg,
                                         const std::vector<double>& theta1_list) {
    cfg.validate();
    if (theta1_list.empty())
        throw std::invalid_argument("run_fringe_scan: empty phase list");
    std::vector<FringePoint> out(theta1_list.size());
    parallel_for(static_cast<int>(theta1_list.size()), cfg.threads, [&](int i) {
        SourceParams src = cfg.source;
        src.prep = InputPrep::superposition;
        src.theta1 = theta1_list[i];
        auto dist = teleport_cycle(cfg, src, cfg.scan.fringe_theta2,
                                   /*with_fiber=*/false);
        auto heralded = [](const ClickPattern& pat, Analysis a) {
            return classify_heralding(pat) == Heralding::PsiMinus &&
                   classify_analysis(pat) == a;
        };
        double p3 = pattern_mass(dist.patterns, [&](const ClickPattern& pat) {
            return heralded(pat, Analysis::proj_plus_theta2);
        });
        double p4 = pattern_mass(dist.patterns, [&](const ClickPattern& pat) {
            return heralded(pat, Analysis::proj_minus_theta2);
        });
        double c3 = p3 * cfg.cycles();
        double c4 = p4 * cfg.cycles();
        if (cfg.engine == Engine::monte_carlo) {
            RngStream r3(cfg.seed, static_cast<std::uint64_t>(i), 0);
            RngStream r4(cfg.seed, static_cast<std::uint64_t>(i), 1);
            c3 = static_cast<double>(r3.poisson(c3));
            c4 = static_cast<double>(r4.poisson(c4));
        }
        out[i] = {theta1_list[i], p3, p4, c3, c4};
    });
    return out;
}

namespace {

SourceParams prep_for_label(SourceParams base, const std::string& label) {
    if (label == "1") {
        base.prep = InputPrep::bin1;
    } else if (label == "2") {
        base.prep = InputPrep::bin2;
    } else {
        base.prep = InputPrep::superposition;
        if (label == "plus") base.theta1 = 0.0;
        else if (label == "minus") base.theta1 = M_PI;
        else if (label == "L") base.theta1 = M_PI / 2.0;
        else if (label == "R") base.theta1 = -M_PI / 2.0;
        else throw std::invalid_argument("unknown input state label " + label);
    }
    return base;
}

}  // namespace

std::map<std::string, CountTable> run_qst(
    const ExperimentConfig& cfg, const std::vector<std::string>& input_states) {
    cfg.validate();
    if (input_states.empty())
        throw std::invalid_argument("run_qst: empty state list");
    if (cfg.scan.theta2_list.size() != 2)
        throw std::invalid_argument("run_qst: need exactly two theta2 settings");

    const int n_states = static_cast<int>(input_states.size());
    const int n_points = n_states * 2;
    std::vector<CountTable> partial(n_points);

    parallel_for(n_points, cfg.threads, [&](int idx) {
        const int s = idx / 2;
        const int run = idx % 2;
        SourceParams src = prep_for_label(cfg.source, input_states[s]);
        double theta2 = cfg.scan.theta2_list[run];
        auto dist = teleport_cycle(cfg, src, theta2, /*with_fiber=*/true);

        // projection labels for this theta2 setting
        const std::string plus_label = run == 0 ? "plus" : "L";
        const std::string minus_label = run == 0 ? "minus" : "R";

        std::map<std::string, double> prob;
        double p_herald = 0.0, p_amb = 0.0;
        for (const auto& [pat, p] : dist.patterns) {
            if (classify_heralding(pat) != Heralding::PsiMinus) continue;
            p_herald += p;
            switch (classify_analysis(pat)) {
                case Analysis::proj_plus_theta2: prob[plus_label] += p; break;
                case Analysis::proj_minus_theta2: prob[minus_label] += p; break;
                case Analysis::proj_1: prob["1"] += p; break;
                case Analysis::proj_2: prob["2"] += p; break;
                case Analysis::ambiguous: p_amb += p; break;
                case Analysis::none: break;
            }
        }

        CountTable& t = partial[idx];
        t.total_cycles = cfg.cycles();
        for (const auto& [label, p] : prob) {
            double mean = p * cfg.cycles();
            if (cfg.engine == Engine::monte_carlo) {
                std::uint64_t stream =
                    std::hash<std::string>{}(label) & 0xffffffffULL;
                RngStream rng(cfg.seed, static_cast<std::uint64_t>(idx), stream);
                t.counts[label] = static_cast<double>(rng.poisson(mean));
            } else {
                t.counts[label] = mean;
            }
        }
        t.herald_count = p_herald * cfg.cycles();
        t.ambiguous = p_amb * cfg.cycles();
    });

    std::map<std::string, CountTable> out;
    for (int s = 0; s < n_states; ++s) {
        CountTable merged;
        for (int run = 0; run < 2; ++run) {
            const CountTable& t = partial[s * 2 + run];
            merged.total_cycles += t.total_cycles;
            merged.herald_count += t.herald_count;
            merged.ambiguous += t.ambiguous;
            for (const auto& [label, c] : t.counts) merged.counts[label] += c;
        }
        for (const auto& label : {"plus", "minus", "L", "R", "1", "2"})
            merged.counts.try_emplace(label, 0.0);
        out[input_states[s]] = std::move(merged);
    }
    return out;
}

HeraldedIdler ideal_heralded_idler(const SourceParams& src) {
    if (src.overlap_xi != 1.0)
        throw std::invalid_argument("ideal_heralded_idler: requires xi = 1");
    auto reg = make_source_registry(2);
    FockState state = build_postselected_state(src, reg, 2);
    state = bsm_transform(state);

    auto occ_for = [&](int sig_bin, int inp_bin, int idler_bin) {
        Occupation occ(reg->size(), 0);
        occ[reg->index_of(matched(kSignal, sig_bin))] = 1;
        occ[reg->index_of(matched(kInput, inp_bin))] = 1;
        occ[reg->index_of(matched(kIdler, idler_bin))] = 1;
        return occ;
    };

    HeraldedIdler out;
    for (auto [sb, ib] : {std::pair{1, 2}, std::pair{2, 1}}) {
        Complex c1 = state.amplitude(occ_for(sb, ib, 1));
        Complex c2 = state.amplitude(occ_for(sb, ib, 2));
        double p = std::norm(c1) + std::norm(c2);
        if (p < 1e-30) continue;
        double n = std::sqrt(p);
        out.branches.push_back({TimeBinQubit(c1 / n, c2 / n), p});
        out.herald_probability += p;
    }
    return out;
}

TimeBinQubit teleported_target(const std::string& input_label) {
    TimeBinQubit in = standard_state(input_label);
    return TimeBinQubit(in.beta, -in.alpha);  // Ψ⁻ branch map
}

double hom_visibility_exact(const ExperimentConfig& cfg, double xi0) {
    auto triple = [&](double xi) {
        auto dist = hom_cycle(cfg, xi);
        return pattern_mass(dist.patterns, [](const ClickPattern& pat) {
            return pat.detector_clicked(1) && pat.detector_clicked(2) &&
                   pat.detector_clicked(3);
        });
    };
    double far = triple(0.0);
    double dip = triple(xi0);
    if (far <= 0.0) return 0.0;
    return (far - dip) / far;
}

XiCalibration calibrate_xi0(const ExperimentConfig& cfg, double target_v,
                            double lo, double hi) {
    XiCalibration cal;
    double v_lo = hom_visibility_exact(cfg, lo);
    double v_hi = hom_visibility_exact(cfg, hi);
    if (target_v <= v_lo) {
        cal.xi0 = lo;
        cal.visibility = v_lo;
        cal.in_range = std::abs(v_lo - target_v) <= 5e-3;
        return cal;
    }
    if (target_v >= v_hi) {
        cal.xi0 = hi;
        cal.visibility = v_hi;
        cal.in_range = std::abs(v_hi - target_v) <= 5e-3;
        return cal;
    }
    double a = lo, b = hi;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (a + b);
        if (hom_visibility_exact(cfg, mid) < target_v)
            a = mid;
        else
            b = mid;
    }
    cal.xi0 = 0.5 * (a + b);
    cal.visibility = hom_visibility_exact(cfg, cal.xi0);
    cal.in_range = true;
    return cal;
}

VisibilityFit fit_fringe_visibility(
    const std::vector<std::pair<double, double>>& points, int resamples,
    std::uint64_t seed) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_fringe_visibility: need >= 4 points");

    auto fit_once = [&](const std::vector<double>& y) {
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < points.size(); ++i) {
            Eigen::Vector3d row(1.0, std::cos(points[i].first),
                                std::sin(points[i].first));
            ata += row * row.transpose();
            atb += row * y[i];
        }
        Eigen::Vector3d a = ata.ldlt().solve(atb);
        return a;
    };

    std::vector<double> y;
    for (const auto& [x, c] : points) y.push_back(c);
    Eigen::Vector3d a = fit_once(y);

    VisibilityFit fit;
    if (std::abs(a(0)) < 1e-300 ||
        std::hypot(a(1), a(2)) < 1e-12 * std::abs(a(0))) {
        fit.degenerate = true;
        fit.amplitude = a(0);
        return fit;
    }
    fit.amplitude = a(0);
    fit.visibility = std::hypot(a(1), a(2)) / a(0);
    fit.phase = std::atan2(-a(2), a(1));

    if (resamples > 0) {
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < resamples; ++r) {
            RngStream rng(seed, 0x66726e67ULL, static_cast<std::uint64_t>(r));
            std::vector<double> yr(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                yr[i] = static_cast<double>(rng.poisson(std::max(0.0, y[i])));
            Eigen::Vector3d ar = fit_once(yr);
            double v = std::abs(ar(0)) < 1e-300
                           ? 0.0
                           : std::hypot(ar(1), ar(2)) / ar(0);
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / resamples;
        fit.visibility_sigma =
            std::sqrt(std::max(0.0, sum2 / resamples - mean * mean));
    }
    return fit;
}

VisibilityFit fit_hom_visibility(
    const std::vector<std::pair<double, double>>& points, int resamples,
    std::uint64_t seed) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_hom_visibility: need >= 4 points");

    auto fit_once = [&](const std::vector<double>& y) {
        double ymax = *std::max_element(y.begin(), y.end());
        double ymin = *std::min_element(y.begin(), y.end());
        std::size_t imin = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] <= y[imin]) imin = i;
        double xspan = points.back().first - points.front().first;
        std::vector<double> p0{ymax, ymax - ymin, points[imin].first,
                               std::max(1e-6, std::abs(xspan) / 6.0)};
        auto sse = [&](const std::vector<double>& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                double dx = points[i].first - p[2];
                double model =
                    p[0] - p[1] * std::exp(-dx * dx / (2.0 * p[3] * p[3]));
                s += (y[i] - model) * (y[i] - model);
            }
            return s;
        };
        auto r = nelder_mead(sse, p0, 0.2 * std::max(1.0, ymax), 2000, 1e-14);
        return r.x;
    };

    std::vector<double> y;
    for (const auto& [x, c] : points) y.push_back(c);

    VisibilityFit fit;
    double spread = *std::max_element(y.begin(), y.end()) -
                    *std::min_element(y.begin(), y.end());
    if (spread <= 0.0) {
        fit.degenerate = true;
        fit.amplitude = y.empty() ? 0.0 : y.front();
        return fit;
    }

    auto p = fit_once(y);
    fit.amplitude = p[0];
    fit.phase = p[2];  // dip center
    // dip visibility 1 - C_min/C_max, the convention whose classical
    // coherent-light bound is 50%
    fit.visibility = p[0] > 0.0 ? p[1] / p[0] : 0.0;

    if (resamples > 0) {
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < resamples; ++r) {
            RngStream rng(seed, 0x686f6dULL, static_cast<std::uint64_t>(r));
            std::vector<double> yr(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                yr[i] = static_cast<double>(rng.poisson(std::max(0.0, y[i])));
            auto pr = fit_once(yr);
            double v = pr[0] > 0.0 ? pr[1] / pr[0] : 0.0;
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / resamples;
        fit.visibility_sigma =
            std::sqrt(std::max(0.0, sum2 / resamples - mean * mean));
    }
    return fit;
}

}  // namespace telesim
