#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "telesim/apparatus.hpp"
#include "telesim/fock.hpp"
#include "telesim/qubit.hpp"
#include "telesim/sources.hpp"

namespace telesim {

enum class Engine { exact, monte_carlo };

struct ScanSpec {
    std::vector<double> delays_ps;            // HOM scan
    std::vector<double> theta1_list;          // fringe scan
    std::vector<std::string> input_states;    // QST
    std::vector<double> theta2_list{0.0, 1.5707963267948966};
    double fringe_theta2 = 0.0;
};

struct ExperimentConfig {
    SourceParams source;
    DetectorParams det;
    ChannelParams channel;
    double acquisition_s = 6000.0;
    std::uint64_t seed = 1;
    Engine engine = Engine::exact;
    int threads = 1;
    int per_mode_cutoff = 2;
    int total_cutoff = 4;
    double hom_coherence_ps = 20.0;  // photon-pair coherence time
    ScanSpec scan;

    void validate() const;
    double cycles() const { return acquisition_s * det.clock_hz; }
};

// --- exact per-cycle pipeline ---

struct CycleDistribution {
    std::map<ClickPattern, double> patterns;
    double truncated_weight = 0.0;
};

// Full teleportation chain for one parameter point: sources, path losses,
// BSM coupler, optional fiber, analysis interferometer, detector model.
CycleDistribution teleport_cycle(const ExperimentConfig& cfg,
                                 const SourceParams& src, double theta2,
                                 bool with_fiber);

// Interference-scan chain: single-bin sources, BSM coupler, idler direct to
// SNSPD3 (no fiber, no analysis interferometer).
CycleDistribution hom_cycle(const ExperimentConfig& cfg, double xi);

// --- scenario runners ---

struct HomPoint {
    double delay_ps;
    double xi;
    double triple_prob;  // per clock cycle
    double counts;       // expected (exact) or sampled (monte_carlo)
};

std::vector<HomPoint> run_hom_scan(const ExperimentConfig& cfg,
                                   const std::vector<double>& delays_ps);

struct FringePoint {
    double theta1;
    double p3, p4;  // heralded slot-2 probability per cycle, SNSPD3/4
    double counts_det3, counts_det4;
};

std::vector<FringePoint> run_fringe_scan(const ExperimentConfig& cfg,
                                         const std::vector<double>& theta1_list);

struct CountTable {
    std::map<std::string, double> counts;  // projection label -> count
    double total_cycles = 0.0;
    double ambiguous = 0.0;  // discarded multi-click analysis cycles
    double herald_count = 0.0;
};

// Six-projection acquisition per input state: one run for each theta2 in
// cfg.scan.theta2_list (energy basis), time-basis slots accumulated in both.
std::map<std::string, CountTable> run_qst(
    const ExperimentConfig& cfg, const std::vector<std::string>& input_states);

// --- ideal-protocol extraction (exact limits, no detectors) ---

struct HeraldBranch {
    TimeBinQubit idler;
    double probability;
};

struct HeraldedIdler {
    std::vector<HeraldBranch> branches;  // one per Ψ⁻ click combination
    double herald_probability = 0.0;     // sum over branches
};

// mu -> 0 post-selected single-pair/single-photon limit: conditional idler
// qubit for each Ψ⁻ signature pattern and the total herald probability.
HeraldedIdler ideal_heralded_idler(const SourceParams& src);

// --- fitting ---

struct VisibilityFit {
    double visibility = 0.0;
    double phase = 0.0;      // fringe phase, or dip center for HOM
    double amplitude = 0.0;  // fringe mean level, or dip baseline
    double visibility_sigma = 0.0;
    bool degenerate = false;
};

// Least-squares fit of A(1 + V cos(x + φ)); sigma by Poisson bootstrap.
VisibilityFit fit_fringe_visibility(
    const std::vector<std::pair<double, double>>& points, int resamples = 1000,
    std::uint64_t seed = 1);

// Least-squares fit of B - D exp(-(x-x0)²/(2σ²)); dip visibility V = D/B.
VisibilityFit fit_hom_visibility(
    const std::vector<std::pair<double, double>>& points, int resamples = 1000,
    std::uint64_t seed = 1);

// xi(delay) = xi0 exp(-δ²/(2 τc²)) with τc from the pair coherence time.
double xi_at_delay(double xi0, double delay_ps, double coherence_fwhm_ps);

// Expected input state label -> teleported target (Ψ⁻ branch map applied).
TimeBinQubit teleported_target(const std::string& input_label);

// order-deterministic parallel map over [0, n)
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// dip visibility of the exact engine: (far - zero-delay) / far triple rate
double hom_visibility_exact(const ExperimentConfig& cfg, double xi0);

struct XiCalibration {
    double xi0 = 1.0;
    double visibility = 0.0;
    bool in_range = false;  // target reachable within [lo, hi]
};

// Bisection over xi0 for the target exact-engine dip visibility.
XiCalibration calibrate_xi0(const ExperimentConfig& cfg, double target_v,
                            double lo = 0.8, double hi = 1.0);

}  // namespace telesim
