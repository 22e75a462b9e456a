#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "telesim/fock.hpp"
#include "telesim/qubit.hpp"

namespace telesim {

struct DetectorParams {
    // system detection efficiencies, SNSPD1..4
    std::array<double, 4> efficiency{0.80, 0.86, 0.86, 0.81};
    double dark_rate_cps = 100.0;
    double dead_time_ns = 100.0;
    double slot_window_ns = 1.0;  // time-bin pitch
    double clock_hz = 35.53e6;

    void validate() const;
    double dark_prob_per_slot() const {
        return dark_rate_cps * slot_window_ns * 1e-9;
    }
};

struct ChannelParams {
    double length_km = 102.0;
    double atten_db_per_km = 0.21;
    // per-element insertion losses
    double bsm_signal_db = 1.0;   // signal path into the BSM coupler
    double bsm_input_db = 1.0;    // input path into the BSM coupler
    double mzi2_db = 2.0;         // analysis interferometer
    double connectors_db = 0.0;   // idler-channel connectors/splices
    // source-side collection and filtering (WDM, bandpass) per channel
    double signal_collection_db = 12.5;
    double input_collection_db = 0.5;
    double idler_collection_db = 4.0;
    // rms slow phase drift of the analysis interferometer relative to the
    // source interferometer over an acquisition
    double mzi2_phase_jitter_rad = 0.75;

    void validate() const;
    double fiber_survival() const;  // 10^(-(L*atten + connectors)/10)
};

inline double db_to_survival(double db) { return std::pow(10.0, -db / 10.0); }

// Which detector clicked in which time slot within one clock cycle.
struct ClickPattern {
    std::set<std::pair<int, int>> clicks;  // (detector 1..4, slot)

    bool has(int det, int slot) const { return clicks.count({det, slot}) > 0; }
    bool detector_clicked(int det) const;
    auto operator<=>(const ClickPattern&) const = default;
};

// 50:50 coupler between the signal and input channels, per bin and per
// internal variant. Output ports keep the spatial labels: "signal" feeds
// SNSPD1, "input" feeds SNSPD2.
FockState bsm_transform(const FockState& state);

// Analysis interferometer: idler bin b -> slots {b, b+1} on two output
// channels mzi3/mzi4 (toward SNSPD3/4). Slot 2 carries the interference;
// slots 1 and 3 are the time basis. Registers the six output modes.
FockState mzi2_transform(const FockState& state, double theta2);

// Fiber attenuation plus connector losses applied to every idler mode.
FockState fiber_loss(const FockState& state, const ChannelParams& ch);

// Loss of `db` applied to every mode of a spatial channel.
FockState path_loss(const FockState& state, const std::string& spatial,
                    double db);

// mode -> (detector, slot)
using ModeMap = std::map<ModeLabel, std::pair<int, int>>;

// Exact threshold-click statistics: photon thinning by detector efficiency,
// dark counts per slot, then the dead-time rule (a click within dead_time_ns
// after an earlier click on the same detector is erased).
std::map<ClickPattern, double> click_distribution(const FockState& state,
                                                  const DetectorParams& det,
                                                  const ModeMap& mode_map);

enum class Heralding { PsiMinus, None };

// Ψ⁻ signature: SNSPD1 and SNSPD2 both clicked, in different time slots.
Heralding classify_heralding(const ClickPattern& p);

enum class Analysis {
    proj_plus_theta2,   // SNSPD3, slot 2
    proj_minus_theta2,  // SNSPD4, slot 2
    proj_1,             // slot 1, either detector
    proj_2,             // slot 3, either detector
    none,
    ambiguous,          // multiple analysis clicks, discarded and counted
};

std::string to_string(Analysis a);

Analysis classify_analysis(const ClickPattern& p);

}  // namespace telesim
