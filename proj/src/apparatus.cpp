#include "telesim/apparatus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "telesim/sources.hpp"

namespace telesim {

void DetectorParams::validate() const {
    for (double e : efficiency)
        if (e < 0.0 || e > 1.0)
            throw std::invalid_argument("DetectorParams: efficiency outside [0,1]");
    if (dark_rate_cps < 0.0 || dead_time_ns < 0.0 || slot_window_ns <= 0.0 ||
        clock_hz <= 0.0)
        throw std::invalid_argument("DetectorParams: negative rate or window");
}

void ChannelParams::validate() const {
    for (double v : {length_km, atten_db_per_km, bsm_signal_db, bsm_input_db,
                     mzi2_db, connectors_db, signal_collection_db,
                     input_collection_db, idler_collection_db})
        if (v < 0.0)
            throw std::invalid_argument("ChannelParams: negative loss");
}

double ChannelParams::fiber_survival() const {
    return db_to_survival(length_km * atten_db_per_km + connectors_db);
}

bool ClickPattern::detector_clicked(int det) const {
    return std::any_of(clicks.begin(), clicks.end(),
                       [det](const auto& c) { return c.first == det; });
}

FockState bsm_transform(const FockState& state) {
    FockState s = state;
    const auto& reg = state.registry();
    bool any = false;
    for (int b = 1; b <= 2; ++b) {
        for (Internal v : {Internal::matched, Internal::orthogonal}) {
            ModeLabel sig{kSignal, b, v};
            ModeLabel inp{kInput, b, v};
            if (!reg.contains(sig) || !reg.contains(inp)) continue;
            s = apply_beamsplitter(s, sig, inp, 0.5);
            any = true;
        }
    }
    if (!any)
        throw std::invalid_argument("bsm_transform: signal/input modes missing");
    return s;
}

FockState mzi2_transform(const FockState& state, double theta2) {
    const auto& reg = state.registry();
    if (!reg.contains(matched(kIdler, 1)) || !reg.contains(matched(kIdler, 2)))
        throw std::invalid_argument("mzi2_transform: idler bin modes missing");

    std::vector<ModeLabel> outs;
    for (int s = 1; s <= 3; ++s) outs.push_back(matched(kAnalysisPort3, s));
    for (int s = 1; s <= 3; ++s) outs.push_back(matched(kAnalysisPort4, s));
    auto ext = reg.extended(outs);

    AmplitudeMap grown;
    for (const auto& [occ, amp] : state.amplitudes()) {
        Occupation o = occ;
        o.resize(ext->size(), 0);
        grown.emplace(std::move(o), amp);
    }
    FockState wide(ext, std::move(grown), state.is_normalized(),
                   state.truncated_weight());

    // in_b† -> (1/2)[ i o3_b† + o4_b† + i e^{iθ2} o3_{b+1}† − e^{iθ2} o4_{b+1}† ]
    // so that the slot-2 click at port 3 projects onto (|1⟩+e^{iθ2}|2⟩)/√2
    const Complex i_unit(0.0, 1.0);
    const Complex ph = std::exp(Complex(0.0, theta2));
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(6, 2);
    auto o3 = [&](int s) { return s - 1; };      // rows 0..2: mzi3 slots 1..3
    auto o4 = [&](int s) { return 3 + s - 1; };  // rows 3..5: mzi4 slots 1..3
    for (int b = 1; b <= 2; ++b) {
        int col = b - 1;
        u(o3(b), col) = 0.5 * i_unit;
        u(o4(b), col) = 0.5;
        u(o3(b + 1), col) = 0.5 * i_unit * ph;
        u(o4(b + 1), col) = -0.5 * ph;
    }

    std::vector<int> in{ext->index_of(matched(kIdler, 1)),
                        ext->index_of(matched(kIdler, 2))};
    std::vector<int> out;
    for (const auto& m : outs) out.push_back(ext->index_of(m));
    return apply_mode_isometry(wide, in, out, u);
}

FockState path_loss(const FockState& state, const std::string& spatial,
                    double db) {
    if (db <= 0.0) return state;
    double survival = db_to_survival(db);
    FockState s = state;
    // collect labels first: loss extends the registry as it goes
    std::vector<ModeLabel> targets;
    for (int i = 0; i < state.registry().size(); ++i)
        if (state.registry().label(i).spatial == spatial)
            targets.push_back(state.registry().label(i));
    if (targets.empty())
        throw std::invalid_argument("path_loss: no modes on channel " + spatial);
    for (const auto& m : targets) s = apply_loss(s, m, survival);
    return s;
}

FockState fiber_loss(const FockState& state, const ChannelParams& ch) {
    double db = ch.length_km * ch.atten_db_per_km + ch.connectors_db;
    return path_loss(state, kIdler, db);
}

namespace {

struct Cell {
    int det;
    int slot;
    double p_click;
};

// Dead-time rule: process clicks in time order per detector; a click within
// dead_time_ns of the previously accepted click on the same detector is
// erased.
ClickPattern apply_dead_time(const std::vector<std::pair<int, int>>& raw,
                             const DetectorParams& det) {
    ClickPattern out;
    std::array<double, 5> last{-1e18, -1e18, -1e18, -1e18, -1e18};
    std::vector<std::pair<int, int>> sorted = raw;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) {
                  return a.second != b.second ? a.second < b.second
                                              : a.first < b.first;
              });
    for (const auto& [d, slot] : sorted) {
        double t = slot * det.slot_window_ns;
        if (t - last[d] < det.dead_time_ns && last[d] > -1e17) continue;
        out.clicks.insert({d, slot});
        last[d] = t;
    }
    return out;
}

}  // namespace

std::map<ClickPattern, double> click_distribution(const FockState& state,
                                                  const DetectorParams& det,
                                                  const ModeMap& mode_map) {
    det.validate();
    const auto& reg = state.registry();

    // every occupied non-env mode must be mapped
    std::vector<ModeLabel> keep;
    std::vector<std::pair<int, int>> keep_cell;
    for (const auto& [mode, cell] : mode_map) {
        reg.index_of(mode);  // throws on unknown
        keep.push_back(mode);
        keep_cell.push_back(cell);
    }
    for (int i = 0; i < reg.size(); ++i) {
        const auto& m = reg.label(i);
        if (m.spatial == "env" || mode_map.count(m)) continue;
        for (const auto& [occ, amp] : state.amplitudes())
            if (occ[i] > 0)
                throw std::invalid_argument("click_distribution: unmapped occupied mode " +
                                            m.str());
    }

    // cells over which darks can fire: codomain of the mode map
    std::vector<Cell> cells;
    for (const auto& [mode, cell] : mode_map) {
        bool found = false;
        for (const auto& c : cells)
            if (c.det == cell.first && c.slot == cell.second) found = true;
        if (!found) cells.push_back({cell.first, cell.second, 0.0});
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tie(a.det, a.slot) < std::tie(b.det, b.slot);
    });

    const double p_dark = det.dark_prob_per_slot();
    auto photon_dist = measure_number_distribution(state, keep);

    std::map<ClickPattern, double> result;
    for (const auto& [occ, prob] : photon_dist) {
        // photons per cell
        std::map<std::pair<int, int>, int> n_cell;
        for (std::size_t k = 0; k < keep.size(); ++k)
            n_cell[keep_cell[k]] += occ[k];

        for (auto& c : cells) {
            int n = 0;
            auto it = n_cell.find({c.det, c.slot});
            if (it != n_cell.end()) n = it->second;
            double eta = det.efficiency[c.det - 1];
            c.p_click = 1.0 - std::pow(1.0 - eta, n) * (1.0 - p_dark);
        }

        // enumerate click subsets over cells with nonzero click probability
        std::vector<int> active;
        for (std::size_t k = 0; k < cells.size(); ++k)
            if (cells[k].p_click > 0.0) active.push_back(static_cast<int>(k));
        const std::size_t na = active.size();
        for (std::uint64_t mask = 0; mask < (1ULL << na); ++mask) {
            double p = prob;
            std::vector<std::pair<int, int>> raw;
            for (std::size_t k = 0; k < na; ++k) {
                const Cell& c = cells[active[k]];
                if (mask & (1ULL << k)) {
                    p *= c.p_click;
                    raw.push_back({c.det, c.slot});
                } else {
                    p *= 1.0 - c.p_click;
                }
            }
            if (p <= 0.0) continue;
            result[apply_dead_time(raw, det)] += p;
        }
    }
    return result;
}

Heralding classify_heralding(const ClickPattern& p) {
    std::set<int> slots1, slots2;
    for (const auto& [d, s] : p.clicks) {
        if (d == 1) slots1.insert(s);
        if (d == 2) slots2.insert(s);
    }
    for (int s1 : slots1)
        for (int s2 : slots2)
            if (s1 != s2) return Heralding::PsiMinus;
    return Heralding::None;
}

std::string to_string(Analysis a) {
    switch (a) {
        case Analysis::proj_plus_theta2: return "proj_plus_theta2";
        case Analysis::proj_minus_theta2: return "proj_minus_theta2";
        case Analysis::proj_1: return "proj_1";
        case Analysis::proj_2: return "proj_2";
        case Analysis::none: return "none";
        case Analysis::ambiguous: return "ambiguous";
    }
    return "?";
}

Analysis classify_analysis(const ClickPattern& p) {
    std::vector<std::pair<int, int>> analysis;
    for (const auto& [d, s] : p.clicks)
        if (d == 3 || d == 4) analysis.push_back({d, s});
    if (analysis.empty()) return Analysis::none;
    if (analysis.size() > 1) return Analysis::ambiguous;
    auto [d, s] = analysis.front();
    if (s == 1) return Analysis::proj_1;
    if (s == 3) return Analysis::proj_2;
    return d == 3 ? Analysis::proj_plus_theta2 : Analysis::proj_minus_theta2;
}

}  // namespace telesim
