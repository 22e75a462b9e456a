#include "telesim/sources.hpp"

#include <cmath>
#include <stdexcept>

namespace telesim {

void SourceParams::validate() const {
    if (mu_pair < 0.0 || mu_input < 0.0)
        throw std::invalid_argument("SourceParams: negative mean photon number");
    if (overlap_xi < 0.0 || overlap_xi > 1.0)
        throw std::invalid_argument("SourceParams: overlap_xi outside [0,1]");
}

RegistryPtr make_source_registry(int bins, int per_mode_cutoff,
                                 int total_cutoff) {
    std::vector<ModeLabel> modes;
    for (int b = 1; b <= bins; ++b) {
        modes.push_back(matched(kSignal, b));
        modes.push_back(orthogonal(kSignal, b));
    }
    for (int b = 1; b <= bins; ++b) modes.push_back(matched(kIdler, b));
    for (int b = 1; b <= bins; ++b) {
        modes.push_back(matched(kInput, b));
        modes.push_back(orthogonal(kInput, b));
    }
    return std::make_shared<const ModeRegistry>(modes, per_mode_cutoff,
                                                total_cutoff);
}

namespace {

// A = sum_b s_b† i_b† applied as an operator to `state`.
FockState pair_operator(const FockState& state, int bins) {
    AmplitudeMap sum;
    for (int b = 1; b <= bins; ++b) {
        FockState term =
            apply_creation(apply_creation(state, matched(kSignal, b)),
                           matched(kIdler, b));
        for (const auto& [occ, amp] : term.amplitudes()) sum[occ] += amp;
    }
    return FockState(state.registry_ptr(), std::move(sum), false);
}

// Q = sum_b c_b (sqrt(xi) m_b† + sqrt(1-xi) o_b†) on the input channel.
FockState qubit_operator(const FockState& state, const SourceParams& p,
                         int bins) {
    TimeBinQubit q = input_qubit(p);
    std::vector<Complex> coeff{q.alpha, q.beta};
    double cm = std::sqrt(p.overlap_xi);
    double co = std::sqrt(1.0 - p.overlap_xi);
    AmplitudeMap sum;
    for (int b = 1; b <= bins; ++b) {
        Complex c = coeff[b - 1];
        if (std::abs(c) == 0.0) continue;
        if (cm > 0.0) {
            FockState t = apply_creation(state, matched(kInput, b), c * cm);
            for (const auto& [occ, amp] : t.amplitudes()) sum[occ] += amp;
        }
        if (co > 0.0) {
            FockState t = apply_creation(state, orthogonal(kInput, b), c * co);
            for (const auto& [occ, amp] : t.amplitudes()) sum[occ] += amp;
        }
    }
    return FockState(state.registry_ptr(), std::move(sum), false);
}

FockState add(const FockState& a, const FockState& b, Complex scale_b) {
    AmplitudeMap sum = a.amplitudes();
    for (const auto& [occ, amp] : b.amplitudes()) sum[occ] += scale_b * amp;
    return FockState(a.registry_ptr(), std::move(sum), false);
}

}  // namespace

FockState build_spdc_state(const SourceParams& params, RegistryPtr registry,
                           int bins) {
    params.validate();
    if (registry->total_cutoff() < 4)
        throw std::invalid_argument(
            "build_spdc_state: total_cutoff too small for second-order term");
    double chi = std::sqrt(params.mu_pair / bins);
    FockState vac = FockState::vacuum(registry);
    FockState first = pair_operator(vac, bins);
    FockState second = pair_operator(first, bins);
    FockState state = add(add(vac, first, chi), second, 0.5 * chi * chi);
    return normalize(state).first;
}

FockState build_input_state(const SourceParams& params, RegistryPtr registry,
                            int bins) {
    params.validate();
    if (bins == 1 && params.prep == InputPrep::superposition)
        throw std::invalid_argument(
            "build_input_state: superposition prep needs two bins");
    double alpha = std::sqrt(params.mu_input);  // coherent amplitude, phase 0
    FockState vac = FockState::vacuum(registry);
    FockState first = qubit_operator(vac, params, bins);
    FockState second = qubit_operator(first, params, bins);
    FockState state = add(add(vac, first, alpha), second, 0.5 * alpha * alpha);
    return normalize(state).first;
}

FockState build_postselected_state(const SourceParams& params,
                                   RegistryPtr registry, int bins) {
    params.validate();
    FockState vac = FockState::vacuum(registry);
    FockState pair = normalize(pair_operator(vac, bins)).first;
    FockState photon = normalize(qubit_operator(pair, params, bins)).first;
    return photon;
}

TimeBinQubit input_qubit(const SourceParams& params) {
    switch (params.prep) {
        case InputPrep::bin1: return TimeBinQubit(1.0, 0.0);
        case InputPrep::bin2: return TimeBinQubit(0.0, 1.0);
        case InputPrep::superposition:
            return TimeBinQubit(1.0 / std::sqrt(2.0),
                                std::exp(Complex(0.0, params.theta1)) /
                                    std::sqrt(2.0));
    }
    throw std::logic_error("input_qubit: bad prep");
}

}  // namespace telesim
