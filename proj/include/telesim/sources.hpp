#pragma once

#include "telesim/fock.hpp"
#include "telesim/qubit.hpp"

namespace telesim {

// Input-qubit preparation: phase superposition through the preparation
// interferometer, or a single time bin with the interferometer removed.
enum class InputPrep { superposition, bin1, bin2 };

struct SourceParams {
    double mu_pair = 0.016;    // mean photon pairs per qubit
    double mu_input = 0.016;   // mean input photons per qubit
    double overlap_xi = 1.0;   // squared modal overlap, input vs signal
    InputPrep prep = InputPrep::superposition;
    double theta1 = 0.0;       // preparation interferometer phase

    void validate() const;  // throws on out-of-range values
    bool truncation_warning() const { return mu_pair > 0.05 || mu_input > 0.05; }
};

// Spatial channel names used throughout the pipeline.
inline constexpr const char* kSignal = "signal";
inline constexpr const char* kIdler = "idler";
inline constexpr const char* kInput = "input";
inline constexpr const char* kAnalysisPort3 = "mzi3";
inline constexpr const char* kAnalysisPort4 = "mzi4";

// Registry for the teleportation pipeline: signal and input channels in both
// internal variants, idler channel matched only. `bins` is 2 for the
// double-pulse configuration, 1 for the interference scan where all delay
// interferometers are removed.
RegistryPtr make_source_registry(int bins = 2, int per_mode_cutoff = 2,
                                 int total_cutoff = 4);

// Truncated two-mode-squeezed pair state: vacuum + χ Σ_b s_b†i_b† + (χ²/2)(…)²
// with χ = sqrt(mu_pair / bins). The conditional single-pair component is the
// maximally-entangled two-bin pair state.
FockState build_spdc_state(const SourceParams& params, RegistryPtr registry,
                           int bins = 2);

// Truncated coherent state (terms to 2 photons) in the prepared qubit mode,
// with each bin split sqrt(xi) matched / sqrt(1-xi) orthogonal.
FockState build_input_state(const SourceParams& params, RegistryPtr registry,
                            int bins = 2);

// Exactly one pair ⊗ exactly one input photon (the mu -> 0 post-selected
// limit used for ideal-protocol checks).
FockState build_postselected_state(const SourceParams& params,
                                   RegistryPtr registry, int bins = 2);

// The pure qubit the input preparation encodes.
TimeBinQubit input_qubit(const SourceParams& params);

}  // namespace telesim
