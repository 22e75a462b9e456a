#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace telesim {

using Complex = std::complex<double>;

enum class Internal : std::uint8_t { matched, orthogonal };

// A mode is identified by (spatial channel, time bin/slot, internal mode).
// Internal distinguishes the part of the wavepacket that interferes with the
// signal photons ("matched") from the residual mismatched part.
struct ModeLabel {
    std::string spatial;
    int bin = 1;
    Internal internal = Internal::matched;

    auto operator<=>(const ModeLabel&) const = default;
    std::string str() const;
};

ModeLabel matched(std::string spatial, int bin);
ModeLabel orthogonal(std::string spatial, int bin);

// Ordered, append-only mode set shared by the amplitudes of a FockState.
// Construction fixes the ordering of the initial modes; loss elements and
// analyzers may append fresh modes at the end.
class ModeRegistry {
  public:
    ModeRegistry(std::vector<ModeLabel> modes, int per_mode_cutoff = 2,
                 int total_cutoff = 4);

    int index_of(const ModeLabel& m) const;  // throws on unknown label
    bool contains(const ModeLabel& m) const;
    const ModeLabel& label(int i) const { return modes_[i]; }
    int size() const { return static_cast<int>(modes_.size()); }
    int per_mode_cutoff() const { return per_mode_cutoff_; }
    int total_cutoff() const { return total_cutoff_; }

    // all registered indices with the given spatial channel
    std::vector<int> spatial_indices(const std::string& spatial) const;

    // returns a copy with extra modes appended (labels must be new)
    std::shared_ptr<const ModeRegistry> extended(
        const std::vector<ModeLabel>& extra) const;

  private:
    std::vector<ModeLabel> modes_;
    std::map<ModeLabel, int> index_;
    int per_mode_cutoff_;
    int total_cutoff_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;
using Occupation = std::vector<std::uint8_t>;

struct OccupationHash {
    std::size_t operator()(const Occupation& occ) const {
        std::size_t h = 1469598103934665603ULL;
        for (auto n : occ) {
            h ^= n;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

using AmplitudeMap = std::unordered_map<Occupation, Complex, OccupationHash>;

// Sparse state vector over the truncated Fock space of a ModeRegistry.
// Values are immutable after construction; every operation returns a new
// state. Weight pushed outside the cutoffs by an operation accumulates in
// truncated_weight.
class FockState {
  public:
    explicit FockState(RegistryPtr registry);  // vacuum
    FockState(RegistryPtr registry, AmplitudeMap amplitudes, bool normalized,
              double truncated_weight = 0.0);

    static FockState vacuum(RegistryPtr registry) { return FockState(registry); }

    const ModeRegistry& registry() const { return *registry_; }
    RegistryPtr registry_ptr() const { return registry_; }
    const AmplitudeMap& amplitudes() const { return amps_; }
    Complex amplitude(const Occupation& occ) const;
    double norm2() const;
    bool is_normalized() const { return normalized_; }
    double truncated_weight() const { return truncated_weight_; }
    std::size_t support_size() const { return amps_.size(); }

    static constexpr double kPruneThreshold = 1e-12;

  private:
    RegistryPtr registry_;
    AmplitudeMap amps_;
    bool normalized_ = false;
    double truncated_weight_ = 0.0;
};

// --- linear-optics operations (pure functions) ---

// Isometric map on creation operators: a†_{in[j]} -> sum_k U(k,j) b†_{out[k]}.
// Columns of `map` must be orthonormal. in and out modes may coincide.
FockState apply_mode_isometry(const FockState& state,
                              const std::vector<int>& in_modes,
                              const std::vector<int>& out_modes,
                              const Eigen::MatrixXcd& map);

// a† -> sqrt(T) a† + i e^{-iφ} sqrt(1-T) b†  (symmetric i-convention)
FockState apply_beamsplitter(const FockState& state, const ModeLabel& mode_a,
                             const ModeLabel& mode_b, double transmissivity,
                             double phase = 0.0);

// multiplies each amplitude by e^{i n φ} for the occupation n of `mode`
FockState apply_phase(const FockState& state, const ModeLabel& mode,
                      double phase);

// couples `mode` to a fresh environment mode with transmissivity `survival`
FockState apply_loss(const FockState& state, const ModeLabel& mode,
                     double survival);

// photon-number distribution over `keep`, all other modes marginalized
std::map<Occupation, double> measure_number_distribution(
    const FockState& state, const std::vector<ModeLabel>& keep);

// product state; registries must have disjoint labels
FockState tensor(const FockState& a, const FockState& b);

// product of two states on the same registry occupying disjoint mode sets
FockState product(const FockState& a, const FockState& b);

// rescales to unit norm; returns {state, prior norm}; throws on zero state
std::pair<FockState, double> normalize(const FockState& state);

// keeps only amplitudes whose occupation satisfies pred, then renormalizes;
// returns the kept probability weight as second element
std::pair<FockState, double> postselect(
    const FockState& state,
    const std::function<bool(const ModeRegistry&, const Occupation&)>& pred);

// single creation operator a†,  without normalization (amp *= sqrt(n+1));
// contributions beyond the cutoffs are dropped silently (used by sources,
// which normalize and check truncated weight afterwards)
FockState apply_creation(const FockState& state, const ModeLabel& mode,
                         Complex coeff = 1.0);

}  // namespace telesim
