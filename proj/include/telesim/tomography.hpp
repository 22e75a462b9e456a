#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "telesim/apparatus.hpp"
#include "telesim/qubit.hpp"

namespace telesim {

struct Projection {
    std::string label;
    TimeBinQubit state;
    double weight;  // relative efficiency/acquisition weight of this channel
};

// The six projections |+>,|->,|L>,|R>,|1>,|2> with the detection-chain
// weights of the two-setting acquisition (energy-basis slots see one
// detector for one setting; time-basis slots see both detectors in both).
struct ProjectionSet {
    std::array<Projection, 6> projections;

    static ProjectionSet unweighted();
    static ProjectionSet weighted(const DetectorParams& det);

    const Projection& find(const std::string& label) const;
};

using Counts = std::map<std::string, double>;

// Linear inversion: rho = (I + sum r_k sigma_k)/2 from basis-pair count
// asymmetries. Hermitian and trace 1 but possibly nonphysical.
Eigen::Matrix2cd linear_reconstruct(const Counts& counts,
                                    const ProjectionSet& proj);

struct MleOptions {
    int restarts = 10;
    int max_iter = 4000;
    double tol = 1e-10;
    std::uint64_t seed = 42;
};

struct MleResult {
    DensityMatrix rho;
    double log_likelihood = 0.0;
    bool converged = false;
};

// Maximum-likelihood estimate: rho = T†T / tr(T†T) with lower-triangular T,
// Poissonian log-likelihood over the six projections.
MleResult mle_reconstruct(const Counts& counts, const ProjectionSet& proj,
                          const MleOptions& opts = {});

double poisson_log_likelihood(const Counts& counts, const ProjectionSet& proj,
                              const Eigen::Matrix2cd& rho);

struct FidelityEstimate {
    double fidelity = 0.0;
    double sigma = 0.0;
    MleResult mle;
};

// Fidelity of the MLE state against `target`; sigma by Poisson bootstrap.
FidelityEstimate fidelity_with_error(const Counts& counts,
                                     const ProjectionSet& proj,
                                     const TimeBinQubit& target, int resamples,
                                     std::uint64_t seed = 1);

}  // namespace telesim
