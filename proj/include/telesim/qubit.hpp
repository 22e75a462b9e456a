#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "vendor_json_fwd.hpp"

namespace telesim {

using Complex = std::complex<double>;

// Pure time-bin qubit: alpha |1> + beta |2>.
struct TimeBinQubit {
    Complex alpha;
    Complex beta;

    TimeBinQubit(Complex a, Complex b);

    double norm2() const { return std::norm(alpha) + std::norm(beta); }
};

// |<a|b>|^2; qubit equality is always tested this way, never componentwise
double overlap2(const TimeBinQubit& a, const TimeBinQubit& b);

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

std::string to_string(BellState b);

struct BellBranch {
    BellState variant;
    TimeBinQubit conditional;  // idler state conditioned on this outcome
    double probability;
};

// Decomposes the joint (pair ⊗ input) state over the Bell basis of the
// signal/input photons. Each branch occurs with probability 1/4.
std::array<BellBranch, 4> bell_decompose(const TimeBinQubit& input);

// Undoes the (α,β) -> (β,−α) map of the Ψ⁻ branch, up to global phase.
TimeBinQubit psi_minus_correction(const TimeBinQubit& state);

class DensityMatrix {
  public:
    DensityMatrix() : m_(0.5 * Eigen::Matrix2cd::Identity()) {}
    explicit DensityMatrix(const Eigen::Matrix2cd& entries);  // validates
    static DensityMatrix pure(const TimeBinQubit& q);

    const Eigen::Matrix2cd& entries() const { return m_; }
    std::array<double, 2> eigenvalues() const;

    nlohmann::json to_json() const;  // {"re": [[..]], "im": [[..]]}
    static DensityMatrix from_json(const nlohmann::json& j);

  private:
    Eigen::Matrix2cd m_;
};

// <target| rho |target>
double fidelity(const DensityMatrix& rho, const TimeBinQubit& target);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct LabeledQubit {
    std::string label;
    TimeBinQubit state;
};

// |1>, |2>, |+>, |->, |L>, |R>
std::array<LabeledQubit, 6> standard_states();

TimeBinQubit standard_state(const std::string& label);

}  // namespace telesim
