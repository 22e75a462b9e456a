#include "telesim/qubit.hpp"

#include <cmath>
#include <stdexcept>

namespace telesim {

namespace {
constexpr double kNormTol = 1e-12;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

TimeBinQubit::TimeBinQubit(Complex a, Complex b) : alpha(a), beta(b) {
    if (std::abs(norm2() - 1.0) > 1e-6)
        throw std::invalid_argument("TimeBinQubit: unnormalized amplitudes");
    // snap tiny numerical drift so downstream 1e-12 checks hold
    double n = std::sqrt(norm2());
    alpha /= n;
    beta /= n;
}

double overlap2(const TimeBinQubit& a, const TimeBinQubit& b) {
    Complex ip = std::conj(a.alpha) * b.alpha + std::conj(a.beta) * b.beta;
    return std::norm(ip);
}

std::string to_string(BellState b) {
    switch (b) {
        case BellState::PhiPlus: return "Phi+";
        case BellState::PhiMinus: return "Phi-";
        case BellState::PsiPlus: return "Psi+";
        case BellState::PsiMinus: return "Psi-";
    }
    return "?";
}

std::array<BellBranch, 4> bell_decompose(const TimeBinQubit& input) {
    if (std::abs(input.norm2() - 1.0) > kNormTol)
        throw std::invalid_argument("bell_decompose: unnormalized input");
    const Complex a = input.alpha, b = input.beta;
    return {{
        {BellState::PhiPlus, TimeBinQubit(a, b), 0.25},
        {BellState::PhiMinus, TimeBinQubit(a, -b), 0.25},
        {BellState::PsiPlus, TimeBinQubit(b, a), 0.25},
        {BellState::PsiMinus, TimeBinQubit(b, -a), 0.25},
    }};
}

TimeBinQubit psi_minus_correction(const TimeBinQubit& state) {
    return TimeBinQubit(-state.beta, state.alpha);
}

DensityMatrix::DensityMatrix(const Eigen::Matrix2cd& entries) : m_(entries) {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > 1e-9 ||
        std::abs(m_.trace().imag()) > 1e-9)
        throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m_);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const TimeBinQubit& q) {
    Eigen::Vector2cd v(q.alpha, q.beta);
    return DensityMatrix(v * v.adjoint());
}

std::array<double, 2> DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m_);
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

nlohmann::json DensityMatrix::to_json() const {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (int r = 0; r < 2; ++r) {
        nlohmann::json rr = nlohmann::json::array();
        nlohmann::json ri = nlohmann::json::array();
        for (int c = 0; c < 2; ++c) {
            rr.push_back(m_(r, c).real());
            ri.push_back(m_(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"re", re}, {"im", im}};
}

DensityMatrix DensityMatrix::from_json(const nlohmann::json& j) {
    Eigen::Matrix2cd m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            m(r, c) = Complex(j.at("re").at(r).at(c).get<double>(),
                              j.at("im").at(r).at(c).get<double>());
    return DensityMatrix(m);
}

double fidelity(const DensityMatrix& rho, const TimeBinQubit& target) {
    Eigen::Vector2cd v(target.alpha, target.beta);
    return (v.adjoint() * rho.entries() * v)(0, 0).real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::Matrix2cd d = a.entries() - b.entries();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(d);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::array<LabeledQubit, 6> standard_states() {
    const Complex i(0.0, 1.0);
    return {{
        {"1", TimeBinQubit(1.0, 0.0)},
        {"2", TimeBinQubit(0.0, 1.0)},
        {"plus", TimeBinQubit(kInvSqrt2, kInvSqrt2)},
        {"minus", TimeBinQubit(kInvSqrt2, -kInvSqrt2)},
        {"L", TimeBinQubit(kInvSqrt2, i * kInvSqrt2)},
        {"R", TimeBinQubit(kInvSqrt2, -i * kInvSqrt2)},
    }};
}

TimeBinQubit standard_state(const std::string& label) {
    for (const auto& s : standard_states())
        if (s.label == label) return s.state;
    throw std::invalid_argument("standard_state: unknown label " + label);
}

}  // namespace telesim
