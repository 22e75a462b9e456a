#include "telesim/tomography.hpp"

#include <cmath>
#include <stdexcept>

#include "telesim/optim.hpp"
#include "telesim/rng.hpp"

namespace telesim {

namespace {

std::array<Projection, 6> base_projections(double w_plus, double w_minus,
                                           double w_L, double w_R,
                                           double w_time) {
    return {{
        {"plus", standard_state("plus"), w_plus},
        {"minus", standard_state("minus"), w_minus},
        {"L", standard_state("L"), w_L},
        {"R", standard_state("R"), w_R},
        {"1", standard_state("1"), w_time},
        {"2", standard_state("2"), w_time},
    }};
}

}  // namespace

ProjectionSet ProjectionSet::unweighted() {
    return {base_projections(1.0, 1.0, 1.0, 1.0, 1.0)};
}

ProjectionSet ProjectionSet::weighted(const DetectorParams& det) {
    // Energy-basis channels: one detector, slot-2 branching 1/2, one of the
    // two settings. Time-basis channels: both detectors at branching 1/4,
    // accumulated over both settings.
    double e3 = det.efficiency[2], e4 = det.efficiency[3];
    double w_plus = e3 / 2.0, w_minus = e4 / 2.0;
    double w_time = 2.0 * (e3 + e4) / 4.0;
    return {base_projections(w_plus, w_minus, w_plus, w_minus, w_time)};
}

const Projection& ProjectionSet::find(const std::string& label) const {
    for (const auto& p : projections)
        if (p.label == label) return p;
    throw std::invalid_argument("ProjectionSet: unknown label " + label);
}

namespace {

double count_of(const Counts& counts, const std::string& label) {
    auto it = counts.find(label);
    if (it == counts.end())
        throw std::invalid_argument("counts missing projection " + label);
    if (it->second < 0.0)
        throw std::invalid_argument("negative count for " + label);
    return it->second;
}

double born(const Eigen::Matrix2cd& rho, const TimeBinQubit& q) {
    Eigen::Vector2cd v(q.alpha, q.beta);
    return std::max(0.0, (v.adjoint() * rho * v)(0, 0).real());
}

Eigen::Matrix2cd rho_from_t(const std::vector<double>& t) {
    Eigen::Matrix2cd T;
    T << Complex(t[0], 0.0), Complex(0.0, 0.0), Complex(t[2], t[3]),
        Complex(t[1], 0.0);
    Eigen::Matrix2cd m = T.adjoint() * T;
    double tr = m.trace().real();
    if (tr < 1e-300) return Eigen::Matrix2cd::Identity() * 0.5;
    return m / tr;
}

std::vector<double> t_from_rho(const Eigen::Matrix2cd& rho) {
    // eigenvalue floor, renormalize, then solve T†T = psd for lower T:
    //   b = sqrt(psd22), c = psd21 / b, a = sqrt(psd11 - |c|²)
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(1e-6);
    Eigen::Matrix2cd psd = es.eigenvectors() * ev.asDiagonal() *
                           es.eigenvectors().adjoint();
    psd /= psd.trace().real();
    double b = std::sqrt(psd(1, 1).real());
    Complex c = psd(1, 0) / b;
    double a = std::sqrt(std::max(0.0, psd(0, 0).real() - std::norm(c)));
    return {a, b, c.real(), c.imag()};
}

}  // namespace

Eigen::Matrix2cd linear_reconstruct(const Counts& counts,
                                    const ProjectionSet& proj) {
    auto r_of = [&](const std::string& a, const std::string& b) {
        double na = count_of(counts, a), nb = count_of(counts, b);
        if (na + nb <= 0.0)
            throw std::invalid_argument("linear_reconstruct: basis pair " + a +
                                        "/" + b + " has zero total counts");
        return (na - nb) / (na + nb);
    };
    double rx = r_of("plus", "minus");
    double ry = r_of("L", "R");
    double rz = r_of("1", "2");
    Eigen::Matrix2cd rho;
    rho << 0.5 * (1.0 + rz), 0.5 * Complex(rx, -ry), 0.5 * Complex(rx, ry),
        0.5 * (1.0 - rz);
    return rho;
}

double poisson_log_likelihood(const Counts& counts, const ProjectionSet& proj,
                              const Eigen::Matrix2cd& rho) {
    // expected count model mu_k = s * w_k * <k|rho|k> with the overall scale
    // s profiled out (the maximizer is unchanged by common count scaling)
    double n_total = 0.0, p_total = 0.0;
    std::array<double, 6> n{}, p{};
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& pr = proj.projections[k];
        n[k] = count_of(counts, pr.label);
        p[k] = pr.weight * born(rho, pr.state);
        n_total += n[k];
        p_total += p[k];
    }
    if (p_total <= 0.0) return -1e300;
    double s = n_total / p_total;
    double ll = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        double mu = s * p[k];
        if (n[k] > 0.0) {
            if (mu <= 0.0) return -1e300;
            ll += n[k] * std::log(mu);
        }
        ll -= mu;
    }
    return ll;
}

MleResult mle_reconstruct(const Counts& counts, const ProjectionSet& proj,
                          const MleOptions& opts) {
    double n_total = 0.0;
    for (const auto& pr : proj.projections)
        n_total += count_of(counts, pr.label);
    if (n_total <= 0.0)
        throw std::invalid_argument("mle_reconstruct: total counts are zero");

    auto objective = [&](const std::vector<double>& t) {
        return -poisson_log_likelihood(counts, proj, rho_from_t(t));
    };

    // first start: projected linear estimate; then random restarts
    std::vector<std::vector<double>> starts;
    try {
        starts.push_back(t_from_rho(linear_reconstruct(counts, proj)));
    } catch (const std::invalid_argument&) {
        // a basis pair may be all zeros; fall back to random starts only
    }
    RngStream rng(opts.seed, 0x6d6c65ULL, 0);
    while (static_cast<int>(starts.size()) < std::max(1, opts.restarts)) {
        std::vector<double> t(4);
        for (auto& v : t) v = rng.uniform() * 2.0 - 1.0;
        starts.push_back(t);
    }

    NelderMeadResult best;
    best.value = 1e300;
    bool converged = false;
    for (const auto& s0 : starts) {
        auto r = nelder_mead(objective, s0, 0.1, opts.max_iter, opts.tol);
        if (r.value < best.value) {
            best = r;
            converged = r.converged;
        }
    }

    Eigen::Matrix2cd rho = rho_from_t(best.x);
    // symmetrize away float dust before the invariant checks
    rho = 0.5 * (rho + rho.adjoint().eval());
    rho /= rho.trace().real();
    MleResult out{DensityMatrix(rho), -best.value, converged};
    return out;
}

FidelityEstimate fidelity_with_error(const Counts& counts,
                                     const ProjectionSet& proj,
                                     const TimeBinQubit& target, int resamples,
                                     std::uint64_t seed) {
    FidelityEstimate est;
    est.mle = mle_reconstruct(counts, proj);
    est.fidelity = fidelity(est.mle.rho, target);

    if (resamples > 0) {
        double sum = 0.0, sum2 = 0.0;
        int done = 0;
        for (int r = 0; r < resamples; ++r) {
            RngStream rng(seed, 0x626f6f74ULL, static_cast<std::uint64_t>(r));
            Counts resampled;
            for (const auto& [label, c] : counts)
                resampled[label] =
                    static_cast<double>(rng.poisson(std::max(0.0, c)));
            double tot = 0.0;
            for (const auto& [l, c] : resampled) tot += c;
            if (tot <= 0.0) continue;
            MleOptions fast;
            fast.restarts = 3;
            fast.seed = seed + r;
            auto m = mle_reconstruct(resampled, proj, fast);
            double f = fidelity(m.rho, target);
            sum += f;
            sum2 += f * f;
            ++done;
        }
        if (done > 1) {
            double mean = sum / done;
            est.sigma = std::sqrt(std::max(0.0, sum2 / done - mean * mean));
        }
    }
    return est;
}

}  // namespace telesim
