#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "telesim/rng.hpp"
#include "telesim/tomography.hpp"

using namespace telesim;

namespace {

Counts counts_from_rho(const Eigen::Matrix2cd& rho, const ProjectionSet& proj,
                       double scale) {
    Counts c;
    for (const auto& p : proj.projections) {
        Eigen::Vector2cd v(p.state.alpha, p.state.beta);
        double prob = std::real((v.adjoint() * rho * v)(0, 0));
        c[p.label] = scale * p.weight * prob;
    }
    return c;
}

Counts poisson_sample(const Counts& mean, std::uint64_t seed) {
    Counts out;
    RngStream rng(seed, 0, 0);
    for (const auto& [label, m] : mean)
        out[label] = static_cast<double>(rng.poisson(m));
    return out;
}

Eigen::Matrix2cd rho_from_bloch(double x, double y, double z) {
    Eigen::Matrix2cd m;
    m << 0.5 * (1 + z), 0.5 * Complex(x, -y), 0.5 * Complex(x, y),
        0.5 * (1 - z);
    return m;
}

}  // namespace

TEST_CASE("projection set covers the six standard labels with sane weights") {
    auto proj = ProjectionSet::unweighted();
    for (const char* label : {"plus", "minus", "L", "R", "1", "2"}) {
        const auto& p = proj.find(label);
        CHECK(p.label == label);
        CHECK(p.weight > 0.0);
        CHECK(overlap2(p.state, standard_state(label)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(proj.find("nope"), std::invalid_argument);
}

TEST_CASE("linear inversion examples") {
    auto proj = ProjectionSet::unweighted();
    SUBCASE("pure |+> from a perfect asymmetry") {
        Counts c{{"plus", 100}, {"minus", 0}, {"L", 50},
                 {"R", 50},     {"1", 50},    {"2", 50}};
        Eigen::Matrix2cd rho = linear_reconstruct(c, proj);
        Eigen::Matrix2cd expect = rho_from_bloch(1, 0, 0);
        CHECK((rho - expect).norm() < 1e-12);
    }
    SUBCASE("equal counts give the maximally mixed state") {
        Counts c{{"plus", 80}, {"minus", 80}, {"L", 80},
                 {"R", 80},    {"1", 80},     {"2", 80}};
        Eigen::Matrix2cd rho = linear_reconstruct(c, proj);
        CHECK((rho - 0.5 * Eigen::Matrix2cd::Identity()).norm() < 1e-12);
    }
    SUBCASE("r = (0.8, 0, 0)") {
        Counts c{{"plus", 90}, {"minus", 10}, {"L", 50},
                 {"R", 50},    {"1", 50},     {"2", 50}};
        Eigen::Matrix2cd rho = linear_reconstruct(c, proj);
        CHECK((rho - rho_from_bloch(0.8, 0, 0)).norm() < 1e-12);
    }
    SUBCASE("raw asymmetries are used as given; r is independent of scale") {
        Counts c{{"plus", 900}, {"minus", 100}, {"L", 500},
                 {"R", 500},    {"1", 500},     {"2", 500}};
        Eigen::Matrix2cd rho = linear_reconstruct(c, proj);
        CHECK((rho - rho_from_bloch(0.8, 0, 0)).norm() < 1e-12);
    }
    SUBCASE("an empty basis pair is rejected") {
        Counts c{{"plus", 0}, {"minus", 0}, {"L", 50},
                 {"R", 50},   {"1", 50},    {"2", 50}};
        CHECK_THROWS_AS(linear_reconstruct(c, proj), std::invalid_argument);
    }
    SUBCASE("linear inversion may leave the Bloch ball") {
        Counts c{{"plus", 100}, {"minus", 0}, {"L", 100},
                 {"R", 0},      {"1", 100},   {"2", 0}};
        Eigen::Matrix2cd rho = linear_reconstruct(c, proj);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
        CHECK(es.eigenvalues().minCoeff() < -1e-6);
    }
}

TEST_CASE("mle reconstruction is physical on arbitrary count tables") {
    auto proj = ProjectionSet::unweighted();
    MleOptions fast;
    fast.restarts = 3;
    fast.max_iter = 1500;
    RngStream rng(7, 0, 0);
    for (int trial = 0; trial < 40; ++trial) {
        Counts c;
        for (const char* label : {"plus", "minus", "L", "R", "1", "2"}) {
            double u = rng.uniform();
            c[label] = trial % 5 == 0 && u < 0.3 ? 0.0 : 200.0 * u;
        }
        auto res = mle_reconstruct(c, proj, fast);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(res.rho.entries());
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        CHECK(std::abs(res.rho.entries().trace().real() - 1.0) < 1e-10);
        CHECK(std::abs(res.rho.entries().trace().imag()) < 1e-12);
        CHECK((res.rho.entries() - res.rho.entries().adjoint()).norm() < 1e-10);
    }
}

TEST_CASE("mle round trips exact proportions") {
    auto proj = ProjectionSet::unweighted();
    RngStream rng(11, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        double x = 2 * rng.uniform() - 1, y = 2 * rng.uniform() - 1,
               z = 2 * rng.uniform() - 1;
        double r = std::sqrt(x * x + y * y + z * z);
        if (r > 1) {
            double s = 0.95 / r;
            x *= s; y *= s; z *= s;
        }
        Eigen::Matrix2cd truth = rho_from_bloch(x, y, z);
        Counts c = counts_from_rho(truth, proj, 1e6);
        CHECK((linear_reconstruct(c, proj) - truth).norm() < 1e-12);
        auto res = mle_reconstruct(c, proj);
        CHECK(res.converged);
        CHECK((res.rho.entries() - truth).norm() < 1e-6);
    }
}

TEST_CASE("mle recovers a pure state from 1e5 synthetic counts") {
    auto proj = ProjectionSet::unweighted();
    TimeBinQubit target = standard_state("L");
    Counts mean = counts_from_rho(DensityMatrix::pure(target).entries(), proj,
                                  1e5);
    auto res = mle_reconstruct(poisson_sample(mean, 314), proj);
    CHECK(res.converged);
    CHECK(fidelity(res.rho, target) >= 0.995);
}

TEST_CASE("mle recovers the maximally mixed state within trace distance 0.05") {
    auto proj = ProjectionSet::unweighted();
    Eigen::Matrix2cd truth = 0.5 * Eigen::Matrix2cd::Identity();
    Counts mean = counts_from_rho(truth, proj, 1e4);
    auto res = mle_reconstruct(poisson_sample(mean, 2718), proj);
    CHECK(res.converged);
    CHECK(trace_distance(res.rho, DensityMatrix(truth)) < 0.05);
}

TEST_CASE("mle agrees with a physical linear estimate at high counts") {
    auto proj = ProjectionSet::unweighted();
    Eigen::Matrix2cd truth = rho_from_bloch(0.4, 0.3, -0.5);
    Counts mean = counts_from_rho(truth, proj, 1e5);
    Counts c = poisson_sample(mean, 99);
    auto res = mle_reconstruct(c, proj);
    CHECK(res.converged);
    Eigen::Matrix2cd lin = linear_reconstruct(c, proj);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(lin);
    REQUIRE(es.eigenvalues().minCoeff() > 0.0);  // physical here
    CHECK(trace_distance(res.rho, DensityMatrix(lin)) < 0.02);
}

TEST_CASE("mle likelihood is at least that of the projected linear estimate") {
    auto proj = ProjectionSet::unweighted();
    RngStream rng(23, 0, 0);
    for (int trial = 0; trial < 10; ++trial) {
        Counts c;
        for (const char* label : {"plus", "minus", "L", "R", "1", "2"})
            c[label] = 5.0 + 150.0 * rng.uniform();
        auto res = mle_reconstruct(c, proj);
        Eigen::Matrix2cd lin = linear_reconstruct(c, proj);
        // project the linear estimate onto the physical set by clipping
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(lin);
        Eigen::Vector2d ev = es.eigenvalues().cwiseMax(1e-9);
        ev /= ev.sum();
        Eigen::Matrix2cd proj_lin = es.eigenvectors() * ev.asDiagonal() *
                                    es.eigenvectors().adjoint();
        double ll_lin = poisson_log_likelihood(c, proj, proj_lin);
        CHECK(res.log_likelihood >= ll_lin - 1e-6);
    }
}

TEST_CASE("argmax of the likelihood is invariant under count scaling") {
    auto proj = ProjectionSet::unweighted();
    Counts c{{"plus", 120}, {"minus", 40}, {"L", 95},
             {"R", 65},     {"1", 20},     {"2", 140}};
    auto a = mle_reconstruct(c, proj);
    Counts c10;
    for (const auto& [label, v] : c) c10[label] = 10.0 * v;
    auto b = mle_reconstruct(c10, proj);
    CHECK(trace_distance(a.rho, b.rho) < 1e-5);
}

TEST_CASE("bootstrap fidelity error is stable and reasonable") {
    auto proj = ProjectionSet::unweighted();
    TimeBinQubit target = standard_state("plus");
    Eigen::Matrix2cd truth = rho_from_bloch(0.85, 0.0, 0.0);
    Counts c = poisson_sample(counts_from_rho(truth, proj, 170.0 * 2.0), 5);
    auto f1 = fidelity_with_error(c, proj, target, 300, 17);
    auto f2 = fidelity_with_error(c, proj, target, 300, 18);
    CHECK(f1.fidelity == doctest::Approx(0.925).epsilon(0.08));
    CHECK(f1.sigma > 0.0);
    CHECK(f1.sigma < 0.1);
    CHECK(std::abs(f1.sigma - f2.sigma) < 0.1 * std::max(f1.sigma, f2.sigma));
    CHECK(f1.fidelity == doctest::Approx(f2.fidelity).epsilon(1e-9));
}
