#include "doctest.h"

#include <cmath>
#include <functional>

#include "cavcond/errors.hpp"
#include "cavcond/schrodinger.hpp"
#include "cavcond/units.hpp"

using namespace cavcond;

namespace {

constexpr double m_gaas = 0.067;

PotentialProfile single_well(double length, std::size_t n, double depth = 100.0, double width = 5.0) {
    StructureSpec spec{{{0.0, width, depth}}, depth};
    return build_potential(spec, Grid(n, length));
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Bound states of a finite square well in the continuum, from the matching conditions.
double finite_well_level(double depth, double width, double m_star, int n) {
    const double c = units::hbar2_over_2me / m_star; // hbar^2/(2m)
    auto mismatch = [&](double e) {
        const double k = std::sqrt(e / c);
        const double kappa = std::sqrt((depth - e) / c);
        const double x = 0.5 * k * width;
        return (n % 2 == 1) ? k * std::sin(x) - kappa * std::cos(x) : k * std::cos(x) + kappa * std::sin(x);
    };
    const double c_inf = c * units::pi * units::pi / (width * width);
    return bisect(mismatch, c_inf * (n - 1) * (n - 1) + 1e-9, std::min(c_inf * n * n, depth) - 1e-9);
}

} // namespace

TEST_CASE("grid rejects coarse meshes and non-positive lengths") {
    CHECK_THROWS_AS(Grid(32, 20.0), ConfigError);
    CHECK_THROWS_AS(Grid(128, 0.0), ConfigError);
    Grid g(128, 20.0);
    CHECK(g.dz() * 128 == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(g.z(0) == -10.0);
}

TEST_CASE("build_potential") {
    SUBCASE("centred well is zero inside and barrier outside") {
        const auto p = single_well(20.0, 1024);
        const Grid& g = p.grid;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double z = g.z(k);
            if (std::abs(z) < 2.5 - g.dz()) CHECK(p.values[k] == 0.0);
            if (std::abs(z) > 2.5 + g.dz()) CHECK(p.values[k] == 100.0);
        }
        CHECK(p.barrier_level() == 100.0);
    }
    SUBCASE("no wells gives a flat zero profile") {
        const auto p = build_potential(StructureSpec{{}, 100.0}, Grid(256, 20.0));
        for (double v : p.values) CHECK(v == 0.0);
    }
    SUBCASE("five wells at 20 nm pitch give five notches") {
        const auto spec = periodic_wells(5, 20.0, 5.0, 100.0);
        const auto p = build_potential(spec, Grid(1000, 100.0));
        int notches = 0;
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            const std::size_t prev = (k + p.values.size() - 1) % p.values.size();
            if (p.values[k] < 50.0 && p.values[prev] >= 50.0) ++notches;
        }
        CHECK(notches == 5);
        CHECK(spec.wells.front().center_nm == doctest::Approx(-40.0));
    }
    SUBCASE("overlapping or protruding wells are rejected") {
        CHECK_THROWS_AS(build_potential(StructureSpec{{{0.0, 5.0, 100.0}, {3.0, 5.0, 100.0}}, 100.0}, Grid(256, 20.0)),
                        ConfigError);
        CHECK_THROWS_AS(build_potential(StructureSpec{{{8.0, 5.0, 100.0}}, 100.0}, Grid(256, 20.0)), ConfigError);
    }
}

TEST_CASE("free particle on a ring") {
    const Grid g(1024, 20.0);
    const auto p = potential_from_samples(g, std::vector<double>(g.size(), 0.0));
    const auto basis = solve_subbands(p, m_gaas, 5);

    const double c = units::hbar2_over_2me / m_gaas;
    const double k1 = 2.0 * units::pi / 20.0;
    // Closed-form continuum level and the exact discrete dispersion of the stencil.
    const double continuum = c * k1 * k1;
    const double discrete = c * (2.0 - 2.0 * std::cos(k1 * g.dz())) / (g.dz() * g.dz());

    CHECK(std::abs(basis.energies[0]) < 1e-9);
    CHECK(continuum == doctest::Approx(56.1).epsilon(1e-3));
    CHECK(basis.energies[1] == doctest::Approx(discrete).epsilon(1e-10));
    CHECK(basis.energies[2] == doctest::Approx(discrete).epsilon(1e-10));
    CHECK(std::abs(basis.energies[1] - basis.energies[2]) <= 1e-6);
    CHECK(basis.energies[1] == doctest::Approx(continuum).epsilon(1e-4));
    CHECK(std::abs(overlap(basis.phi(1), basis.phi(2), g.dz())) < 1e-10);
}

TEST_CASE("degenerate subspaces are resolved reproducibly") {
    const Grid g(512, 20.0);
    const auto p = potential_from_samples(g, std::vector<double>(g.size(), 0.0));
    const auto a = solve_subbands(p, m_gaas, 7);
    const auto b = solve_subbands(p, m_gaas, 7);
    CHECK(a.wavefunctions == b.wavefunctions);
    // Cutting a degenerate pair in half must not change the kept vector.
    const auto c = solve_subbands(p, m_gaas, 2);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(c.phi(1)[k] - a.phi(1)[k]) < 1e-10);
}

TEST_CASE("single quantum well spectrum") {
    const auto p = single_well(20.0, 1024);
    const auto basis = solve_subbands(p, m_gaas, 40);

    int bound = 0;
    for (double e : basis.energies) bound += e < p.barrier_level();
    CHECK(bound == 1);
    CHECK((basis.energies[2] - basis.energies[0]) == doctest::Approx(92.6).epsilon(0.02));

    SUBCASE("orthonormal, small residual, sign fixed") {
        const double dz = p.grid.dz();
        for (std::size_t i = 0; i < basis.size(); ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                CHECK(std::abs(overlap(basis.phi(i), basis.phi(j), dz) - (i == j ? 1.0 : 0.0)) < 1e-8);
            }
            for (double v : basis.phi(i)) {
                if (std::abs(v) > 1e-6) {
                    CHECK(v > 0.0);
                    break;
                }
            }
        }
        CHECK(basis.max_residual <= 1e-8);
    }
}

TEST_CASE("constant potential offset shifts energies only") {
    auto p = single_well(20.0, 512);
    const auto base = solve_subbands(p, m_gaas, 6);
    for (double& v : p.values) v += 17.5;
    const auto shifted = solve_subbands(p, m_gaas, 6);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(shifted.energies[j] == doctest::Approx(base.energies[j] + 17.5).epsilon(1e-10));
        for (std::size_t k = 0; k < p.grid.size(); k += 17) {
            CHECK(std::abs(shifted.phi(j)[k] - base.phi(j)[k]) < 1e-7);
        }
    }
}

TEST_CASE("second-order convergence of the spectrum") {
    std::vector<std::vector<double>> levels;
    for (std::size_t n : {256u, 512u, 1024u, 2048u}) levels.push_back(solve_subbands(single_well(20.0, n), m_gaas, 6).energies);
    for (std::size_t j = 0; j < 6; ++j) {
        const double d1 = std::abs(levels[1][j] - levels[0][j]);
        const double d2 = std::abs(levels[2][j] - levels[1][j]);
        const double d3 = std::abs(levels[3][j] - levels[2][j]);
        CAPTURE(j);
        CHECK(d2 < d1);
        CHECK(d3 < d2);
        CHECK(d1 / d2 > 3.0);
        CHECK(d2 / d3 > 3.0);
    }
}

TEST_CASE("deep well matches the finite-square-well matching conditions") {
    // 40 nm ring so the tails of the bound states never meet across the seam.
    const double depth = 1.0e4;
    const auto p = single_well(40.0, 2048, depth);
    const auto basis = solve_subbands(p, m_gaas, 3);
    const double c = units::hbar2_over_2me / m_gaas;
    for (int n = 1; n <= 3; ++n) {
        const double exact = finite_well_level(depth, 5.0, m_gaas, n);
        CAPTURE(n);
        CHECK(basis.energies[static_cast<std::size_t>(n - 1)] == doctest::Approx(exact).epsilon(0.01));
        // Approaches the infinite-well ladder from below.
        const double infinite = c * units::pi * units::pi * n * n / 25.0;
        CHECK(exact < infinite);
    }
    CHECK(finite_well_level(1e6, 5.0, m_gaas, 1) / (c * units::pi * units::pi / 25.0) >
          finite_well_level(1e4, 5.0, m_gaas, 1) / (c * units::pi * units::pi / 25.0));
}

TEST_CASE("derivative") {
    const Grid g(512, 20.0);
    SUBCASE("constant") {
        for (double v : derivative(std::vector<double>(g.size(), 3.0), g.dz())) CHECK(v == 0.0);
    }
    SUBCASE("sine") {
        const double k = 2.0 * units::pi / g.length();
        std::vector<double> f(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(k * g.z(i));
        const auto d = derivative(f, g.dz());
        const double bound = k * k * k * g.dz() * g.dz() / 6.0 * 1.01;
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(d[i] - k * std::cos(k * g.z(i))) <= bound);
    }
    SUBCASE("deep-well ground state") {
        const double depth = 1.0e4;
        const auto p = single_well(40.0, 2048, depth);
        const auto basis = solve_subbands(p, m_gaas, 1);
        const double c = units::hbar2_over_2me / m_gaas;
        const double e = finite_well_level(depth, 5.0, m_gaas, 1);
        const double k = std::sqrt(e / c);
        const auto d = derivative(basis.phi(0), p.grid.dz());
        // Inside the well phi = A cos(kz); fit A from the centre sample.
        const std::size_t centre = p.grid.size() / 2;
        const double amp = basis.phi(0)[centre];
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            const double z = p.grid.z(i);
            if (std::abs(z) > 2.0) continue;
            CHECK(d[i] == doctest::Approx(-amp * k * std::sin(k * z)).epsilon(1e-3).scale(amp * k));
        }
    }
}

TEST_CASE("solve_subbands rejects too many subbands") {
    const auto p = single_well(20.0, 128);
    CHECK_THROWS_AS(solve_subbands(p, m_gaas, 129), ConfigError);
}
