#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "cavcond/conductance.hpp"
#include "cavcond/units.hpp"
#include "fixtures.hpp"

using namespace cavcond;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::size_t at(const TransitionCatalog& c, std::size_t l, std::size_t j) {
    const auto i = c.find({l - 1, j - 1});
    REQUIRE(i >= 0);
    return static_cast<std::size_t>(i);
}

TransitionCatalog only(const TransitionCatalog& c, std::size_t i) {
    const std::vector<std::size_t> keep{i};
    return c.subset(keep);
}

// Coarse single well, cheap enough for dense kernels.
const fixtures::System& coarse() {
    static const auto s = fixtures::make_system(fixtures::reference_well(), 20.0, 128, 12, fixtures::pinned(2));
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

} // namespace

TEST_CASE("Lorentzian weight") {
    const double hw = 50.0;
    const double omega = hw / units::hbar;
    for (double tau : {0.01, 1.0, 30.0}) {
        CHECK(lorentz_weight(tau, hw) ==
              doctest::Approx(tau / (omega * (1.0 + tau * tau * omega * omega))).epsilon(1e-14));
    }
    CHECK(lorentz_weight(inf, hw) == 0.0);
    CHECK(lorentz_weight(0.0, hw) == 0.0);
    CHECK(lorentz_weight(1.0, 0.0) == 0.0);
}

TEST_CASE("noninteracting kernel") {
    const auto& cat = coarse().catalog;
    SUBCASE("empty catalog gives a zero kernel") {
        const auto k = chi_noninteracting(cat.subset(std::vector<std::size_t>{}), 1.0);
        CHECK(k.chi.norm() == 0.0);
    }
    SUBCASE("one transition gives a rank-1 kernel") {
        const auto k = chi_noninteracting(only(cat, at(cat, 3, 1)), 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.chi);
        const auto& ev = es.eigenvalues();
        const double top = ev.cwiseAbs().maxCoeff();
        int nonzero = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) nonzero += std::abs(ev[i]) > 1e-10 * top;
        CHECK(nonzero == 1);
    }
    SUBCASE("symmetric") {
        const auto k = chi_noninteracting(cat, 1.0);
        CHECK((k.chi - k.chi.transpose()).norm() <= 1e-10 * k.chi.norm());
    }
    SUBCASE("vanishes linearly with tau0") {
        const double a = chi_noninteracting(cat, 1e-9).chi.norm();
        const double b = chi_noninteracting(cat, 2e-9).chi.norm();
        CHECK(b / a == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("noninteracting conductance") {
    const auto& sys = fixtures::config1();
    const auto& cat = sys.catalog;
    const double tau0 = 1.0;

    SUBCASE("single transition term") {
        const std::size_t i = at(cat, 3, 1);
        const auto& e = cat[i];
        const double dz = cat.grid().dz();
        double integral = 0.0;
        for (double v : e.xi) integral += v * dz;
        const double s2 = e.n_nu / cat.n_e();
        const double h2m = units::hbar2_over_m(0.067);
        const double omega = e.hw_meV / units::hbar;
        const double expected = -(cat.geometry().surface_nm2 / 20.0) * 0.5 * cat.n_e() * h2m * h2m /
                                (units::hbar * units::hbar) * tau0 / omega * s2 * e.xi.front() * integral /
                                (1.0 + tau0 * tau0 * omega * omega) * units::e2_over_hbar_siemens;
        CHECK(conductance_noninteracting(only(cat, i), tau0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("equal-parity transitions do not contribute") {
        std::vector<double> terms;
        conductance_from_modes(noninteracting_modes(cat, tau0), cat, &terms);
        const double scale = std::abs(terms[at(cat, 3, 1)]);
        for (std::size_t i = 0; i < cat.size(); ++i) {
            if (std::abs(cat[i].xi_integral) < 1e-9) CHECK(std::abs(terms[i]) <= 1e-9 * scale);
        }
        CHECK(std::abs(terms[at(cat, 2, 1)]) <= 1e-9 * scale);
        CHECK(dominant_transition(cat, tau0) == at(cat, 3, 1));
        CHECK(dominant_transition(fixtures::config2().catalog, tau0) == at(fixtures::config2().catalog, 3, 2));
    }
    SUBCASE("proportional to the surface at fixed density") {
        auto occ = fixtures::pinned(2);
        const auto a = fixtures::make_system(fixtures::reference_well(), 20.0, 256, 12, occ);
        occ.surface_nm2 *= 3.0;
        const auto b = fixtures::make_system(fixtures::reference_well(), 20.0, 256, 12, occ);
        CHECK(conductance_noninteracting(b.catalog, tau0) ==
              doctest::Approx(3.0 * conductance_noninteracting(a.catalog, tau0)).epsilon(1e-12));
    }
}

TEST_CASE("decoupled limit reproduces the noninteracting conductance") {
    const auto& cat = fixtures::config1().catalog;
    const auto off = cat.with_couplings(false, false);
    for (double ratio : {0.3, 1.0, 2.5}) {
        const auto sp = diagonalize(build_matrix(off, ratio * cat[0].hw_meV));
        for (const auto& b : sp.branches) CHECK((b.W_e == doctest::Approx(0.0) || b.W_e == doctest::Approx(1.0)));
        const auto res = conductance_interacting(sp, off, 1.0, inf);
        CHECK(std::abs(res.G - res.G_NI) <= 1e-10 * std::abs(res.G_NI));
        // xi_eff of each matter branch is the bare xi~; the photon branch carries nothing.
        const auto eff = xi_eff(sp, off);
        for (std::size_t r = 0; r < sp.size(); ++r) {
            if (sp.branches[r].W_e > 0.5) continue;
            for (const auto& v : eff[r]) CHECK(std::abs(v) == 0.0);
        }
    }
}

TEST_CASE("branch decomposition and kernel consistency") {
    const auto& sys = coarse();
    const auto& cat = sys.catalog;
    const auto sp = solve_polaritons(cat, 1.1 * cat[0].hw_meV, 1.0, 1e6);
    const auto res = conductance_interacting(sp, cat, 1.0, 1e6);
    double sum = 0.0;
    for (double g : res.G_branch) sum += g;
    CHECK(sum == doctest::Approx(res.G).epsilon(1e-12));
    CHECK(res.G_branch.size() == cat.size() + 1);

    const auto k = chi_interacting(sp, cat);
    CHECK((k.chi - k.chi.transpose()).norm() <= 1e-10 * k.chi.norm());
    // G = S * dJ(seam) / dU.
    const auto dj = current_profile(k, 1.0);
    CHECK(cat.geometry().surface_nm2 * dj[0] == doctest::Approx(res.G).epsilon(1e-10));
    const auto dj_modes = current_profile(interacting_modes(sp, cat), cat, 1.0);
    for (std::size_t i = 0; i < dj.size(); ++i) CHECK(dj_modes[i] == doctest::Approx(dj[i]).epsilon(1e-9).scale(std::abs(dj[0])));
}

TEST_CASE("current profile") {
    const auto& sys = coarse();
    const auto& cat = sys.catalog;
    for (bool dressed : {false, true}) {
        const auto modes = dressed ? interacting_modes(solve_polaritons(cat, cat[0].hw_meV, 1.0, 1e6), cat)
                                   : noninteracting_modes(cat, 1.0);
        const auto dj = current_profile(modes, cat, 1e-3);
        const std::size_t n = dj.size();
        // Periodic continuation through the seam: the centred difference across it is as smooth as elsewhere.
        const auto d = derivative(dj, cat.grid().dz());
        double integral = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            integral += d[k] * cat.grid().dz();
            scale = std::max(scale, std::abs(dj[k]));
        }
        CHECK(std::abs(integral) <= 1e-10 * scale);
        // Even about the well centre (index n/2): mirror k -> n - k.
        for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(dj[k] - dj[n - k]) <= 1e-8 * scale);
    }
}

TEST_CASE("recast identity of the two-subband conductance") {
    const auto& cat = fixtures::config1().catalog;
    const std::size_t i = at(cat, 3, 1);
    const auto sub = only(cat, i);
    const auto t = single_transition(cat, i);
    for (double tau0 : {0.01, 0.3, 1.0, 5.0}) {
        const double g_ni = conductance_noninteracting(sub, tau0);
        const double a = units::tau_omega(tau0, t.hw_meV);
        for (double ratio : {0.05, 0.7, 1.0, 1.4, 8.0}) {
            const double wc = ratio * t.hw_meV;
            auto sp = two_subband_solve(t, wc);
            assign_scattering_times(sp, tau0, inf);
            double factor = 0.0;
            for (const auto& b : sp.branches) {
                const double tr = units::tau_omega(b.tau_ps, b.hw_meV);
                factor += std::isinf(b.tau_ps) ? 0.0 : (1.0 + a * a) / (1.0 + tr * tr);
            }
            const double g = two_subband_conductance(cat, i, wc, tau0, inf);
            CAPTURE(tau0);
            CAPTURE(ratio);
            CHECK(g == doctest::Approx(g_ni * factor).epsilon(1e-8));
            // Full solver on the same single transition agrees.
            const auto full = conductance_interacting(diagonalize(build_matrix(sub, wc)), sub, tau0, inf);
            CHECK(full.G == doctest::Approx(g).epsilon(1e-8));
        }
    }
}

TEST_CASE("two-subband limits") {
    SUBCASE("closed forms with the published coupling ratios") {
        CHECK(limit_ratio_zero(1e9, 0.05) == doctest::Approx(0.833).epsilon(1e-3));
        CHECK(limit_ratio_inf(1e9, 0.05, 0.14) == doctest::Approx(0.892).epsilon(1e-3));
        CHECK(limit_ratio_zero(1e9, 2.92) == doctest::Approx(0.0789).epsilon(1e-3));
        CHECK(limit_ratio_zero(1e-9, 2.92) == doctest::Approx(1.0));
        CHECK(limit_ratio_inf(1e-9, 2.92, 1.7) == doctest::Approx(1.0));
    }
    SUBCASE("inequality chain") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 200; ++k) {
            const double a = std::pow(10.0, 3.0 * u(rng));
            const double xi = 3.0 * u(rng);
            const double rabi = std::sqrt(xi) * u(rng);
            const double g0 = limit_ratio_zero(a, xi), gi = limit_ratio_inf(a, xi, rabi);
            CHECK(g0 <= gi + 1e-10);
            CHECK(gi <= 1.0 + 1e-10);
        }
    }
    SUBCASE("full single-transition runs converge to the limits") {
        const auto& cat = fixtures::config1().catalog;
        const std::size_t i = at(cat, 3, 1);
        const auto sub = only(cat, i);
        const double tau0 = 1.0;
        const auto lim = limit_conductances(cat, i, tau0);
        const double w = cat[i].hw_meV;
        const double g_low = conductance_interacting(solve_polaritons(sub, 1e-3 * w, tau0, inf), sub, tau0, inf).G;
        const double g_high = conductance_interacting(solve_polaritons(sub, 1e3 * w, tau0, inf), sub, tau0, inf).G;
        CHECK(rel(g_low, lim.G_zero) <= 0.01);
        CHECK(rel(g_high, lim.G_inf) <= 0.02);
        CHECK(lim.G_zero / lim.G_NI <= lim.G_inf / lim.G_NI);
        CHECK(lim.G_inf / lim.G_NI <= 1.0);
    }
}

TEST_CASE("resonant mixing without depolarization") {
    // Both branches are half matter, so |x+z|^2 = w_r/(2w) and the projections
    // differ by sqrt(w_LP/w_UP): they are not equal once counter-rotating terms are kept.
    const auto& cat = fixtures::config1().catalog;
    const auto sub = only(cat, at(cat, 3, 1)).with_couplings(true, false);
    const auto sp = diagonalize(build_matrix(sub, sub[0].hw_meV));
    const auto eff = xi_eff(sp, sub);
    const double dz = sub.grid().dz();
    std::complex<double> lp, up;
    for (std::size_t k = 0; k < eff[0].size(); ++k) {
        lp += eff[0][k] * dz;
        up += eff[1][k] * dz;
    }
    CHECK(sp.branches[0].W_e == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sp.branches[1].W_e == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(lp) / std::abs(up) ==
          doctest::Approx(std::sqrt(sp.branches[0].hw_meV / sp.branches[1].hw_meV)).epsilon(1e-6));
}

TEST_CASE("scattering-time crossover at resonance") {
    const auto& cat = fixtures::config1().catalog;
    const std::size_t i = at(cat, 3, 1);
    const auto sub = only(cat, i);
    const double w = cat[i].hw_meV;
    for (double tw : {0.1, 10.0}) {
        const double tau0 = tw * units::hbar / w;
        const double g0 = conductance_interacting(solve_polaritons(sub, 0.0, tau0, inf), sub, tau0, inf).G;
        const double g = conductance_interacting(solve_polaritons(sub, w, tau0, inf), sub, tau0, inf).G;
        CAPTURE(tw);
        if (tw < 1.0) CHECK(g / g0 > 1.0);
        else CHECK(g / g0 < 1.0);
    }
}

TEST_CASE("degenerate rotation leaves the noninteracting kernel unchanged") {
    // Flat ring: the first excited level is an exactly degenerate cos/sin pair.
    const Grid g(96, 20.0);
    const auto profile = potential_from_samples(g, std::vector<double>(g.size(), 0.0));
    auto basis = solve_subbands(profile, 0.067, 5);
    OccupancySpec occ;
    occ.n_e_per_cm2 = 1e11;
    const auto pops = fermi_level(basis, occ);
    const Geometry geo{20.0, occ.surface_nm2, 13.0, 0.067};
    const auto a = build_catalog(basis, pops, enumerate_transitions(pops, basis), geo);

    const double c = std::cos(0.37), s = std::sin(0.37);
    const Eigen::VectorXd p1 = basis.wavefunctions.col(1), p2 = basis.wavefunctions.col(2);
    basis.wavefunctions.col(1) = c * p1 + s * p2;
    basis.wavefunctions.col(2) = -s * p1 + c * p2;
    const auto b = build_catalog(basis, pops, enumerate_transitions(pops, basis), geo);

    const auto ka = chi_noninteracting(a, 1.0).chi;
    const auto kb = chi_noninteracting(b, 1.0).chi;
    CHECK((ka - kb).norm() <= 1e-10 * ka.norm());
}
