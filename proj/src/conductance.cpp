#include "cavcond/conductance.hpp"

#include <cmath>

#include "cavcond/errors.hpp"
#include "cavcond/units.hpp"

namespace cavcond {

namespace {

using cd = std::complex<double>;

// Neumaier-compensated accumulator: the result depends only on the order of additions.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        carry_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

cd integrate_complex(const std::vector<cd>& f, double dz) {
    CompensatedSum re, im;
    for (const cd& v : f) {
        re.add(v.real());
        im.add(v.imag());
    }
    return cd(re.value(), im.value()) * dz;
}

// G of a single mode, in units of e^2/hbar.
double mode_conductance(const ResponseMode& mode, double prefactor, double s_over_l, double dz) {
    if (mode.weight_ps2 == 0.0) return 0.0;
    const cd integral = integrate_complex(mode.profile, dz);
    return -s_over_l * prefactor * mode.weight_ps2 * (std::conj(mode.profile.front()) * integral).real();
}

} // namespace

double lorentz_weight(double tau_ps, double hw_meV) {
    // A branch sitting at zero frequency carries no matter component, so it is dropped.
    if (!(hw_meV > 0.0)) return 0.0;
    const double omega = hw_meV / units::hbar;
    // tau/(omega(1 + tau^2 omega^2)) = 1/(omega/tau + tau omega^3)
    return 1.0 / (omega / tau_ps + tau_ps * omega * omega * omega);
}

double kernel_prefactor(const TransitionCatalog& catalog) {
    const double h2m = units::hbar2_over_m(catalog.geometry().m_star);
    return 0.5 * catalog.n_e() * h2m * h2m / (units::hbar * units::hbar);
}

std::vector<ResponseMode> noninteracting_modes(const TransitionCatalog& catalog, double tau0_ps) {
    if (!(tau0_ps > 0.0)) throw ConfigError("tau0_ps", "scattering time must be positive");
    std::vector<ResponseMode> modes;
    modes.reserve(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& e = catalog[i];
        ResponseMode m;
        m.weight_ps2 = lorentz_weight(tau0_ps, e.hw_meV);
        const double scale = catalog.tilde_scale(i);
        m.profile.resize(e.xi.size());
        for (std::size_t k = 0; k < e.xi.size(); ++k) m.profile[k] = scale * e.xi[k];
        modes.push_back(std::move(m));
    }
    return modes;
}

std::vector<std::vector<cd>> xi_eff(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog) {
    const std::size_t n = catalog.grid().size();
    std::vector<std::vector<cd>> out;
    out.reserve(spectrum.size());
    for (const auto& b : spectrum.branches) {
        if (static_cast<std::size_t>(b.x.size()) != catalog.size()) {
            throw ConfigError("spectrum", "spectrum and catalog describe different transition sets");
        }
        std::vector<cd> f(n, cd{0.0, 0.0});
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const cd c = (b.x[k] + b.z[k]) * catalog.tilde_scale(i);
            if (c == cd{0.0, 0.0}) continue;
            const auto& xi = catalog[i].xi;
            for (std::size_t p = 0; p < n; ++p) f[p] += c * xi[p];
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<ResponseMode> interacting_modes(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog) {
    auto profiles = xi_eff(spectrum, catalog);
    std::vector<ResponseMode> modes;
    modes.reserve(profiles.size());
    for (std::size_t r = 0; r < profiles.size(); ++r) {
        const auto& b = spectrum.branches[r];
        modes.push_back({lorentz_weight(b.tau_ps, b.hw_meV), std::move(profiles[r])});
    }
    return modes;
}

namespace {

ResponseKernel assemble_kernel(const std::vector<ResponseMode>& modes, const TransitionCatalog& catalog,
                               ResponseKernel::Flavor flavor) {
    const auto n = static_cast<Eigen::Index>(catalog.grid().size());
    const double pre = kernel_prefactor(catalog);
    ResponseKernel k{flavor, catalog.grid(), Eigen::MatrixXd::Zero(n, n)};
    // Upper triangle with compensated sums over modes, mirrored: symmetric by construction.
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
            CompensatedSum s;
            for (const auto& m : modes) {
                if (m.weight_ps2 == 0.0) continue;
                s.add(m.weight_ps2 * (std::conj(m.profile[static_cast<std::size_t>(a)]) *
                                      m.profile[static_cast<std::size_t>(b)])
                                         .real());
            }
            k.chi(a, b) = k.chi(b, a) = pre * s.value();
        }
    }
    return k;
}

} // namespace

ResponseKernel chi_noninteracting(const TransitionCatalog& catalog, double tau0_ps) {
    return assemble_kernel(noninteracting_modes(catalog, tau0_ps), catalog, ResponseKernel::Flavor::noninteracting);
}

ResponseKernel chi_interacting(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog) {
    return assemble_kernel(interacting_modes(spectrum, catalog), catalog, ResponseKernel::Flavor::interacting);
}

double conductance_from_modes(const std::vector<ResponseMode>& modes, const TransitionCatalog& catalog,
                              std::vector<double>* per_mode) {
    const double pre = kernel_prefactor(catalog);
    const double s_over_l = catalog.geometry().surface_nm2 / catalog.grid().length();
    const double dz = catalog.grid().dz();
    if (per_mode) per_mode->clear();
    CompensatedSum total;
    for (const auto& m : modes) {
        const double g = units::e2_over_hbar_siemens * mode_conductance(m, pre, s_over_l, dz);
        if (per_mode) per_mode->push_back(g);
        total.add(g);
    }
    return total.value();
}

double conductance_noninteracting(const TransitionCatalog& catalog, double tau0_ps) {
    return conductance_from_modes(noninteracting_modes(catalog, tau0_ps), catalog);
}

double limit_ratio_zero(double tau_omega, double xi_ratio) {
    const double a2 = tau_omega * tau_omega;
    return (1.0 + a2) / (1.0 + a2 * (1.0 + 4.0 * xi_ratio));
}

double limit_ratio_inf(double tau_omega, double xi_ratio, double rabi_ratio) {
    const double a2 = tau_omega * tau_omega;
    return (1.0 + a2) / (1.0 + a2 * (1.0 + 4.0 * (xi_ratio - rabi_ratio * rabi_ratio)));
}

LimitConductances limit_conductances(const TransitionCatalog& catalog, std::size_t transition, double tau0_ps) {
    const auto t = single_transition(catalog, transition);
    const std::vector<std::size_t> keep{transition};
    LimitConductances out;
    out.G_NI = conductance_noninteracting(catalog.subset(keep), tau0_ps);
    const double a = units::tau_omega(tau0_ps, t.hw_meV);
    out.G_zero = out.G_NI * limit_ratio_zero(a, t.xi_meV / t.hw_meV);
    out.G_inf = out.G_NI * limit_ratio_inf(a, t.xi_meV / t.hw_meV, t.rabi_res_meV / t.hw_meV);
    return out;
}

ConductanceResult conductance_interacting(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog,
                                          double tau0_ps, double tau_p_ps) {
    PolaritonSpectrum sp = spectrum;
    assign_scattering_times(sp, tau0_ps, tau_p_ps);
    ConductanceResult out;
    out.G = conductance_from_modes(interacting_modes(sp, catalog), catalog, &out.G_branch);
    out.G_NI = conductance_noninteracting(catalog, tau0_ps);
    out.n_points = catalog.grid().size();
    out.n_transitions = catalog.size();
    out.tau0_ps = tau0_ps;
    out.tau_p_ps = tau_p_ps;
    return out;
}

double two_subband_conductance(const TransitionCatalog& catalog, std::size_t transition, double hw_c, double tau0_ps,
                               double tau_p_ps) {
    const std::vector<std::size_t> keep{transition};
    const auto sub = catalog.subset(keep);
    auto sp = two_subband_solve(single_transition(catalog, transition), hw_c);
    assign_scattering_times(sp, tau0_ps, tau_p_ps);
    return conductance_from_modes(interacting_modes(sp, sub), sub);
}

std::size_t dominant_transition(const TransitionCatalog& catalog, double tau0_ps) {
    if (catalog.empty()) throw ConfigError("catalog", "no transitions");
    std::vector<double> terms;
    conductance_from_modes(noninteracting_modes(catalog, tau0_ps), catalog, &terms);
    std::size_t best = 0;
    for (std::size_t i = 1; i < terms.size(); ++i) {
        if (std::abs(terms[i]) > std::abs(terms[best])) best = i;
    }
    return best;
}

std::vector<double> current_profile(const ResponseKernel& kernel, double delta_U) {
    const double field = -delta_U / kernel.grid.length();
    const double dz = kernel.grid.dz();
    const auto n = kernel.chi.rows();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) {
        CompensatedSum s;
        for (Eigen::Index b = 0; b < n; ++b) s.add(kernel.chi(a, b));
        out[static_cast<std::size_t>(a)] = units::e2_over_hbar_siemens * s.value() * field * dz;
    }
    return out;
}

std::vector<double> current_profile(const std::vector<ResponseMode>& modes, const TransitionCatalog& catalog,
                                    double delta_U) {
    const double field = -delta_U / catalog.grid().length();
    const double dz = catalog.grid().dz();
    const double pre = kernel_prefactor(catalog);
    const std::size_t n = catalog.grid().size();
    std::vector<CompensatedSum> acc(n);
    for (const auto& m : modes) {
        if (m.weight_ps2 == 0.0) continue;
        const cd integral = integrate_complex(m.profile, dz);
        for (std::size_t k = 0; k < n; ++k) acc[k].add(m.weight_ps2 * (std::conj(m.profile[k]) * integral).real());
    }
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = units::e2_over_hbar_siemens * pre * acc[k].value() * field;
    return out;
}

} // namespace cavcond
