#include "cavcond/couplings.hpp"

#include <cmath>

#include "cavcond/errors.hpp"
#include "cavcond/units.hpp"

namespace cavcond {

double coupling_constant(const Geometry& geometry) {
    // e^2/eps0 = 4 pi * (e^2 / 4 pi eps0)
    const double e2_over_eps0 = 4.0 * units::pi * units::coulomb;
    const double h2m = units::hbar2_over_m(geometry.m_star);
    return e2_over_eps0 / (8.0 * geometry.eps_r) * h2m * h2m;
}

std::vector<double> xi(const SubbandBasis& basis, TransitionIndex index) {
    const double dz = basis.grid.dz();
    const auto phi_l = basis.phi(index.upper);
    const auto phi_j = basis.phi(index.lower);
    const auto d_l = derivative(phi_l, dz);
    const auto d_j = derivative(phi_j, dz);
    std::vector<double> out(phi_l.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = d_l[k] * phi_j[k] - phi_l[k] * d_j[k];
    return out;
}

double rabi(const TransitionEntry& entry, double hw_c, const Geometry& geometry) {
    if (hw_c < 0.0) throw ConfigError("omega_c", "cavity frequency must be non-negative");
    if (entry.n_nu <= 0.0 || hw_c == 0.0) return 0.0;
    return std::sqrt(coupling_constant(geometry) * entry.n_nu * hw_c / geometry.length_nm) * entry.xi_integral /
           entry.hw_meV;
}

Eigen::MatrixXd depolarization_matrix(std::span<const TransitionEntry> entries, const Geometry& geometry, double dz) {
    const auto n = static_cast<Eigen::Index>(entries.size());
    Eigen::MatrixXd out(n, n);
    const double c = coupling_constant(geometry);
    for (Eigen::Index a = 0; a < n; ++a) {
        const auto& ea = entries[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b <= a; ++b) {
            const auto& eb = entries[static_cast<std::size_t>(b)];
            const double value =
                c * std::sqrt(ea.n_nu * eb.n_nu) * overlap(ea.xi, eb.xi, dz) / (ea.hw_meV * eb.hw_meV);
            out(a, b) = value;
            out(b, a) = value;
        }
    }
    return out;
}

TransitionCatalog::TransitionCatalog(Grid grid, Geometry geometry, double n_e, std::vector<TransitionEntry> entries,
                                     Eigen::MatrixXd depolarization)
    : grid_(grid), geometry_(geometry), n_e_(n_e), entries_(std::move(entries)),
      depolarization_(std::move(depolarization)) {
    if (depolarization_.rows() != static_cast<Eigen::Index>(entries_.size()) ||
        depolarization_.cols() != depolarization_.rows()) {
        throw ConfigError("catalog", "depolarization matrix does not match the transition count");
    }
}

double TransitionCatalog::rabi(std::size_t i, double hw_c) const {
    return light_matter_ ? cavcond::rabi(entries_[i], hw_c, geometry_) : 0.0;
}

double TransitionCatalog::tilde_scale(std::size_t i) const { return std::sqrt(entries_[i].n_nu / n_e_); }

std::ptrdiff_t TransitionCatalog::find(TransitionIndex index) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].index == index) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

TransitionCatalog TransitionCatalog::subset(std::span<const std::size_t> keep) const {
    std::vector<TransitionEntry> picked;
    const auto n = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd dep(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        picked.push_back(entries_.at(keep[static_cast<std::size_t>(a)]));
        for (Eigen::Index b = 0; b < n; ++b) {
            dep(a, b) = depolarization_(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]),
                                        static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));
        }
    }
    TransitionCatalog out(grid_, geometry_, n_e_, std::move(picked), std::move(dep));
    out.light_matter_ = light_matter_;
    return out;
}

TransitionCatalog TransitionCatalog::with_couplings(bool light_matter, bool depolarization) const {
    TransitionCatalog out = *this;
    out.light_matter_ = light_matter_ && light_matter;
    if (!depolarization) out.depolarization_.setZero();
    return out;
}

TransitionCatalog build_catalog(const SubbandBasis& basis, const SubbandPopulations& populations,
                                const std::vector<Transition>& transitions, const Geometry& geometry) {
    if (!(geometry.eps_r > 0.0)) throw ConfigError("structure/eps_r", "must be positive");
    if (std::abs(geometry.length_nm - basis.grid.length()) > 1e-12 * basis.grid.length()) {
        throw ConfigError("structure/L_c_nm", "geometry length differs from the grid");
    }
    if (std::abs(geometry.surface_nm2 - populations.surface_nm2) > 1e-12 * populations.surface_nm2) {
        throw ConfigError("structure/surface_nm2", "geometry surface differs from the occupancy surface");
    }
    const double dz = basis.grid.dz();
    std::vector<TransitionEntry> entries;
    entries.reserve(transitions.size());
    for (const auto& t : transitions) {
        TransitionEntry e;
        e.index = t.index;
        e.hw_meV = t.hw_meV;
        e.N_nu = t.N_nu;
        e.n_nu = t.N_nu / populations.surface_nm2;
        e.xi = xi(basis, t.index);
        e.xi_integral = integrate(e.xi, dz);
        entries.push_back(std::move(e));
    }
    for (auto& e : entries) e.hbar_omega_res = rabi(e, e.hw_meV, geometry);
    auto dep = depolarization_matrix(entries, geometry, dz);
    return TransitionCatalog(basis.grid, geometry, populations.n_e, std::move(entries), std::move(dep));
}

} // namespace cavcond
