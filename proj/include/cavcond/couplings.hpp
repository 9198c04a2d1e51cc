#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cavcond/occupancy.hpp"
#include "cavcond/schrodinger.hpp"

namespace cavcond {

/// Material and resonator constants entering the coupling prefactors.
struct Geometry {
    double length_nm = 20.0;     ///< cavity spacer L_c
    double surface_nm2 = 1.0e6;  ///< transverse area S
    double eps_r = 13.0;
    double m_star = 0.067;
};

/// e^2/(8 eps0 eps_r) * (hbar^2/m*)^2, in meV * nm^5.
///
/// hbar*Xi = coupling_constant * sqrt(n n') * int(xi xi') / (hbar w hbar w'), with
/// n = N/S in nm^-2 and xi in nm^-2.
double coupling_constant(const Geometry& geometry);

/// xi(z) = phi_l' phi_j - phi_l phi_j'.
std::vector<double> xi(const SubbandBasis& basis, TransitionIndex index);

struct TransitionEntry {
    TransitionIndex index;
    double hw_meV = 0.0;
    double N_nu = 0.0;
    double n_nu = 0.0;              ///< N_nu / S, nm^-2
    std::vector<double> xi;         ///< nm^-2
    double xi_integral = 0.0;       ///< periodic rectangle rule, nm^-1
    double hbar_omega_res = 0.0;    ///< hbar Omega at omega_c = omega_nu, meV (signed)

    double xi_at_seam() const { return xi.front(); }
};

/// Everything the polariton and conductance stages need about the allowed transitions.
class TransitionCatalog {
public:
    TransitionCatalog(Grid grid, Geometry geometry, double n_e, std::vector<TransitionEntry> entries,
                      Eigen::MatrixXd depolarization);

    const Grid& grid() const noexcept { return grid_; }
    const Geometry& geometry() const noexcept { return geometry_; }
    double n_e() const noexcept { return n_e_; }
    double total_electrons() const noexcept { return n_e_ * geometry_.surface_nm2; }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const TransitionEntry& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<TransitionEntry>& entries() const noexcept { return entries_; }

    /// hbar * Xi, meV.
    const Eigen::MatrixXd& depolarization() const noexcept { return depolarization_; }

    /// hbar * Omega_nu at cavity energy hbar*omega_c (meV).
    double rabi(std::size_t i, double hw_c) const;

    /// sqrt(N_nu / N_e): scale between xi and the normalized xi-tilde.
    double tilde_scale(std::size_t i) const;

    std::ptrdiff_t find(TransitionIndex index) const;

    /// Same system restricted to the listed transitions (n_e and geometry kept).
    TransitionCatalog subset(std::span<const std::size_t> keep) const;

    /// Copy with every Rabi coupling and/or the depolarization matrix set to zero.
    TransitionCatalog with_couplings(bool light_matter, bool depolarization) const;

private:
    Grid grid_;
    Geometry geometry_;
    double n_e_;
    std::vector<TransitionEntry> entries_;
    Eigen::MatrixXd depolarization_;
    bool light_matter_ = true;
};

/// Rabi energy hbar*Omega for one transition at cavity energy hbar*omega_c.
double rabi(const TransitionEntry& entry, double hw_c, const Geometry& geometry);

/// hbar * Xi for the given entries, meV.
Eigen::MatrixXd depolarization_matrix(std::span<const TransitionEntry> entries, const Geometry& geometry, double dz);

TransitionCatalog build_catalog(const SubbandBasis& basis, const SubbandPopulations& populations,
                                const std::vector<Transition>& transitions, const Geometry& geometry);

} // namespace cavcond
