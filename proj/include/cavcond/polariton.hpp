#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cavcond/couplings.hpp"

namespace cavcond {

/// Hopfield-Bogoliubov matrix acting on (w, x_1..x_N, y, z_1..z_N), in meV.
///
/// Block layout, with O = (i Omega_1, i Omega_2, ...), W = diag(hbar w_nu) and
/// D = 2 hbar Xi:
///
///     [ w_c   -O    0    O   ]
///     [ -O^+  W+D  -O^+  -D  ]
///     [ 0     O    -w_c  -O  ]
///     [ -O^+  D    -O^+ -W-D ]
struct HopfieldMatrix {
    double hw_c = 0.0;
    Eigen::MatrixXcd m;

    std::size_t transitions() const noexcept { return static_cast<std::size_t>(m.rows() / 2 - 1); }
};

HopfieldMatrix build_matrix(const TransitionCatalog& catalog, double hw_c);

/// Same layout from raw inputs: transition energies, signed Rabi energies at hw_c and hbar*Xi.
HopfieldMatrix build_matrix(double hw_c, const Eigen::VectorXd& hw, const Eigen::VectorXd& rabi,
                            const Eigen::MatrixXd& depolarization);

struct PolaritonBranch {
    double hw_meV = 0.0;          ///< hbar omega_r
    std::complex<double> w, y;    ///< photon coefficients
    Eigen::VectorXcd x, z;        ///< matter coefficients, one per transition
    double W_e = 0.0;
    double tau_ps = std::numeric_limits<double>::infinity();
};

struct PolaritonSpectrum {
    double hw_c = 0.0;
    std::vector<PolaritonBranch> branches;  ///< ascending frequency
    /// Largest |Im lambda| / |Re lambda| among the retained eigenvalues.
    double max_imag_ratio = 0.0;
    /// Smallest |Bogoliubov norm| / |v|^2 before rescaling; near zero means a near-defective matrix.
    double min_norm_ratio = 1.0;

    std::size_t size() const noexcept { return branches.size(); }
};

/// Positive-norm, positive-frequency eigenvectors of M, normalized to +1.
/// Throws UnstableSpectrumError when frequencies turn complex or the branch count is wrong.
PolaritonSpectrum diagonalize(const HopfieldMatrix& matrix);

/// sum |x|^2 - sum |z|^2
double electronic_weight(const PolaritonBranch& branch);

/// 1/tau_r = W_e/tau0 + (1 - W_e)/tau_p. tau_p may be +inf.
double scattering_time(double W_e, double tau0_ps, double tau_p_ps);

void assign_scattering_times(PolaritonSpectrum& spectrum, double tau0_ps, double tau_p_ps);

/// build_matrix + diagonalize + scattering times.
PolaritonSpectrum solve_polaritons(const TransitionCatalog& catalog, double hw_c, double tau0_ps, double tau_p_ps);

/// One transition: energy, hbar*Xi and signed resonant Rabi energy (all meV).
struct SingleTransition {
    double hw_meV = 0.0;
    double xi_meV = 0.0;
    double rabi_res_meV = 0.0;

    /// hbar Omega at cavity energy hw_c.
    double rabi(double hw_c) const;
    /// Depolarization-shifted energy sqrt(w (w + 4 Xi)).
    double shifted() const;
};

SingleTransition single_transition(const TransitionCatalog& catalog, std::size_t i);

/// Closed-form solution of the 4x4 problem; same conventions as diagonalize.
PolaritonSpectrum two_subband_solve(const SingleTransition& transition, double hw_c);

/// perm[i] = index in `next` of the branch continuing branch i of `previous`,
/// chosen by largest coefficient overlap.
std::vector<std::size_t> match_branches(const PolaritonSpectrum& previous, const PolaritonSpectrum& next);

} // namespace cavcond
