#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cavcond/couplings.hpp"
#include "cavcond/polariton.hpp"

namespace cavcond {

// Conductances are returned in siemens. Internally everything is carried in
// units of e^2/hbar; the kernel chi is stored in e^2/(hbar nm^2).

/// One rank-1 term of the response: weight tau/(omega (1 + tau^2 omega^2)) in ps^2
/// times the outer product of `profile` (nm^-2) with itself.
struct ResponseMode {
    double weight_ps2 = 0.0;
    std::vector<std::complex<double>> profile;
};

/// tau/(omega (1 + (tau omega)^2)) for omega = hw/hbar, finite for tau = 0 and tau = inf.
double lorentz_weight(double tau_ps, double hw_meV);

/// (n_e/2) (hbar/m*)^2 in nm^2/ps^2; multiplies every mode.
double kernel_prefactor(const TransitionCatalog& catalog);

std::vector<ResponseMode> noninteracting_modes(const TransitionCatalog& catalog, double tau0_ps);

/// xi_eff_r(z) = sum_nu (x_r,nu + z_r,nu) xi~_nu(z), one grid function per branch.
std::vector<std::vector<std::complex<double>>> xi_eff(const PolaritonSpectrum& spectrum,
                                                      const TransitionCatalog& catalog);

/// Modes of the dressed system; branch scattering times are taken from the spectrum.
std::vector<ResponseMode> interacting_modes(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog);

struct ResponseKernel {
    enum class Flavor { noninteracting, interacting };
    Flavor flavor = Flavor::noninteracting;
    Grid grid;
    Eigen::MatrixXd chi;  ///< e^2/(hbar nm^2)
};

ResponseKernel chi_noninteracting(const TransitionCatalog& catalog, double tau0_ps);
ResponseKernel chi_interacting(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog);

/// -(S/L) * prefactor * sum_m weight_m Re[conj(profile_m(seam)) * int profile_m], in siemens.
/// `per_mode`, when given, receives each term.
double conductance_from_modes(const std::vector<ResponseMode>& modes, const TransitionCatalog& catalog,
                              std::vector<double>* per_mode = nullptr);

double conductance_noninteracting(const TransitionCatalog& catalog, double tau0_ps);

/// Closed-form two-subband limits for one transition, and its own noninteracting term.
struct LimitConductances {
    double G_NI = 0.0;   ///< S
    double G_zero = 0.0; ///< omega_c -> 0
    double G_inf = 0.0;  ///< omega_c -> infinity
};

LimitConductances limit_conductances(const TransitionCatalog& catalog, std::size_t transition, double tau0_ps);

/// Same limits written directly in terms of tau0*omega, Xi/omega and Omega_res/omega (ratios to G_NI).
double limit_ratio_zero(double tau_omega, double xi_ratio);
double limit_ratio_inf(double tau_omega, double xi_ratio, double rabi_ratio);

struct ConductanceResult {
    double G = 0.0;                  ///< S
    double G_NI = 0.0;               ///< S
    std::vector<double> G_branch;    ///< per polariton branch, S
    std::optional<LimitConductances> limits;
    std::size_t n_points = 0;
    std::size_t n_transitions = 0;
    double tau0_ps = 0.0;
    double tau_p_ps = 0.0;
};

/// G of the dressed system. Scattering times are recomputed from tau0 and tau_p.
ConductanceResult conductance_interacting(const PolaritonSpectrum& spectrum, const TransitionCatalog& catalog,
                                          double tau0_ps, double tau_p_ps);

/// Two-subband G for the given transition at cavity energy hw_c (closed-form branches).
double two_subband_conductance(const TransitionCatalog& catalog, std::size_t transition, double hw_c, double tau0_ps,
                               double tau_p_ps);

/// Transition with the largest |contribution| to G_NI.
std::size_t dominant_transition(const TransitionCatalog& catalog, double tau0_ps);

/// delta J(z) = int chi(z, z') E dz' for the uniform field E = -delta_U / L_c.
/// With delta_U in volts the result is in A/nm^2; it is periodic on the ring.
std::vector<double> current_profile(const ResponseKernel& kernel, double delta_U);

/// Same profile evaluated mode by mode without forming the kernel.
std::vector<double> current_profile(const std::vector<ResponseMode>& modes, const TransitionCatalog& catalog,
                                    double delta_U);

} // namespace cavcond
