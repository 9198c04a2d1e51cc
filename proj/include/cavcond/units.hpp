#pragma once

// Working unit system: energies in meV, lengths in nm, times in ps.
// Frequencies are carried as hbar*omega (meV) and turned into rad/ps only
// where they meet a scattering time.

namespace cavcond::units {

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Reduced Planck constant, meV*ps.
inline constexpr double hbar = 0.6582119569;

/// hbar^2 / (2 m_e), meV*nm^2.
inline constexpr double hbar2_over_2me = 38.0998;

/// e^2 / (4 pi eps0), meV*nm.
inline constexpr double coulomb = 1439.96;

/// e^2 / hbar in siemens.
inline constexpr double e2_over_hbar_siemens = 2.434134807e-4;

/// 1 cm^-2 expressed in nm^-2.
inline constexpr double per_cm2_in_per_nm2 = 1.0e-14;

/// hbar^2 / m for an effective mass given in units of m_e (meV*nm^2).
constexpr double hbar2_over_m(double m_star) { return 2.0 * hbar2_over_2me / m_star; }

/// Product tau*omega for a time in ps and a frequency stored as hbar*omega in meV.
constexpr double tau_omega(double tau_ps, double hw_meV) { return tau_ps * hw_meV / hbar; }

} // namespace cavcond::units
