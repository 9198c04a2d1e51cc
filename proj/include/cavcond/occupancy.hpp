#pragma once

#include <cstddef>
#include <vector>

#include "cavcond/schrodinger.hpp"

namespace cavcond {

/// How the zero-temperature Fermi level is fixed.
struct OccupancySpec {
    enum class Mode {
        areal_density,     ///< n_e given, E_F solved for
        pinned_level,      ///< E_F = E_{j_pin}
        first_delocalized, ///< E_F = first subband above the barrier
    };

    Mode mode = Mode::areal_density;
    double n_e_per_cm2 = 0.0;
    std::size_t j_pin = 2;           ///< 1-based subband label
    double surface_nm2 = 1.0e6;
    double spin_degeneracy = 1.0;
    /// Consecutive subbands closer than this share one population (tunnel-split
    /// copies of a level in uncoupled wells). 0 disables grouping.
    double cluster_tol_meV = 0.0;

    bool operator==(const OccupancySpec&) const = default;
};

struct SubbandPopulations {
    double fermi_meV = 0.0;
    std::size_t occupied = 0;        ///< j_F: number of subbands below E_F
    std::vector<double> numbers;     ///< N_j, electrons per subband in the area S
    std::vector<double> densities;   ///< n_j = N_j / S, nm^-2
    double n_e = 0.0;                ///< total areal density, nm^-2
    double surface_nm2 = 0.0;

    double total_electrons() const noexcept { return n_e * surface_nm2; }
    double n_e_per_cm2() const noexcept;
};

/// 2D density of states per subband, nm^-2 meV^-1.
double density_of_states(double m_star, double spin_degeneracy);

/// Index of the first subband lying above the structure's barrier level.
std::size_t first_delocalized(const SubbandBasis& basis, double barrier_level);

SubbandPopulations fermi_level(const SubbandBasis& basis, const OccupancySpec& spec, double barrier_level = 0.0);

/// Ordered pair (upper l, lower j), 0-based subband indices.
struct TransitionIndex {
    std::size_t upper = 0;
    std::size_t lower = 0;

    bool operator==(const TransitionIndex&) const = default;
};

struct Transition {
    TransitionIndex index;
    double hw_meV = 0.0;  ///< E_l - E_j
    double N_nu = 0.0;    ///< N_j - N_l
};

inline constexpr double default_population_threshold = 1e-9;

/// All pairs with j occupied, l > j and N_j - N_l above threshold * N_1.
std::vector<Transition> enumerate_transitions(const SubbandPopulations& populations, const SubbandBasis& basis,
                                              double threshold = default_population_threshold);

} // namespace cavcond
