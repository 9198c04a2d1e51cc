#include "cavcond/occupancy.hpp"

#include <cmath>
#include <numeric>

#include "cavcond/errors.hpp"
#include "cavcond/units.hpp"

namespace cavcond {

double SubbandPopulations::n_e_per_cm2() const noexcept { return n_e / units::per_cm2_in_per_nm2; }

double density_of_states(double m_star, double spin_degeneracy) {
    // g_s m / (2 pi hbar^2)
    return spin_degeneracy / (2.0 * units::pi * units::hbar2_over_m(m_star));
}

std::size_t first_delocalized(const SubbandBasis& basis, double barrier_level) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (basis.energies[j] > barrier_level) return j;
    }
    throw ConfigError("occupancy/mode", "no computed subband lies above the barrier; increase n_subbands");
}

namespace {

double solve_density_mode(const std::vector<double>& e, double n_e, double dos) {
    // n_e = dos * sum_{j<k} (E_F - E_j) on the segment where exactly k subbands are filled.
    double partial = 0.0;
    for (std::size_t k = 1; k <= e.size(); ++k) {
        partial += e[k - 1];
        const double ef = (n_e / dos + partial) / static_cast<double>(k);
        if (k == e.size()) break;
        const double next = e[k];
        const double slack = 1e-12 * std::max(1.0, std::abs(next));
        if (ef <= next + slack) return std::abs(ef - next) <= slack ? next : ef;
    }
    throw ConfigError("occupancy/n_e_per_cm2", "Fermi level lies above the highest computed subband; increase n_subbands");
}

} // namespace

SubbandPopulations fermi_level(const SubbandBasis& basis, const OccupancySpec& spec, double barrier_level) {
    if (basis.size() == 0) throw ConfigError("n_subbands", "empty subband basis");
    if (!(spec.surface_nm2 > 0.0)) throw ConfigError("structure/surface_nm2", "surface must be positive");
    if (!(spec.spin_degeneracy > 0.0)) throw ConfigError("occupancy/spin_degeneracy", "must be positive");
    const double dos = density_of_states(basis.m_star, spec.spin_degeneracy);
    const auto& e = basis.energies;

    double ef = 0.0;
    switch (spec.mode) {
    case OccupancySpec::Mode::areal_density:
        if (!(spec.n_e_per_cm2 > 0.0)) throw ConfigError("occupancy/n_e_per_cm2", "density must be positive");
        ef = solve_density_mode(e, spec.n_e_per_cm2 * units::per_cm2_in_per_nm2, dos);
        break;
    case OccupancySpec::Mode::pinned_level:
        if (spec.j_pin < 2 || spec.j_pin > e.size()) {
            throw ConfigError("occupancy/j_pin", "pinned subband must satisfy 2 <= j_pin <= n_subbands");
        }
        ef = e[spec.j_pin - 1];
        break;
    case OccupancySpec::Mode::first_delocalized: {
        const std::size_t j = first_delocalized(basis, barrier_level);
        if (j == 0) throw ConfigError("occupancy/mode", "no confined subband below the barrier");
        ef = e[j];
        break;
    }
    }
    if (ef >= e.back() && spec.mode == OccupancySpec::Mode::areal_density) {
        throw ConfigError("occupancy", "Fermi level reaches the highest computed subband; increase n_subbands");
    }

    SubbandPopulations out;
    out.fermi_meV = ef;
    out.surface_nm2 = spec.surface_nm2;
    out.densities.assign(e.size(), 0.0);
    for (std::size_t j = 0; j < e.size(); ++j) {
        if (e[j] < ef) out.densities[j] = dos * (ef - e[j]);
    }
    if (spec.cluster_tol_meV > 0.0) {
        for (std::size_t first = 0; first < e.size();) {
            std::size_t last = first + 1;
            while (last < e.size() && e[last] - e[last - 1] < spec.cluster_tol_meV) ++last;
            const double mean = std::accumulate(out.densities.begin() + static_cast<std::ptrdiff_t>(first),
                                                out.densities.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
                                static_cast<double>(last - first);
            for (std::size_t j = first; j < last; ++j) out.densities[j] = mean;
            first = last;
        }
    }
    out.numbers.resize(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) {
        out.numbers[j] = out.densities[j] * spec.surface_nm2;
        if (out.densities[j] > 0.0) out.occupied = j + 1;
    }
    out.n_e = std::accumulate(out.densities.begin(), out.densities.end(), 0.0);
    return out;
}

std::vector<Transition> enumerate_transitions(const SubbandPopulations& populations, const SubbandBasis& basis,
                                              double threshold) {
    std::vector<Transition> out;
    if (populations.occupied == 0) return out;
    const double cut = threshold * populations.numbers.front();
    for (std::size_t j = 0; j < populations.occupied; ++j) {
        for (std::size_t l = j + 1; l < basis.size(); ++l) {
            const double n_nu = populations.numbers[j] - populations.numbers[l];
            if (n_nu > cut) out.push_back({{l, j}, basis.energies[l] - basis.energies[j], n_nu});
        }
    }
    return out;
}

} // namespace cavcond
