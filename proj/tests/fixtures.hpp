#pragma once

// Shared configurations for the test suites: the single 5 nm / 100 meV well in a
// 20 nm spacer with E_F pinned at E_2 ("config 1") or E_4 ("config 2").

#include "cavcond/couplings.hpp"
#include "cavcond/occupancy.hpp"
#include "cavcond/schrodinger.hpp"

namespace fixtures {

struct System {
    cavcond::SubbandBasis basis;
    cavcond::SubbandPopulations populations;
    cavcond::TransitionCatalog catalog;
};

inline System make_system(const cavcond::StructureSpec& spec, double length, std::size_t n_points,
                          std::size_t n_subbands, const cavcond::OccupancySpec& occ, double eps_r = 13.0) {
    using namespace cavcond;
    auto profile = build_potential(spec, Grid(n_points, length));
    auto basis = solve_subbands(profile, 0.067, n_subbands);
    auto pops = fermi_level(basis, occ, profile.barrier_level());
    Geometry geo{length, occ.surface_nm2, eps_r, 0.067};
    auto catalog = build_catalog(basis, pops, enumerate_transitions(pops, basis), geo);
    return {std::move(basis), std::move(pops), std::move(catalog)};
}

inline cavcond::StructureSpec reference_well() { return {{{0.0, 5.0, 100.0}}, 100.0}; }

inline cavcond::OccupancySpec pinned(std::size_t j) {
    cavcond::OccupancySpec occ;
    occ.mode = cavcond::OccupancySpec::Mode::pinned_level;
    occ.j_pin = j;
    return occ;
}

inline const System& config1() {
    static const System s = make_system(reference_well(), 20.0, 1024, 40, pinned(2));
    return s;
}

inline const System& config2() {
    static const System s = make_system(reference_well(), 20.0, 1024, 40, pinned(4));
    return s;
}

} // namespace fixtures
