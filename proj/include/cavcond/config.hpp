#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cavcond/occupancy.hpp"
#include "cavcond/schrodinger.hpp"

namespace cavcond {

/// A list of sample values, given either explicitly or as from/to/count.
struct SampleGrid {
    enum class Scale { linear, log };

    std::vector<double> explicit_values;  ///< used when non-empty
    double from = 0.0;
    double to = 0.0;
    std::size_t count = 0;
    Scale scale = Scale::linear;

    std::vector<double> values() const;
    bool operator==(const SampleGrid&) const = default;
};

enum class SweepVariable { omega_c, tau0, n_qw, n_subbands };

struct SweepSpec {
    SweepVariable variable = SweepVariable::omega_c;
    SampleGrid values;

    bool operator==(const SweepSpec&) const = default;
};

/// Builder used by the multiwell verb: n identical wells at a fixed pitch, L_c = n * pitch.
struct MultiwellSpec {
    double pitch_nm = 20.0;
    double width_nm = 5.0;
    double depth_meV = 100.0;
    double cluster_tol_meV = 3.0;

    bool operator==(const MultiwellSpec&) const = default;
};

struct ConvergenceSpec {
    double omega_c_over_ref = 1.0;
    double tolerance = 0.01;

    bool operator==(const ConvergenceSpec&) const = default;
};

/// Full run description. Physical quantities carry their unit in the JSON field name.
struct RunConfig {
    StructureSpec structure{{{0.0, 5.0, 100.0}}, 100.0};
    double length_nm = 20.0;
    double m_star = 0.067;
    double eps_r = 13.0;
    double surface_nm2 = 1.0e6;

    OccupancySpec occupancy;

    std::size_t n_subbands = 40;
    std::size_t n_points = 1024;
    double tau0_ps = 1.0;
    double tau_p_ps = 1.0e6;
    double population_threshold = default_population_threshold;
    bool light_matter = true;
    bool depolarization = true;

    /// Stored 0-based, written 1-based in JSON; empty selects the transition with the largest G_NI term.
    std::optional<TransitionIndex> dominant_transition;

    /// Cavity energies in units of the reference transition (first delocalized minus ground).
    SampleGrid cavity{{}, 0.1, 3.0, 200, SampleGrid::Scale::linear};
    SweepSpec sweep;
    MultiwellSpec multiwell;
    ConvergenceSpec convergence;

    bool operator==(const RunConfig&) const = default;
};

/// Parse and validate a JSON document. Throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON form; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

std::string to_string(SweepVariable v);

} // namespace cavcond
