#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cavcond/config.hpp"
#include "cavcond/conductance.hpp"
#include "cavcond/couplings.hpp"
#include "cavcond/occupancy.hpp"
#include "cavcond/schrodinger.hpp"

namespace cavcond {

/// Everything that does not depend on the cavity frequency.
struct PreparedSystem {
    PotentialProfile potential;
    SubbandBasis basis;
    SubbandPopulations populations;
    TransitionCatalog catalog;     ///< coupling switches already applied
    double hw_ref = 0.0;           ///< first delocalized minus ground subband, meV
    std::size_t dominant = 0;      ///< catalog index used by the two-subband overlay
};

PreparedSystem prepare_system(const RunConfig& config);

/// Same config with the structure replaced by the multiwell builder for n wells.
RunConfig multiwell_config(const RunConfig& config, std::size_t n_qw);

struct BranchSummary {
    double hw_meV = 0.0;
    double W_e = 0.0;
    double tau_ps = 0.0;
};

struct PointResult {
    double omega_c_over_ref = 0.0;
    double hw_c = 0.0;
    double G = 0.0;            ///< S, NaN when the point failed
    double G_NI = 0.0;         ///< S
    double G_over_G0 = 0.0;
    double G_2sb = 0.0;        ///< S
    double G_2sb_over_G0 = 0.0;
    std::size_t n_branches = 0;
    double min_We = 0.0;
    bool failed = false;       ///< no usable full-model result
    bool flagged = false;      ///< failed, or sign of G differs from G_NI
    std::string diagnostic;
    std::vector<BranchSummary> branches;  ///< kept for the spectrum verb
};

struct SystemSummary {
    double length_nm = 0.0;
    std::size_t n_points = 0;
    std::size_t n_subbands = 0;
    double fermi_meV = 0.0;
    double n_e_per_cm2 = 0.0;
    std::size_t occupied = 0;
    std::size_t n_transitions = 0;
    double hw_ref = 0.0;
    TransitionIndex dominant;      ///< 0-based
    double dominant_hw = 0.0;
    double dominant_rabi_ratio = 0.0;
    double dominant_xi_ratio = 0.0;
    double G_NI = 0.0;
};

/// One G(omega_c) curve; `parameter` is tau0 (ps) or n_qw depending on the verb.
struct Curve {
    double parameter = 0.0;
    SystemSummary system;
    double tau0_ps = 0.0;
    double G0 = 0.0;       ///< full model at omega_c = 0
    double G0_2sb = 0.0;   ///< two-subband model at omega_c = 0
    std::vector<PointResult> points;
};

struct ConvergenceRow {
    std::size_t n_subbands = 0;
    double G = 0.0;
    double G_NI = 0.0;
    double G_over_G0 = 0.0;
    double rel_change = 0.0;  ///< vs the previous row, NaN for the first
    bool failed = false;
    std::string diagnostic;
};

struct RunReport {
    std::string verb;
    RunConfig config;
    std::vector<Curve> curves;
    std::vector<ConvergenceRow> convergence;
    std::optional<std::size_t> converged_at;  ///< smallest count whose next step changes G by < tolerance
    std::size_t total_points = 0;
    std::size_t failed_points = 0;
    double wall_seconds = 0.0;

    /// 0 success (possibly with flagged rows), 3 when every point failed.
    int exit_code() const;
};

/// Worker count from CAVCOND_WORKERS, else the hardware concurrency.
std::size_t default_workers();

/// Evaluates one cavity energy; never throws for numerical failures (the row is flagged).
PointResult evaluate_point(const PreparedSystem& system, double omega_c_over_ref, double tau0_ps, double tau_p_ps,
                           bool keep_branches);

RunReport run_cavity_sweep(const RunConfig& config, std::size_t workers, bool keep_branches = false);
RunReport run_tau_sweep(const RunConfig& config, std::size_t workers);
RunReport run_multiwell(const RunConfig& config, std::size_t workers);
RunReport run_convergence(const RunConfig& config, std::size_t workers);

// Writers. CSV output depends only on the config, never on timing or worker count.
std::string cavity_csv(const RunReport& report);
std::string spectrum_csv(const RunReport& report);
std::string convergence_csv(const RunReport& report);
std::string basis_csv(const PreparedSystem& system);
std::string catalog_csv(const PreparedSystem& system);
std::string report_json(const RunReport& report);

} // namespace cavcond
