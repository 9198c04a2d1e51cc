#include "cavcond/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cavcond/errors.hpp"
#include "cavcond/polariton.hpp"

using json = nlohmann::json;

// OpenBLAS spawns its own threads inside LAPACK calls; with one matrix per
// worker that only oversubscribes the machine, so it is pinned to one thread.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace cavcond {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void single_threaded_blas() {
    if (openblas_set_num_threads) openblas_set_num_threads(1);
}

// Runs body(i) for i in [0, n) on up to `workers` threads. Results are written
// by index, so completion order never leaks into the output.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double reference_energy(const SubbandBasis& basis, double barrier_level) {
    std::size_t j = 1;
    try {
        j = std::max<std::size_t>(1, first_delocalized(basis, barrier_level));
    } catch (const ConfigError&) {
        j = 1;
    }
    return basis.energies[j] - basis.energies[0];
}

SystemSummary summarize(const PreparedSystem& s, const RunConfig& c, double tau0_ps) {
    SystemSummary out;
    out.length_nm = s.basis.grid.length();
    out.n_points = s.basis.grid.size();
    out.n_subbands = s.basis.size();
    out.fermi_meV = s.populations.fermi_meV;
    out.n_e_per_cm2 = s.populations.n_e_per_cm2();
    out.occupied = s.populations.occupied;
    out.n_transitions = s.catalog.size();
    out.hw_ref = s.hw_ref;
    if (!s.catalog.empty()) {
        const auto t = single_transition(s.catalog, s.dominant);
        out.dominant = s.catalog[s.dominant].index;
        out.dominant_hw = t.hw_meV;
        out.dominant_rabi_ratio = t.rabi_res_meV / t.hw_meV;
        out.dominant_xi_ratio = t.xi_meV / t.hw_meV;
    }
    out.G_NI = conductance_noninteracting(s.catalog, tau0_ps);
    (void)c;
    return out;
}

Curve run_curve(const PreparedSystem& system, const RunConfig& config, double tau0_ps, double parameter,
                const std::vector<double>& ratios, std::size_t workers, bool keep_branches) {
    Curve curve;
    curve.parameter = parameter;
    curve.tau0_ps = tau0_ps;
    curve.system = summarize(system, config, tau0_ps);

    // Index 0 is the omega_c = 0 normalization point.
    std::vector<PointResult> raw(ratios.size() + 1);
    parallel_for(raw.size(), workers, [&](std::size_t i) {
        raw[i] = evaluate_point(system, i == 0 ? 0.0 : ratios[i - 1], tau0_ps, config.tau_p_ps, keep_branches);
    });
    curve.G0 = raw[0].failed ? nan : raw[0].G;
    curve.G0_2sb = raw[0].G_2sb;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        auto& p = raw[i];
        p.G_over_G0 = p.G / curve.G0;
        p.G_2sb_over_G0 = p.G_2sb / curve.G0_2sb;
        curve.points.push_back(std::move(p));
    }
    return curve;
}

void tally(RunReport& r) {
    r.total_points = 0;
    r.failed_points = 0;
    for (const auto& c : r.curves) {
        for (const auto& p : c.points) {
            ++r.total_points;
            r.failed_points += p.failed;
        }
    }
    for (const auto& row : r.convergence) {
        ++r.total_points;
        r.failed_points += row.failed;
    }
}

// Fixed-precision, locale-independent number formatting.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

int RunReport::exit_code() const { return total_points > 0 && failed_points == total_points ? 3 : 0; }

std::size_t default_workers() {
    if (const char* env = std::getenv("CAVCOND_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

PreparedSystem prepare_system(const RunConfig& config) {
    single_threaded_blas();
    auto potential = build_potential(config.structure, Grid(config.n_points, config.length_nm));
    auto basis = solve_subbands(potential, config.m_star, config.n_subbands);
    OccupancySpec occ = config.occupancy;
    occ.surface_nm2 = config.surface_nm2;
    auto pops = fermi_level(basis, occ, potential.barrier_level());
    const Geometry geo{config.length_nm, config.surface_nm2, config.eps_r, config.m_star};
    auto catalog = build_catalog(basis, pops, enumerate_transitions(pops, basis, config.population_threshold), geo)
                       .with_couplings(config.light_matter, config.depolarization);
    if (catalog.empty()) throw ConfigError("/occupancy", "no allowed transitions: no subband is occupied");

    std::size_t dominant = 0;
    if (config.dominant_transition) {
        const auto i = catalog.find(*config.dominant_transition);
        if (i < 0) throw ConfigError("/dominant_transition", "transition is not in the catalog");
        dominant = static_cast<std::size_t>(i);
    } else {
        dominant = dominant_transition(catalog, config.tau0_ps);
    }
    const double hw_ref = reference_energy(basis, potential.barrier_level());
    return {std::move(potential), std::move(basis), std::move(pops), std::move(catalog), hw_ref, dominant};
}

RunConfig multiwell_config(const RunConfig& config, std::size_t n_qw) {
    if (n_qw == 0) throw ConfigError("/sweep/grid", "well count must be at least 1");
    RunConfig c = config;
    const auto& m = config.multiwell;
    c.structure = periodic_wells(n_qw, m.pitch_nm, m.width_nm, m.depth_meV);
    c.length_nm = static_cast<double>(n_qw) * m.pitch_nm;
    c.occupancy.mode = OccupancySpec::Mode::first_delocalized;
    c.occupancy.cluster_tol_meV = m.cluster_tol_meV;
    return c;
}

PointResult evaluate_point(const PreparedSystem& system, double omega_c_over_ref, double tau0_ps, double tau_p_ps,
                           bool keep_branches) {
    PointResult p;
    p.omega_c_over_ref = omega_c_over_ref;
    p.hw_c = omega_c_over_ref * system.hw_ref;
    const auto& cat = system.catalog;
    p.G_NI = conductance_noninteracting(cat, tau0_ps);
    try {
        const auto sp = solve_polaritons(cat, p.hw_c, tau0_ps, tau_p_ps);
        p.G = conductance_from_modes(interacting_modes(sp, cat), cat);
        p.n_branches = sp.size();
        p.min_We = 1.0;
        for (const auto& b : sp.branches) {
            p.min_We = std::min(p.min_We, b.W_e);
            if (keep_branches) p.branches.push_back({b.hw_meV, b.W_e, b.tau_ps});
        }
        if (p.G * p.G_NI < 0.0) {
            p.flagged = true;
            p.diagnostic = "sign of G differs from G_NI";
        }
    } catch (const NumericalError& e) {
        p.G = nan;
        p.min_We = nan;
        p.failed = p.flagged = true;
        p.diagnostic = e.what();
    }
    try {
        p.G_2sb = two_subband_conductance(cat, system.dominant, p.hw_c, tau0_ps, tau_p_ps);
    } catch (const NumericalError& e) {
        p.G_2sb = nan;
        if (p.diagnostic.empty()) p.diagnostic = std::string("two-subband: ") + e.what();
    }
    return p;
}

RunReport run_cavity_sweep(const RunConfig& config, std::size_t workers, bool keep_branches) {
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    r.verb = keep_branches ? "spectrum" : "sweep-cavity";
    r.config = config;
    const auto system = prepare_system(config);
    r.curves.push_back(run_curve(system, config, config.tau0_ps, config.tau0_ps, config.cavity.values(), workers,
                                 keep_branches));
    tally(r);
    r.wall_seconds = elapsed(start);
    return r;
}

RunReport run_tau_sweep(const RunConfig& config, std::size_t workers) {
    if (config.sweep.variable != SweepVariable::tau0) throw ConfigError("/sweep/variable", "sweep-tau needs \"tau0\"");
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    r.verb = "sweep-tau";
    r.config = config;
    const auto system = prepare_system(config);
    for (double tau : config.sweep.values.values()) {
        r.curves.push_back(run_curve(system, config, tau, tau, config.cavity.values(), workers, false));
    }
    tally(r);
    r.wall_seconds = elapsed(start);
    return r;
}

RunReport run_multiwell(const RunConfig& config, std::size_t workers) {
    if (config.sweep.variable != SweepVariable::n_qw) throw ConfigError("/sweep/variable", "multiwell needs \"n_qw\"");
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    r.verb = "multiwell";
    r.config = config;
    for (double n : config.sweep.values.values()) {
        const auto n_qw = static_cast<std::size_t>(n);
        const auto c = multiwell_config(config, n_qw);
        const auto system = prepare_system(c);
        r.curves.push_back(run_curve(system, c, c.tau0_ps, n, c.cavity.values(), workers, false));
    }
    tally(r);
    r.wall_seconds = elapsed(start);
    return r;
}

RunReport run_convergence(const RunConfig& config, std::size_t workers) {
    if (config.sweep.variable != SweepVariable::n_subbands) {
        throw ConfigError("/sweep/variable", "converge needs \"n_subbands\"");
    }
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    r.verb = "converge";
    r.config = config;
    auto counts = config.sweep.values.values();
    if (!std::is_sorted(counts.begin(), counts.end())) {
        throw ConfigError("/sweep/grid", "subband counts must be ascending");
    }
    r.convergence.resize(counts.size());
    parallel_for(counts.size(), workers, [&](std::size_t i) {
        RunConfig c = config;
        c.n_subbands = static_cast<std::size_t>(counts[i]);
        auto& row = r.convergence[i];
        row.n_subbands = c.n_subbands;
        try {
            const auto system = prepare_system(c);
            const auto p = evaluate_point(system, config.convergence.omega_c_over_ref, c.tau0_ps, c.tau_p_ps, false);
            const auto p0 = evaluate_point(system, 0.0, c.tau0_ps, c.tau_p_ps, false);
            row.G = p.G;
            row.G_NI = p.G_NI;
            row.G_over_G0 = p.G / p0.G;
            row.failed = p.failed;
            row.diagnostic = p.diagnostic;
        } catch (const Error& e) {
            row.G = row.G_NI = row.G_over_G0 = nan;
            row.failed = true;
            row.diagnostic = e.what();
        }
    });
    for (std::size_t i = 0; i < counts.size(); ++i) {
        auto& row = r.convergence[i];
        row.rel_change = i == 0 ? nan : std::abs(row.G - r.convergence[i - 1].G) / std::abs(row.G);
        // The lower count of the first pair that agrees within tolerance.
        if (!r.converged_at && row.rel_change < config.convergence.tolerance) {
            r.converged_at = r.convergence[i - 1].n_subbands;
        }
    }
    tally(r);
    r.wall_seconds = elapsed(start);
    return r;
}

std::string cavity_csv(const RunReport& r) {
    std::ostringstream out;
    std::string prefix;
    if (r.verb == "sweep-tau") prefix = "tau0_ps,";
    if (r.verb == "multiwell") prefix = "n_qw,";
    out << prefix << "omega_c_over_w21,G_S,G_NI_S,G_over_G0,G_2sb_over_G0,n_branches,min_We,flagged";
    if (r.verb == "sweep-tau") out << ",log10_G_over_G0";
    out << '\n';
    for (const auto& c : r.curves) {
        for (const auto& p : c.points) {
            if (!prefix.empty()) out << num(c.parameter) << ',';
            out << num(p.omega_c_over_ref) << ',' << num(p.G) << ',' << num(p.G_NI) << ',' << num(p.G_over_G0) << ','
                << num(p.G_2sb_over_G0) << ',' << p.n_branches << ',' << num(p.min_We) << ',' << (p.flagged ? 1 : 0);
            if (r.verb == "sweep-tau") out << ',' << num(p.G_over_G0 > 0.0 ? std::log10(p.G_over_G0) : nan);
            out << '\n';
        }
    }
    return out.str();
}

std::string spectrum_csv(const RunReport& r) {
    std::ostringstream out;
    out << "omega_c_meV,branch,omega_I_meV,W_e,tau_ps\n";
    for (const auto& c : r.curves) {
        for (const auto& p : c.points) {
            for (std::size_t b = 0; b < p.branches.size(); ++b) {
                const auto& br = p.branches[b];
                out << num(p.hw_c) << ',' << b << ',' << num(br.hw_meV) << ',' << num(br.W_e) << ','
                    << num(br.tau_ps) << '\n';
            }
        }
    }
    return out.str();
}

std::string convergence_csv(const RunReport& r) {
    std::ostringstream out;
    out << "n_subbands,G_S,G_NI_S,G_over_G0,rel_change,flagged\n";
    for (const auto& row : r.convergence) {
        out << row.n_subbands << ',' << num(row.G) << ',' << num(row.G_NI) << ',' << num(row.G_over_G0) << ','
            << num(row.rel_change) << ',' << (row.failed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string basis_csv(const PreparedSystem& s) {
    std::ostringstream out;
    out << "z_nm,V_meV";
    for (std::size_t j = 0; j < s.basis.size(); ++j) out << ",phi_" << j + 1;
    out << '\n';
    for (std::size_t k = 0; k < s.basis.grid.size(); ++k) {
        out << num(s.basis.grid.z(k)) << ',' << num(s.potential.values[k]);
        for (std::size_t j = 0; j < s.basis.size(); ++j) out << ',' << num(s.basis.phi(j)[k]);
        out << '\n';
    }
    return out.str();
}

std::string catalog_csv(const PreparedSystem& s) {
    std::ostringstream out;
    out << "l,j,hw_meV,N_nu,Omega_res_meV,Xi_diag_meV\n";
    const auto& cat = s.catalog;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out << cat[i].index.upper + 1 << ',' << cat[i].index.lower + 1 << ',' << num(cat[i].hw_meV) << ','
            << num(cat[i].N_nu) << ',' << num(cat.rabi(i, cat[i].hw_meV)) << ','
            << num(cat.depolarization()(k, k)) << '\n';
    }
    return out.str();
}

std::string report_json(const RunReport& r) {
    json doc;
    doc["verb"] = r.verb;
    doc["config"] = json::parse(emit_config(r.config));
    doc["total_points"] = r.total_points;
    doc["failed_points"] = r.failed_points;
    doc["wall_seconds"] = r.wall_seconds;
    json curves = json::array();
    for (const auto& c : r.curves) {
        const auto& s = c.system;
        json sys{{"L_c_nm", s.length_nm},
                 {"n_points", s.n_points},
                 {"n_subbands", s.n_subbands},
                 {"fermi_meV", s.fermi_meV},
                 {"n_e_per_cm2", s.n_e_per_cm2},
                 {"occupied_subbands", s.occupied},
                 {"n_transitions", s.n_transitions},
                 {"hw_ref_meV", s.hw_ref},
                 {"dominant_transition", {s.dominant.upper + 1, s.dominant.lower + 1}},
                 {"dominant_hw_meV", s.dominant_hw},
                 {"dominant_Omega_res_over_w", s.dominant_rabi_ratio},
                 {"dominant_Xi_over_w", s.dominant_xi_ratio},
                 {"G_NI_S", number_or_null(s.G_NI)}};
        json points = json::array();
        for (const auto& p : c.points) {
            json pj{{"omega_c_over_ref", p.omega_c_over_ref},
                    {"hw_c_meV", p.hw_c},
                    {"G_S", number_or_null(p.G)},
                    {"G_over_G0", number_or_null(p.G_over_G0)},
                    {"G_2sb_over_G0", number_or_null(p.G_2sb_over_G0)},
                    {"n_branches", p.n_branches},
                    {"min_We", number_or_null(p.min_We)},
                    {"flagged", p.flagged}};
            if (!p.diagnostic.empty()) pj["diagnostic"] = p.diagnostic;
            points.push_back(std::move(pj));
        }
        curves.push_back({{"parameter", c.parameter},
                          {"tau0_ps", c.tau0_ps},
                          {"G0_S", number_or_null(c.G0)},
                          {"system", sys},
                          {"points", points}});
    }
    doc["curves"] = curves;
    if (!r.convergence.empty()) {
        json rows = json::array();
        for (const auto& row : r.convergence) {
            json rj{{"n_subbands", row.n_subbands},
                    {"G_S", number_or_null(row.G)},
                    {"G_over_G0", number_or_null(row.G_over_G0)},
                    {"rel_change", number_or_null(row.rel_change)}};
            if (!row.diagnostic.empty()) rj["diagnostic"] = row.diagnostic;
            rows.push_back(std::move(rj));
        }
        doc["convergence"] = rows;
        doc["converged_at"] = r.converged_at ? json(*r.converged_at) : json(nullptr);
    }
    return doc.dump(2) + "\n";
}

} // namespace cavcond
