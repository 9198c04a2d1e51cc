#include "cavcond/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cavcond/errors.hpp"

namespace cavcond {

using nlohmann::json;

std::vector<double> SampleGrid::values() const {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        out[k] = scale == Scale::linear ? from + t * (to - from) : from * std::pow(to / from, t);
    }
    if (count > 1) out.back() = to;
    return out;
}

std::string to_string(SweepVariable v) {
    switch (v) {
    case SweepVariable::omega_c: return "omega_c";
    case SweepVariable::tau0: return "tau0";
    case SweepVariable::n_qw: return "n_qw";
    case SweepVariable::n_subbands: return "n_subbands";
    }
    return "omega_c";
}

namespace {

// Walks a JSON object, tracking the field path and rejecting unknown keys.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    }
    ~Reader() = default;
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    std::string field(const std::string& key) const { return path_ + "/" + key; }
    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key)) throw ConfigError(field(key), "missing required field");
        return node_.at(key);
    }

    double number(const std::string& key, double fallback) { return has(key) ? number_at(key) : fallback; }

    double number_at(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
        return d;
    }

    double positive(const std::string& key, double fallback) {
        const double d = number(key, fallback);
        if (!(d > 0.0)) throw ConfigError(field(key), "must be positive");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(field(key), "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

SampleGrid read_grid(const json& node, const std::string& path, bool integers) {
    Reader r(node, path);
    SampleGrid g;
    if (r.has("values")) {
        const json& vals = r.at("values");
        if (!vals.is_array() || vals.empty()) throw ConfigError(r.field("values"), "expected a non-empty array");
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const std::string f = r.field("values") + "/" + std::to_string(k);
            if (!vals[k].is_number()) throw ConfigError(f, "expected a number");
            if (integers && !vals[k].is_number_integer()) throw ConfigError(f, "expected an integer");
            const double d = vals[k].get<double>();
            if (!std::isfinite(d) || !(d > 0.0)) throw ConfigError(f, "sweep values must be positive and finite");
            g.explicit_values.push_back(d);
        }
        if (r.has("from") || r.has("to") || r.has("count") || r.has("scale")) {
            throw ConfigError(path, "give either values or from/to/count, not both");
        }
    } else {
        g.from = r.positive("from", 0.0);
        g.to = r.positive("to", 0.0);
        g.count = r.count("count", 0);
        if (g.count == 0) throw ConfigError(r.field("count"), "must be at least 1");
        const std::string scale = r.text("scale", "linear");
        if (scale == "linear") g.scale = SampleGrid::Scale::linear;
        else if (scale == "log") g.scale = SampleGrid::Scale::log;
        else throw ConfigError(r.field("scale"), "expected \"linear\" or \"log\"");
        if (integers) throw ConfigError(path, "integer sweeps must list explicit values");
    }
    r.finish();
    return g;
}

json write_grid(const SampleGrid& g) {
    if (!g.explicit_values.empty()) return json{{"values", g.explicit_values}};
    return json{{"from", g.from},
                {"to", g.to},
                {"count", g.count},
                {"scale", g.scale == SampleGrid::Scale::linear ? "linear" : "log"}};
}

std::string mode_name(OccupancySpec::Mode m) {
    switch (m) {
    case OccupancySpec::Mode::areal_density: return "areal_density";
    case OccupancySpec::Mode::pinned_level: return "pinned_level";
    case OccupancySpec::Mode::first_delocalized: return "first_delocalized";
    }
    return "areal_density";
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("malformed JSON: ") + e.what());
    }
    RunConfig c;
    Reader top(doc, "");

    if (top.has("structure")) {
        Reader s(top.at("structure"), "/structure");
        const json& wells = s.at("wells");
        if (!wells.is_array()) throw ConfigError("/structure/wells", "expected an array");
        c.structure.wells.clear();
        for (std::size_t k = 0; k < wells.size(); ++k) {
            Reader w(wells[k], "/structure/wells/" + std::to_string(k));
            WellSegment seg;
            seg.center_nm = w.number_at("center_nm");
            seg.width_nm = w.number_at("width_nm");
            seg.depth_meV = w.number_at("depth_meV");
            w.finish();
            c.structure.wells.push_back(seg);
        }
        c.structure.barrier_meV = s.number("barrier_meV", 0.0);
        c.length_nm = s.positive("L_c_nm", c.length_nm);
        c.m_star = s.positive("m_star", c.m_star);
        c.eps_r = s.positive("eps_r", c.eps_r);
        c.surface_nm2 = s.positive("surface_nm2", c.surface_nm2);
        s.finish();
    }
    if (top.has("occupancy")) {
        Reader o(top.at("occupancy"), "/occupancy");
        const std::string mode = o.text("mode", "areal_density");
        if (mode == "areal_density") c.occupancy.mode = OccupancySpec::Mode::areal_density;
        else if (mode == "pinned_level") c.occupancy.mode = OccupancySpec::Mode::pinned_level;
        else if (mode == "first_delocalized") c.occupancy.mode = OccupancySpec::Mode::first_delocalized;
        else throw ConfigError("/occupancy/mode", "expected areal_density, pinned_level or first_delocalized");
        c.occupancy.n_e_per_cm2 = o.number("n_e_per_cm2", 0.0);
        c.occupancy.j_pin = o.count("j_pin", c.occupancy.j_pin);
        c.occupancy.spin_degeneracy = o.positive("spin_degeneracy", c.occupancy.spin_degeneracy);
        c.occupancy.cluster_tol_meV = o.number("cluster_tol_meV", 0.0);
        if (c.occupancy.cluster_tol_meV < 0.0) throw ConfigError("/occupancy/cluster_tol_meV", "must be >= 0");
        o.finish();
    }
    c.occupancy.surface_nm2 = c.surface_nm2;
    if (c.occupancy.mode == OccupancySpec::Mode::areal_density && !(c.occupancy.n_e_per_cm2 > 0.0)) {
        throw ConfigError("/occupancy/n_e_per_cm2", "must be positive in areal_density mode");
    }

    if (top.has("solver")) {
        Reader s(top.at("solver"), "/solver");
        c.n_subbands = s.count("n_subbands", c.n_subbands);
        c.n_points = s.count("n_points", c.n_points);
        c.population_threshold = s.number("population_threshold", c.population_threshold);
        if (c.population_threshold < 0.0) throw ConfigError("/solver/population_threshold", "must be >= 0");
        s.finish();
    }
    if (c.n_points < Grid::min_points) {
        throw ConfigError("/solver/n_points", "must be at least " + std::to_string(Grid::min_points));
    }
    if (c.n_subbands < 2) throw ConfigError("/solver/n_subbands", "must be at least 2");
    if (c.n_subbands > c.n_points) throw ConfigError("/solver/n_subbands", "must not exceed n_points");

    c.tau0_ps = top.positive("tau0_ps", c.tau0_ps);
    c.tau_p_ps = top.positive("tau_p_ps", c.tau_p_ps);

    if (top.has("couplings")) {
        Reader k(top.at("couplings"), "/couplings");
        c.light_matter = k.boolean("light_matter", true);
        c.depolarization = k.boolean("depolarization", true);
        k.finish();
    }

    if (top.has("dominant_transition")) {
        const json& d = top.at("dominant_transition");
        if (d.is_string() && d.get<std::string>() == "auto") {
            c.dominant_transition.reset();
        } else if (d.is_array() && d.size() == 2 && d[0].is_number_integer() && d[1].is_number_integer() &&
                   d[0].get<long long>() > d[1].get<long long>() && d[1].get<long long>() >= 1) {
            c.dominant_transition = TransitionIndex{d[0].get<std::size_t>() - 1, d[1].get<std::size_t>() - 1};
        } else {
            throw ConfigError("/dominant_transition", "expected \"auto\" or [l, j] with l > j >= 1");
        }
    }

    if (top.has("cavity")) c.cavity = read_grid(top.at("cavity"), "/cavity", false);

    if (top.has("sweep")) {
        Reader s(top.at("sweep"), "/sweep");
        const std::string var = s.text("variable", "omega_c");
        if (var == "omega_c") c.sweep.variable = SweepVariable::omega_c;
        else if (var == "tau0") c.sweep.variable = SweepVariable::tau0;
        else if (var == "n_qw") c.sweep.variable = SweepVariable::n_qw;
        else if (var == "n_subbands") c.sweep.variable = SweepVariable::n_subbands;
        else throw ConfigError("/sweep/variable", "expected omega_c, tau0, n_qw or n_subbands");
        const bool integers = c.sweep.variable == SweepVariable::n_qw || c.sweep.variable == SweepVariable::n_subbands;
        if (c.sweep.variable != SweepVariable::omega_c || s.has("grid")) {
            c.sweep.values = read_grid(s.at("grid"), "/sweep/grid", integers);
        }
        s.finish();
        if (c.sweep.variable == SweepVariable::n_subbands) {
            for (double v : c.sweep.values.values()) {
                if (v < 2 || v > static_cast<double>(c.n_points)) {
                    throw ConfigError("/sweep/grid", "subband counts must lie in [2, n_points]");
                }
            }
        }
    }

    if (top.has("multiwell")) {
        Reader m(top.at("multiwell"), "/multiwell");
        c.multiwell.pitch_nm = m.positive("pitch_nm", c.multiwell.pitch_nm);
        c.multiwell.width_nm = m.positive("width_nm", c.multiwell.width_nm);
        c.multiwell.depth_meV = m.positive("depth_meV", c.multiwell.depth_meV);
        c.multiwell.cluster_tol_meV = m.number("cluster_tol_meV", c.multiwell.cluster_tol_meV);
        if (c.multiwell.cluster_tol_meV < 0.0) throw ConfigError("/multiwell/cluster_tol_meV", "must be >= 0");
        if (c.multiwell.width_nm >= c.multiwell.pitch_nm) {
            throw ConfigError("/multiwell/width_nm", "wells must be narrower than the pitch");
        }
        m.finish();
    }
    if (top.has("convergence")) {
        Reader v(top.at("convergence"), "/convergence");
        c.convergence.omega_c_over_ref = v.positive("omega_c_over_ref", c.convergence.omega_c_over_ref);
        c.convergence.tolerance = v.positive("tolerance", c.convergence.tolerance);
        v.finish();
    }
    top.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
    json wells = json::array();
    for (const auto& w : c.structure.wells) {
        wells.push_back({{"center_nm", w.center_nm}, {"width_nm", w.width_nm}, {"depth_meV", w.depth_meV}});
    }
    json doc;
    doc["structure"] = {{"wells", wells},        {"barrier_meV", c.structure.barrier_meV},
                        {"L_c_nm", c.length_nm}, {"m_star", c.m_star},
                        {"eps_r", c.eps_r},      {"surface_nm2", c.surface_nm2}};
    doc["occupancy"] = {{"mode", mode_name(c.occupancy.mode)},
                        {"n_e_per_cm2", c.occupancy.n_e_per_cm2},
                        {"j_pin", c.occupancy.j_pin},
                        {"spin_degeneracy", c.occupancy.spin_degeneracy},
                        {"cluster_tol_meV", c.occupancy.cluster_tol_meV}};
    doc["solver"] = {{"n_subbands", c.n_subbands},
                     {"n_points", c.n_points},
                     {"population_threshold", c.population_threshold}};
    doc["tau0_ps"] = c.tau0_ps;
    doc["tau_p_ps"] = c.tau_p_ps;
    doc["couplings"] = {{"light_matter", c.light_matter}, {"depolarization", c.depolarization}};
    if (c.dominant_transition) {
        doc["dominant_transition"] = {c.dominant_transition->upper + 1, c.dominant_transition->lower + 1};
    } else {
        doc["dominant_transition"] = "auto";
    }
    doc["cavity"] = write_grid(c.cavity);
    json sweep{{"variable", to_string(c.sweep.variable)}};
    if (c.sweep.values.count > 0 || !c.sweep.values.explicit_values.empty()) {
        sweep["grid"] = write_grid(c.sweep.values);
    }
    doc["sweep"] = sweep;
    doc["multiwell"] = {{"pitch_nm", c.multiwell.pitch_nm},
                        {"width_nm", c.multiwell.width_nm},
                        {"depth_meV", c.multiwell.depth_meV},
                        {"cluster_tol_meV", c.multiwell.cluster_tol_meV}};
    doc["convergence"] = {{"omega_c_over_ref", c.convergence.omega_c_over_ref},
                          {"tolerance", c.convergence.tolerance}};
    return doc.dump(2);
}

} // namespace cavcond
