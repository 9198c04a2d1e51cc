// Command-line front end for cavity-modified conductance runs.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cavcond/config.hpp"
#include "cavcond/errors.hpp"
#include "cavcond/sweep.hpp"

namespace fs = std::filesystem;
using namespace cavcond;

namespace {

constexpr int exit_config = 2;
constexpr int exit_all_failed = 3;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::size_t workers = 0;
    bool dump_basis = false;
    bool dump_catalog = false;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("--out", "cannot write " + path.string());
    out << text;
    std::cout << "wrote " << path.string() << '\n';
}

void dump_system(const Options& o, const RunConfig& c, const std::string& suffix) {
    if (!o.dump_basis && !o.dump_catalog) return;
    const auto system = prepare_system(c);
    if (o.dump_basis) write_file(fs::path(o.out_dir) / ("basis" + suffix + ".csv"), basis_csv(system));
    if (o.dump_catalog) write_file(fs::path(o.out_dir) / ("catalog" + suffix + ".csv"), catalog_csv(system));
}

void summarize(const RunReport& r) {
    std::cout << r.verb << ": " << r.total_points << " points, " << r.failed_points << " failed";
    std::size_t flagged = 0;
    for (const auto& c : r.curves) {
        for (const auto& p : c.points) flagged += p.flagged && !p.failed;
    }
    if (flagged) std::cout << ", " << flagged << " flagged";
    if (!r.convergence.empty()) {
        std::cout << ", converged at ";
        if (r.converged_at) std::cout << *r.converged_at << " subbands";
        else std::cout << "none";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", r.wall_seconds);
    std::cout << " (" << buf << " s)\n";
}

int run(const std::string& verb, const Options& o) {
    const auto config = load_config(o.config_path);
    fs::create_directories(o.out_dir);
    const fs::path out(o.out_dir);
    const std::size_t workers = o.workers > 0 ? o.workers : default_workers();

    RunReport report;
    if (verb == "spectrum" || verb == "sweep-cavity") {
        dump_system(o, config, "");
        report = run_cavity_sweep(config, workers, verb == "spectrum");
        write_file(out / "cavity.csv", cavity_csv(report));
        if (verb == "spectrum") write_file(out / "spectrum.csv", spectrum_csv(report));
    } else if (verb == "sweep-tau") {
        dump_system(o, config, "");
        report = run_tau_sweep(config, workers);
        write_file(out / "tau.csv", cavity_csv(report));
    } else if (verb == "multiwell") {
        report = run_multiwell(config, workers);
        for (const auto& c : report.curves) {
            const auto n = static_cast<std::size_t>(c.parameter);
            dump_system(o, multiwell_config(config, n), "_nqw" + std::to_string(n));
        }
        write_file(out / "multiwell.csv", cavity_csv(report));
    } else {
        dump_system(o, config, "");
        report = run_convergence(config, workers);
        write_file(out / "convergence.csv", convergence_csv(report));
    }
    write_file(out / "report.json", report_json(report));
    summarize(report);
    return report.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dark conductance of a heterostructure in a single-mode cavity"};
    app.require_subcommand(1);

    Options opts;
    const char* verbs[][2] = {
        {"spectrum", "cavity sweep that also writes every polariton branch"},
        {"sweep-cavity", "conductance versus cavity energy"},
        {"sweep-tau", "one cavity sweep per electronic scattering time"},
        {"multiwell", "normalized cavity sweeps for a list of well counts"},
        {"converge", "conductance at fixed cavity energy versus subband count"},
    };
    for (const auto& v : verbs) {
        auto* sub = app.add_subcommand(v[0], v[1]);
        sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--workers", opts.workers, "parallel sweep points (default: $CAVCOND_WORKERS or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--dump-basis", opts.dump_basis, "write the subband basis as CSV");
        sub->add_flag("--dump-catalog", opts.dump_catalog, "write the transition catalog as CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_all_failed;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return exit_config;
    }
}
