// trilinear_sim.cpp — command-line runner for the built-in experiments
//
// Exit codes: 0 success, 2 invalid input, 3 result flagged as not converged
// (or a numerical convergence failure), 1 anything else.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "trilinear/experiments/cache.hpp"
#include "trilinear/experiments/config.hpp"
#include "trilinear/experiments/record.hpp"
#include "trilinear/experiments/runner.hpp"
#include "trilinear/experiments/svg.hpp"
#include "trilinear/physical.hpp"

namespace fs = std::filesystem;
using namespace trilinear;
using namespace trilinear::experiments;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw Error("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string render(const ResultRecord& rec, const std::string& format) {
    if (format == "csv") return rec.to_csv();
    if (format == "json") return rec.to_json().dump(1) + "\n";
    if (format == "svg") return render_svg(rec);
    throw ValidationError("unknown format '" + format + "' (expected csv, json or svg)");
}

struct RunArgs {
    std::string experiment;
    std::string config_file;
    std::optional<double> nbar, nbar1, nbar2;
    std::optional<double> tau_min, tau_max, tau_star;
    std::optional<int> tau_steps;
    std::optional<double> tail_epsilon;
    std::optional<int> ceiling, n_max;
    std::vector<std::string> partitions, quantities;
    std::vector<double> nbar_values;
    std::string projector;
    bool cross_terms = false;
    std::string out = "results";
    std::string cache_dir;
    bool no_cache = false;
    bool no_guard = false;
    unsigned workers = 1;
    std::vector<std::string> formats{"csv", "json", "svg"};
    bool quiet = false;
};

ExperimentConfig build_config(const RunArgs& a) {
    ExperimentConfig c;
    if (!a.config_file.empty()) {
        c = load_config(a.config_file);
        if (!a.experiment.empty() && parse_experiment(a.experiment) != c.experiment) {
            throw ValidationError("--experiment disagrees with the experiment in " + a.config_file);
        }
    } else {
        if (a.experiment.empty()) throw ValidationError("run: --experiment or --config is required");
        c = defaults(parse_experiment(a.experiment));
    }
    if (a.nbar) c.n_bar_1 = c.n_bar_2 = *a.nbar;
    if (a.nbar1) c.n_bar_1 = *a.nbar1;
    if (a.nbar2) c.n_bar_2 = *a.nbar2;
    if (a.tau_min) c.tau_start = *a.tau_min;
    if (a.tau_max) c.tau_end = *a.tau_max;
    if (a.tau_steps) c.tau_steps = *a.tau_steps;
    if (a.tau_star) c.tau_star = *a.tau_star;
    if (a.tail_epsilon) c.truncation.tail_epsilon = *a.tail_epsilon;
    if (a.ceiling) c.truncation.ceiling = *a.ceiling;
    if (a.n_max) c.truncation.n_max = *a.n_max;
    if (!a.partitions.empty()) c.partitions = a.partitions;
    if (!a.quantities.empty()) c.quantities = a.quantities;
    if (!a.nbar_values.empty()) c.n_bar_values = a.nbar_values;
    if (!a.projector.empty()) c.projector = parse_projector(a.projector);
    if (a.cross_terms) c.cross_terms = true;
    c.output_dir = a.out;
    c.workers = a.workers;
    c.validate();
    return c;
}

int cmd_run(const RunArgs& a) {
    const ExperimentConfig cfg = build_config(a);
    const ResultCache cache = a.no_cache ? ResultCache() : ResultCache::from_env(a.cache_dir);
    RunOptions opt;
    opt.cache = cache.enabled() ? &cache : nullptr;
    opt.convergence_guard = !a.no_guard;
    if (!a.quiet) opt.log = [](const std::string& m) { std::cerr << "[trilinear-sim] " << m << "\n"; };
    bool hit = false;
    const ResultRecord rec = run(cfg, opt, &hit);
    const fs::path dir(a.out);
    const std::string stem = rec.experiment;
    for (const auto& f : a.formats) write_file(dir / (stem + "." + f), render(rec, f));
    write_file(dir / (stem + ".config.json"), cfg.to_json().dump(1) + "\n");
    if (!a.quiet) {
        std::cerr << "[trilinear-sim] " << stem << " " << rec.config_hash.substr(0, 12) << (hit ? " (cached)" : "") << " -> "
                  << dir.string() << "\n";
    }
    if (!rec.converged()) {
        std::cerr << "trilinear-sim: result not converged (headline shift " << rec.metadata.value("convergence_shift", 0.0)
                  << "); raise truncation.ceiling or lower tail_epsilon\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int cmd_export(const std::string& input, const std::string& format, const std::string& out) {
    const ResultRecord rec = ResultRecord::from_json(json::parse(read_file(input)));
    const std::string text = render(rec, format);
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_file(out, text);
    }
    return kExitOk;
}

struct KappaArgs {
    std::string deff = "30pm/V", length = "1mm", lambda = "775nm", sigma = "20um", pulse = "1ns", dkz = "0";
    double index = 1.8;
    std::optional<double> n_b, n_s1, n_s2;
    bool as_json = false;
};

int cmd_kappa(const KappaArgs& a) {
    physical::CrystalParams p;
    p.d_eff = physical::parse_quantity(a.deff, physical::Dimension::Nonlinearity);
    p.length = physical::parse_quantity(a.length, physical::Dimension::Length);
    p.lambda_b = physical::parse_quantity(a.lambda, physical::Dimension::Length);
    p.sigma_b = physical::parse_quantity(a.sigma, physical::Dimension::Length);
    p.pulse_duration = physical::parse_quantity(a.pulse, physical::Dimension::Time);
    p.delta_kz = physical::parse_quantity(a.dkz, physical::Dimension::Wavenumber);
    p.n_b = a.n_b.value_or(a.index);
    p.n_s1 = a.n_s1.value_or(a.index);
    p.n_s2 = a.n_s2.value_or(a.index);
    const double k = physical::kappa_gaussian(p);
    const double kv = physical::kappa_verbose_prefactor(p, physical::gaussian_overlap(p)).real();
    const double tau = k > 0.0 ? physical::tau_physical(k, p.pulse_duration) : 0.0;
    if (a.as_json) {
        json j{{"d_eff", p.d_eff}, {"L_z", p.length}, {"lambda_b", p.lambda_b}, {"sigma_b", p.sigma_b},
               {"n_b", p.n_b}, {"n_s1", p.n_s1}, {"n_s2", p.n_s2}, {"delta_kz", p.delta_kz},
               {"pulse_duration", p.pulse_duration}, {"kappa", k}, {"kappa_verbose", kv}, {"tau", tau}};
        std::cout << j.dump(1) << "\n";
    } else {
        std::printf("kappa         %.6e 1/s\n", k);
        std::printf("kappa_verbose %.6e 1/s\n", kv);
        std::printf("tau           %.6e\n", tau);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate two TMSVS sources seeding non-degenerate SHG and reproduce the entanglement results"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment and write CSV/JSON/SVG results");
    run_cmd->add_option("-e,--experiment", ra.experiment, "fig2 | fig3 | trend | purity | swap | kappa | beamsplitter | custom");
    run_cmd->add_option("-c,--config", ra.config_file, "Config file (JSON or key = value)")->check(CLI::ExistingFile);
    run_cmd->add_option("--nbar", ra.nbar, "Mean signal photon number of both converters");
    run_cmd->add_option("--nbar1", ra.nbar1, "Mean signal photon number of converter 1");
    run_cmd->add_option("--nbar2", ra.nbar2, "Mean signal photon number of converter 2");
    run_cmd->add_option("--nbar-values", ra.nbar_values, "Sweep values for trend and purity")->delimiter(',');
    run_cmd->add_option("--tau-min", ra.tau_min, "First grid point");
    run_cmd->add_option("--tau-max", ra.tau_max, "Last grid point");
    run_cmd->add_option("--tau-steps", ra.tau_steps, "Number of grid points (>= 2)");
    run_cmd->add_option("--tau-star", ra.tau_star, "Time at which the trend is read off");
    run_cmd->add_option("--tail-epsilon", ra.tail_epsilon, "Discarded TMSVS probability per converter");
    run_cmd->add_option("--ceiling", ra.ceiling, "Largest cutoff allowed");
    run_cmd->add_option("--n-max", ra.n_max, "Fixed cutoff instead of the automatic one");
    run_cmd->add_option("--partitions", ra.partitions, "Bipartitions such as i1i2;b")->delimiter(',');
    run_cmd->add_option("--quantities", ra.quantities, "purity_difference, mandel_q:<mode>, mean:<mode>")->delimiter(',');
    run_cmd->add_option("--projector", ra.projector, "click | 1pnr (swap headline)");
    run_cmd->add_flag("--cross-terms", ra.cross_terms, "fig2: add the first-order curve with second-order cross terms");
    run_cmd->add_option("-o,--out", ra.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--cache-dir", ra.cache_dir, std::string("Result cache directory (default: $") + kCacheEnvVar + ")");
    run_cmd->add_flag("--no-cache", ra.no_cache, "Ignore the result cache");
    run_cmd->add_flag("--no-guard", ra.no_guard, "Skip the truncation convergence rerun");
    run_cmd->add_option("-j,--workers", ra.workers, "Worker threads")->capture_default_str();
    run_cmd->add_option("--formats", ra.formats, "Output formats")->delimiter(',')->capture_default_str();
    run_cmd->add_flag("-q,--quiet", ra.quiet, "No progress messages");

    std::string ex_in, ex_format = "svg", ex_out;
    auto* export_cmd = app.add_subcommand("export", "Convert a stored JSON record to csv, json or svg");
    export_cmd->add_option("-i,--in", ex_in, "Record JSON written by run")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("-f,--format", ex_format, "csv | json | svg")->capture_default_str();
    export_cmd->add_option("-o,--out", ex_out, "Output file (default: stdout)");

    KappaArgs ka;
    auto* kappa_cmd = app.add_subcommand("kappa", "Coupling constant and scaled time from crystal parameters");
    kappa_cmd->add_option("--deff", ka.deff, "Effective nonlinearity, e.g. 30pm/V")->capture_default_str();
    kappa_cmd->add_option("--L", ka.length, "Crystal length, e.g. 1mm")->capture_default_str();
    kappa_cmd->add_option("--lambda", ka.lambda, "SH wavelength, e.g. 775nm")->capture_default_str();
    kappa_cmd->add_option("--n", ka.index, "Refractive index of all three modes")->capture_default_str();
    kappa_cmd->add_option("--nb", ka.n_b, "SH refractive index");
    kappa_cmd->add_option("--ns1", ka.n_s1, "Signal 1 refractive index");
    kappa_cmd->add_option("--ns2", ka.n_s2, "Signal 2 refractive index");
    kappa_cmd->add_option("--sigma", ka.sigma, "SH Gaussian radius, e.g. 20um")->capture_default_str();
    kappa_cmd->add_option("--dkz", ka.dkz, "Longitudinal mismatch, e.g. 0 or 3.1/mm")->capture_default_str();
    kappa_cmd->add_option("--pulse", ka.pulse, "Interaction time, e.g. 1ns")->capture_default_str();
    kappa_cmd->add_flag("--json", ka.as_json, "Print JSON");

    std::string def_experiment;
    auto* defaults_cmd = app.add_subcommand("defaults", "Print the default config of an experiment as JSON");
    defaults_cmd->add_option("experiment", def_experiment, "Experiment name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run_cmd) return cmd_run(ra);
        if (*export_cmd) return cmd_export(ex_in, ex_format, ex_out);
        if (*kappa_cmd) return cmd_kappa(ka);
        if (*defaults_cmd) {
            std::cout << defaults(parse_experiment(def_experiment)).to_json(false).dump(1) << "\n";
            return kExitOk;
        }
    } catch (const ValidationError& e) {
        std::cerr << "trilinear-sim: " << e.what() << "\n";
        return kExitValidation;
    } catch (const json::exception& e) {
        std::cerr << "trilinear-sim: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "trilinear-sim: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "trilinear-sim: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOther;
}
