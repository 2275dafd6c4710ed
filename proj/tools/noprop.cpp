// Command-line front end: single runs, sweeps, convergence studies, and the
// reference oracles, all emitting the common CSV schema plus an optional JSON
// summary of the resolved configuration.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "noprop/config.hpp"
#include "noprop/sweep.hpp"
#include "noprop/version.hpp"

namespace {

using noprop::RunConfig;

// every supported flag, written into the config only when the user passed it
struct Flags {
    std::string config_path;
    std::string system;
    double gamma = 0;
    double a = 0;
    double c = 0;
    double sigma = 0;
    std::string method;
    std::int64_t mc_samples = 0;
    int window = 0;
    int depth = 0;
    std::int64_t m_pre = 0;
    std::uint64_t seed = 0;
    std::string phi;
    double dgamma = 0;
    std::string fd_mode;
    int bins = 0;
    int n_max = 0;
    double kernel_sigma = 0;
    int n_gammas = 0;
    std::vector<double> gammas;
    double gamma_min = 0, gamma_max = 0, gamma_step = 0;
    std::string study_kind;
    int repeats = 0;
    std::string out = "-";
    std::string summary;
};

void add_common_system_flags(CLI::App* cmd, Flags& f, const RunConfig& defaults) {
    cmd->add_option("--system", f.system, "System: tent, chaotic_net, or ar1")
        ->default_str(defaults.system);
    cmd->add_option("--gamma", f.gamma, "Parameter value (tent default 3, others 0/0.3)");
    cmd->add_option("--a", f.a, "ar1 contraction factor")->default_str("0.5");
    cmd->add_option("--C", f.c, "chaotic_net coupling strength")->default_str("4");
    cmd->add_option("--sigma", f.sigma,
                    "Isotropic noise scale (tent default 0.1, chaotic_net 0.5)");
    cmd->add_option("--seed", f.seed, "Master seed")->default_str("0");
    cmd->add_option("--phi", f.phi, "Observable: x or mean");
    cmd->add_option("--out", f.out, "CSV output path, - for stdout")->default_str("-");
    cmd->add_option("--summary", f.summary, "JSON summary path, - for stdout");
}

void apply_if(CLI::App* cmd, const std::string& flag, RunConfig& cfg, const std::string& key,
              const std::function<void()>& apply) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt != nullptr && opt->count() > 0) {
        apply();
        cfg.explicit_keys.insert(key);
    }
}

void apply_common_flags(CLI::App* cmd, const Flags& f, RunConfig& cfg) {
    apply_if(cmd, "--system", cfg, "system.kind", [&] { cfg.system = f.system; });
    apply_if(cmd, "--gamma", cfg, "system.gamma", [&] { cfg.gamma = f.gamma; });
    apply_if(cmd, "--a", cfg, "system.a", [&] { cfg.ar1_a = f.a; });
    apply_if(cmd, "--C", cfg, "system.C", [&] { cfg.net_c = f.c; });
    apply_if(cmd, "--sigma", cfg, "noise.sigma", [&] {
        cfg.sigma = f.sigma;
        cfg.sigma_diag.clear();
        cfg.cov.clear();
    });
    apply_if(cmd, "--seed", cfg, "estimator.seed", [&] { cfg.seed = f.seed; });
    apply_if(cmd, "--phi", cfg, "estimator.phi", [&] { cfg.phi = f.phi; });
}

RunConfig base_config(const Flags& f) {
    if (!f.config_path.empty()) return noprop::load_config(f.config_path);
    return RunConfig{};
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void emit_rows(const RunConfig& cfg, const std::vector<noprop::SweepRow>& rows, const Flags& f) {
    std::ostringstream csv;
    noprop::write_csv(csv, rows);
    write_text(f.out, csv.str());
    if (!f.summary.empty()) write_text(f.summary, noprop::summary_json(cfg, rows));
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_fixed_method(const Flags& f, CLI::App* cmd, const char* method) {
    RunConfig cfg = base_config(f);
    apply_common_flags(cmd, f, cfg);
    apply_if(cmd, "--L", cfg, "estimator.L", [&] { cfg.L = f.mc_samples; });
    apply_if(cmd, "--T", cfg, "estimator.T", [&] { cfg.T = f.depth; });
    apply_if(cmd, "--W", cfg, "estimator.W", [&] { cfg.W = f.window; });
    apply_if(cmd, "--M-pre", cfg, "estimator.M_pre", [&] { cfg.m_pre = f.m_pre; });
    apply_if(cmd, "--dgamma", cfg,
             std::string(method) == "grid" ? "estimator.grid_dgamma" : "estimator.fd_dgamma",
             [&] {
                 if (std::string(method) == "grid") cfg.grid_dgamma = f.dgamma;
                 else cfg.fd_dgamma = f.dgamma;
             });
    apply_if(cmd, "--mode", cfg, "estimator.fd_mode", [&] { cfg.fd_mode = f.fd_mode; });
    apply_if(cmd, "--bins", cfg, "estimator.grid_bins", [&] { cfg.grid_bins = f.bins; });
    apply_if(cmd, "--n-max", cfg, "estimator.n_max", [&] { cfg.n_max = f.n_max; });
    apply_if(cmd, "--kernel-sigma", cfg, "estimator.kernel_sigma",
             [&] { cfg.kernel_sigma = f.kernel_sigma; });
    apply_if(cmd, "--n-gammas", cfg, "estimator.n_gammas", [&] { cfg.n_gammas = f.n_gammas; });
    cfg.method = method;
    cfg.explicit_keys.insert("estimator.method");

    cfg = noprop::resolve_and_validate(cfg);
    std::vector<std::string> warnings;
    const auto row = noprop::run_single(cfg, &warnings);
    print_warnings(warnings);
    emit_rows(cfg, {row}, f);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"No-propagate linear-response estimators for noisy maps"};
    app.set_version_flag("--version", noprop::version_string());
    app.require_subcommand(1);

    Flags f;
    app.add_option("--config", f.config_path, "Config file (key = value with [sections])")
        ->check(CLI::ExistingFile);
    const RunConfig defaults;

    auto* finite = app.add_subcommand(
        "finite", "Finite-time estimator: response of E[Phi(x_T)] over L paths");
    add_common_system_flags(finite, f, defaults);
    finite->add_option("--T", f.depth, "Path length")->default_str("50");
    finite->add_option("--L", f.mc_samples, "Sample path count")->default_str("100000");

    auto* stationary = app.add_subcommand(
        "stationary", "Single-orbit estimator of the stationary response");
    add_common_system_flags(stationary, f, defaults);
    stationary->add_option("--W", f.window, "Decorrelation window")->default_str("7");
    stationary->add_option("--L", f.mc_samples, "Orbit length")->default_str("100000");
    stationary->add_option("--M-pre", f.m_pre, "Spin-up steps")->default_str("1000");

    auto* sweep = app.add_subcommand("sweep", "One estimate per gamma, CSV in gamma order");
    add_common_system_flags(sweep, f, defaults);
    sweep->add_option("--method", f.method,
                      "noprop-stationary | noprop-finite | fd | grid | ensemble | kernel");
    sweep->add_option("--gammas", f.gammas, "Explicit gamma list")->delimiter(',');
    sweep->add_option("--gamma-min", f.gamma_min, "Range start");
    sweep->add_option("--gamma-max", f.gamma_max, "Range end");
    sweep->add_option("--gamma-step", f.gamma_step, "Range step");
    sweep->add_option("--W", f.window, "Decorrelation window");
    sweep->add_option("--T", f.depth, "Path length");
    sweep->add_option("--L", f.mc_samples, "Samples per gamma");
    sweep->add_option("--M-pre", f.m_pre, "Spin-up steps");
    sweep->add_option("--dgamma", f.dgamma, "FD half-step (fd method)");
    sweep->add_option("--n-max", f.n_max, "Covector horizon (ensemble method)");

    auto* study = app.add_subcommand(
        "study", "Convergence study: repeated runs across the L or W grid, std and slope");
    add_common_system_flags(study, f, defaults);
    study->add_option("--kind", f.study_kind, "L-scaling | W-scaling")
        ->default_str("L-scaling");
    study->add_option("--repeats", f.repeats, "Independent runs per grid point (>= 5)")
        ->default_str("10");
    study->add_option("--W", f.window, "Window used by the L-scaling study");
    study->add_option("--L", f.mc_samples, "Orbit length used by the W-scaling study");
    study->add_option("--M-pre", f.m_pre, "Spin-up steps");

    auto* oracle = app.add_subcommand("oracle", "Reference computations");
    oracle->require_subcommand(1);
    auto* fd = oracle->add_subcommand(
        "fd", "Common-random-number central finite difference of Phi_avg");
    add_common_system_flags(fd, f, defaults);
    fd->add_option("--dgamma", f.dgamma, "FD half-step")->default_str("0.05");
    fd->add_option("--mode", f.fd_mode, "stationary | finite")->default_str("stationary");
    fd->add_option("--T", f.depth, "Path length (finite mode)");
    fd->add_option("--L", f.mc_samples, "Samples / orbit length");
    fd->add_option("--M-pre", f.m_pre, "Spin-up steps (stationary mode)");

    auto* grid = oracle->add_subcommand(
        "grid", "1-D transfer-operator grid: stationary density and FD response");
    add_common_system_flags(grid, f, defaults);
    grid->add_option("--bins", f.bins, "Grid bins")->default_str("2000");
    grid->add_option("--dgamma", f.dgamma, "FD half-step on the grid")->default_str("0.001");

    auto* ensemble = oracle->add_subcommand(
        "ensemble", "Covector-propagation (backpropagation) estimator");
    add_common_system_flags(ensemble, f, defaults);
    ensemble->add_option("--n-max", f.n_max, "Backpropagation horizon")->default_str("50");
    ensemble->add_option("--L", f.mc_samples, "Sample paths");
    ensemble->add_option("--M-pre", f.m_pre, "Spin-up steps (1-D systems)");

    auto* kernel = oracle->add_subcommand(
        "kernel", "Parameter-space kernel-smoothing estimator");
    add_common_system_flags(kernel, f, defaults);
    kernel->add_option("--kernel-sigma", f.kernel_sigma, "Kernel width")->default_str("0.05");
    kernel->add_option("--n-gammas", f.n_gammas, "Sampled gammas")->default_str("100");
    kernel->add_option("--L", f.mc_samples, "Orbit length per gamma");
    kernel->add_option("--M-pre", f.m_pre, "Spin-up steps");

    CLI11_PARSE(app, argc, argv);

    try {
        if (finite->parsed()) return run_fixed_method(f, finite, "noprop-finite");
        if (stationary->parsed()) return run_fixed_method(f, stationary, "noprop-stationary");
        if (fd->parsed()) return run_fixed_method(f, fd, "fd");
        if (grid->parsed()) return run_fixed_method(f, grid, "grid");
        if (ensemble->parsed()) return run_fixed_method(f, ensemble, "ensemble");
        if (kernel->parsed()) return run_fixed_method(f, kernel, "kernel");

        if (sweep->parsed()) {
            RunConfig cfg = base_config(f);
            apply_common_flags(sweep, f, cfg);
            apply_if(sweep, "--method", cfg, "estimator.method", [&] { cfg.method = f.method; });
            apply_if(sweep, "--W", cfg, "estimator.W", [&] { cfg.W = f.window; });
            apply_if(sweep, "--T", cfg, "estimator.T", [&] { cfg.T = f.depth; });
            apply_if(sweep, "--L", cfg, "estimator.L", [&] { cfg.L = f.mc_samples; });
            apply_if(sweep, "--M-pre", cfg, "estimator.M_pre", [&] { cfg.m_pre = f.m_pre; });
            apply_if(sweep, "--dgamma", cfg, "estimator.fd_dgamma",
                     [&] { cfg.fd_dgamma = f.dgamma; });
            apply_if(sweep, "--n-max", cfg, "estimator.n_max", [&] { cfg.n_max = f.n_max; });
            apply_if(sweep, "--gammas", cfg, "sweep.gammas", [&] { cfg.gammas = f.gammas; });
            apply_if(sweep, "--gamma-min", cfg, "sweep.gamma_min", [&] {
                cfg.gamma_min = f.gamma_min;
                cfg.has_gamma_range = true;
            });
            apply_if(sweep, "--gamma-max", cfg, "sweep.gamma_max", [&] {
                cfg.gamma_max = f.gamma_max;
                cfg.has_gamma_range = true;
            });
            apply_if(sweep, "--gamma-step", cfg, "sweep.gamma_step", [&] {
                cfg.gamma_step = f.gamma_step;
                cfg.has_gamma_range = true;
            });
            cfg = noprop::resolve_and_validate(cfg);
            const auto result = noprop::run_sweep(cfg);
            print_warnings(result.warnings);
            emit_rows(cfg, result.rows, f);
            return 0;
        }

        if (study->parsed()) {
            RunConfig cfg = base_config(f);
            apply_common_flags(study, f, cfg);
            apply_if(study, "--kind", cfg, "study.kind", [&] { cfg.study_kind = f.study_kind; });
            apply_if(study, "--repeats", cfg, "study.repeats", [&] { cfg.repeats = f.repeats; });
            apply_if(study, "--W", cfg, "estimator.W", [&] { cfg.W = f.window; });
            apply_if(study, "--L", cfg, "estimator.L", [&] { cfg.L = f.mc_samples; });
            apply_if(study, "--M-pre", cfg, "estimator.M_pre", [&] { cfg.m_pre = f.m_pre; });
            cfg = noprop::resolve_and_validate(cfg);
            const auto result = noprop::run_convergence_study(cfg);
            std::ostringstream csv;
            noprop::write_study_csv(csv, result);
            write_text(f.out, csv.str());
            if (!f.summary.empty()) write_text(f.summary, noprop::summary_json(cfg, {}));
            return 0;
        }
    } catch (const noprop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
