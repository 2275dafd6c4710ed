#include "noprop/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "noprop/baselines.hpp"
#include "noprop/finite_time.hpp"
#include "noprop/parallel.hpp"
#include "noprop/stationary.hpp"
#include "noprop/stats.hpp"
#include "noprop/version.hpp"

namespace noprop {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kCsvHeader << "\n";
    char wall[32];
    for (const auto& r : rows) {
        std::snprintf(wall, sizeof(wall), "%.3f", r.wall_time_s);
        out << format_double(r.gamma) << ',' << format_double(r.phi_avg) << ','
            << format_double(r.phi_se) << ',' << format_double(r.dphi) << ','
            << format_double(r.dphi_se) << ',' << r.method << ',' << r.L << ',' << r.w_or_t
            << ',' << r.seed << ',' << wall << "\n";
    }
}

SweepRow run_single(const RunConfig& cfg, std::vector<std::string>* warnings) {
    const auto t0 = std::chrono::steady_clock::now();
    const SystemSpec sys = make_system(cfg);
    const Observable phi = make_observable(cfg, sys.dim);

    SweepRow row;
    row.gamma = cfg.gamma;
    row.method = cfg.method;
    row.L = cfg.L;
    row.seed = cfg.seed;

    if (cfg.method == "noprop-stationary") {
        StationaryConfig sc;
        sc.m_pre = cfg.m_pre;
        sc.W = cfg.W;
        sc.L = cfg.L;
        sc.seed = cfg.seed;
        sc.gamma = cfg.gamma;
        sc.phi = phi;
        const auto est = estimate_stationary(sys, make_noise(cfg, sys.dim), sc);
        row.phi_avg = est.phi_avg;
        row.phi_se = est.phi_avg_std_error;
        row.dphi = est.value;
        row.dphi_se = est.std_error;
        row.w_or_t = cfg.W;
        if (warnings)
            warnings->insert(warnings->end(), est.warnings.begin(), est.warnings.end());
    } else if (cfg.method == "noprop-finite") {
        FiniteTimeConfig fc;
        fc.T = cfg.T;
        fc.L = cfg.L;
        fc.seed = cfg.seed;
        fc.gamma = cfg.gamma;
        fc.initial = make_initial_sampler(cfg);
        fc.noise = make_noise(cfg, sys.dim);
        fc.phi = phi;
        const auto est = estimate_finite_time(sys, fc);
        row.phi_avg = est.phi_avg;
        row.phi_se = est.phi_avg_std_error;
        row.dphi = est.value;
        row.dphi_se = est.std_error;
        row.w_or_t = cfg.T;
    } else if (cfg.method == "fd") {
        FdOptions opt;
        opt.mode = cfg.fd_mode == "finite" ? FdMode::FiniteTime : FdMode::Stationary;
        opt.T = cfg.T;
        opt.m_pre = cfg.m_pre;
        if (opt.mode == FdMode::FiniteTime) opt.initial = make_initial_sampler(cfg);
        const auto res = finite_difference_response(sys, make_noise(cfg, sys.dim), phi,
                                                    cfg.gamma, cfg.fd_dgamma, cfg.L, cfg.seed,
                                                    opt);
        row.phi_avg = res.phi_avg;
        row.phi_se = res.phi_avg_std_error;
        row.dphi = res.value;
        row.dphi_se = res.std_error;
        row.w_or_t = opt.mode == FdMode::FiniteTime ? cfg.T : 0;
    } else if (cfg.method == "grid") {
        if (!cfg.sigma_diag.empty() || !cfg.cov.empty())
            throw ConfigError("estimator.method=grid supports isotropic noise.sigma only");
        GridOracleConfig gc;
        gc.bins = cfg.grid_bins;
        gc.gamma = cfg.gamma;
        gc.sigma = cfg.sigma;
        gc.dgamma = cfg.grid_dgamma;
        const auto res = grid_transfer_response_1d(gc, sys, phi);
        row.phi_avg = res.phi_avg;
        row.phi_se = 0.0;
        row.dphi = res.dphi;
        row.dphi_se = 0.0;
        row.L = 0;
        row.w_or_t = 0;
    } else if (cfg.method == "ensemble") {
        EnsembleOptions opt;
        opt.m_pre = cfg.m_pre;
        if (cfg.system == "chaotic_net") opt.initial = make_initial_sampler(cfg);
        const auto res = ensemble_response(sys, make_noise(cfg, sys.dim), phi, cfg.gamma,
                                           cfg.n_max, cfg.L, cfg.seed, opt);
        row.phi_avg = res.phi_avg;
        row.phi_se = res.phi_avg_std_error;
        row.dphi = res.value;
        row.dphi_se = res.std_error;
        row.w_or_t = cfg.n_max;
    } else if (cfg.method == "kernel") {
        KernelOptions opt;
        opt.m_pre = cfg.m_pre;
        const auto res = kernel_smoothed_response(sys, make_noise(cfg, sys.dim), phi, cfg.gamma,
                                                  cfg.kernel_sigma, cfg.n_gammas, cfg.L,
                                                  cfg.seed, opt);
        row.phi_avg = res.phi_avg;
        row.phi_se = res.phi_avg_std_error;
        row.dphi = res.value;
        row.dphi_se = res.std_error;
        row.w_or_t = 0;
    } else {
        throw ConfigError("estimator.method '" + cfg.method + "' is not runnable");
    }

    row.wall_time_s = seconds_since(t0);
    return row;
}

SweepResult run_sweep(const RunConfig& cfg) {
    std::vector<double> gammas = sweep_gammas(cfg);
    if (gammas.empty())
        throw ConfigError("sweep.gammas is empty: set sweep.gammas or "
                          "sweep.gamma_min/gamma_max/gamma_step");
    std::sort(gammas.begin(), gammas.end());

    const auto n = static_cast<std::int64_t>(gammas.size());
    SweepResult result;
    result.rows.resize(static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> row_warnings(static_cast<std::size_t>(n));

    parallel_chunks(n, 1, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            RunConfig c = cfg;
            c.gamma = gammas[static_cast<std::size_t>(i)];
            c.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(i));
            result.rows[static_cast<std::size_t>(i)] =
                run_single(c, &row_warnings[static_cast<std::size_t>(i)]);
        }
    });
    for (const auto& w : row_warnings)
        result.warnings.insert(result.warnings.end(), w.begin(), w.end());
    return result;
}

StudyResult run_convergence_study(const RunConfig& cfg) {
    if (cfg.repeats < 5)
        throw ConfigError("study.repeats must be >= 5 (got " + std::to_string(cfg.repeats) + ")");
    const bool l_scaling = cfg.study_kind == "L-scaling";
    const std::vector<double> params = l_scaling
                                           ? std::vector<double>{1e3, 1e4, 1e5}
                                           : std::vector<double>{3, 5, 7, 10, 15, 20, 30};

    const SystemSpec sys = make_system(cfg);
    const GaussianNoise noise = make_noise(cfg, sys.dim);
    const Observable phi = make_observable(cfg, sys.dim);

    StudyResult study;
    study.kind = cfg.study_kind;
    const auto n_params = static_cast<std::int64_t>(params.size());
    const std::int64_t n_items = n_params * cfg.repeats;
    study.samples.resize(static_cast<std::size_t>(n_items));

    parallel_chunks(n_items, 1, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t item = begin; item < end; ++item) {
            const auto pi = static_cast<std::size_t>(item / cfg.repeats);
            const int r = static_cast<int>(item % cfg.repeats);
            StationaryConfig sc;
            sc.m_pre = cfg.m_pre;
            sc.gamma = cfg.gamma;
            sc.phi = phi;
            // repeat r keeps its seed across the parameter grid
            sc.seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(r));
            if (l_scaling) {
                sc.W = cfg.W;
                sc.L = static_cast<std::int64_t>(params[pi]);
            } else {
                sc.W = static_cast<int>(params[pi]);
                sc.L = cfg.L;
            }
            const auto est = estimate_stationary(sys, noise, sc);
            study.samples[static_cast<std::size_t>(item)] = {params[pi], r, est.value};
        }
    });

    std::vector<std::pair<double, double>> pts;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        MomentAccumulator acc;
        for (int r = 0; r < cfg.repeats; ++r)
            acc.add(study.samples[pi * static_cast<std::size_t>(cfg.repeats) +
                                  static_cast<std::size_t>(r)]
                        .dphi);
        study.stds.emplace_back(params[pi], acc.sample_std());
        pts.emplace_back(params[pi], acc.sample_std());
    }
    const LineFit fit = loglog_slope(pts);
    study.slope = fit.slope;
    study.intercept = fit.intercept;
    return study;
}

void write_study_csv(std::ostream& out, const StudyResult& study) {
    out << "record,param,repeat,value\n";
    for (const auto& s : study.samples)
        out << "dphi," << format_double(s.param) << ',' << s.repeat << ','
            << format_double(s.dphi) << "\n";
    for (const auto& [param, sd] : study.stds)
        out << "std," << format_double(param) << ",," << format_double(sd) << "\n";
    out << "slope,,," << format_double(study.slope) << "\n";
    out << "intercept,,," << format_double(study.intercept) << "\n";
}

std::string summary_json(const RunConfig& cfg, const std::vector<SweepRow>& rows) {
    nlohmann::json j;
    j["version"] = version_string();

    nlohmann::json sys;
    sys["kind"] = cfg.system;
    sys["gamma"] = cfg.gamma;
    if (cfg.system == "ar1") sys["a"] = cfg.ar1_a;
    if (cfg.system == "chaotic_net") sys["C"] = cfg.net_c;
    j["config"]["system"] = sys;

    nlohmann::json noise;
    noise["kind"] = cfg.noise_kind;
    if (!cfg.sigma_diag.empty()) noise["sigma_diag"] = cfg.sigma_diag;
    else if (!cfg.cov.empty()) noise["cov"] = cfg.cov;
    else noise["sigma"] = cfg.sigma;
    j["config"]["noise"] = noise;

    nlohmann::json est;
    est["method"] = cfg.method;
    est["L"] = cfg.L;
    est["W"] = cfg.W;
    est["T"] = cfg.T;
    est["M_pre"] = cfg.m_pre;
    est["seed"] = cfg.seed;
    est["phi"] = cfg.phi;
    est["fd_dgamma"] = cfg.fd_dgamma;
    est["fd_mode"] = cfg.fd_mode;
    est["grid_bins"] = cfg.grid_bins;
    est["grid_dgamma"] = cfg.grid_dgamma;
    est["n_max"] = cfg.n_max;
    est["kernel_sigma"] = cfg.kernel_sigma;
    est["n_gammas"] = cfg.n_gammas;
    j["config"]["estimator"] = est;

    if (!cfg.gammas.empty()) j["config"]["sweep"]["gammas"] = cfg.gammas;
    else if (cfg.has_gamma_range) {
        j["config"]["sweep"]["gamma_min"] = cfg.gamma_min;
        j["config"]["sweep"]["gamma_max"] = cfg.gamma_max;
        j["config"]["sweep"]["gamma_step"] = cfg.gamma_step;
    }
    j["config"]["study"]["kind"] = cfg.study_kind;
    j["config"]["study"]["repeats"] = cfg.repeats;

    j["results"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["gamma"] = r.gamma;
        row["phi_avg"] = r.phi_avg;
        row["phi_se"] = r.phi_se;
        row["dphi"] = r.dphi;
        row["dphi_se"] = r.dphi_se;
        row["method"] = r.method;
        row["L"] = r.L;
        row["W_or_T"] = r.w_or_t;
        row["seed"] = r.seed;
        row["wall_time_s"] = r.wall_time_s;
        j["results"].push_back(row);
    }
    return j.dump(2) + "\n";
}

} // namespace noprop
