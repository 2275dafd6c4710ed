#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "noprop/config.hpp"
#include "noprop/estimate.hpp"

namespace noprop {

// One emitted result row. The CSV schema is stable:
//   gamma,phi_avg,phi_se,dphi,dphi_se,method,L,W_or_T,seed,wall_time_s
// W_or_T holds W for stationary estimates, T for finite-time ones, n_max for
// the covector baseline, and 0 where no window applies.
struct SweepRow {
    double gamma = 0.0;
    double phi_avg = 0.0;
    double phi_se = 0.0;
    double dphi = 0.0;
    double dphi_se = 0.0;
    std::string method;
    std::int64_t L = 0;
    std::int64_t w_or_t = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

inline constexpr const char* kCsvHeader =
    "gamma,phi_avg,phi_se,dphi,dphi_se,method,L,W_or_T,seed,wall_time_s";

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Runs the configured method once at cfg.gamma with cfg.seed and measures
// the wall time. Warnings accumulate into *warnings when given.
SweepRow run_single(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

struct SweepResult {
    std::vector<SweepRow> rows;     // in gamma order
    std::vector<std::string> warnings;
};

// One row per gamma; row i runs with seed substream_seed(cfg.seed, i).
// Independent rows run in parallel.
SweepResult run_sweep(const RunConfig& cfg);

struct StudySample {
    double param = 0.0;   // L or W
    int repeat = 0;
    double dphi = 0.0;
};

struct StudyResult {
    std::string kind;
    std::vector<StudySample> samples;
    // (param, std of dphi across repeats)
    std::vector<std::pair<double, double>> stds;
    double slope = 0.0;
    double intercept = 0.0;   // natural-log units
};

// Repeated stationary runs across the L grid {1e3,1e4,1e5} (L-scaling) or
// the W grid {3,5,7,10,15,20,30} at the configured L (W-scaling). Repeat r
// reuses seed substream_seed(cfg.seed, r) across the whole grid, so the
// spread estimates share noise and the fitted slope is stable.
StudyResult run_convergence_study(const RunConfig& cfg);

void write_study_csv(std::ostream& out, const StudyResult& study);

// JSON document with the resolved config, the version string, and rows.
std::string summary_json(const RunConfig& cfg, const std::vector<SweepRow>& rows);

} // namespace noprop
