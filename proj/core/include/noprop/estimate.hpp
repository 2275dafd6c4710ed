#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace noprop {

// Result of a linear-response estimate, together with the plain average of
// the observable from the same samples and diagnostics used by the test
// harness.
struct ResponseEstimate {
    double value = 0.0;          // estimated d(Phi_avg)/d(gamma)
    double std_error = 0.0;
    double phi_avg = 0.0;
    double phi_avg_std_error = 0.0;
    std::int64_t n_samples = 0;  // L

    std::uint64_t seed = 0;
    std::int64_t window = 0;     // T (finite-time) or W (stationary)
    std::int64_t m_pre = 0;

    // Mean absolute value of the per-sample Monte-Carlo integrand
    // S_l (Phi_l - Phi_avg); exposes integrand blowup (finite-time only).
    double mean_abs_integrand = 0.0;

    // Stationary estimator: contribution and standard error per lag
    // n = 0..W; value is their sum in lag order.
    std::vector<double> lag_values;
    std::vector<double> lag_std_errors;

    // Mean and standard error of the per-step score terms I, which have
    // expectation zero. Finite-time: one entry per step m = 1..T;
    // stationary: a single entry for the orbit.
    std::vector<double> score_mean;
    std::vector<double> score_mean_se;

    std::vector<std::string> warnings;
};

} // namespace noprop
