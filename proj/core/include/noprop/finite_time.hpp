#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "noprop/estimate.hpp"
#include "noprop/noise.hpp"
#include "noprop/system.hpp"

namespace noprop {

// Configuration of the finite-time estimator: L independent sample paths of
// length T started from h0, with an observable on the final layer. Per-step
// noise densities may differ (time-inhomogeneous case); a NoiseField switches
// the per-step weight to the generalized parameter/location-dependent form.
struct FiniteTimeConfig {
    int T = 1;
    std::int64_t L = 2;
    std::uint64_t seed = 0;
    double gamma = 0.0;

    // sampler for the initial density h0
    std::function<Vector(RngStream&)> initial;

    GaussianNoise noise;
    // when nonempty, must have size T and overrides `noise` step by step
    std::vector<GaussianNoise> noise_schedule;
    // when set, overrides both of the above with p_{gamma,z}
    std::optional<NoiseField> noise_field;

    Observable phi;
};

// No-propagate estimate of d/dgamma of E[Phi(x_T)]. For each path:
// I_{m+1} = df_m(x_m) . score(y_{m+1}), S = -sum_m I_m (or the accumulated
// generalized weights when a NoiseField is configured), and the estimate is
// the sample mean of S * (Phi(x_T) - Phi_avg) with the same-sample mean
// Phi_avg. Bit-identical for a fixed (seed, cfg) regardless of worker count.
ResponseEstimate estimate_finite_time(const SystemSpec& sys, const FiniteTimeConfig& cfg);

// Plain Monte-Carlo mean of Phi(x_T) over L paths, with standard error.
// T = 0 averages Phi over h0 itself.
std::pair<double, double> pushforward_average(const SystemSpec& sys, const FiniteTimeConfig& cfg);

} // namespace noprop
