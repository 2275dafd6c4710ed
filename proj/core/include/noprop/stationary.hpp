#pragma once

#include <utility>
#include <vector>

#include "noprop/estimate.hpp"
#include "noprop/noise.hpp"
#include "noprop/system.hpp"

namespace noprop {

// Configuration of the single-orbit estimator: M_pre discarded spin-up steps
// so the state lands on the stationary density, then one orbit of length
// W + L. W is the decorrelation window (lags kept in the response sum);
// truncation bias decays geometrically in W while the standard error grows
// like sqrt(W).
struct StationaryConfig {
    std::int64_t m_pre = 1000;
    int W = 7;
    std::int64_t L = 100000;
    std::uint64_t seed = 0;
    double gamma = 0.0;
    Observable phi;
    // starting state before spin-up; empty means the origin
    Vector x_init;
    // batches for serial-correlation-aware standard errors
    int n_batches = 50;
};

// No-propagate response from one orbit:
//   value = -(1/L) sum_{l=1..L} sum_{n=0..W} (Phi_{n+l} - Phi_avg) I_l,
// with I_{m+1} = df(x_m) . score(y_{m+1}) and Phi_avg the orbit mean over the
// first L observables. Standard errors come from batch means. lag_values
// holds the per-lag contributions; value is exactly their sum in lag order.
// Memory is O(W + state), not O(L).
ResponseEstimate estimate_stationary(const SystemSpec& sys, const GaussianNoise& noise,
                                     const StationaryConfig& cfg);
// Same estimator with parameter/location-dependent noise; the per-step
// weight is the generalized one.
ResponseEstimate estimate_stationary(const SystemSpec& sys, const NoiseField& field,
                                     const StationaryConfig& cfg);

// Per-lag contributions, entry n = -(1/L) sum_l (Phi_{n+l} - Phi_avg) I_l.
std::vector<double> lag_contributions(const SystemSpec& sys, const GaussianNoise& noise,
                                      const StationaryConfig& cfg);

// Orbit mean of Phi with batch-means standard error.
std::pair<double, double> stationary_average(const SystemSpec& sys, const GaussianNoise& noise,
                                             const StationaryConfig& cfg);

// Normalized bin masses of the post-spin-up orbit over the circle [0,1);
// 1-D systems only. The masses sum to 1.
std::vector<double> density_histogram(const SystemSpec& sys, const GaussianNoise& noise,
                                      const StationaryConfig& cfg, int bins);

// Inverse-variance weighted combination of estimates from independent orbits
// (different seeds). Orbits are sequential; this is how runs parallelized
// across seeds are merged.
ResponseEstimate merge_independent(const std::vector<ResponseEstimate>& estimates);

} // namespace noprop
