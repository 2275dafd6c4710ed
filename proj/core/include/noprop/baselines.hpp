#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "noprop/noise.hpp"
#include "noprop/system.hpp"

namespace noprop {

enum class FdMode { FiniteTime, Stationary };

struct FdOptions {
    FdMode mode = FdMode::Stationary;
    int T = 50;                   // finite-time mode
    std::int64_t m_pre = 1000;    // stationary mode
    int n_batches = 50;           // stationary mode
    // initial sampler for finite-time mode; origin point mass when empty
    std::function<Vector(RngStream&)> initial;
    // identical noise realizations at gamma +/- dgamma (common random
    // numbers); false redraws independently for the second run
    bool use_crn = true;
};

struct FdResult {
    double value = 0.0;
    double std_error = 0.0;
    // midpoint average (mean of the two off-center runs) for reporting
    double phi_avg = 0.0;
    double phi_avg_std_error = 0.0;
};

// Central finite difference (Phi_avg(gamma+dgamma) - Phi_avg(gamma-dgamma))
// / (2 dgamma). With common random numbers the difference is taken pathwise
// (finite-time) or batchwise on time-aligned orbits (stationary), which is
// where the variance reduction comes from.
FdResult finite_difference_response(const SystemSpec& sys, const GaussianNoise& noise,
                                    const Observable& phi, double gamma, double dgamma,
                                    std::int64_t L, std::uint64_t seed, const FdOptions& opt);

struct GridOracleConfig {
    int bins = 2000;
    double gamma = 3.0;
    double sigma = 0.1;
    double dgamma = 1e-3;
    double tol_l1 = 1e-12;
    std::int64_t max_iters = 100000;
};

struct GridOracleResult {
    double phi_avg = 0.0;
    double dphi = 0.0;
    // stationary bin masses at gamma (size bins, sums to 1)
    std::vector<double> stationary_mass;
};

// Deterministic 1-D reference on the circle: the row-stochastic transition
// matrix between bin midpoints under the wrapped Gaussian kernel, its
// stationary density by power iteration, and a central difference in gamma
// of the stationary average.
GridOracleResult grid_transfer_response_1d(const GridOracleConfig& cfg, const SystemSpec& sys,
                                           const Observable& phi);

// Row i = distribution of project(f_gamma(midpoint_i) + noise) over bins.
// Wrap terms are truncated beyond 8 sigma.
Matrix grid_transition_matrix(const SystemSpec& sys, double gamma, double sigma, int bins);

// Stationary mass of a row-stochastic matrix by power iteration from the
// uniform density, to L1 tolerance; throws if max_iters is exceeded.
std::vector<double> grid_stationary_mass(const Matrix& transition, double tol_l1,
                                         std::int64_t max_iters);

struct EnsembleOptions {
    std::int64_t m_pre = 1000;
    // sampler for the path start; used instead of spin-up when set
    std::function<Vector(RngStream&)> initial;
};

struct EnsembleResult {
    double value = 0.0;
    double std_error = 0.0;
    // mean |per-path integrand|; grows like the Jacobian products under
    // chaos, which is exactly the failure mode this baseline exposes
    double integrand_magnitude = 0.0;
    double phi_avg = 0.0;
    double phi_avg_std_error = 0.0;
};

// Covector-propagation (backpropagation) response: per path,
//   S = sum_{n=1..n_max} df(x_{T-n}) . v_n,  v_1 = dPhi(x_T),
//   v_{n+1} = (Df(x_{T-n}))^T v_n.
// Requires the system Jacobian and an observable gradient. Overflow is
// reported through a non-finite value plus the magnitude diagnostic rather
// than thrown.
EnsembleResult ensemble_response(const SystemSpec& sys, const GaussianNoise& noise,
                                 const Observable& phi, double gamma, int n_max, std::int64_t L,
                                 std::uint64_t seed, const EnsembleOptions& opt);

struct KernelOptions {
    std::int64_t m_pre = 1000;
    int n_batches = 50;
};

struct KernelResult {
    double value = 0.0;
    double std_error = 0.0;
    // kernel-smoothed average of the observable across the sampled gammas
    double phi_avg = 0.0;
    double phi_avg_std_error = 0.0;
};

// Parameter-space kernel smoothing: sample xi_k ~ N(0, kernel_sigma^2),
// estimate Phi_avg(gamma + xi_k) on an independent orbit of length L, and
// average the centralized products Phi_avg(gamma+xi_k) * xi_k/kernel_sigma^2.
KernelResult kernel_smoothed_response(const SystemSpec& sys, const GaussianNoise& noise,
                                      const Observable& phi, double gamma, double kernel_sigma,
                                      int n_gammas, std::int64_t L, std::uint64_t seed,
                                      const KernelOptions& opt);

} // namespace noprop
