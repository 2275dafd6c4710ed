#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "noprop/noise.hpp"
#include "noprop/system.hpp"

namespace noprop {

// Configuration error carrying the offending field or line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fully resolved run parameters. Defaults here are global; selecting a
// system fills in its published defaults (tent: gamma=3, sigma=0.1;
// chaotic_net: sigma=0.5, phi=mean, T=50, C=4) for any key the user did not
// set explicitly.
struct RunConfig {
    // [system]
    std::string system = "tent";
    double gamma = 3.0;
    double ar1_a = 0.5;
    double net_c = 4.0;

    // [noise]
    std::string noise_kind = "gaussian";
    double sigma = 0.1;
    std::vector<double> sigma_diag;              // alternative to sigma
    std::vector<std::vector<double>> cov;        // alternative to sigma

    // [estimator]
    std::string method = "noprop-stationary";
    std::int64_t L = 100000;
    int W = 7;
    int T = 50;
    std::int64_t m_pre = 1000;
    std::uint64_t seed = 0;
    std::string phi = "x";
    double fd_dgamma = 0.05;
    std::string fd_mode = "stationary";          // stationary | finite
    int grid_bins = 2000;
    double grid_dgamma = 1e-3;
    int n_max = 50;
    double kernel_sigma = 0.05;
    int n_gammas = 100;

    // [sweep]
    std::vector<double> gammas;                  // explicit list wins
    double gamma_min = 0.0, gamma_max = 0.0, gamma_step = 0.0;
    bool has_gamma_range = false;

    // [study]
    std::string study_kind = "L-scaling";        // L-scaling | W-scaling
    int repeats = 10;

    // keys given explicitly (file or flag), as "section.key"
    std::set<std::string> explicit_keys;
    bool is_set(const std::string& key) const { return explicit_keys.count(key) > 0; }
};

// Parses a flat sectioned key = value file. Values are numbers, bare strings,
// [lists] or [[matrices]]. Unknown sections or keys, re-set keys, and type
// mismatches are errors that carry the line number.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Applies per-system defaults to keys the user left unset, then checks every
// invariant; errors name the violated field. Returns the resolved config.
RunConfig resolve_and_validate(RunConfig cfg);

// Serializes a resolved config in the same file format; parsing the output
// yields an identical configuration.
std::string emit_config(const RunConfig& cfg);

// Factories wired from a resolved config.
SystemSpec make_system(const RunConfig& cfg);
GaussianNoise make_noise(const RunConfig& cfg, int dim);
Observable make_observable(const RunConfig& cfg, int dim);
// default h0 sampler for the finite-time estimator: tent - uniform on [0,1),
// ar1 - standard normal, chaotic_net - standard normal in R^9
std::function<Vector(RngStream&)> make_initial_sampler(const RunConfig& cfg);
// gamma grid of a sweep (explicit list, or min..max by step)
std::vector<double> sweep_gammas(const RunConfig& cfg);

// Shortest round-trip decimal representation (used for config and CSV
// emission so identical doubles print identically).
std::string format_double(double v);

} // namespace noprop
