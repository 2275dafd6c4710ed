#include "noprop/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "noprop/parallel.hpp"
#include "noprop/stats.hpp"

namespace noprop {

namespace {

Vector origin_point(const SystemSpec& sys) { return Vector::Zero(sys.dim); }

double run_path_phi(const SystemSpec& sys, const GaussianNoise& noise, const Observable& phi,
                    double gamma, int T, RngStream& rng, Vector x) {
    for (int m = 0; m < T; ++m) {
        x = project(sys, sys.step(gamma, m, x) + noise.sample(rng));
        if (!x.allFinite())
            throw std::runtime_error("finite_difference_response: non-finite state at step " +
                                     std::to_string(m + 1));
    }
    return phi.value(x);
}

FdResult fd_finite_time(const SystemSpec& sys, const GaussianNoise& noise, const Observable& phi,
                        double gamma, double dgamma, std::int64_t L, std::uint64_t seed,
                        const FdOptions& opt) {
    std::vector<double> diff(static_cast<std::size_t>(L));
    std::vector<double> mid(static_cast<std::size_t>(L));
    parallel_chunks(L, kPathChunk, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t l = begin; l < end; ++l) {
            RngStream rng_plus(substream_seed(seed, static_cast<std::uint64_t>(l)));
            // same substream at both parameter values = common random numbers
            RngStream rng_minus = opt.use_crn
                                      ? rng_plus
                                      : RngStream(substream_seed(
                                            seed, static_cast<std::uint64_t>(L + l)));
            const Vector x_plus = opt.initial ? opt.initial(rng_plus) : origin_point(sys);
            const Vector x_minus = opt.initial ? opt.initial(rng_minus) : origin_point(sys);
            const double up =
                run_path_phi(sys, noise, phi, gamma + dgamma, opt.T, rng_plus, x_plus);
            const double dn =
                run_path_phi(sys, noise, phi, gamma - dgamma, opt.T, rng_minus, x_minus);
            diff[static_cast<std::size_t>(l)] = (up - dn) / (2.0 * dgamma);
            mid[static_cast<std::size_t>(l)] = 0.5 * (up + dn);
        }
    });
    MomentAccumulator acc, acc_mid;
    for (double d : diff) acc.add(d);
    for (double m : mid) acc_mid.add(m);
    return {acc.mean(), acc.std_error(), acc_mid.mean(), acc_mid.std_error()};
}

FdResult fd_stationary(const SystemSpec& sys, const GaussianNoise& noise, const Observable& phi,
                       double gamma, double dgamma, std::int64_t L, std::uint64_t seed,
                       const FdOptions& opt) {
    const int nb = static_cast<int>(std::max<std::int64_t>(2, std::min<std::int64_t>(opt.n_batches, L / 2)));
    const auto batch_of = [nb, L](std::int64_t l) {
        return static_cast<std::size_t>(std::min<std::int64_t>(nb - 1, (l - 1) * nb / L));
    };
    auto orbit_batch_means = [&](double g, std::uint64_t stream_index) {
        RngStream rng(substream_seed(seed, stream_index));
        Vector x = origin_point(sys);
        std::vector<MomentAccumulator> acc(static_cast<std::size_t>(nb));
        for (std::int64_t m = 1; m <= opt.m_pre + L; ++m) {
            x = project(sys, sys.step(g, 0, x) + noise.sample(rng));
            if (!x.allFinite())
                throw std::runtime_error(
                    "finite_difference_response: non-finite state at orbit step " +
                    std::to_string(m));
            if (m > opt.m_pre) acc[batch_of(m - opt.m_pre)].add(phi.value(x));
        }
        return acc;
    };

    const auto plus = orbit_batch_means(gamma + dgamma, 0);
    const auto minus = orbit_batch_means(gamma - dgamma, opt.use_crn ? 0 : 1);

    MomentAccumulator grand_plus, grand_minus;
    for (const auto& a : plus) grand_plus.merge(a);
    for (const auto& a : minus) grand_minus.merge(a);
    const double value = (grand_plus.mean() - grand_minus.mean()) / (2.0 * dgamma);

    double se;
    if (opt.use_crn) {
        // paired, time-aligned batch differences
        MomentAccumulator paired;
        for (int b = 0; b < nb; ++b)
            paired.add((plus[static_cast<std::size_t>(b)].mean() -
                        minus[static_cast<std::size_t>(b)].mean()) /
                       (2.0 * dgamma));
        se = paired.std_error();
    } else {
        MomentAccumulator bm_plus, bm_minus;
        for (const auto& a : plus) bm_plus.add(a.mean());
        for (const auto& a : minus) bm_minus.add(a.mean());
        const double sp = bm_plus.std_error(), sm = bm_minus.std_error();
        se = std::sqrt(sp * sp + sm * sm) / (2.0 * dgamma);
    }

    MomentAccumulator mid;
    for (int b = 0; b < nb; ++b)
        mid.add(0.5 * (plus[static_cast<std::size_t>(b)].mean() +
                       minus[static_cast<std::size_t>(b)].mean()));
    return {value, se, mid.mean(), mid.std_error()};
}

} // namespace

FdResult finite_difference_response(const SystemSpec& sys, const GaussianNoise& noise,
                                    const Observable& phi, double gamma, double dgamma,
                                    std::int64_t L, std::uint64_t seed, const FdOptions& opt) {
    if (!(dgamma > 0.0))
        throw std::invalid_argument("finite_difference_response: dgamma must be > 0");
    if (L < 2) throw std::invalid_argument("finite_difference_response: L must be >= 2");
    if (opt.mode == FdMode::FiniteTime)
        return fd_finite_time(sys, noise, phi, gamma, dgamma, L, seed, opt);
    return fd_stationary(sys, noise, phi, gamma, dgamma, L, seed, opt);
}

Matrix grid_transition_matrix(const SystemSpec& sys, double gamma, double sigma, int bins) {
    if (sys.dim != 1)
        throw std::invalid_argument("grid_transition_matrix: requires a 1-D system");
    if (bins < 100) throw std::invalid_argument("grid_transition_matrix: bins must be >= 100");
    if (!(sigma > 0.0)) throw std::invalid_argument("grid_transition_matrix: sigma must be > 0");

    Matrix p(bins, bins);
    const double h = 1.0 / static_cast<double>(bins);
    std::vector<double> cdf_at_edges(static_cast<std::size_t>(bins) + 1);
    Vector xi(1);
    for (int i = 0; i < bins; ++i) {
        xi[0] = (i + 0.5) * h;
        const double z = sys.step(gamma, 0, xi)[0];
        // mass of bin j accumulated over wrap offsets k with |edge+k-z|<=8 sigma
        const auto k_lo = static_cast<std::int64_t>(std::floor(z - 8.0 * sigma));
        const auto k_hi = static_cast<std::int64_t>(std::ceil(z + 8.0 * sigma));
        for (int j = 0; j <= bins; ++j) cdf_at_edges[static_cast<std::size_t>(j)] = 0.0;
        for (std::int64_t k = k_lo; k <= k_hi; ++k)
            for (int j = 0; j <= bins; ++j)
                cdf_at_edges[static_cast<std::size_t>(j)] +=
                    normal_cdf((static_cast<double>(j) * h + static_cast<double>(k) - z) / sigma);
        for (int j = 0; j < bins; ++j)
            p(i, j) = cdf_at_edges[static_cast<std::size_t>(j) + 1] -
                      cdf_at_edges[static_cast<std::size_t>(j)];
    }
    return p;
}

std::vector<double> grid_stationary_mass(const Matrix& transition, double tol_l1,
                                         std::int64_t max_iters) {
    const auto n = transition.rows();
    Eigen::RowVectorXd mass = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (std::int64_t it = 0; it < max_iters; ++it) {
        Eigen::RowVectorXd next = mass * transition;
        next /= next.sum();
        const double diff = (next - mass).cwiseAbs().sum();
        mass = next;
        if (diff < tol_l1) return {mass.data(), mass.data() + n};
    }
    throw std::runtime_error("grid_stationary_mass: power iteration did not reach L1 tolerance " +
                             std::to_string(tol_l1) + " in " + std::to_string(max_iters) +
                             " iterations (near-degenerate mixing)");
}

GridOracleResult grid_transfer_response_1d(const GridOracleConfig& cfg, const SystemSpec& sys,
                                           const Observable& phi) {
    if (!(cfg.dgamma > 0.0))
        throw std::invalid_argument("grid_transfer_response_1d: dgamma must be > 0");
    const int n = cfg.bins;
    Eigen::VectorXd phi_mid(n);
    Vector xi(1);
    for (int i = 0; i < n; ++i) {
        xi[0] = (i + 0.5) / static_cast<double>(n);
        phi_mid[i] = phi.value(xi);
    }
    auto phi_avg_at = [&](double gamma) {
        const Matrix p = grid_transition_matrix(sys, gamma, cfg.sigma, n);
        const auto mass = grid_stationary_mass(p, cfg.tol_l1, cfg.max_iters);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += mass[static_cast<std::size_t>(i)] * phi_mid[i];
        return std::pair{s, mass};
    };

    GridOracleResult out;
    auto [center, mass] = phi_avg_at(cfg.gamma);
    out.phi_avg = center;
    out.stationary_mass = std::move(mass);
    const double up = phi_avg_at(cfg.gamma + cfg.dgamma).first;
    const double dn = phi_avg_at(cfg.gamma - cfg.dgamma).first;
    out.dphi = (up - dn) / (2.0 * cfg.dgamma);
    return out;
}

EnsembleResult ensemble_response(const SystemSpec& sys, const GaussianNoise& noise,
                                 const Observable& phi, double gamma, int n_max, std::int64_t L,
                                 std::uint64_t seed, const EnsembleOptions& opt) {
    if (!sys.has_jacobian())
        throw std::invalid_argument("ensemble_response: system '" + sys.name +
                                    "' does not provide a Jacobian");
    if (!phi.gradient)
        throw std::invalid_argument("ensemble_response: observable '" + phi.name +
                                    "' has no gradient");
    if (n_max < 1) throw std::invalid_argument("ensemble_response: n_max must be >= 1");
    if (L < 2) throw std::invalid_argument("ensemble_response: L must be >= 2");

    std::vector<double> s_path(static_cast<std::size_t>(L));
    std::vector<double> phi_path(static_cast<std::size_t>(L));
    parallel_chunks(L, kPathChunk, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        std::vector<Vector> states(static_cast<std::size_t>(n_max) + 1);
        for (std::int64_t l = begin; l < end; ++l) {
            RngStream rng(substream_seed(seed, static_cast<std::uint64_t>(l)));
            Vector x = opt.initial ? opt.initial(rng) : origin_point(sys);
            if (!opt.initial)
                for (std::int64_t m = 0; m < opt.m_pre; ++m)
                    x = project(sys, sys.step(gamma, 0, x) + noise.sample(rng));
            states[0] = x;
            for (int m = 0; m < n_max; ++m)
                states[static_cast<std::size_t>(m) + 1] =
                    project(sys, sys.step(gamma, m, states[static_cast<std::size_t>(m)]) +
                                     noise.sample(rng));
            phi_path[static_cast<std::size_t>(l)] =
                phi.value(states[static_cast<std::size_t>(n_max)]);

            // backward covector recursion from the final layer
            Vector v = phi.gradient(states[static_cast<std::size_t>(n_max)]);
            double s = 0.0;
            for (int n = 1; n <= n_max; ++n) {
                const Vector& x_tn = states[static_cast<std::size_t>(n_max - n)];
                s += sys.param_derivative(gamma, n_max - n, x_tn).dot(v);
                if (n < n_max) v = sys.jacobian_transpose(gamma, n_max - n, x_tn, v);
            }
            s_path[static_cast<std::size_t>(l)] = s;
        }
    });

    EnsembleResult out;
    MomentAccumulator acc;
    double abs_sum = 0.0;
    std::int64_t n_finite = 0;
    for (double s : s_path) {
        if (!std::isfinite(s)) continue;
        ++n_finite;
        acc.add(s);
        abs_sum += std::fabs(s);
    }
    if (n_finite == L) {
        out.value = acc.mean();
        out.std_error = acc.std_error();
        out.integrand_magnitude = abs_sum / static_cast<double>(L);
    } else {
        // explosion: flag the value, keep the magnitude of what stayed finite
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        out.integrand_magnitude = n_finite > 0 ? abs_sum / static_cast<double>(n_finite)
                                               : std::numeric_limits<double>::infinity();
    }
    MomentAccumulator phis;
    for (double p : phi_path) phis.add(p);
    out.phi_avg = phis.mean();
    out.phi_avg_std_error = phis.std_error();
    return out;
}

KernelResult kernel_smoothed_response(const SystemSpec& sys, const GaussianNoise& noise,
                                      const Observable& phi, double gamma, double kernel_sigma,
                                      int n_gammas, std::int64_t L, std::uint64_t seed,
                                      const KernelOptions& opt) {
    if (!(kernel_sigma > 0.0))
        throw std::invalid_argument("kernel_smoothed_response: kernel_sigma must be > 0");
    if (n_gammas < 2)
        throw std::invalid_argument("kernel_smoothed_response: n_gammas must be >= 2");

    std::vector<double> xi(static_cast<std::size_t>(n_gammas));
    std::vector<double> phi_avg(static_cast<std::size_t>(n_gammas));
    parallel_chunks(n_gammas, 1, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t k = begin; k < end; ++k) {
            RngStream rng(substream_seed(seed, static_cast<std::uint64_t>(k)));
            const double x_k = kernel_sigma * rng.next_normal();
            xi[static_cast<std::size_t>(k)] = x_k;
            Vector x = origin_point(sys);
            MomentAccumulator acc;
            for (std::int64_t m = 1; m <= opt.m_pre + L; ++m) {
                x = project(sys, sys.step(gamma + x_k, 0, x) + noise.sample(rng));
                if (!x.allFinite())
                    throw std::runtime_error(
                        "kernel_smoothed_response: non-finite state at orbit step " +
                        std::to_string(m));
                if (m > opt.m_pre) acc.add(phi.value(x));
            }
            phi_avg[static_cast<std::size_t>(k)] = acc.mean();
        }
    });

    MomentAccumulator phis;
    for (double p : phi_avg) phis.add(p);
    const double center = phis.mean();
    // score of the Gaussian kernel in the parameter direction: the weight on
    // Phi_avg(gamma + xi) is xi / kernel_sigma^2
    MomentAccumulator products;
    for (int k = 0; k < n_gammas; ++k)
        products.add((phi_avg[static_cast<std::size_t>(k)] - center) *
                     xi[static_cast<std::size_t>(k)] / (kernel_sigma * kernel_sigma));
    return {products.mean(), products.std_error(), center, phis.std_error()};
}

} // namespace noprop
