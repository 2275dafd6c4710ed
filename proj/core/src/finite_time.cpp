#include "noprop/finite_time.hpp"

#include <cmath>
#include <stdexcept>

#include "noprop/parallel.hpp"
#include "noprop/stats.hpp"

namespace noprop {

namespace {

void validate(const FiniteTimeConfig& cfg, bool allow_t0) {
    if (cfg.T < (allow_t0 ? 0 : 1))
        throw std::invalid_argument(allow_t0 ? "FiniteTimeConfig: T must be >= 0"
                                             : "FiniteTimeConfig: T must be >= 1");
    if (cfg.L < 2) throw std::invalid_argument("FiniteTimeConfig: L must be >= 2");
    if (!cfg.initial) throw std::invalid_argument("FiniteTimeConfig: initial sampler not set");
    if (!cfg.phi.value) throw std::invalid_argument("FiniteTimeConfig: observable not set");
    if (!cfg.noise_schedule.empty() &&
        cfg.noise_schedule.size() != static_cast<std::size_t>(cfg.T))
        throw std::invalid_argument("FiniteTimeConfig: noise_schedule must have T entries");
}

[[noreturn]] void blowup(const char* what, std::int64_t path, int step) {
    throw std::runtime_error(std::string("finite-time estimator: non-finite ") + what +
                             " at path " + std::to_string(path) + ", step " +
                             std::to_string(step));
}

} // namespace

ResponseEstimate estimate_finite_time(const SystemSpec& sys, const FiniteTimeConfig& cfg) {
    validate(cfg, /*allow_t0=*/false);
    const int T = cfg.T;
    const std::int64_t L = cfg.L;
    const bool generalized = cfg.noise_field.has_value();

    std::vector<double> s_path(static_cast<std::size_t>(L));
    std::vector<double> phi_path(static_cast<std::size_t>(L));

    // Per-chunk, per-step sums of the score terms I_{l,m}; chunk boundaries
    // are fixed by L alone, so merging in chunk order is worker-independent.
    const std::int64_t n_chunks = (L + kPathChunk - 1) / kPathChunk;
    std::vector<double> chunk_sum(static_cast<std::size_t>(n_chunks * T), 0.0);
    std::vector<double> chunk_sumsq(static_cast<std::size_t>(n_chunks * T), 0.0);

    parallel_chunks(L, kPathChunk, [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
        double* sum = chunk_sum.data() + chunk * T;
        double* sumsq = chunk_sumsq.data() + chunk * T;
        for (std::int64_t l = begin; l < end; ++l) {
            RngStream rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(l)));
            Vector x = cfg.initial(rng);
            double s = 0.0;
            for (int m = 0; m < T; ++m) {
                const Vector z = sys.step(cfg.gamma, m, x);
                const Vector df = sys.param_derivative(cfg.gamma, m, x);
                Vector y;
                double i_step;
                if (generalized) {
                    const GaussianNoise p = cfg.noise_field->at(cfg.gamma, z);
                    y = p.sample(rng);
                    const double g = generalized_weight(*cfg.noise_field, cfg.gamma, z, y, df);
                    s += g;
                    i_step = -g;
                } else {
                    const GaussianNoise& p =
                        cfg.noise_schedule.empty() ? cfg.noise : cfg.noise_schedule[m];
                    y = p.sample(rng);
                    i_step = df.dot(p.score(y));
                    s -= i_step;
                }
                if (!std::isfinite(i_step)) blowup("score term", l, m + 1);
                x = project(sys, z + y);
                if (!x.allFinite()) blowup("state", l, m + 1);
                sum[m] += i_step;
                sumsq[m] += i_step * i_step;
            }
            s_path[static_cast<std::size_t>(l)] = s;
            phi_path[static_cast<std::size_t>(l)] = cfg.phi.value(x);
        }
    });

    // Sequential reductions in path order.
    const double ld = static_cast<double>(L);
    MomentAccumulator phi_acc;
    for (std::int64_t l = 0; l < L; ++l) phi_acc.add(phi_path[static_cast<std::size_t>(l)]);
    const double phi_avg = phi_acc.mean();

    MomentAccumulator v_acc;
    double v_abs = 0.0;
    for (std::int64_t l = 0; l < L; ++l) {
        const double v = s_path[static_cast<std::size_t>(l)] *
                         (phi_path[static_cast<std::size_t>(l)] - phi_avg);
        v_acc.add(v);
        v_abs += std::fabs(v);
    }

    ResponseEstimate est;
    est.value = v_acc.mean();
    est.std_error = v_acc.std_error();
    est.phi_avg = phi_avg;
    est.phi_avg_std_error = phi_acc.std_error();
    est.n_samples = L;
    est.seed = cfg.seed;
    est.window = T;
    est.mean_abs_integrand = v_abs / ld;

    est.score_mean.resize(static_cast<std::size_t>(T));
    est.score_mean_se.resize(static_cast<std::size_t>(T));
    for (int m = 0; m < T; ++m) {
        double sum = 0.0, sumsq = 0.0;
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            sum += chunk_sum[static_cast<std::size_t>(c * T + m)];
            sumsq += chunk_sumsq[static_cast<std::size_t>(c * T + m)];
        }
        const double mean = sum / ld;
        est.score_mean[static_cast<std::size_t>(m)] = mean;
        est.score_mean_se[static_cast<std::size_t>(m)] =
            std::sqrt(std::max(0.0, (sumsq - sum * sum / ld) / (ld - 1.0)) / ld);
    }
    return est;
}

std::pair<double, double> pushforward_average(const SystemSpec& sys, const FiniteTimeConfig& cfg) {
    validate(cfg, /*allow_t0=*/true);
    const int T = cfg.T;
    const std::int64_t L = cfg.L;
    const bool generalized = cfg.noise_field.has_value();

    std::vector<double> phi_path(static_cast<std::size_t>(L));
    parallel_chunks(L, kPathChunk, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t l = begin; l < end; ++l) {
            RngStream rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(l)));
            Vector x = cfg.initial(rng);
            for (int m = 0; m < T; ++m) {
                const Vector z = sys.step(cfg.gamma, m, x);
                Vector y;
                if (generalized) {
                    y = cfg.noise_field->at(cfg.gamma, z).sample(rng);
                } else {
                    const GaussianNoise& p =
                        cfg.noise_schedule.empty() ? cfg.noise : cfg.noise_schedule[m];
                    y = p.sample(rng);
                }
                x = project(sys, z + y);
                if (!x.allFinite()) blowup("state", l, m + 1);
            }
            phi_path[static_cast<std::size_t>(l)] = cfg.phi.value(x);
        }
    });

    MomentAccumulator acc;
    for (std::int64_t l = 0; l < L; ++l) acc.add(phi_path[static_cast<std::size_t>(l)]);
    return {acc.mean(), acc.std_error()};
}

} // namespace noprop
