#include "noprop/stationary.hpp"

#include <cmath>
#include <stdexcept>

#include "noprop/stats.hpp"

namespace noprop {

namespace {

void validate(const SystemSpec& sys, int noise_dim, const StationaryConfig& cfg) {
    if (cfg.W < 0) throw std::invalid_argument("StationaryConfig: W must be >= 0");
    if (cfg.L < 2) throw std::invalid_argument("StationaryConfig: L must be >= 2");
    if (cfg.W >= cfg.L)
        throw std::invalid_argument("StationaryConfig: W must be < L (got W=" +
                                    std::to_string(cfg.W) + ", L=" + std::to_string(cfg.L) + ")");
    if (cfg.m_pre < 0) throw std::invalid_argument("StationaryConfig: M_pre must be >= 0");
    if (!cfg.phi.value) throw std::invalid_argument("StationaryConfig: observable not set");
    if (noise_dim != sys.dim)
        throw std::invalid_argument("StationaryConfig: noise dimension " +
                                    std::to_string(noise_dim) + " does not match system '" +
                                    sys.name + "' dimension " + std::to_string(sys.dim));
    if (cfg.x_init.size() != 0 && cfg.x_init.size() != sys.dim)
        throw std::invalid_argument("StationaryConfig: x_init dimension mismatch");
}

[[noreturn]] void blowup(const char* what, std::int64_t step) {
    throw std::runtime_error(std::string("stationary estimator: non-finite ") + what +
                             " at orbit step " + std::to_string(step));
}

Vector start_state(const SystemSpec& sys, const StationaryConfig& cfg) {
    return cfg.x_init.size() != 0 ? cfg.x_init : Vector::Zero(sys.dim).eval();
}

int effective_batches(const StationaryConfig& cfg) {
    const std::int64_t nb = std::min<std::int64_t>(cfg.n_batches, cfg.L / 2);
    return static_cast<int>(std::max<std::int64_t>(1, nb));
}

// One-pass orbit with ring buffers over the last W+1 score terms. Everything
// downstream (per-lag contributions, batch means) is accumulated per batch of
// the index l, so the pass never stores the orbit.
ResponseEstimate run_orbit(const SystemSpec& sys, const GaussianNoise* plain,
                           const NoiseField* field, const StationaryConfig& cfg) {
    const int noise_dim = plain ? plain->dim() : field->at(cfg.gamma, Vector::Zero(sys.dim)).dim();
    validate(sys, noise_dim, cfg);

    const int W = cfg.W;
    const std::int64_t L = cfg.L;
    const int nb = effective_batches(cfg);
    const auto batch_of = [nb, L](std::int64_t l) {
        return static_cast<int>(std::min<std::int64_t>(nb - 1, (l - 1) * nb / L));
    };

    RngStream rng(substream_seed(cfg.seed, 0));
    Vector x = start_state(sys, cfg);

    auto advance = [&](std::int64_t step_index, double* i_out) {
        const Vector z = sys.step(cfg.gamma, 0, x);
        Vector y;
        double i;
        if (field) {
            const GaussianNoise p = field->at(cfg.gamma, z);
            y = p.sample(rng);
            i = -generalized_weight(*field, cfg.gamma, z, y, sys.param_derivative(cfg.gamma, 0, x));
        } else {
            y = plain->sample(rng);
            i = sys.param_derivative(cfg.gamma, 0, x).dot(plain->score(y));
        }
        if (!std::isfinite(i)) blowup("score term", step_index);
        x = project(sys, z + y);
        if (!x.allFinite()) blowup("state", step_index);
        *i_out = i;
    };

    for (std::int64_t m = 0; m < cfg.m_pre; ++m) {
        double unused;
        advance(m - cfg.m_pre, &unused);
    }

    // accumulators: A[b][n] = sum over l in batch b of Phi_{n+l} I_l,
    // B[b] = sum of I_l, plus Welford accumulators for Phi and I
    std::vector<double> a(static_cast<std::size_t>(nb) * (W + 1), 0.0);
    std::vector<double> b_sum(static_cast<std::size_t>(nb), 0.0);
    std::vector<MomentAccumulator> phi_acc(static_cast<std::size_t>(nb));
    std::vector<MomentAccumulator> score_acc(static_cast<std::size_t>(nb));
    std::vector<double> ring_i(static_cast<std::size_t>(W + 1), 0.0);

    for (std::int64_t m = 1; m <= static_cast<std::int64_t>(W) + L; ++m) {
        double i_m;
        advance(m, &i_m);
        const double phi_m = cfg.phi.value(x);
        if (!std::isfinite(phi_m)) blowup("observable", m);
        ring_i[static_cast<std::size_t>((m - 1) % (W + 1))] = i_m;
        if (m <= L) {
            const int b = batch_of(m);
            phi_acc[static_cast<std::size_t>(b)].add(phi_m);
            score_acc[static_cast<std::size_t>(b)].add(i_m);
            b_sum[static_cast<std::size_t>(b)] += i_m;
        }
        const std::int64_t n_max = std::min<std::int64_t>(W, m - 1);
        for (std::int64_t n = 0; n <= n_max; ++n) {
            const std::int64_t l = m - n;
            if (l > L) continue;
            a[static_cast<std::size_t>(batch_of(l)) * (W + 1) + static_cast<std::size_t>(n)] +=
                phi_m * ring_i[static_cast<std::size_t>((l - 1) % (W + 1))];
        }
    }

    MomentAccumulator phi_all;
    for (const auto& acc : phi_acc) phi_all.merge(acc);
    const double phi_avg = phi_all.mean();

    ResponseEstimate est;
    est.phi_avg = phi_avg;
    est.n_samples = L;
    est.seed = cfg.seed;
    est.window = W;
    est.m_pre = cfg.m_pre;
    if (W > cfg.L / 10)
        est.warnings.push_back("W = " + std::to_string(W) + " exceeds L/10 = " +
                               std::to_string(cfg.L / 10) +
                               "; the decorrelation window is large relative to the orbit");

    // batch means of Phi
    {
        MomentAccumulator means;
        for (const auto& acc : phi_acc) means.add(acc.mean());
        est.phi_avg_std_error = nb >= 2 ? means.std_error() : 0.0;
    }
    // orbit score mean (expectation zero) and its batch-means error
    {
        MomentAccumulator all, means;
        for (const auto& acc : score_acc) {
            all.merge(acc);
            means.add(acc.mean());
        }
        est.score_mean.push_back(all.mean());
        est.score_mean_se.push_back(nb >= 2 ? means.std_error() : 0.0);
    }

    double b_total = 0.0;
    for (int b = 0; b < nb; ++b) b_total += b_sum[static_cast<std::size_t>(b)];

    est.lag_values.resize(static_cast<std::size_t>(W + 1));
    est.lag_std_errors.resize(static_cast<std::size_t>(W + 1));
    for (int n = 0; n <= W; ++n) {
        double a_total = 0.0;
        MomentAccumulator per_batch;
        for (int b = 0; b < nb; ++b) {
            const double a_bn = a[static_cast<std::size_t>(b) * (W + 1) + static_cast<std::size_t>(n)];
            a_total += a_bn;
            const double count = static_cast<double>(phi_acc[static_cast<std::size_t>(b)].count());
            per_batch.add(-(a_bn - phi_avg * b_sum[static_cast<std::size_t>(b)]) / count);
        }
        est.lag_values[static_cast<std::size_t>(n)] =
            -(a_total - phi_avg * b_total) / static_cast<double>(L);
        est.lag_std_errors[static_cast<std::size_t>(n)] = nb >= 2 ? per_batch.std_error() : 0.0;
    }

    double value = 0.0;
    for (int n = 0; n <= W; ++n) value += est.lag_values[static_cast<std::size_t>(n)];
    est.value = value;

    {
        MomentAccumulator per_batch;
        for (int b = 0; b < nb; ++b) {
            double c_b = 0.0;
            for (int n = 0; n <= W; ++n)
                c_b += a[static_cast<std::size_t>(b) * (W + 1) + static_cast<std::size_t>(n)];
            const double count = static_cast<double>(phi_acc[static_cast<std::size_t>(b)].count());
            per_batch.add(-(c_b - (W + 1) * phi_avg * b_sum[static_cast<std::size_t>(b)]) / count);
        }
        est.std_error = nb >= 2 ? per_batch.std_error() : 0.0;
    }
    return est;
}

} // namespace

ResponseEstimate estimate_stationary(const SystemSpec& sys, const GaussianNoise& noise,
                                     const StationaryConfig& cfg) {
    return run_orbit(sys, &noise, nullptr, cfg);
}

ResponseEstimate estimate_stationary(const SystemSpec& sys, const NoiseField& field,
                                     const StationaryConfig& cfg) {
    return run_orbit(sys, nullptr, &field, cfg);
}

std::vector<double> lag_contributions(const SystemSpec& sys, const GaussianNoise& noise,
                                      const StationaryConfig& cfg) {
    return estimate_stationary(sys, noise, cfg).lag_values;
}

std::pair<double, double> stationary_average(const SystemSpec& sys, const GaussianNoise& noise,
                                             const StationaryConfig& cfg) {
    validate(sys, noise.dim(), cfg);
    const std::int64_t L = cfg.L;
    const int nb = effective_batches(cfg);
    const auto batch_of = [nb, L](std::int64_t l) {
        return static_cast<int>(std::min<std::int64_t>(nb - 1, (l - 1) * nb / L));
    };

    RngStream rng(substream_seed(cfg.seed, 0));
    Vector x = start_state(sys, cfg);
    std::vector<MomentAccumulator> phi_acc(static_cast<std::size_t>(nb));
    for (std::int64_t m = 1; m <= cfg.m_pre + L; ++m) {
        x = project(sys, step_map(sys, cfg.gamma, 0, x) + noise.sample(rng));
        if (!x.allFinite()) blowup("state", m);
        if (m > cfg.m_pre)
            phi_acc[static_cast<std::size_t>(batch_of(m - cfg.m_pre))].add(cfg.phi.value(x));
    }
    MomentAccumulator all, means;
    for (const auto& acc : phi_acc) {
        all.merge(acc);
        means.add(acc.mean());
    }
    return {all.mean(), nb >= 2 ? means.std_error() : 0.0};
}

std::vector<double> density_histogram(const SystemSpec& sys, const GaussianNoise& noise,
                                      const StationaryConfig& cfg, int bins) {
    if (sys.dim != 1)
        throw std::invalid_argument("density_histogram: requires a 1-D system, got dimension " +
                                    std::to_string(sys.dim));
    if (bins < 1) throw std::invalid_argument("density_histogram: bins must be >= 1");
    StationaryConfig c = cfg;
    if (!c.phi.value) c.phi = make_coordinate_observable();
    validate(sys, noise.dim(), c);

    RngStream rng(substream_seed(cfg.seed, 0));
    Vector x = start_state(sys, c);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (std::int64_t m = 1; m <= cfg.m_pre + cfg.L; ++m) {
        x = project(sys, step_map(sys, cfg.gamma, 0, x) + noise.sample(rng));
        if (!x.allFinite()) blowup("state", m);
        if (m > cfg.m_pre) {
            const double v = x[0] - std::floor(x[0]);
            const auto idx = std::min<std::int64_t>(bins - 1,
                                                    static_cast<std::int64_t>(v * bins));
            ++counts[static_cast<std::size_t>(idx)];
        }
    }
    std::vector<double> mass(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i)
        mass[static_cast<std::size_t>(i)] =
            static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(cfg.L);
    return mass;
}

ResponseEstimate merge_independent(const std::vector<ResponseEstimate>& estimates) {
    if (estimates.empty())
        throw std::invalid_argument("merge_independent: no estimates given");
    ResponseEstimate out;
    double wsum = 0.0, vsum = 0.0, pwsum = 0.0, psum = 0.0;
    for (const auto& e : estimates) {
        if (!(e.std_error > 0.0) || !(e.phi_avg_std_error > 0.0))
            throw std::invalid_argument(
                "merge_independent: estimates need positive standard errors");
        const double w = 1.0 / (e.std_error * e.std_error);
        wsum += w;
        vsum += w * e.value;
        const double pw = 1.0 / (e.phi_avg_std_error * e.phi_avg_std_error);
        pwsum += pw;
        psum += pw * e.phi_avg;
        out.n_samples += e.n_samples;
    }
    out.value = vsum / wsum;
    out.std_error = std::sqrt(1.0 / wsum);
    out.phi_avg = psum / pwsum;
    out.phi_avg_std_error = std::sqrt(1.0 / pwsum);
    out.window = estimates.front().window;
    out.m_pre = estimates.front().m_pre;
    out.seed = estimates.front().seed;
    return out;
}

} // namespace noprop
