#include <doctest.h>

#include <cmath>

#include "noprop/finite_time.hpp"
#include "noprop/parallel.hpp"

using namespace noprop;

namespace {

SystemSpec constant_map() {
    // f_gamma(x) = gamma, so df/dgamma = 1
    SystemSpec sys;
    sys.name = "constant";
    sys.dim = 1;
    sys.step = [](double gamma, int, const Vector&) {
        Vector z(1);
        z << gamma;
        return z;
    };
    sys.param_derivative = [](double, int, const Vector&) {
        Vector d(1);
        d << 1.0;
        return d;
    };
    return sys;
}

SystemSpec gamma_free_map() {
    SystemSpec sys;
    sys.name = "gamma_free";
    sys.dim = 1;
    sys.step = [](double, int, const Vector& x) {
        Vector z(1);
        z << 0.5 * x[0] + 0.1;
        return z;
    };
    sys.param_derivative = [](double, int, const Vector&) {
        Vector d(1);
        d << 0.0;
        return d;
    };
    return sys;
}

FiniteTimeConfig base_config() {
    FiniteTimeConfig cfg;
    cfg.T = 1;
    cfg.L = 100000;
    cfg.seed = 11;
    cfg.gamma = 0.0;
    cfg.noise = GaussianNoise::isotropic(1, 0.5);
    cfg.phi = make_coordinate_observable();
    cfg.initial = [](RngStream& rng) {
        Vector x(1);
        x << rng.next_normal();
        return x;
    };
    return cfg;
}

struct WorkerGuard {
    ~WorkerGuard() { set_worker_override(0); }
};

} // namespace

TEST_CASE("constant map, T = 1: the response of Phi(x) = x is 1") {
    const auto est = estimate_finite_time(constant_map(), base_config());
    CHECK(est.std_error > 0.0);
    CHECK(std::fabs(est.value - 1.0) <= 4.0 * est.std_error);
}

TEST_CASE("a gamma-independent system gives exactly zero") {
    auto cfg = base_config();
    cfg.T = 5;
    cfg.L = 2000;
    const auto est = estimate_finite_time(gamma_free_map(), cfg);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.mean_abs_integrand == 0.0);
}

TEST_CASE("pushforward averages") {
    SUBCASE("T = 0 averages over the initial density") {
        auto cfg = base_config();
        cfg.T = 0;
        cfg.L = 200000;
        const auto [mean, se] = pushforward_average(constant_map(), cfg);
        CHECK(std::fabs(mean) <= 4.0 * se);
    }
    SUBCASE("constant map lands on gamma") {
        auto cfg = base_config();
        cfg.gamma = 0.3;
        cfg.L = 100000;
        const auto [mean, se] = pushforward_average(constant_map(), cfg);
        CHECK(std::fabs(mean - 0.3) <= 4.0 * se);
        CHECK(se == doctest::Approx(0.5 / std::sqrt(1e5)).epsilon(0.05));
    }
}

TEST_CASE("bit-identical results for 1, 2, and 8 workers") {
    WorkerGuard guard;
    auto cfg = base_config();
    cfg.T = 7;
    cfg.L = 20000;

    set_worker_override(1);
    const auto ref = estimate_finite_time(constant_map(), cfg);
    const auto push_ref = pushforward_average(constant_map(), cfg);
    for (int workers : {2, 8}) {
        set_worker_override(workers);
        const auto est = estimate_finite_time(constant_map(), cfg);
        CHECK(est.value == ref.value);
        CHECK(est.std_error == ref.std_error);
        CHECK(est.phi_avg == ref.phi_avg);
        CHECK(est.phi_avg_std_error == ref.phi_avg_std_error);
        CHECK(est.mean_abs_integrand == ref.mean_abs_integrand);
        CHECK(est.score_mean == ref.score_mean);
        CHECK(est.score_mean_se == ref.score_mean_se);
        const auto push = pushforward_average(constant_map(), cfg);
        CHECK(push.first == push_ref.first);
        CHECK(push.second == push_ref.second);
    }
}

TEST_CASE("centralization: shifting Phi by a constant leaves the value put") {
    auto cfg = base_config();
    cfg.T = 3;
    cfg.L = 50000;
    const auto base = estimate_finite_time(constant_map(), cfg);

    auto shifted = cfg;
    shifted.phi.value = [](const Vector& x) { return x[0] + 10.0; };
    const auto est = estimate_finite_time(constant_map(), shifted);
    CHECK(std::fabs(est.value - base.value) < 1e-12 * (1.0 + std::fabs(base.value)));
    CHECK(est.phi_avg == doctest::Approx(base.phi_avg + 10.0).epsilon(1e-12));
}

TEST_CASE("per-step score means are statistically zero") {
    auto cfg = base_config();
    cfg.T = 10;
    cfg.L = 100000;
    const auto est = estimate_finite_time(constant_map(), cfg);
    REQUIRE(est.score_mean.size() == 10);
    for (std::size_t m = 0; m < est.score_mean.size(); ++m)
        CHECK(std::fabs(est.score_mean[m]) <= 5.0 * est.score_mean_se[m]);
}

TEST_CASE("a trivial noise field reproduces the plain path bit for bit") {
    auto cfg = base_config();
    cfg.T = 4;
    cfg.L = 5000;
    const auto plain = estimate_finite_time(constant_map(), cfg);

    auto with_field = cfg;
    with_field.noise_field = NoiseField::constant(cfg.noise);
    const auto field = estimate_finite_time(constant_map(), with_field);
    CHECK(field.value == plain.value);
    CHECK(field.std_error == plain.std_error);
    CHECK(field.phi_avg == plain.phi_avg);
}

TEST_CASE("gamma-dependent noise variance is differentiated through the weight") {
    // f = 0, Y ~ N(0, (1+gamma)^2), Phi = x^2: E[Phi] = (1+gamma)^2, response 2
    SystemSpec sys;
    sys.name = "zero";
    sys.dim = 1;
    sys.step = [](double, int, const Vector&) { return Vector::Zero(1).eval(); };
    sys.param_derivative = [](double, int, const Vector&) { return Vector::Zero(1).eval(); };

    FiniteTimeConfig cfg;
    cfg.T = 1;
    cfg.L = 200000;
    cfg.seed = 5;
    cfg.gamma = 0.0;
    cfg.noise_field = NoiseField([](double gamma, const Vector&) {
        return GaussianNoise::isotropic(1, 1.0 + gamma);
    });
    cfg.phi.name = "x2";
    cfg.phi.value = [](const Vector& x) { return x[0] * x[0]; };
    cfg.initial = [](RngStream&) { return Vector::Zero(1).eval(); };

    const auto est = estimate_finite_time(sys, cfg);
    CHECK(std::fabs(est.value - 2.0) <= 4.0 * est.std_error);
}

TEST_CASE("time-inhomogeneous noise schedule") {
    // step 0 sets x to gamma, step 1 is the identity; derivative is still 1
    SystemSpec sys;
    sys.name = "two_phase";
    sys.dim = 1;
    sys.step = [](double gamma, int n, const Vector& x) {
        Vector z(1);
        z << (n == 0 ? gamma : x[0]);
        return z;
    };
    sys.param_derivative = [](double, int n, const Vector&) {
        Vector d(1);
        d << (n == 0 ? 1.0 : 0.0);
        return d;
    };

    auto cfg = base_config();
    cfg.T = 2;
    cfg.L = 200000;
    cfg.noise_schedule = {GaussianNoise::isotropic(1, 0.5), GaussianNoise::isotropic(1, 0.2)};
    const auto est = estimate_finite_time(sys, cfg);
    CHECK(std::fabs(est.value - 1.0) <= 4.0 * est.std_error);

    cfg.noise_schedule.pop_back();
    CHECK_THROWS(estimate_finite_time(sys, cfg)); // wrong schedule length
}

TEST_CASE("reported standard error scales like 1/sqrt(L)") {
    auto cfg = base_config();
    cfg.T = 2;
    std::vector<std::pair<double, double>> pts;
    for (std::int64_t l : {1000, 10000, 100000}) {
        cfg.L = l;
        pts.emplace_back(static_cast<double>(l),
                         estimate_finite_time(constant_map(), cfg).std_error);
    }
    const double slope = std::log(pts[2].second / pts[0].second) /
                         std::log(pts[2].first / pts[0].first);
    CHECK(slope > -0.6);
    CHECK(slope < -0.4);
}

TEST_CASE("state blowup is reported with the step index") {
    SystemSpec sys;
    sys.name = "explode";
    sys.dim = 1;
    sys.step = [](double, int, const Vector& x) {
        Vector z(1);
        z << x[0] * 1e3 + 1.0;
        return z;
    };
    sys.param_derivative = [](double, int, const Vector&) { return Vector::Ones(1).eval(); };
    auto cfg = base_config();
    cfg.T = 200;
    cfg.L = 4;
    CHECK_THROWS_AS(estimate_finite_time(sys, cfg), std::runtime_error);
}

TEST_CASE("configuration invariants") {
    auto cfg = base_config();
    cfg.T = 0;
    CHECK_THROWS(estimate_finite_time(constant_map(), cfg)); // T >= 1
    cfg = base_config();
    cfg.L = 1;
    CHECK_THROWS(estimate_finite_time(constant_map(), cfg)); // L >= 2
    cfg = base_config();
    cfg.initial = nullptr;
    CHECK_THROWS(estimate_finite_time(constant_map(), cfg));
}
