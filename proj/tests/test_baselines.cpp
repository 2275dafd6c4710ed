#include <doctest.h>

#include <cmath>

#include "noprop/baselines.hpp"
#include "noprop/stationary.hpp"

using namespace noprop;

namespace {

SystemSpec linear_2d() {
    // contracting linear system x' = A x + gamma b
    Matrix a(2, 2);
    a << 0.5, 0.1, -0.2, 0.4;
    Vector b(2);
    b << 1.0, 0.5;
    SystemSpec sys;
    sys.name = "linear2d";
    sys.dim = 2;
    sys.step = [a, b](double gamma, int, const Vector& x) -> Vector { return a * x + gamma * b; };
    sys.param_derivative = [b](double, int, const Vector&) { return b; };
    sys.jacobian_transpose = [a](double, int, const Vector&, const Vector& w) -> Vector {
        return a.transpose() * w;
    };
    return sys;
}

// stationary response of Phi = mean for linear_2d: mean((I - A)^{-1} b)
const double kLinear2dResponse = (2.03125 + 0.15625) / 2.0; // = 1.09375

SystemSpec gamma_free() {
    SystemSpec sys;
    sys.name = "gamma_free";
    sys.dim = 1;
    sys.step = [](double, int, const Vector& x) {
        Vector z(1);
        z << 0.5 * x[0] + 0.1;
        return z;
    };
    sys.param_derivative = [](double, int, const Vector&) { return Vector::Zero(1).eval(); };
    sys.jacobian_transpose = [](double, int, const Vector&, const Vector& w) {
        Vector r(1);
        r << 0.5 * w[0];
        return r;
    };
    return sys;
}

} // namespace

TEST_CASE("finite difference recovers the AR(1) response in both modes") {
    const auto sys = make_ar1(0.5);
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();

    FdOptions stat;
    stat.mode = FdMode::Stationary;
    stat.m_pre = 1000;
    const auto rs = finite_difference_response(sys, noise, phi, 0.0, 0.05, 400000, 3, stat);
    CHECK(rs.std_error > 0.0);
    CHECK(std::fabs(rs.value - 2.0) <= 4.0 * rs.std_error);

    // the map is linear in gamma, so with common random numbers the paired
    // differences agree to rounding and the spread collapses
    FdOptions fin;
    fin.mode = FdMode::FiniteTime;
    fin.T = 40;
    const auto rf = finite_difference_response(sys, noise, phi, 0.0, 0.05, 1000, 4, fin);
    CHECK(rf.std_error <= 1e-12);
    CHECK(rf.value == doctest::Approx(2.0 * (1.0 - std::pow(0.5, 40))).epsilon(1e-10));

    // with independent draws the same estimate is noisy but unbiased
    FdOptions ind = fin;
    ind.use_crn = false;
    const auto ri = finite_difference_response(sys, noise, phi, 0.0, 0.05, 100000, 4, ind);
    CHECK(ri.std_error > 0.0);
    CHECK(std::fabs(ri.value - 2.0) <= 4.0 * ri.std_error);
}

TEST_CASE("paired differences cancel exactly for a gamma-independent system") {
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();
    FdOptions fin;
    fin.mode = FdMode::FiniteTime;
    fin.T = 10;
    const auto r = finite_difference_response(gamma_free(), noise, phi, 0.0, 0.05, 1000, 5, fin);
    CHECK(r.value == 0.0);
    CHECK(r.std_error == 0.0);
}

TEST_CASE("fd rejects a nonpositive step") {
    const auto sys = make_ar1(0.5);
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    CHECK_THROWS(finite_difference_response(sys, noise, make_coordinate_observable(), 0.0, 0.0,
                                            100, 1, FdOptions{}));
}

TEST_CASE("common random numbers beat independent draws on the same budget") {
    const auto sys = make_tent_map();
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();
    FdOptions crn, ind;
    crn.mode = ind.mode = FdMode::FiniteTime;
    crn.T = ind.T = 2;
    crn.initial = ind.initial = [](RngStream& rng) {
        Vector x(1);
        x << rng.next_uniform();
        return x;
    };
    ind.use_crn = false;
    int wins = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const auto a = finite_difference_response(sys, noise, phi, 3.0, 0.05, 100000,
                                                  static_cast<std::uint64_t>(100 + rep), crn);
        const auto b = finite_difference_response(sys, noise, phi, 3.0, 0.05, 100000,
                                                  static_cast<std::uint64_t>(100 + rep), ind);
        if (a.std_error <= b.std_error) ++wins;
    }
    CHECK(wins >= 9);
}

TEST_CASE("grid transition matrix is row-stochastic and nonnegative") {
    const auto p = grid_transition_matrix(make_tent_map(), 3.0, 0.1, 200);
    CHECK(p.minCoeff() >= 0.0);
    for (int i = 0; i < p.rows(); ++i)
        CHECK(std::fabs(p.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("large sigma washes the stationary density out to uniform") {
    const auto p = grid_transition_matrix(make_tent_map(), 3.0, 10.0, 200);
    const auto mass = grid_stationary_mass(p, 1e-13, 100000);
    double lo = mass[0], hi = mass[0];
    for (double m : mass) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    CHECK(hi / lo <= 1.0 + 1e-3);
}

TEST_CASE("power iteration reports non-convergence") {
    const auto p = grid_transition_matrix(make_tent_map(), 3.0, 0.1, 100);
    CHECK_THROWS_AS(grid_stationary_mass(p, 0.0, 50), std::runtime_error);
}

TEST_CASE("grid oracle is stable under refinement") {
    GridOracleConfig c1;
    c1.bins = 1000;
    GridOracleConfig c4 = c1;
    c4.bins = 4000;
    const auto sys = make_tent_map();
    const auto phi = make_coordinate_observable();
    const auto r1 = grid_transfer_response_1d(c1, sys, phi);
    const auto r4 = grid_transfer_response_1d(c4, sys, phi);
    CHECK(std::fabs(r1.dphi - r4.dphi) < 1e-3 * (1.0 + std::fabs(r4.dphi)));
    CHECK(std::fabs(r1.phi_avg - r4.phi_avg) < 1e-4);
}

TEST_CASE("tent-map FD agrees with the grid oracle") {
    const auto sys = make_tent_map();
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();
    GridOracleConfig gc; // gamma 3, sigma 0.1, 2000 bins
    const auto grid = grid_transfer_response_1d(gc, sys, phi);
    FdOptions opt;
    opt.mode = FdMode::Stationary;
    const auto fd = finite_difference_response(sys, noise, phi, 3.0, 0.05, 1000000, 9, opt);
    CHECK(std::fabs(fd.value - grid.dphi) <= 3.0 * fd.std_error);
}

TEST_CASE("orbit average of the tent map matches the grid-oracle average") {
    const auto sys = make_tent_map();
    const auto phi = make_coordinate_observable();
    GridOracleConfig gc;
    const auto grid = grid_transfer_response_1d(gc, sys, phi);

    StationaryConfig cfg;
    cfg.W = 7;
    cfg.L = 1000000;
    cfg.seed = 61;
    cfg.gamma = 3.0;
    cfg.phi = phi;
    const auto [mean, se] = stationary_average(sys, GaussianNoise::isotropic(1, 0.1), cfg);
    CHECK(std::fabs(mean - grid.phi_avg) <= 3.0 * se + 2e-4);
}

TEST_CASE("ensemble estimator on AR(1) hits the truncated geometric sum") {
    const auto sys = make_ar1(0.5);
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();
    EnsembleOptions opt;
    opt.m_pre = 200;
    const auto r = ensemble_response(sys, noise, phi, 0.0, 20, 1000, 13, opt);
    // df and Df are state-independent here, so every path integrand equals
    // sum_{n=1..20} 0.5^(n-1) exactly and the spread collapses
    CHECK(r.std_error == 0.0);
    CHECK(r.value == doctest::Approx(2.0 * (1.0 - std::pow(0.5, 20))).epsilon(1e-12));
    CHECK(std::fabs(r.value - 2.0) < 1e-5);
}

TEST_CASE("ensemble matches FD on a contracting 2-D linear system") {
    const auto sys = linear_2d();
    const auto noise = GaussianNoise::isotropic(2, 0.1);
    const auto phi = make_mean_observable(2);
    EnsembleOptions eopt;
    eopt.m_pre = 500;
    const auto ens = ensemble_response(sys, noise, phi, 0.2, 25, 2000, 17, eopt);
    CHECK(std::fabs(ens.value - kLinear2dResponse) < 1e-3);

    FdOptions fopt;
    fopt.mode = FdMode::Stationary;
    fopt.m_pre = 1000;
    const auto fd = finite_difference_response(sys, noise, phi, 0.2, 0.05, 200000, 19, fopt);
    // both estimators are near-deterministic here (linear dynamics), so allow
    // the n_max truncation of the covector sum on top of the combined error
    const double combined =
        std::sqrt(ens.std_error * ens.std_error + fd.std_error * fd.std_error);
    CHECK(std::fabs(ens.value - fd.value) <= 3.0 * combined + 1e-7);
    CHECK(std::fabs(fd.value - kLinear2dResponse) <= std::max(4.0 * fd.std_error, 1e-9));
}

TEST_CASE("ensemble requires a Jacobian and a gradient") {
    SystemSpec bare = make_ar1(0.5);
    bare.jacobian_transpose = nullptr;
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    CHECK_THROWS(ensemble_response(bare, noise, make_coordinate_observable(), 0.0, 5, 100, 1,
                                   EnsembleOptions{}));
    Observable no_grad = make_coordinate_observable();
    no_grad.gradient = nullptr;
    CHECK_THROWS(
        ensemble_response(make_ar1(0.5), noise, no_grad, 0.0, 5, 100, 1, EnsembleOptions{}));
}

TEST_CASE("chaotic net covector products explode") {
    const auto sys = make_chaotic_net();
    const auto noise = GaussianNoise::isotropic(9, 0.5);
    const auto phi = make_mean_observable(9);
    EnsembleOptions opt;
    opt.initial = [](RngStream& rng) {
        Vector x(9);
        for (int i = 0; i < 9; ++i) x[i] = rng.next_normal();
        return x;
    };
    // the per-path integrand is heavy-tailed: rare paths with near-neutral
    // finite-time Jacobian products dominate the mean, which keeps growing
    // with L (the acceptance suite measures the full-size run)
    const auto small = ensemble_response(sys, noise, phi, 0.0, 50, 2000, 23, opt);
    const auto large = ensemble_response(sys, noise, phi, 0.0, 50, 10000, 23, opt);
    CHECK(small.integrand_magnitude >= 1e3);
    CHECK(large.integrand_magnitude >= small.integrand_magnitude);
}

TEST_CASE("kernel smoothing recovers the AR(1) response exactly in expectation") {
    // Phi_avg is linear in gamma, so kernel smoothing introduces no bias
    const auto sys = make_ar1(0.5);
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();
    KernelOptions opt;
    opt.m_pre = 500;
    const auto r = kernel_smoothed_response(sys, noise, phi, 0.0, 0.05, 100, 20000, 29, opt);
    CHECK(r.std_error > 0.0);
    CHECK(std::fabs(r.value - 2.0) <= 4.0 * r.std_error);
}

TEST_CASE("kernel smoothing of a flat response is zero") {
    const auto r = kernel_smoothed_response(gamma_free(), GaussianNoise::isotropic(1, 0.1),
                                            make_coordinate_observable(), 0.0, 0.05, 60, 5000,
                                            31, KernelOptions{});
    CHECK(std::fabs(r.value) <= 4.0 * r.std_error);
}

TEST_CASE("kernel estimate agrees with the kernel-smoothed grid derivative") {
    // reference: Gauss-Hermite quadrature of the grid dphi against the same
    // N(0, 0.05^2) kernel
    const auto sys = make_tent_map();
    const auto phi = make_coordinate_observable();
    const double eta = 0.05;
    const double nodes[] = {0.0, 0.958572464613819, -0.958572464613819,
                            2.020182870456086, -2.020182870456086};
    const double weights[] = {0.945308720482942, 0.393619323152241, 0.393619323152241,
                              0.019953242059046, 0.019953242059046};
    double smoothed = 0.0;
    for (int i = 0; i < 5; ++i) {
        GridOracleConfig gc;
        gc.bins = 1000;
        gc.gamma = 3.0 + std::sqrt(2.0) * eta * nodes[i];
        smoothed += weights[i] * grid_transfer_response_1d(gc, sys, phi).dphi;
    }
    smoothed /= std::sqrt(M_PI);

    const auto noise = GaussianNoise::isotropic(1, 0.1);
    KernelOptions opt;
    const auto r = kernel_smoothed_response(sys, noise, phi, 3.0, eta, 100, 100000, 37, opt);
    CHECK(std::fabs(r.value - smoothed) <= 3.0 * r.std_error);
}

TEST_CASE("all four methods agree with the AR(1) analytic value") {
    const auto sys = make_ar1(0.5);
    const auto noise = GaussianNoise::isotropic(1, 0.1);
    const auto phi = make_coordinate_observable();

    StationaryConfig sc;
    sc.W = 30;
    sc.L = 400000;
    sc.seed = 43;
    sc.phi = phi;
    const auto noprop = estimate_stationary(sys, noise, sc);
    CHECK(std::fabs(noprop.value - 2.0) <= 4.0 * noprop.std_error);

    FdOptions fopt;
    fopt.mode = FdMode::Stationary;
    const auto fd = finite_difference_response(sys, noise, phi, 0.0, 0.05, 400000, 47, fopt);
    CHECK(std::fabs(fd.value - 2.0) <= 4.0 * fd.std_error);

    const auto ens = ensemble_response(sys, noise, phi, 0.0, 40, 1000, 53, EnsembleOptions{});
    CHECK(std::fabs(ens.value - 2.0) <= std::max(4.0 * ens.std_error, 1e-9));

    const auto ker =
        kernel_smoothed_response(sys, noise, phi, 0.0, 0.05, 100, 20000, 59, KernelOptions{});
    CHECK(std::fabs(ker.value - 2.0) <= 4.0 * ker.std_error);
}
