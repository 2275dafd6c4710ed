#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "noprop/rng.hpp"
#include "noprop/stats.hpp"

using namespace noprop;

TEST_CASE("accumulator matches hand values") {
    MomentAccumulator acc;
    for (double v : {1.0, 2.0, 3.0}) acc.add(v);
    CHECK(acc.count() == 3);
    CHECK(acc.mean() == doctest::Approx(2.0));
    CHECK(acc.sample_variance() == doctest::Approx(1.0));
}

TEST_CASE("single value: variance reported as 0 with the count-1 flag") {
    MomentAccumulator acc;
    acc.add(5.0);
    CHECK(acc.degenerate());
    CHECK(acc.sample_variance() == 0.0);
    CHECK(acc.std_error() == 0.0);
}

TEST_CASE("non-finite input is rejected") {
    MomentAccumulator acc;
    CHECK_THROWS(acc.add(std::nan("")));
    CHECK_THROWS(acc.add(INFINITY));
}

TEST_CASE("merge({1,2},{3}) equals accumulate-all({1,2,3})") {
    MomentAccumulator a, b, all;
    a.add(1.0);
    a.add(2.0);
    b.add(3.0);
    a.merge(b);
    for (double v : {1.0, 2.0, 3.0}) all.add(v);
    CHECK(a.count() == all.count());
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(a.sample_variance() == doctest::Approx(all.sample_variance()).epsilon(1e-12));
}

TEST_CASE("merge is associative and order-independent to 1e-12") {
    RngStream rng(11);
    std::vector<double> xs(3000);
    for (auto& x : xs) x = 10.0 * rng.next_normal() + 3.0;

    MomentAccumulator whole;
    for (double x : xs) whole.add(x);

    MomentAccumulator p1, p2, p3;
    for (int i = 0; i < 1000; ++i) p1.add(xs[static_cast<std::size_t>(i)]);
    for (int i = 1000; i < 1700; ++i) p2.add(xs[static_cast<std::size_t>(i)]);
    for (int i = 1700; i < 3000; ++i) p3.add(xs[static_cast<std::size_t>(i)]);

    // (p1+p2)+p3
    MomentAccumulator left = p1;
    left.merge(p2);
    left.merge(p3);
    // p1+(p2+p3)
    MomentAccumulator right = p2;
    right.merge(p3);
    MomentAccumulator right2 = p1;
    right2.merge(right);

    for (const auto* m : {&left, &right2}) {
        CHECK(m->mean() == doctest::Approx(whole.mean()).epsilon(1e-12));
        CHECK(m->sample_variance() == doctest::Approx(whole.sample_variance()).epsilon(1e-12));
    }
}

TEST_CASE("batch means agrees with the naive error for i.i.d. data") {
    RngStream rng(5);
    std::vector<double> xs(100000);
    MomentAccumulator acc;
    for (auto& x : xs) {
        x = rng.next_normal();
        acc.add(x);
    }
    const double bm = batch_means_stderr(xs, 50);
    CHECK(bm == doctest::Approx(acc.std_error()).epsilon(0.2));
}

TEST_CASE("batch means of a constant series is 0") {
    std::vector<double> xs(1000, 3.25);
    CHECK(batch_means_stderr(xs, 50) == 0.0);
}

TEST_CASE("batch means is invariant under adding a constant") {
    RngStream rng(6);
    std::vector<double> xs(20000), ys(20000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = rng.next_normal();
        ys[i] = xs[i] + 100.0;
    }
    CHECK(batch_means_stderr(xs, 50) ==
          doctest::Approx(batch_means_stderr(ys, 50)).epsilon(1e-9));
}

TEST_CASE("batch means sees AR(1) autocorrelation the naive error misses") {
    // AR(1) with a = 0.9: the error inflation factor is about
    // sqrt((1+a)/(1-a)) = sqrt(19) = 4.36
    RngStream rng(8);
    const double a = 0.9;
    std::vector<double> xs(200000);
    double x = 0.0;
    MomentAccumulator acc;
    for (auto& v : xs) {
        x = a * x + rng.next_normal();
        v = x;
        acc.add(x);
    }
    const double ratio = batch_means_stderr(xs, 50) / acc.std_error();
    CHECK(ratio > 2.0);
}

TEST_CASE("batch means rejects too-short series") {
    std::vector<double> xs(40, 1.0);
    CHECK_THROWS(batch_means_stderr(xs, 50));
}

TEST_CASE("log-log fit recovers exact power laws") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1e3, 1e4, 1e5}) pts.emplace_back(x, 1.0 / std::sqrt(x));
    auto fit = loglog_slope(pts);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));

    pts.clear();
    for (double x : {3.0, 10.0, 30.0, 100.0}) pts.emplace_back(x, 0.001 * std::sqrt(x));
    fit = loglog_slope(pts);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(0.001)).epsilon(1e-9));
}

TEST_CASE("log-log fit rejects nonpositive inputs and tiny point sets") {
    std::vector<std::pair<double, double>> pts = {{1.0, 1.0}, {2.0, 0.5}};
    CHECK_THROWS(loglog_slope(pts));
    pts = {{1.0, 1.0}, {2.0, 0.5}, {3.0, -0.1}};
    CHECK_THROWS(loglog_slope(pts));
}
