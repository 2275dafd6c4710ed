#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace noprop {

// Single-pass mean/variance accumulator (Welford update). Mergeable, so one
// accumulator per worker can be combined in a fixed order afterwards.
class MomentAccumulator {
public:
    void add(double x);
    void merge(const MomentAccumulator& other);

    std::int64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }

    // Sample variance (n-1 denominator); 0 when fewer than two values.
    double sample_variance() const noexcept;
    double sample_std() const noexcept;
    // Standard error of the mean; 0 when fewer than two values.
    double std_error() const noexcept;
    // True when variance is undefined (count < 2) and reported as 0.
    bool degenerate() const noexcept { return n_ < 2; }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Standard error of the grand mean of a serially correlated series, from
// n_batches equal contiguous batches. Requires series.size() >= 2*n_batches;
// a trailing remainder shorter than one batch is dropped.
double batch_means_stderr(std::span<const double> series, int n_batches);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares fit of log(y) against log(x). All inputs must be positive;
// at least 3 points. intercept is in natural-log units.
LineFit loglog_slope(std::span<const std::pair<double, double>> points);

} // namespace noprop
