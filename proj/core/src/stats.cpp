#include "noprop/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace noprop {

void MomentAccumulator::add(double x) {
    if (!std::isfinite(x))
        throw std::runtime_error("MomentAccumulator: non-finite value " + std::to_string(x));
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double d = other.mean_ - mean_;
    const double n = na + nb;
    mean_ += d * nb / n;
    m2_ += other.m2_ + d * d * na * nb / n;
    n_ += other.n_;
}

double MomentAccumulator::sample_variance() const noexcept {
    if (n_ < 2) return 0.0;
    return m2_ / static_cast<double>(n_ - 1);
}

double MomentAccumulator::sample_std() const noexcept {
    return std::sqrt(sample_variance());
}

double MomentAccumulator::std_error() const noexcept {
    if (n_ < 2) return 0.0;
    return std::sqrt(sample_variance() / static_cast<double>(n_));
}

double batch_means_stderr(std::span<const double> series, int n_batches) {
    if (n_batches < 2) throw std::invalid_argument("batch_means_stderr: n_batches must be >= 2");
    const std::int64_t len = static_cast<std::int64_t>(series.size());
    if (len < 2 * static_cast<std::int64_t>(n_batches))
        throw std::invalid_argument("batch_means_stderr: series length " + std::to_string(len) +
                                    " < 2*n_batches = " + std::to_string(2 * n_batches));
    const std::int64_t m = len / n_batches;
    MomentAccumulator batches;
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::int64_t i = b * m; i < (b + 1) * m; ++i) s += series[static_cast<std::size_t>(i)];
        batches.add(s / static_cast<double>(m));
    }
    return batches.std_error();
}

LineFit loglog_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0))
            throw std::invalid_argument("loglog_slope: inputs must be positive");
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(points.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("loglog_slope: degenerate x values");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

} // namespace noprop
