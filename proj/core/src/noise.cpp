#include "noprop/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace noprop {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836; // log(2 pi)
constexpr double kFdStep = 1e-5;                  // finite-difference fallback step
} // namespace

GaussianNoise GaussianNoise::isotropic(int dim, double sigma, Vector mean) {
    if (dim < 1) throw std::invalid_argument("GaussianNoise: dim must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("GaussianNoise: sigma must be > 0");
    if (mean.size() == 0) mean = Vector::Zero(dim);
    if (mean.size() != dim) throw std::invalid_argument("GaussianNoise: mean dimension mismatch");
    GaussianNoise g(CovKind::Isotropic, std::move(mean));
    g.sigma_ = sigma;
    g.log_norm_ = -0.5 * dim * kLog2Pi - dim * std::log(sigma);
    return g;
}

GaussianNoise GaussianNoise::diagonal(Vector sigma, Vector mean) {
    const int dim = static_cast<int>(sigma.size());
    if (dim < 1) throw std::invalid_argument("GaussianNoise: sigma_diag must be nonempty");
    double log_det_half = 0.0;
    for (int i = 0; i < dim; ++i) {
        if (!(sigma[i] > 0.0))
            throw std::invalid_argument("GaussianNoise: sigma_diag[" + std::to_string(i) +
                                        "] must be > 0");
        log_det_half += std::log(sigma[i]);
    }
    if (mean.size() == 0) mean = Vector::Zero(dim);
    if (mean.size() != dim) throw std::invalid_argument("GaussianNoise: mean dimension mismatch");
    GaussianNoise g(CovKind::Diagonal, std::move(mean));
    g.sigma_diag_ = std::move(sigma);
    g.log_norm_ = -0.5 * dim * kLog2Pi - log_det_half;
    return g;
}

GaussianNoise GaussianNoise::full(Matrix cov, Vector mean) {
    const int dim = static_cast<int>(cov.rows());
    if (dim < 1 || cov.cols() != dim)
        throw std::invalid_argument("GaussianNoise: cov must be square and nonempty");
    if (!cov.isApprox(cov.transpose(), 1e-12))
        throw std::invalid_argument("GaussianNoise: cov must be symmetric");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("GaussianNoise: cov is not positive definite (Cholesky failed)");
    if (mean.size() == 0) mean = Vector::Zero(dim);
    if (mean.size() != dim) throw std::invalid_argument("GaussianNoise: mean dimension mismatch");
    GaussianNoise g(CovKind::Full, std::move(mean));
    g.chol_l_ = llt.matrixL();
    double log_det_half = 0.0;
    for (int i = 0; i < dim; ++i) log_det_half += std::log(g.chol_l_(i, i));
    g.log_norm_ = -0.5 * dim * kLog2Pi - log_det_half;
    return g;
}

double GaussianNoise::sigma() const {
    if (kind_ != CovKind::Isotropic)
        throw std::logic_error("GaussianNoise::sigma: not an isotropic noise");
    return sigma_;
}

const Matrix& GaussianNoise::cholesky_factor() const {
    if (kind_ != CovKind::Full)
        throw std::logic_error("GaussianNoise::cholesky_factor: not a full-covariance noise");
    return chol_l_;
}

void GaussianNoise::check_dim(const Vector& y) const {
    if (y.size() != mu_.size())
        throw std::invalid_argument("GaussianNoise: dimension mismatch, expected " +
                                    std::to_string(mu_.size()) + " got " +
                                    std::to_string(y.size()));
}

Vector GaussianNoise::sample(RngStream& rng) const {
    const int d = dim();
    Vector z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.next_normal();
    switch (kind_) {
    case CovKind::Isotropic: return mu_ + sigma_ * z;
    case CovKind::Diagonal: return mu_ + sigma_diag_.cwiseProduct(z);
    case CovKind::Full: return mu_ + chol_l_ * z;
    }
    return z; // unreachable
}

Vector GaussianNoise::score(const Vector& y) const {
    check_dim(y);
    const Vector d = y - mu_;
    switch (kind_) {
    case CovKind::Isotropic: return -d / (sigma_ * sigma_);
    case CovKind::Diagonal: return (-d.array() / sigma_diag_.array().square()).matrix();
    case CovKind::Full: {
        Vector s = chol_l_.triangularView<Eigen::Lower>().solve(d);
        chol_l_.transpose().triangularView<Eigen::Upper>().solveInPlace(s);
        return -s;
    }
    }
    return d; // unreachable
}

double GaussianNoise::log_density(const Vector& y) const {
    check_dim(y);
    const Vector d = y - mu_;
    switch (kind_) {
    case CovKind::Isotropic: return log_norm_ - 0.5 * d.squaredNorm() / (sigma_ * sigma_);
    case CovKind::Diagonal:
        return log_norm_ - 0.5 * (d.array() / sigma_diag_.array()).square().sum();
    case CovKind::Full: {
        const Vector z = chol_l_.triangularView<Eigen::Lower>().solve(d);
        return log_norm_ - 0.5 * z.squaredNorm();
    }
    }
    return 0; // unreachable
}

NoiseField::NoiseField(Family family) : family_(std::move(family)) {
    if (!family_) throw std::invalid_argument("NoiseField: family must be callable");
}

NoiseField::NoiseField(Family family, Partials partials)
    : family_(std::move(family)), partials_(std::move(partials)) {
    if (!family_) throw std::invalid_argument("NoiseField: family must be callable");
}

NoiseField NoiseField::constant(GaussianNoise noise) {
    const int d = noise.dim();
    Partials p;
    p.dlogp_dgamma = [](double, const Vector&, const Vector&) { return 0.0; };
    p.dlogp_dz = [d](double, const Vector&, const Vector&) { return Vector::Zero(d).eval(); };
    NoiseField field([noise = std::move(noise)](double, const Vector&) { return noise; },
                     std::move(p));
    field.trivial_ = true;
    return field;
}

double NoiseField::dlogp_dgamma(double gamma, const Vector& z, const Vector& y) const {
    if (partials_.dlogp_dgamma) return partials_.dlogp_dgamma(gamma, z, y);
    const double lp = family_(gamma + kFdStep, z).log_density(y);
    const double lm = family_(gamma - kFdStep, z).log_density(y);
    return (lp - lm) / (2.0 * kFdStep);
}

Vector NoiseField::dlogp_dz(double gamma, const Vector& z, const Vector& y) const {
    if (partials_.dlogp_dz) return partials_.dlogp_dz(gamma, z, y);
    Vector g(z.size());
    Vector zp = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        zp[i] = z[i] + kFdStep;
        const double lp = family_(gamma, zp).log_density(y);
        zp[i] = z[i] - kFdStep;
        const double lm = family_(gamma, zp).log_density(y);
        zp[i] = z[i];
        g[i] = (lp - lm) / (2.0 * kFdStep);
    }
    return g;
}

Vector NoiseField::dlogp_dy(double gamma, const Vector& z, const Vector& y) const {
    if (partials_.dlogp_dy) return partials_.dlogp_dy(gamma, z, y);
    return family_(gamma, z).score(y);
}

double generalized_weight(const NoiseField& field, double gamma, const Vector& z,
                          const Vector& y, const Vector& df) {
    if (df.size() != z.size() || y.size() != z.size())
        throw std::invalid_argument("generalized_weight: dimension mismatch");
    const double dgamma_term = field.dlogp_dgamma(gamma, z, y);
    const Vector dz = field.dlogp_dz(gamma, z, y);
    const Vector dy = field.dlogp_dy(gamma, z, y);
    return dgamma_term + df.dot((dz - dy).eval());
}

} // namespace noprop
