#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

#include "noprop/rng.hpp"

namespace noprop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class CovKind { Isotropic, Diagonal, Full };

// Additive Gaussian noise: sampler, log-density, and score d(log p)/dy.
//
// Sampling consumes exactly dim() normal draws (one uint64 each), so reruns
// with a copied stream reproduce the same noise, and draw counts never depend
// on the realized values.
//
// On circle phase spaces the score of the mod-1 wrapped noise is taken to be
// the unwrapped Gaussian score. At sigma = 0.1 the wrapped-away mass is below
// e^-50, so the two agree to rounding; the approximation degrades for
// sigma >= 0.3.
class GaussianNoise {
public:
    GaussianNoise() : GaussianNoise(isotropic(1, 1.0)) {}

    static GaussianNoise isotropic(int dim, double sigma, Vector mean = {});
    static GaussianNoise diagonal(Vector sigma, Vector mean = {});
    // Cholesky-factored at construction; throws if cov is not symmetric
    // positive definite.
    static GaussianNoise full(Matrix cov, Vector mean = {});

    int dim() const noexcept { return static_cast<int>(mu_.size()); }
    CovKind kind() const noexcept { return kind_; }
    const Vector& mean() const noexcept { return mu_; }
    double sigma() const;             // isotropic only
    const Matrix& cholesky_factor() const;  // full only

    Vector sample(RngStream& rng) const;
    Vector score(const Vector& y) const;    // -Sigma^{-1}(y - mu)
    double log_density(const Vector& y) const;

private:
    GaussianNoise(CovKind kind, Vector mu) : mu_(std::move(mu)), kind_(kind) {}
    void check_dim(const Vector& y) const;

    Vector mu_;
    CovKind kind_;
    double sigma_ = 1.0;   // isotropic
    Vector sigma_diag_;    // diagonal
    Matrix chol_l_;        // full, lower factor
    double log_norm_ = 0;  // -(d/2) log(2 pi) - (1/2) log det Sigma
};

// Noise whose density p_{gamma,z}(y) may depend on the parameter and on the
// pre-noise point z = f_gamma(x). Partial derivatives of log p default to
// central finite differences of the family's log-density (step 1e-5);
// analytic closures can be supplied instead.
class NoiseField {
public:
    using Family = std::function<GaussianNoise(double gamma, const Vector& z)>;

    struct Partials {
        std::function<double(double, const Vector&, const Vector&)> dlogp_dgamma;
        std::function<Vector(double, const Vector&, const Vector&)> dlogp_dz;
        std::function<Vector(double, const Vector&, const Vector&)> dlogp_dy;
    };

    explicit NoiseField(Family family);
    NoiseField(Family family, Partials partials);

    // The field that ignores gamma and z entirely. Its generalized weight
    // reduces to -df.score(y) on the shared code path, bit for bit.
    static NoiseField constant(GaussianNoise noise);

    GaussianNoise at(double gamma, const Vector& z) const { return family_(gamma, z); }
    bool is_trivial() const noexcept { return trivial_; }

    double dlogp_dgamma(double gamma, const Vector& z, const Vector& y) const;
    Vector dlogp_dz(double gamma, const Vector& z, const Vector& y) const;
    Vector dlogp_dy(double gamma, const Vector& z, const Vector& y) const;

private:
    Family family_;
    Partials partials_;
    bool trivial_ = false;
};

// Per-step weight dp/(p dgamma)(z, y) of the parameter- and location-dependent
// noise: dlogp/dgamma + df . (dlogp/dz - dlogp/dy), evaluated at the realized
// noise y with z = f_gamma(x). For a field with no gamma or z dependence this
// equals -df . score(y).
double generalized_weight(const NoiseField& field, double gamma, const Vector& z,
                          const Vector& y, const Vector& df);

} // namespace noprop
