#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "noprop/noise.hpp"

namespace noprop {

// Deterministic part f_{gamma,n} of a random dynamical system
// x_{n+1} = project(f_{gamma,n}(x_n) + y_{n+1}), with its parameter
// derivative and, when available, the transposed-Jacobian action needed by
// the covector-propagation baseline. Evaluators must be pure functions of
// their arguments; the spec is shared read-only across workers.
struct SystemSpec {
    std::string name;
    int dim = 1;

    // f_{gamma,n}(x), before noise and before projection
    std::function<Vector(double gamma, int n, const Vector& x)> step;
    // d f_{gamma,n}(x) / d gamma
    std::function<Vector(double gamma, int n, const Vector& x)> param_derivative;
    // (Df_{gamma,n}(x))^T w; leave empty when the system has no usable Jacobian
    std::function<Vector(double gamma, int n, const Vector& x, const Vector& w)>
        jacobian_transpose;
    // post-noise projection (mod 1 for circle systems); empty means identity
    std::function<Vector(const Vector& x)> project;

    bool has_jacobian() const noexcept { return static_cast<bool>(jacobian_transpose); }
};

// Contract-checked wrappers around the SystemSpec evaluators.
Vector step_map(const SystemSpec& sys, double gamma, int n, const Vector& x);
Vector param_derivative(const SystemSpec& sys, double gamma, int n, const Vector& x);
Vector project(const SystemSpec& sys, const Vector& x);
Vector jacobian_transpose_apply(const SystemSpec& sys, double gamma, int n, const Vector& x,
                                const Vector& w);

// Tent map with elevating center on the circle [0,1):
//   f_gamma(x) = gamma*x        for x <= 0.5
//              = gamma*(1-x)    otherwise,
// with mod-1 projection applied after the noise. The map is not
// differentiable at x = 0.5; the shipped Jacobian takes the left derivative
// there (the point is measure-zero and only the covector baseline reads it).
SystemSpec make_tent_map();

// 9-neuron recurrent network f_gamma(x) = J tanh(x + gamma*1), J = C*J0,
// chaotic near C = 4.
SystemSpec make_chaotic_net(double c = 4.0);
const Eigen::Matrix<double, 9, 9>& chaotic_net_j0();

// Linear contraction f_gamma(x) = a*x + gamma, |a| < 1. Analytically
// solvable: the stationary mean is gamma/(1-a) and the response of
// Phi(x) = x is 1/(1-a), with per-lag contributions a^n.
SystemSpec make_ar1(double a = 0.5);

// Scalar observable with an optional analytic gradient (the gradient is
// consumed only by the covector-propagation baseline).
struct Observable {
    std::string name;
    std::function<double(const Vector& x)> value;
    std::function<Vector(const Vector& x)> gradient;
};

// Phi(x) = x_0 ("x") and Phi(x) = mean of coordinates ("mean").
Observable make_coordinate_observable();
Observable make_mean_observable(int dim);
Observable observable_by_name(const std::string& name, int dim);

} // namespace noprop
