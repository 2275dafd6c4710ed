#include "noprop/system.hpp"

#include <cmath>
#include <stdexcept>

namespace noprop {

namespace {

void check_dim(const SystemSpec& sys, const Vector& x, const char* what) {
    if (x.size() != sys.dim)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch for system '" +
                                    sys.name + "', expected " + std::to_string(sys.dim) +
                                    " got " + std::to_string(x.size()));
}

} // namespace

Vector step_map(const SystemSpec& sys, double gamma, int n, const Vector& x) {
    check_dim(sys, x, "step_map");
    return sys.step(gamma, n, x);
}

Vector param_derivative(const SystemSpec& sys, double gamma, int n, const Vector& x) {
    check_dim(sys, x, "param_derivative");
    return sys.param_derivative(gamma, n, x);
}

Vector project(const SystemSpec& sys, const Vector& x) {
    if (!sys.project) return x;
    return sys.project(x);
}

Vector jacobian_transpose_apply(const SystemSpec& sys, double gamma, int n, const Vector& x,
                                const Vector& w) {
    if (!sys.has_jacobian())
        throw std::invalid_argument("jacobian_transpose_apply: system '" + sys.name +
                                    "' does not provide a Jacobian");
    check_dim(sys, x, "jacobian_transpose_apply");
    check_dim(sys, w, "jacobian_transpose_apply (covector)");
    return sys.jacobian_transpose(gamma, n, x, w);
}

SystemSpec make_tent_map() {
    SystemSpec sys;
    sys.name = "tent";
    sys.dim = 1;
    sys.step = [](double gamma, int, const Vector& x) {
        Vector z(1);
        z[0] = (x[0] <= 0.5) ? gamma * x[0] : gamma * (1.0 - x[0]);
        return z;
    };
    sys.param_derivative = [](double, int, const Vector& x) {
        Vector d(1);
        d[0] = (x[0] <= 0.5) ? x[0] : 1.0 - x[0];
        return d;
    };
    // left derivative at the tip x = 0.5
    sys.jacobian_transpose = [](double gamma, int, const Vector& x, const Vector& w) {
        Vector r(1);
        r[0] = (x[0] <= 0.5 ? gamma : -gamma) * w[0];
        return r;
    };
    sys.project = [](const Vector& x) {
        Vector p(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) p[i] = x[i] - std::floor(x[i]);
        return p;
    };
    return sys;
}

const Eigen::Matrix<double, 9, 9>& chaotic_net_j0() {
    static const Eigen::Matrix<double, 9, 9> j0 = [] {
        Eigen::Matrix<double, 9, 9> m;
        m << -0.54, -1.19, -0.33,  1.66, -0.5,  -1.3,   1.52, -0.5,   1.95,
             -1.6,  -1.55, -1.45,  0.61,  1.92,  0.59, -0.16, -1.14, -1.27,
             -0.59, -0.65, -1.32, -1.46, -0.82, -0.95, -1.47, -0.08, -0.38,
             -0.78, -0.26,  0.87,  1.99,  0.07,  0.87, -0.79, -0.44,  1.11,
              0.8,  -1.28, -0.52, -1.01,  1.49,  1.49, -1.65, -0.45,  0.21,
             -1.77,  0.03, -1.39, -0.28,  0.44,  1.27,  0.61,  0.01, -0.02,
             -0.18, -0.29, -0.73,  0.53, -0.82, -1.58, -1.41,  0.07, -1.84,
              0.64,  0.86,  0.73,  0.96, -0.06,  0.04,  1.1,   1.22, -0.28,
              1.18, -1.95, -0.37,  0.01,  1.24, -0.32,  0.43,  0.06, -1.28;
        return m;
    }();
    return j0;
}

SystemSpec make_chaotic_net(double c) {
    const Matrix j = c * chaotic_net_j0();
    SystemSpec sys;
    sys.name = "chaotic_net";
    sys.dim = 9;
    sys.step = [j](double gamma, int, const Vector& x) -> Vector {
        return j * (x.array() + gamma).tanh().matrix();
    };
    // d/dgamma tanh(x_i + gamma) = sech^2(x_i + gamma) = 1 - tanh^2
    sys.param_derivative = [j](double gamma, int, const Vector& x) -> Vector {
        const Eigen::ArrayXd t = (x.array() + gamma).tanh();
        return j * (1.0 - t.square()).matrix();
    };
    // Df = J diag(sech^2(x + gamma)), so Df^T w = diag(sech^2) J^T w
    sys.jacobian_transpose = [j](double gamma, int, const Vector& x, const Vector& w) -> Vector {
        const Eigen::ArrayXd t = (x.array() + gamma).tanh();
        return ((j.transpose() * w).array() * (1.0 - t.square())).matrix();
    };
    return sys;
}

SystemSpec make_ar1(double a) {
    if (!(std::fabs(a) < 1.0)) throw std::invalid_argument("make_ar1: need |a| < 1");
    SystemSpec sys;
    sys.name = "ar1";
    sys.dim = 1;
    sys.step = [a](double gamma, int, const Vector& x) {
        Vector z(1);
        z[0] = a * x[0] + gamma;
        return z;
    };
    sys.param_derivative = [](double, int, const Vector&) {
        Vector d(1);
        d[0] = 1.0;
        return d;
    };
    sys.jacobian_transpose = [a](double, int, const Vector&, const Vector& w) {
        Vector r(1);
        r[0] = a * w[0];
        return r;
    };
    return sys;
}

Observable make_coordinate_observable() {
    Observable phi;
    phi.name = "x";
    phi.value = [](const Vector& x) { return x[0]; };
    phi.gradient = [](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        g[0] = 1.0;
        return g;
    };
    return phi;
}

Observable make_mean_observable(int dim) {
    Observable phi;
    phi.name = "mean";
    phi.value = [](const Vector& x) { return x.mean(); };
    phi.gradient = [dim](const Vector&) {
        return Vector::Constant(dim, 1.0 / static_cast<double>(dim)).eval();
    };
    return phi;
}

Observable observable_by_name(const std::string& name, int dim) {
    if (name == "x") return make_coordinate_observable();
    if (name == "mean") return make_mean_observable(dim);
    throw std::invalid_argument("unknown observable '" + name + "' (expected x or mean)");
}

} // namespace noprop
