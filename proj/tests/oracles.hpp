#pragma once

// Reference computations for tests: finite differences, quadrature, a dense
// 1D Fokker-Planck grid step, and sample statistics.  These stay independent
// of the library code paths they are used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-5) {
    VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-5) {
    const VectorXd f0 = f(x);
    MatrixXd j(f0.size(), x.size());
    for (int i = 0; i < x.size(); ++i) {
        VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return j;
}

inline double fd_divergence(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-5) {
    return fd_jacobian(f, x, h).trace();
}

inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / (n - 1);
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n - 1; ++i) sum += f(a + i * h);
    return sum * h;
}

inline double trapezoid2d(const std::function<double(double, double)>& f, double a, double b,
                          int n) {
    const double h = (b - a) / (n - 1);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = ((i == 0 || i == n - 1) ? 0.5 : 1.0) *
                             ((j == 0 || j == n - 1) ? 0.5 : 1.0);
            sum += w * f(a + i * h, a + j * h);
        }
    return sum * h * h;
}

struct SampleStats {
    VectorXd mean;
    MatrixXd covariance;
};

inline SampleStats sample_stats(const std::vector<VectorXd>& xs) {
    const int d = static_cast<int>(xs.front().size());
    VectorXd mean = VectorXd::Zero(d);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    MatrixXd cov = MatrixXd::Zero(d, d);
    for (const auto& x : xs) {
        const VectorXd dx = x - mean;
        cov += dx * dx.transpose();
    }
    cov /= static_cast<double>(xs.size()) - 1.0;
    return {std::move(mean), std::move(cov)};
}

/// One explicit-Euler step of dp/dt = -(b p)' + D p'' on a uniform grid with
/// central differences and absorbing ends.
struct FokkerPlanckGrid {
    VectorXd x;
    VectorXd p;
    double h = 0.0;
};

inline FokkerPlanckGrid fp_grid_step(const std::function<double(double)>& drift,
                                     double diffusion_d, double lo, double hi, int n, double dt,
                                     const std::function<double(double)>& p0) {
    FokkerPlanckGrid g;
    g.h = (hi - lo) / (n - 1);
    g.x = VectorXd::LinSpaced(n, lo, hi);
    VectorXd p(n), bp(n);
    for (int i = 0; i < n; ++i) {
        p[i] = p0(g.x[i]);
        bp[i] = drift(g.x[i]) * p[i];
    }
    g.p = p;
    for (int i = 1; i + 1 < n; ++i) {
        const double advect = -(bp[i + 1] - bp[i - 1]) / (2.0 * g.h);
        const double diffuse = diffusion_d * (p[i + 1] - 2.0 * p[i] + p[i - 1]) / (g.h * g.h);
        g.p[i] = p[i] + dt * (advect + diffuse);
    }
    g.p[0] = 0.0;
    g.p[n - 1] = 0.0;
    return g;
}

} // namespace oracles
