#include "akf/fokker_planck.hpp"

#include <cmath>

#include "akf/errors.hpp"

namespace akf {

namespace {
constexpr double kConditionGuard = 1e12;
}

TransportMap::TransportMap(Matrix m, Vector c) : m_(std::move(m)), c_(std::move(c)) {
    Eigen::JacobiSVD<Matrix> svd(m_);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    cond_ = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!std::isfinite(cond_) || cond_ >= kConditionGuard)
        throw TransportError("TransportMap: map is near-singular; reduce the time step");
    m_inv_ = m_.inverse();
}

TransportMap TransportMap::identity(int dim) {
    return TransportMap(Matrix::Identity(dim, dim), Vector::Zero(dim));
}

LinearDrift linearize_drift(const StateModel& model, double t, const KernelMixture& mixture,
                            std::mt19937_64& rng, int n_samples) {
    const int d = model.dim;
    const auto xs = mixture.sample(n_samples, rng);

    Vector mean_x = Vector::Zero(d), mean_b = Vector::Zero(d);
    std::vector<Vector> bs;
    bs.reserve(xs.size());
    for (const auto& x : xs) {
        bs.push_back(model.drift(t, x));
        mean_x += x;
        mean_b += bs.back();
    }
    mean_x /= static_cast<double>(xs.size());
    mean_b /= static_cast<double>(xs.size());

    Matrix cxx = Matrix::Zero(d, d), cbx = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const Vector dx = xs[i] - mean_x;
        cxx += dx * dx.transpose();
        cbx += (bs[i] - mean_b) * dx.transpose();
    }
    cxx /= static_cast<double>(xs.size());
    cbx /= static_cast<double>(xs.size());

    const Matrix creg = cxx + (1e-10 * cxx.trace() / d) * Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(creg);
    if (llt.info() != Eigen::Success) {
        LinearDrift lin;
        lin.A = Matrix::Zero(d, d);
        lin.alpha = mean_b;
        lin.fallback = true;
        return lin;
    }

    // A creg = cbx  =>  creg^T A^T = cbx^T
    Matrix a = llt.solve(cbx.transpose()).transpose();
    // one refinement pass: regress the residual against the same system so the
    // ridge bias cancels for (near-)linear drift
    Matrix crx = Matrix::Zero(d, d);
    {
        Vector mean_r = Vector::Zero(d);
        std::vector<Vector> rs(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            rs[i] = bs[i] - a * xs[i];
            mean_r += rs[i];
        }
        mean_r /= static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            crx += (rs[i] - mean_r) * (xs[i] - mean_x).transpose();
        crx /= static_cast<double>(xs.size());
    }
    a += llt.solve(crx.transpose()).transpose();

    LinearDrift lin;
    lin.A = std::move(a);
    lin.alpha = mean_b - lin.A * mean_x;
    return lin;
}

std::pair<KernelMixture, TransportMap> transport_linear(const KernelMixture& mixture,
                                                        const LinearDrift& lin, double dt) {
    const int d = mixture.dim();
    TransportMap map(Matrix::Identity(d, d) + dt * lin.A, dt * lin.alpha);
    KernelMixture out(d);
    for (const auto& k : mixture.kernels()) {
        Vector mu = map.apply(k.mean());
        Matrix cov = map.forward() * k.covariance() * map.forward().transpose();
        out.add(GaussianKernel(k.weight(), std::move(mu), std::move(cov)));
    }
    return {std::move(out), std::move(map)};
}

DriftBundle residual_drift(const StateModel& model, const LinearDrift& lin,
                           const TransportMap& map, double t) {
    DriftBundle bundle;
    const Matrix a = lin.A;
    const Vector alpha = lin.alpha;
    const Matrix m_inv = map.inverse();
    const Vector c = map.offset();

    auto pull_back = [m_inv, c](const Vector& x) -> Vector { return m_inv * (x - c); };

    const auto drift = model.drift;
    bundle.value = [drift, a, alpha, pull_back, t](const Vector& x) -> Vector {
        const Vector u = pull_back(x);
        return drift(t, u) - (a * u + alpha);
    };

    if (model.drift_jacobian) {
        const auto jac = model.drift_jacobian;
        bundle.divergence = [jac, a, m_inv, pull_back, t](const Vector& x) -> double {
            const Vector u = pull_back(x);
            return ((jac(t, u) - a) * m_inv).trace();
        };
    } else {
        const int d = model.dim;
        bundle.divergence = [drift, a, m_inv, pull_back, t, d](const Vector& x) -> double {
            const Vector u = pull_back(x);
            Matrix j(d, d);
            for (int col = 0; col < d; ++col) {
                const double h = 1e-5 * std::max(1.0, std::abs(u[col]));
                Vector up = u, um = u;
                up[col] += h;
                um[col] -= h;
                j.col(col) = (drift(t, up) - drift(t, um)) / (2.0 * h);
            }
            return ((j - a) * m_inv).trace();
        };
    }
    return bundle;
}

double evaluate_target(const ResidualTarget& target, const Vector& x) {
    const double p = target.transported.evaluate(x);
    const Vector grad = target.transported.gradient(x);
    const Vector b = target.residual.value(x);
    const double div = target.residual.divergence(x);
    return p * (1.0 - target.dt * div) - target.dt * b.dot(grad);
}

KernelMixture inflate_diffusion(const KernelMixture& mixture, const StateModel& model, double t,
                                double dt) {
    const Matrix sig = model.diffusion(t);
    if (sig.isZero(0.0)) return mixture;
    const Matrix add = dt * sig * sig.transpose();
    KernelMixture out(mixture.dim());
    for (const auto& k : mixture.kernels())
        out.add(GaussianKernel(k.weight(), k.mean(), k.covariance() + add));
    return out;
}

} // namespace akf
