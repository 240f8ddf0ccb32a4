#pragma once

#include <functional>
#include <random>
#include <utility>

#include "akf/mixture.hpp"
#include "akf/models.hpp"

namespace akf {

/// Least-squares affine drift b^L(x) = A x + alpha.
struct LinearDrift {
    Matrix A;
    Vector alpha;
    bool fallback = false; // regression degenerated to A = 0, alpha = mean drift
};

/// Affine push-forward x -> M x + c with M = A dt + I, c = alpha dt.
class TransportMap {
public:
    TransportMap(Matrix m, Vector c);

    static TransportMap identity(int dim);

    const Matrix& forward() const { return m_; }
    const Vector& offset() const { return c_; }
    const Matrix& inverse() const { return m_inv_; }
    double condition() const { return cond_; }

    Vector apply(const Vector& x) const { return m_ * x + c_; }
    Vector apply_inverse(const Vector& x) const { return m_inv_ * (x - c_); }

private:
    Matrix m_;
    Vector c_;
    Matrix m_inv_;
    double cond_;
};

/// Residual drift pulled back through the transport map, with its divergence.
struct DriftBundle {
    std::function<Vector(const Vector&)> value;      // b^N(T^{-1} x)
    std::function<double(const Vector&)> divergence; // div_x of value
};

/// Everything needed to evaluate the prediction target pointwise.
struct ResidualTarget {
    KernelMixture transported; // linearly transported kernels
    DriftBundle residual;
    double dt = 0.0;
};

/// Fits b(t, .) by affine least squares over samples from the mixture:
/// A = Cov(b, X) Cov(X, X)^{-1}, alpha = mean(b) - A mean(X), with ridge
/// regularization 1e-10 tr(Cov)/d and one refinement pass.  Falls back to
/// A = 0, alpha = mean(b) when the regularized covariance is singular.
LinearDrift linearize_drift(const StateModel& model, double t, const KernelMixture& mixture,
                            std::mt19937_64& rng, int n_samples = 2000);

/// Pushes every kernel through x -> M x + c: (w, mu, S) -> (w, M mu + c, M S M^T).
/// Throws TransportError when cond(M) >= 1e12.
std::pair<KernelMixture, TransportMap> transport_linear(const KernelMixture& mixture,
                                                        const LinearDrift& lin, double dt);

/// value(x) = b(t, T^{-1}x) - (A T^{-1}x + alpha);
/// divergence(x) = tr[(J_b(T^{-1}x) - A) M^{-1}], finite differences when the
/// model carries no Jacobian.
DriftBundle residual_drift(const StateModel& model, const LinearDrift& lin,
                           const TransportMap& map, double t);

/// g(x) = sum_k [ p_k(x) (1 - dt div b) - dt b . grad p_k(x) ] with b the
/// residual drift; the one-step explicit update of the transported kernels
/// under the drift-only Fokker-Planck operator.
double evaluate_target(const ResidualTarget& target, const Vector& x);

/// Adds dt sigma sigma^T to every kernel covariance.
KernelMixture inflate_diffusion(const KernelMixture& mixture, const StateModel& model, double t,
                                double dt);

} // namespace akf
