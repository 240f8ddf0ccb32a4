#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "akf/errors.hpp"

namespace akf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One weighted Gaussian component.  The weight multiplies the *normalized*
/// density N(x; mu, Sigma), so the component's mass equals its weight and the
/// total mass of a mixture is the plain sum of weights.  Weights may be signed.
class GaussianKernel {
public:
    /// Symmetrizes the covariance, adds one round of jitter if needed, and
    /// caches the Cholesky factor.  Throws std::invalid_argument if the
    /// covariance is not positive definite after that, or if any input is
    /// non-finite.
    GaussianKernel(double weight, Vector mean, Matrix covariance);

    int dim() const { return static_cast<int>(mean_.size()); }
    double weight() const { return weight_; }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }

    /// Lower-triangular Cholesky factor of the covariance.
    const Matrix& chol() const { return chol_; }

    /// Normalized density N(x; mu, Sigma).
    double density(const Vector& x) const;

    /// Gradient of density(): -N(x; mu, Sigma) * Sigma^{-1} (x - mu).
    Vector density_gradient(const Vector& x) const;

    /// Returns a copy with a different weight, reusing the cached factor.
    GaussianKernel with_weight(double w) const;

private:
    double weight_;
    Vector mean_;
    Matrix cov_;
    Matrix chol_;     // lower triangular, cov_ = chol_ * chol_^T
    double log_norm_; // log of (2 pi)^{-d/2} |Sigma|^{-1/2}
};

/// Ordered list of Gaussian kernels over a fixed state dimension; the density
/// approximation p_n = sum_k w_k N(x; mu_k, Sigma_k).
class KernelMixture {
public:
    explicit KernelMixture(int dim);
    KernelMixture(int dim, std::vector<GaussianKernel> kernels);

    int dim() const { return dim_; }
    std::size_t size() const { return kernels_.size(); }
    bool empty() const { return kernels_.empty(); }
    const std::vector<GaussianKernel>& kernels() const { return kernels_; }
    const GaussianKernel& kernel(std::size_t k) const { return kernels_[k]; }

    void add(GaussianKernel k);

    double total_mass() const;
    bool has_negative_weight() const;

    /// sum_k w_k N(x; mu_k, Sigma_k); may be negative for signed mixtures.
    double evaluate(const Vector& x) const;

    /// Exact analytic gradient of evaluate().
    Vector gradient(const Vector& x) const;

    struct Moments {
        Vector mean;
        Matrix covariance;
    };

    /// Mixture mean and covariance.  Throws DegenerateMixtureError when the
    /// total mass is not positive.
    Moments moments() const;

    /// `count` i.i.d. draws: pick a kernel with probability w_k / sum w, then
    /// draw from it through the Cholesky factor.  Throws SignedSamplingError
    /// if any weight is negative, DegenerateMixtureError on mass <= 0.
    std::vector<Vector> sample(int count, std::mt19937_64& rng) const;

    /// Same mixture rescaled to total mass one.  Throws NonNormalizableError
    /// on mass <= 0 (signals filter divergence upstream).
    KernelMixture normalized() const;

    /// Kernels with |w_k|; the sampling proposal for signed mixtures.
    KernelMixture absolute_weights() const;

    /// One kernel per line: weight, mean entries, row-major covariance
    /// entries, as decimal floats.
    void save(std::ostream& out) const;
    static KernelMixture load(std::istream& in);

private:
    int dim_;
    std::vector<GaussianKernel> kernels_;
};

} // namespace akf
