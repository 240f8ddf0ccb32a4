#include "akf/mixture.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace akf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool all_finite(const Matrix& m) { return m.allFinite(); }

} // namespace

GaussianKernel::GaussianKernel(double weight, Vector mean, Matrix covariance)
    : weight_(weight), mean_(std::move(mean)), cov_(std::move(covariance)) {
    const int d = static_cast<int>(mean_.size());
    if (d <= 0 || cov_.rows() != d || cov_.cols() != d)
        throw std::invalid_argument("GaussianKernel: covariance shape does not match mean");
    if (!std::isfinite(weight_) || !mean_.allFinite() || !all_finite(cov_))
        throw std::invalid_argument("GaussianKernel: non-finite parameter");

    cov_ = ((cov_ + cov_.transpose()) * 0.5).eval();
    Eigen::LLT<Matrix> llt(cov_);
    if (llt.info() != Eigen::Success) {
        // one round of jitter before rejecting
        const double jitter = 1e-10 * cov_.trace() / d;
        cov_ += jitter * Matrix::Identity(d, d);
        llt.compute(cov_);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("GaussianKernel: covariance not positive definite");
    }
    chol_ = llt.matrixL();
    log_norm_ = -0.5 * d * std::log(kTwoPi) - chol_.diagonal().array().log().sum();
}

double GaussianKernel::density(const Vector& x) const {
    if (x.size() != mean_.size())
        throw std::invalid_argument("GaussianKernel::density: dimension mismatch");
    Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    return std::exp(log_norm_ - 0.5 * z.squaredNorm());
}

Vector GaussianKernel::density_gradient(const Vector& x) const {
    if (x.size() != mean_.size())
        throw std::invalid_argument("GaussianKernel::density_gradient: dimension mismatch");
    Vector z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
    const double dens = std::exp(log_norm_ - 0.5 * z.squaredNorm());
    // Sigma^{-1}(x - mu) = L^{-T} z
    Vector siginv_dx = chol_.transpose().triangularView<Eigen::Upper>().solve(z);
    return -dens * siginv_dx;
}

GaussianKernel GaussianKernel::with_weight(double w) const {
    GaussianKernel k(*this);
    k.weight_ = w;
    return k;
}

KernelMixture::KernelMixture(int dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("KernelMixture: dim must be positive");
}

KernelMixture::KernelMixture(int dim, std::vector<GaussianKernel> kernels) : KernelMixture(dim) {
    for (auto& k : kernels) add(std::move(k));
}

void KernelMixture::add(GaussianKernel k) {
    if (k.dim() != dim_)
        throw std::invalid_argument("KernelMixture::add: kernel dimension mismatch");
    kernels_.push_back(std::move(k));
}

double KernelMixture::total_mass() const {
    double m = 0.0;
    for (const auto& k : kernels_) m += k.weight();
    return m;
}

bool KernelMixture::has_negative_weight() const {
    for (const auto& k : kernels_)
        if (k.weight() < 0.0) return true;
    return false;
}

double KernelMixture::evaluate(const Vector& x) const {
    if (x.size() != dim_)
        throw std::invalid_argument("KernelMixture::evaluate: dimension mismatch");
    double v = 0.0;
    for (const auto& k : kernels_) v += k.weight() * k.density(x);
    return v;
}

Vector KernelMixture::gradient(const Vector& x) const {
    if (x.size() != dim_)
        throw std::invalid_argument("KernelMixture::gradient: dimension mismatch");
    Vector g = Vector::Zero(dim_);
    for (const auto& k : kernels_) g += k.weight() * k.density_gradient(x);
    return g;
}

KernelMixture::Moments KernelMixture::moments() const {
    const double mass = total_mass();
    if (!(mass > 0.0))
        throw DegenerateMixtureError("KernelMixture::moments: total mass <= 0");
    Vector mean = Vector::Zero(dim_);
    for (const auto& k : kernels_) mean += k.weight() * k.mean();
    mean /= mass;
    Matrix second = Matrix::Zero(dim_, dim_);
    for (const auto& k : kernels_)
        second += k.weight() * (k.covariance() + k.mean() * k.mean().transpose());
    Matrix cov = second / mass - mean * mean.transpose();
    return {std::move(mean), std::move(cov)};
}

std::vector<Vector> KernelMixture::sample(int count, std::mt19937_64& rng) const {
    if (count < 0) throw std::invalid_argument("KernelMixture::sample: negative count");
    if (has_negative_weight())
        throw SignedSamplingError("KernelMixture::sample: mixture has negative weights");
    const double mass = total_mass();
    if (!(mass > 0.0))
        throw DegenerateMixtureError("KernelMixture::sample: total mass <= 0");

    std::uniform_real_distribution<double> unif(0.0, mass);
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double u = unif(rng);
        std::size_t pick = kernels_.size() - 1;
        double cum = 0.0;
        for (std::size_t k = 0; k < kernels_.size(); ++k) {
            cum += kernels_[k].weight();
            if (u <= cum) {
                pick = k;
                break;
            }
        }
        const auto& kern = kernels_[pick];
        Vector z(dim_);
        for (int j = 0; j < dim_; ++j) z[j] = standard_normal(rng);
        out.push_back(kern.mean() + kern.chol() * z);
    }
    return out;
}

KernelMixture KernelMixture::normalized() const {
    const double mass = total_mass();
    if (!(mass > 0.0))
        throw NonNormalizableError("KernelMixture::normalized: total mass <= 0");
    KernelMixture m(dim_);
    for (const auto& k : kernels_) m.add(k.with_weight(k.weight() / mass));
    return m;
}

KernelMixture KernelMixture::absolute_weights() const {
    KernelMixture m(dim_);
    for (const auto& k : kernels_) m.add(k.with_weight(std::abs(k.weight())));
    return m;
}

void KernelMixture::save(std::ostream& out) const {
    out.precision(17);
    for (const auto& k : kernels_) {
        out << k.weight();
        for (int i = 0; i < dim_; ++i) out << ' ' << k.mean()[i];
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) out << ' ' << k.covariance()(i, j);
        out << '\n';
    }
}

KernelMixture KernelMixture::load(std::istream& in) {
    std::vector<GaussianKernel> kernels;
    int dim = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (vals.empty()) continue;
        if (dim == 0) {
            // token count is 1 + d + d^2
            const double n = static_cast<double>(vals.size()) - 1.0;
            dim = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * n)) / 2.0));
        }
        if (vals.size() != static_cast<std::size_t>(1 + dim + dim * dim))
            throw std::invalid_argument("KernelMixture::load: malformed record");
        Vector mean(dim);
        for (int i = 0; i < dim; ++i) mean[i] = vals[1 + i];
        Matrix cov(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) cov(i, j) = vals[1 + dim + i * dim + j];
        kernels.emplace_back(vals[0], std::move(mean), std::move(cov));
    }
    if (kernels.empty())
        throw std::invalid_argument("KernelMixture::load: no kernels in stream");
    return KernelMixture(dim, std::move(kernels));
}

} // namespace akf
