#include "akf/boosting.hpp"

#include <cmath>
#include <limits>

namespace akf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Gaussian kernel parameter vector: [w, mu(d), cholesky block].  Diagonal
/// mode stores log standard deviations; full mode stores the lower triangle
/// row-major with log-transformed diagonal entries.
struct KernelParams {
    int dim = 0;
    bool full = false;

    int size() const { return full ? 1 + dim + dim * (dim + 1) / 2 : 1 + 2 * dim; }

    static Vector pack_initial(double w0, const Vector& mu0, const Vector& init_std, bool full) {
        const int d = static_cast<int>(mu0.size());
        KernelParams p{d, full};
        Vector theta = Vector::Zero(p.size());
        theta[0] = w0;
        theta.segment(1, d) = mu0;
        if (full) {
            int idx = 1 + d;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j <= i; ++j, ++idx)
                    theta[idx] = (i == j) ? std::log(init_std[i]) : 0.0;
        } else {
            theta.segment(1 + d, d) = init_std.array().log().matrix();
        }
        return theta;
    }

    double weight(const Vector& theta) const { return theta[0]; }
    Vector mean(const Vector& theta) const { return theta.segment(1, dim); }

    Matrix chol(const Vector& theta) const {
        Matrix l = Matrix::Zero(dim, dim);
        if (full) {
            int idx = 1 + dim;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j <= i; ++j, ++idx)
                    l(i, j) = (i == j) ? std::exp(theta[idx]) : theta[idx];
        } else {
            l.diagonal() = theta.segment(1 + dim, dim).array().exp();
        }
        return l;
    }

    /// w N(x_j; mu, L L^T) for every column of X, in one triangular solve.
    Vector evaluate(const Vector& theta, const Matrix& x) const {
        const Matrix l = chol(theta);
        const Vector mu = mean(theta);
        Matrix z = x.colwise() - mu;
        l.triangularView<Eigen::Lower>().solveInPlace(z);
        const double log_norm =
            -0.5 * dim * std::log(kTwoPi) - l.diagonal().array().log().sum();
        return weight(theta) *
               (log_norm - 0.5 * z.colwise().squaredNorm().array()).exp().matrix();
    }
};

} // namespace

GaussianKernel local_fit(const std::function<double(const Vector&)>& residual,
                         const Vector& center, const BoostConfig& cfg,
                         const Matrix& proposal_cov, std::mt19937_64& rng) {
    const int d = static_cast<int>(center.size());
    const int n = cfg.local_samples;

    Vector init_var = cfg.init_cov_scale * proposal_cov.diagonal();
    const double var_floor = 1e-12 * std::max(proposal_cov.trace(), 1e-300);
    init_var = init_var.cwiseMax(var_floor);
    const Vector init_std = init_var.cwiseSqrt();

    // local evaluation points around the seed
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    Matrix xs(d, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) xs(i, j) = center[i] + init_std[i] * standard_normal(rng);

    Vector target_vals(n);
    for (int j = 0; j < n; ++j) target_vals[j] = residual(xs.col(j));
    if (!target_vals.allFinite())
        throw LocalFitError("local_fit: non-finite residual at sample points");

    const double r_center = residual(center);
    if (!std::isfinite(r_center))
        throw LocalFitError("local_fit: non-finite residual at center");
    const double w0 =
        r_center * std::pow(kTwoPi, 0.5 * d) * std::sqrt(init_var.prod());

    KernelParams params{d, cfg.full_covariance};
    Vector theta = KernelParams::pack_initial(w0, center, init_std, cfg.full_covariance);
    const int p = params.size();

    auto objective = [&](const Vector& th, Vector& r) -> double {
        r = params.evaluate(th, xs) - target_vals;
        return r.squaredNorm();
    };

    Vector r(n);
    double f = objective(theta, r);
    if (!std::isfinite(f)) throw LocalFitError("local_fit: non-finite initial objective");

    double lambda = 1e-3;
    Matrix jac(n, p);
    for (int iter = 0; iter < cfg.local_opt_max_iters; ++iter) {
        const Vector base = params.evaluate(theta, xs);
        for (int j = 0; j < p; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(theta[j]));
            Vector tp = theta;
            tp[j] += h;
            jac.col(j) = (params.evaluate(tp, xs) - base) / h;
        }
        const Vector grad = jac.transpose() * r;
        const Matrix hess = jac.transpose() * jac;

        bool stepped = false;
        double rel_decrease = 0.0;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Matrix damped = hess;
            damped.diagonal().array() += lambda;
            Eigen::LDLT<Matrix> ldlt(damped);
            if (ldlt.info() != Eigen::Success) {
                lambda *= 10.0;
                continue;
            }
            const Vector delta = ldlt.solve(-grad);
            Vector r_new(n);
            const double f_new = objective(theta + delta, r_new);
            if (std::isfinite(f_new) && f_new < f) {
                rel_decrease = (f - f_new) / std::max(f, 1e-300);
                theta += delta;
                r = r_new;
                f = f_new;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!stepped || rel_decrease < 1e-6) break;
    }
    if (!std::isfinite(f)) throw LocalFitError("local_fit: non-finite objective");

    // accept only kernels the local samples can vouch for: the mean must stay
    // inside the sampled neighborhood, the spread must be resolvable by the
    // samples, and the peak must be commensurate with the residual values
    // actually observed
    const Vector mean = params.mean(theta);
    for (int i = 0; i < d; ++i)
        if (std::abs(mean[i] - center[i]) > 5.0 * init_std[i])
            throw LocalFitError("local_fit: mean left the sampled neighborhood");
    const Matrix l = params.chol(theta);
    const Matrix cov = l * l.transpose();
    for (int i = 0; i < d; ++i) {
        if (cov(i, i) > 100.0 * init_var[i])
            throw LocalFitError("local_fit: covariance outgrew the sampled neighborhood");
        if (cov(i, i) < 1e-4 * init_var[i])
            throw LocalFitError("local_fit: covariance below the sample resolution");
    }
    const double log_peak = std::log(std::abs(params.weight(theta)) + 1e-300) -
                            0.5 * d * std::log(kTwoPi) -
                            l.diagonal().array().log().sum();
    const double r_max = target_vals.cwiseAbs().maxCoeff();
    if (log_peak > std::log(10.0 * r_max + 1e-300))
        throw LocalFitError("local_fit: peak amplitude unsupported by local residuals");

    return GaussianKernel(params.weight(theta), mean, cov);
}

BoostResult boost_fit(const TargetFunction& target, const BoostConfig& cfg,
                      std::mt19937_64& rng) {
    BoostResult result{KernelMixture(target.proposal.dim()), {}};
    KernelMixture& fit = result.mixture;
    auto& rounds = result.diagnostics.rounds;

    const Matrix proposal_cov = target.proposal.moments().covariance;

    int round_index = 0;
    int consecutive_failures = 0;
    double prev_eg = std::numeric_limits<double>::infinity();
    int last_kernel_round = -1;

    while (static_cast<int>(fit.size()) < cfg.max_kernels) {
        ++round_index;
        const auto samples = target.proposal.sample(cfg.global_samples, rng);
        Vector errors(cfg.global_samples);
        for (int m = 0; m < cfg.global_samples; ++m)
            errors[m] = target.eval(samples[m]) - fit.evaluate(samples[m]);

        BoostRound record;
        record.round = round_index;
        record.global_error = errors.squaredNorm() / cfg.global_samples;
        rounds.push_back(record);

        if (!std::isfinite(record.global_error)) {
            if (++consecutive_failures >= 2) {
                result.diagnostics.aborted = true;
                break;
            }
            continue; // retry the round with fresh samples
        }
        if (record.global_error < cfg.tol) {
            result.diagnostics.converged = true;
            break; // remaining kernel weights are zero, i.e. omitted
        }
        if (cfg.monotonicity_guard && record.global_error > 1.1 * prev_eg &&
            last_kernel_round >= 0) {
            // the most recent kernel made the fit worse: drop it and stop
            KernelMixture trimmed(fit.dim());
            for (std::size_t k = 0; k + 1 < fit.size(); ++k) trimmed.add(fit.kernel(k));
            fit = std::move(trimmed);
            rounds[static_cast<std::size_t>(last_kernel_round)].accepted = false;
            break;
        }

        int worst = 0;
        errors.cwiseAbs().maxCoeff(&worst);
        const Vector center = samples[static_cast<std::size_t>(worst)];

        auto residual = [&](const Vector& x) { return target.eval(x) - fit.evaluate(x); };
        try {
            GaussianKernel kernel = local_fit(residual, center, cfg, proposal_cov, rng);
            rounds.back().accepted = true;
            rounds.back().kernel = kernel;
            last_kernel_round = static_cast<int>(rounds.size()) - 1;
            fit.add(std::move(kernel));
            consecutive_failures = 0;
            prev_eg = record.global_error;
        } catch (const LocalFitError&) {
            if (++consecutive_failures >= 2) {
                result.diagnostics.aborted = true;
                break;
            }
            // retry once with re-drawn samples
        }
    }

    // the in-loop guard only sees a kernel once a later round measures E_g
    // after it; vet the final kernel the same way
    if (cfg.monotonicity_guard && last_kernel_round == static_cast<int>(rounds.size()) - 1 &&
        !fit.empty() && std::isfinite(prev_eg)) {
        const auto samples = target.proposal.sample(cfg.global_samples, rng);
        double eg = 0.0;
        for (const auto& x : samples) {
            const double e = target.eval(x) - fit.evaluate(x);
            eg += e * e;
        }
        eg /= static_cast<double>(samples.size());
        if (!std::isfinite(eg) || eg > 1.1 * prev_eg) {
            KernelMixture trimmed(fit.dim());
            for (std::size_t k = 0; k + 1 < fit.size(); ++k) trimmed.add(fit.kernel(k));
            fit = std::move(trimmed);
            rounds[static_cast<std::size_t>(last_kernel_round)].accepted = false;
        }
    }
    return result;
}

} // namespace akf
