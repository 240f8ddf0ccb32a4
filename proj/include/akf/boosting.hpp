#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "akf/mixture.hpp"

namespace akf {

struct BoostConfig {
    int max_kernels = 20;      // K
    int global_samples = 1000; // M
    double tol = 1e-4;         // global mean-squared-error tolerance (density^2 units)
    int local_samples = 200;
    int local_opt_max_iters = 100;
    double init_cov_scale = 0.25;
    bool full_covariance = false;  // log-Cholesky: diagonal-only by default
    bool monotonicity_guard = true; // reject a kernel that regresses E_g by > 10%
};

/// Pointwise-evaluable target plus the nonnegative mixture that proposes
/// evaluation points.
struct TargetFunction {
    std::function<double(const Vector&)> eval;
    KernelMixture proposal;
};

/// The local Gauss-Newton failed (non-finite objective or residuals).
class LocalFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BoostRound {
    int round = 0;
    double global_error = 0.0;
    bool accepted = false; // a kernel was added this round and survived
    std::optional<GaussianKernel> kernel;
};

struct BoostDiagnostics {
    std::vector<BoostRound> rounds;
    bool aborted = false; // two consecutive local-fit failures
    bool converged = false; // stopped because E_g < tol
};

struct BoostResult {
    KernelMixture mixture;
    BoostDiagnostics diagnostics;
};

/// Algorithm: grow kernels greedily.  Each round draws M proposal samples,
/// measures the mean squared residual E_g, stops below tol, otherwise seeds a
/// kernel at the sample with the largest |residual| and refines it locally.
BoostResult boost_fit(const TargetFunction& target, const BoostConfig& cfg, std::mt19937_64& rng);

/// Fits one kernel w N(x; mu, Sigma) to the residual on samples drawn near
/// `center` by damped Gauss-Newton over (w, mu, log-Cholesky of Sigma).
/// Throws LocalFitError when the residual is non-finite at sample points.
GaussianKernel local_fit(const std::function<double(const Vector&)>& residual,
                         const Vector& center, const BoostConfig& cfg,
                         const Matrix& proposal_cov, std::mt19937_64& rng);

} // namespace akf
