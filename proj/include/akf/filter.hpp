#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "akf/boosting.hpp"
#include "akf/fokker_planck.hpp"
#include "akf/mixture.hpp"
#include "akf/models.hpp"

namespace akf {

struct FilterConfig {
    BoostConfig boost;
    int linearization_samples = 2000;
    KernelMixture prior;       // initial filtering density p_0, normalized
    bool likelihood_half = true; // include the conventional 1/2 in the exponent

    explicit FilterConfig(KernelMixture prior_mixture) : prior(std::move(prior_mixture)) {}
};

struct StepDiagnostics {
    bool linear_shortcut = false;        // residual drift numerically zero
    bool linearization_fallback = false; // regression degenerated
    bool predict_fit_fallback = false;   // boosting failed; transported kernels reused
    bool predict_fit_rejected = false;   // fit no better than the transported kernels
    bool predict_transport_within_tol = false; // transported kernels already within tol
    bool update_fallback = false;        // posterior fit failed; predicted carried over
    int negative_weight_kernels = 0;     // signed kernels retained in the posterior
    BoostDiagnostics predict_boost;
    BoostDiagnostics update_boost;
};

struct FilterStep {
    int n = 0;                  // time index (1-based: state after step n)
    KernelMixture predicted{1}; // p~_{n}, before normalization
    KernelMixture posterior{1}; // p_{n}, normalized
    Vector point_estimate;
    StepDiagnostics diagnostics;
};

/// Unnormalized Gaussian likelihood exp(-c (y - h(x))^T R^{-1} (y - h(x))),
/// c = 1/2 when `half`, with angular innovation components wrapped.
double likelihood(const ObservationModel& model, const Vector& y, const Vector& x,
                  bool half = true);

/// Same quantity as a reusable function of x with the noise factor cached.
std::function<double(const Vector&)> make_likelihood(const ObservationModel& model, Vector y,
                                                     bool half = true);

/// One prediction step: linearize the drift over the current mixture, push the
/// kernels through the affine map, boost-fit the drift-corrected target unless
/// the residual drift is numerically zero, then add diffusion.
KernelMixture predict(const KernelMixture& density, const StateModel& model, double t, double dt,
                      const FilterConfig& cfg, std::mt19937_64& rng,
                      StepDiagnostics* diag = nullptr);

/// Bayesian update: boost-fit x -> predicted(x) * likelihood(y | x) with the
/// predicted mixture as proposal, then normalize.  Throws NonNormalizableError
/// when the fit carries no positive mass.
KernelMixture update(const KernelMixture& predicted, const ObservationModel& model,
                     const Vector& y, const FilterConfig& cfg, std::mt19937_64& rng,
                     StepDiagnostics* diag = nullptr);

/// Recursive filter: prediction every simulation step, Bayesian update at
/// observation steps, graceful degradation on update failure.
class KernelFilter {
public:
    KernelFilter(StateModel model, ObservationModel obs, FilterConfig cfg);

    /// Advances one simulation step from time t; updates when y is present.
    FilterStep step(double t, double dt, const std::optional<Vector>& y, std::mt19937_64& rng);

    const KernelMixture& density() const { return posterior_; }

private:
    StateModel model_;
    ObservationModel obs_;
    FilterConfig cfg_;
    KernelMixture posterior_;
    int n_ = 0;
};

struct FilterRun {
    std::vector<FilterStep> steps;
    bool diverged = false;
    int diverged_at = -1;
};

/// Runs the filter across a whole observation record.  observations[i] is the
/// measurement taken at simulation step (i + 1) * obs_stride.  A divergence
/// terminates the run early with partial output.
FilterRun run_filter(const StateModel& model, const ObservationModel& obs,
                     const TruthConfig& cfg, const std::vector<Vector>& observations,
                     const FilterConfig& filter_cfg, std::mt19937_64& rng);

} // namespace akf
