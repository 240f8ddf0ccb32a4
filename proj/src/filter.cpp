#include "akf/filter.hpp"

#include <cmath>

#include "akf/errors.hpp"

namespace akf {

namespace {

KernelMixture sampling_proposal(const KernelMixture& m) {
    return m.has_negative_weight() ? m.absolute_weights() : m;
}

int count_negative_weights(const KernelMixture& m) {
    int n = 0;
    for (const auto& k : m.kernels())
        if (k.weight() < 0.0) ++n;
    return n;
}

KernelMixture scale_weights(const KernelMixture& m, double s) {
    KernelMixture out(m.dim());
    for (const auto& k : m.kernels()) out.add(k.with_weight(k.weight() * s));
    return out;
}

} // namespace

std::function<double(const Vector&)> make_likelihood(const ObservationModel& model, Vector y,
                                                     bool half) {
    Eigen::LLT<Matrix> llt(model.noise_covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("make_likelihood: noise covariance not SPD");
    const Matrix chol_l = llt.matrixL();
    const double c = half ? 0.5 : 1.0;
    const auto observe_fn = model.observe;
    const auto angular = model.angular;
    const int obs_dim = model.obs_dim;
    return [chol_l, c, observe_fn, angular, obs_dim, y](const Vector& x) -> double {
        Vector innov = y - observe_fn(x);
        if (!angular.empty())
            for (int i = 0; i < obs_dim; ++i)
                if (angular[static_cast<std::size_t>(i)]) innov[i] = wrap_angle(innov[i]);
        chol_l.triangularView<Eigen::Lower>().solveInPlace(innov);
        return std::exp(-c * innov.squaredNorm());
    };
}

double likelihood(const ObservationModel& model, const Vector& y, const Vector& x, bool half) {
    return make_likelihood(model, y, half)(x);
}

KernelMixture predict(const KernelMixture& density, const StateModel& model, double t, double dt,
                      const FilterConfig& cfg, std::mt19937_64& rng, StepDiagnostics* diag) {
    const KernelMixture lin_proposal = sampling_proposal(density);
    const LinearDrift lin =
        linearize_drift(model, t, lin_proposal, rng, cfg.linearization_samples);
    if (diag) diag->linearization_fallback = lin.fallback;

    auto [transported, map] = transport_linear(density, lin, dt);
    const DriftBundle bundle = residual_drift(model, lin, map, t);

    const KernelMixture proposal = sampling_proposal(transported);
    const ResidualTarget target_data{transported, bundle, dt};

    // probe the residual drift for the linear shortcut and the target for its
    // magnitude; the fit runs on a unit-RMS rescaling so that the tolerance is
    // relative to the target's own scale
    const auto probes = proposal.sample(100, rng);
    double residual_sup = 0.0, scale_acc = 0.0, base_err = 0.0;
    std::vector<double> probe_targets(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) {
        residual_sup =
            std::max(residual_sup, bundle.value(probes[i]).lpNorm<Eigen::Infinity>());
        const double g = evaluate_target(target_data, probes[i]);
        probe_targets[i] = g;
        scale_acc += g * g;
        const double e = g - transported.evaluate(probes[i]);
        base_err += e * e;
    }
    const double scale = std::sqrt(scale_acc / static_cast<double>(probes.size()));

    KernelMixture fitted(density.dim());
    if (residual_sup < 1e-12) {
        if (diag) diag->linear_shortcut = true;
        fitted = std::move(transported);
    } else if (!(scale > 0.0) || !std::isfinite(scale)) {
        if (diag) diag->predict_fit_fallback = true;
        fitted = std::move(transported);
    } else if (base_err / static_cast<double>(probes.size()) < cfg.boost.tol * scale * scale) {
        // the transported kernels already satisfy the fitting tolerance
        if (diag) diag->predict_transport_within_tol = true;
        fitted = std::move(transported);
    } else {
        TargetFunction target{
            [&target_data, scale](const Vector& x) {
                return evaluate_target(target_data, x) / scale;
            },
            proposal};
        BoostResult res = boost_fit(target, cfg.boost, rng);
        if (diag) diag->predict_boost = res.diagnostics;
        double abs_mass = 0.0;
        for (const auto& k : res.mixture.kernels()) abs_mass += std::abs(k.weight());
        bool usable = !res.mixture.empty() && !res.diagnostics.aborted &&
                      res.mixture.total_mass() > 0.01 * abs_mass;
        if (usable) {
            // the fit replaces the transported kernels only when it actually
            // approximates the target better than they already do
            const KernelMixture candidate = scale_weights(res.mixture, scale);
            double fit_err = 0.0;
            for (std::size_t i = 0; i < probes.size(); ++i) {
                const double e = probe_targets[i] - candidate.evaluate(probes[i]);
                fit_err += e * e;
            }
            if (fit_err < base_err) {
                fitted = candidate;
            } else {
                usable = false;
                if (diag) diag->predict_fit_rejected = true;
            }
        }
        if (!usable) {
            if (diag && !diag->predict_fit_rejected) diag->predict_fit_fallback = true;
            if (fitted.empty()) fitted = std::move(transported);
        }
    }
    return inflate_diffusion(fitted, model, t, dt);
}

KernelMixture update(const KernelMixture& predicted, const ObservationModel& model,
                     const Vector& y, const FilterConfig& cfg, std::mt19937_64& rng,
                     StepDiagnostics* diag) {
    if (!(predicted.total_mass() > 0.0))
        throw NonNormalizableError("update: predicted mixture has no positive mass");
    const auto lik = make_likelihood(model, y, cfg.likelihood_half);
    auto product = [&predicted, &lik](const Vector& x) {
        return predicted.evaluate(x) * lik(x);
    };
    const KernelMixture proposal = sampling_proposal(predicted);

    // the product's magnitude collapses with the evidence when the data are
    // surprising; normalization cancels any positive rescale, so fit at unit
    // RMS and restore the scale afterwards
    double scale_acc = 0.0;
    const int probes = 200;
    for (const auto& x : proposal.sample(probes, rng)) {
        const double t = product(x);
        scale_acc += t * t;
    }
    const double scale = std::sqrt(scale_acc / probes);
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw NonNormalizableError("update: product target vanished at every probe");

    TargetFunction target{[&product, scale](const Vector& x) { return product(x) / scale; },
                          proposal};
    BoostResult res = boost_fit(target, cfg.boost, rng);
    if (diag) diag->update_boost = res.diagnostics;
    if (res.mixture.empty())
        throw NonNormalizableError("update: posterior fit produced no kernels");
    double abs_mass = 0.0;
    for (const auto& k : res.mixture.kernels()) abs_mass += std::abs(k.weight());
    const double mass = res.mixture.total_mass();
    // signed components that nearly cancel normalize into a meaningless density
    if (!(mass > 0.01 * abs_mass))
        throw NonNormalizableError("update: posterior fit mass is a near-cancellation");
    return scale_weights(res.mixture, scale).normalized();
}

KernelFilter::KernelFilter(StateModel model, ObservationModel obs, FilterConfig cfg)
    : model_(std::move(model)), obs_(std::move(obs)), cfg_(std::move(cfg)),
      posterior_(cfg_.prior) {}

FilterStep KernelFilter::step(double t, double dt, const std::optional<Vector>& y,
                              std::mt19937_64& rng) {
    FilterStep out;
    out.predicted = predict(posterior_, model_, t, dt, cfg_, rng, &out.diagnostics);

    if (y.has_value()) {
        try {
            out.posterior = update(out.predicted, obs_, *y, cfg_, rng, &out.diagnostics);
        } catch (const NonNormalizableError&) {
            // graceful degradation: carry the prediction, flag the step
            out.diagnostics.update_fallback = true;
            out.posterior = out.predicted.normalized();
        }
    } else {
        out.posterior = out.predicted.normalized();
    }

    out.diagnostics.negative_weight_kernels = count_negative_weights(out.posterior);
    out.point_estimate = out.posterior.moments().mean;
    posterior_ = out.posterior;
    out.n = ++n_;
    return out;
}

FilterRun run_filter(const StateModel& model, const ObservationModel& obs,
                     const TruthConfig& cfg, const std::vector<Vector>& observations,
                     const FilterConfig& filter_cfg, std::mt19937_64& rng) {
    FilterRun run;
    KernelFilter filter(model, obs, filter_cfg);
    for (int n = 0; n < cfg.num_steps; ++n) {
        const double t = n * cfg.step_size;
        std::optional<Vector> y;
        if ((n + 1) % cfg.obs_stride == 0) {
            const std::size_t idx = static_cast<std::size_t>((n + 1) / cfg.obs_stride) - 1;
            if (idx < observations.size()) y = observations[idx];
        }
        try {
            FilterStep step = filter.step(t, cfg.step_size, y, rng);
            if (!step.point_estimate.allFinite())
                throw DivergenceError("run_filter: non-finite point estimate", n + 1);
            run.steps.push_back(std::move(step));
        } catch (const std::exception&) {
            run.diverged = true;
            run.diverged_at = n + 1;
            break;
        }
    }
    return run;
}

} // namespace akf
