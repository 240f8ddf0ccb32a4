#include "akf/baselines.hpp"

#include <cmath>

#include "akf/errors.hpp"
#include "akf/filter.hpp"

namespace akf {

namespace {

Matrix sample_matrix(const KernelMixture& prior, int count, std::mt19937_64& rng) {
    const auto draws = prior.sample(count, rng);
    Matrix m(count, prior.dim());
    for (int i = 0; i < count; ++i) m.row(i) = draws[static_cast<std::size_t>(i)];
    return m;
}

void propagate_rows(Matrix& states, const StateModel& model, double t, double dt,
                    std::mt19937_64& rng) {
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    const Matrix sig = model.diffusion(t);
    const bool noisy = sig.size() > 0 && !sig.isZero(0.0);
    const double sqrt_dt = std::sqrt(dt);
    for (int i = 0; i < states.rows(); ++i) {
        Vector x = states.row(i);
        Vector dx = model.drift(t, x) * dt;
        if (noisy) {
            Vector dw(model.noise_dim);
            for (int j = 0; j < model.noise_dim; ++j) dw[j] = standard_normal(rng) * sqrt_dt;
            dx += sig * dw;
        }
        states.row(i) = x + dx;
    }
}

} // namespace

ParticleEnsemble make_particle_ensemble(const KernelMixture& prior, int count,
                                        std::mt19937_64& rng) {
    ParticleEnsemble ens;
    ens.particles = sample_matrix(prior, count, rng);
    ens.weights = Vector::Constant(count, 1.0 / count);
    return ens;
}

ParticleEnsemble pf_step(const ParticleEnsemble& ens, const StateModel& model,
                         const ObservationModel& obs, const std::optional<Vector>& y, double t,
                         double dt, bool likelihood_half, std::mt19937_64& rng, PfFlags* flags) {
    ParticleEnsemble out = ens;
    const int n = out.count();
    propagate_rows(out.particles, model, t, dt, rng);

    if (y.has_value()) {
        const auto lik = make_likelihood(obs, *y, likelihood_half);
        for (int i = 0; i < n; ++i)
            out.weights[i] *= lik(out.particles.row(i).transpose());
        const double mass = out.weights.sum();
        if (!(mass > 0.0) || !out.weights.allFinite()) {
            // total degeneracy: every particle missed the data
            if (flags) flags->degenerate = true;
            out.weights = Vector::Constant(n, 1.0 / n);
        } else {
            out.weights /= mass;
        }

        const double n_eff = out.effective_sample_size();
        if (flags) flags->n_eff = n_eff;
        if (n_eff < 0.5 * n) {
            // systematic resampling
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double u0 = unif(rng) / n;
            Matrix resampled(n, out.particles.cols());
            double cum = out.weights[0];
            int k = 0;
            for (int i = 0; i < n; ++i) {
                const double u = u0 + static_cast<double>(i) / n;
                while (u > cum && k + 1 < n) cum += out.weights[++k];
                resampled.row(i) = out.particles.row(k);
            }
            out.particles = std::move(resampled);
            out.weights = Vector::Constant(n, 1.0 / n);
            if (flags) flags->resampled = true;
        }
    }
    return out;
}

Matrix make_enkf_ensemble(const KernelMixture& prior, int count, std::mt19937_64& rng) {
    return sample_matrix(prior, count, rng);
}

Matrix enkf_step(const Matrix& ensemble, const StateModel& model, const ObservationModel& obs,
                 const std::optional<Vector>& y, double t, double dt, std::mt19937_64& rng,
                 EnkfFlags* flags) {
    Matrix out = ensemble;
    const int n = static_cast<int>(out.rows());
    const int d = static_cast<int>(out.cols());
    propagate_rows(out, model, t, dt, rng);

    if (!y.has_value()) return out;

    const int l = obs.obs_dim;
    Matrix hx(n, l);
    for (int i = 0; i < n; ++i) hx.row(i) = obs.observe(out.row(i).transpose());

    const Vector mean_x = out.colwise().mean();
    const Vector mean_h = hx.colwise().mean();
    const Matrix dx = out.rowwise() - mean_x.transpose();
    const Matrix dh = hx.rowwise() - mean_h.transpose();
    const Matrix c_xh = dx.transpose() * dh / (n - 1);
    const Matrix c_hh = dh.transpose() * dh / (n - 1);

    Eigen::LLT<Matrix> llt(c_hh + obs.noise_covariance);
    if (llt.info() != Eigen::Success) {
        if (flags) flags->skipped = true;
        return out;
    }
    const Matrix gain = llt.solve(c_xh.transpose()).transpose(); // K = C_xh (C_hh + R)^{-1}

    Eigen::LLT<Matrix> rllt(obs.noise_covariance);
    if (rllt.info() != Eigen::Success)
        throw std::invalid_argument("enkf_step: noise covariance not SPD");
    const Matrix r_chol = rllt.matrixL();
    std::normal_distribution<double> standard_normal(0.0, 1.0);

    for (int i = 0; i < n; ++i) {
        Vector eta(l);
        for (int j = 0; j < l; ++j) eta[j] = standard_normal(rng);
        const Vector y_perturbed = *y + r_chol * eta;
        const Vector innov = innovation(obs, y_perturbed, hx.row(i).transpose());
        out.row(i) += (gain * innov).transpose();
    }
    (void)d;
    return out;
}

KalmanBelief kalman_step(const KalmanBelief& belief, const LinearGaussianModel& model,
                         const std::optional<Vector>& y) {
    const int d = static_cast<int>(belief.mean.size());
    const Matrix f = Matrix::Identity(d, d) + model.dt * model.B;
    KalmanBelief out;
    out.mean = f * belief.mean + model.dt * model.c;
    out.covariance = f * belief.covariance * f.transpose() +
                     model.dt * model.sigma * model.sigma.transpose();

    if (y.has_value()) {
        const Matrix s = model.H * out.covariance * model.H.transpose() + model.R;
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("kalman_step: innovation covariance not SPD");
        const Matrix gain = llt.solve(model.H * out.covariance).transpose();
        out.mean += gain * (*y - model.H * out.mean);
        const Matrix ikh = Matrix::Identity(d, d) - gain * model.H;
        // Joseph form keeps the covariance symmetric
        out.covariance = ikh * out.covariance * ikh.transpose() +
                         gain * model.R * gain.transpose();
    }
    return out;
}

} // namespace akf
