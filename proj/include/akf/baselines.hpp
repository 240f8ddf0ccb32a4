#pragma once

#include <optional>
#include <random>

#include "akf/mixture.hpp"
#include "akf/models.hpp"

namespace akf {

/// Weighted particle cloud.  Rows of `particles` are states.
struct ParticleEnsemble {
    Matrix particles; // N x d
    Vector weights;   // nonnegative, sums to one

    int count() const { return static_cast<int>(particles.rows()); }
    Vector mean() const { return particles.transpose() * weights; }
    double effective_sample_size() const { return 1.0 / weights.squaredNorm(); }
};

struct PfFlags {
    bool resampled = false;
    bool degenerate = false; // all likelihood weights vanished
    double n_eff = 0.0;
};

ParticleEnsemble make_particle_ensemble(const KernelMixture& prior, int count,
                                        std::mt19937_64& rng);

/// Bootstrap particle filter step: Euler-Maruyama propagation, likelihood
/// reweighting, systematic resampling when N_eff < N/2.
ParticleEnsemble pf_step(const ParticleEnsemble& ens, const StateModel& model,
                         const ObservationModel& obs, const std::optional<Vector>& y, double t,
                         double dt, bool likelihood_half, std::mt19937_64& rng,
                         PfFlags* flags = nullptr);

struct EnkfFlags {
    bool skipped = false; // singular innovation covariance
};

Matrix make_enkf_ensemble(const KernelMixture& prior, int count, std::mt19937_64& rng);

/// Stochastic (perturbed-observation) EnKF step with ensemble cross-covariance
/// gain; innovations use the same angle-wrapping rule as the kernel filter.
Matrix enkf_step(const Matrix& ensemble, const StateModel& model, const ObservationModel& obs,
                 const std::optional<Vector>& y, double t, double dt, std::mt19937_64& rng,
                 EnkfFlags* flags = nullptr);

struct KalmanBelief {
    Vector mean;
    Matrix covariance;
};

/// Strictly linear-Gaussian model dX = (B x + c) dt + sigma dW, y = H x + xi.
struct LinearGaussianModel {
    Matrix B;
    Vector c;
    Matrix sigma;
    Matrix H;
    Matrix R;
    double dt = 0.0;
};

/// Exact discrete Kalman recursion with the same Euler discretization as
/// simulate_truth; the test oracle for every filter.
KalmanBelief kalman_step(const KalmanBelief& belief, const LinearGaussianModel& model,
                         const std::optional<Vector>& y);

} // namespace akf
