#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "akf/mixture.hpp"

namespace akf {

/// State SDE dX = b(t, X) dt + sigma(t) dW with additive noise.
struct StateModel {
    int dim = 0;       // d
    int noise_dim = 0; // r
    std::function<Vector(double, const Vector&)> drift;             // b : R+ x R^d -> R^d
    std::function<Matrix(double, const Vector&)> drift_jacobian;    // optional, d x d
    std::function<Matrix(double)> diffusion;                        // sigma : R+ -> R^{d x r}
};

/// Discrete observation Y = h(X) + xi, xi ~ N(0, R).
struct ObservationModel {
    int obs_dim = 0;
    std::function<Vector(const Vector&)> observe; // h
    Matrix noise_covariance;                      // R, SPD
    std::vector<bool> angular;                    // per-component wrap flag; empty = none
};

/// Transform applied to the truth trajectory immediately after `step`.
struct EventHook {
    int step = 0;
    std::function<Vector(const Vector&)> transform;
};

struct TruthConfig {
    Vector initial_state;
    double step_size = 0.0; // dt
    int num_steps = 0;
    int obs_stride = 1; // simulation steps per observation
    std::vector<EventHook> event_hooks;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// y - h(x), with angular components wrapped into (-pi, pi].
Vector innovation(const ObservationModel& model, const Vector& y, const Vector& hx);

/// Euler-Maruyama trajectory of length num_steps + 1.  Event hooks fire after
/// the step they index.  Throws DivergenceError on non-finite state.
std::vector<Vector> simulate_truth(const StateModel& model, const TruthConfig& cfg,
                                   std::mt19937_64& rng);

/// h(x) + xi with xi ~ N(0, R).
Vector observe(const ObservationModel& model, const Vector& x, std::mt19937_64& rng);

/// Self-check: max relative deviation of the analytic Jacobian from central
/// finite differences over the given points.  Returns 0 when no analytic
/// Jacobian is present.
double check_drift_jacobian(const StateModel& model, double t, const std::vector<Vector>& points);

/// Example-1 drift: b = [x2^2; 0] + [[3,4],[3,2]] x + [3; -2], sigma = 0.
StateModel make_demo2d();

struct BearingProblem {
    StateModel state;
    ObservationModel obs;
    TruthConfig truth;
    Vector platform1;
    Vector platform2;
};

/// Bearing-only tracking: 4D state [x1, x2, v1, v2], two angle-only sensors,
/// truth makes a sharp downward turn (v2 -> -v2) at step 120.
BearingProblem make_bearing_only(double bearing_noise_std = 0.05);

struct Lorenz96Problem {
    StateModel state;
    ObservationModel obs;
    TruthConfig truth;
};

/// Cyclic Lorenz-96 with forcing F; observations are the odd (1-based)
/// components with unit noise.  Requires d >= 4.
Lorenz96Problem make_lorenz96(int d = 10, double forcing = 8.0, double sigma = 0.5);

} // namespace akf
