#include "akf/models.hpp"

#include <cmath>

#include "akf/errors.hpp"

namespace akf {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi); // lands in [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

Vector innovation(const ObservationModel& model, const Vector& y, const Vector& hx) {
    if (y.size() != model.obs_dim || hx.size() != model.obs_dim)
        throw std::invalid_argument("innovation: dimension mismatch");
    Vector d = y - hx;
    if (!model.angular.empty()) {
        for (int i = 0; i < model.obs_dim; ++i)
            if (model.angular[static_cast<std::size_t>(i)]) d[i] = wrap_angle(d[i]);
    }
    return d;
}

std::vector<Vector> simulate_truth(const StateModel& model, const TruthConfig& cfg,
                                   std::mt19937_64& rng) {
    if (cfg.initial_state.size() != model.dim)
        throw std::invalid_argument("simulate_truth: initial state dimension mismatch");
    if (cfg.num_steps <= 0 || cfg.step_size <= 0.0)
        throw std::invalid_argument("simulate_truth: invalid step configuration");
    if (cfg.obs_stride <= 0 || cfg.num_steps % cfg.obs_stride != 0)
        throw std::invalid_argument("simulate_truth: obs_stride must divide num_steps");

    std::normal_distribution<double> standard_normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(cfg.step_size);

    std::vector<Vector> traj;
    traj.reserve(static_cast<std::size_t>(cfg.num_steps) + 1);
    traj.push_back(cfg.initial_state);

    Vector x = cfg.initial_state;
    for (int n = 0; n < cfg.num_steps; ++n) {
        const double t = n * cfg.step_size;
        Vector dx = model.drift(t, x) * cfg.step_size;
        const Matrix sig = model.diffusion(t);
        if (sig.size() > 0 && !sig.isZero(0.0)) {
            Vector dw(model.noise_dim);
            for (int j = 0; j < model.noise_dim; ++j) dw[j] = standard_normal(rng) * sqrt_dt;
            dx += sig * dw;
        }
        x += dx;
        for (const auto& hook : cfg.event_hooks)
            if (hook.step == n + 1) x = hook.transform(x);
        if (!x.allFinite())
            throw DivergenceError("simulate_truth: non-finite state", n + 1);
        traj.push_back(x);
    }
    return traj;
}

Vector observe(const ObservationModel& model, const Vector& x, std::mt19937_64& rng) {
    Vector y = model.observe(x);
    if (y.size() != model.obs_dim)
        throw std::invalid_argument("observe: observation function output has wrong length");
    Eigen::LLT<Matrix> llt(model.noise_covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("observe: noise covariance not SPD");
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    Vector z(model.obs_dim);
    for (int j = 0; j < model.obs_dim; ++j) z[j] = standard_normal(rng);
    y += Matrix(llt.matrixL()) * z;
    if (!model.angular.empty())
        for (int i = 0; i < model.obs_dim; ++i)
            if (model.angular[static_cast<std::size_t>(i)]) y[i] = wrap_angle(y[i]);
    return y;
}

double check_drift_jacobian(const StateModel& model, double t, const std::vector<Vector>& points) {
    if (!model.drift_jacobian) return 0.0;
    double worst = 0.0;
    for (const auto& x : points) {
        const Matrix jac = model.drift_jacobian(t, x);
        Matrix fd(model.dim, model.dim);
        for (int j = 0; j < model.dim; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            fd.col(j) = (model.drift(t, xp) - model.drift(t, xm)) / (2.0 * h);
        }
        const double scale = std::max(1.0, jac.cwiseAbs().maxCoeff());
        worst = std::max(worst, (jac - fd).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

StateModel make_demo2d() {
    StateModel m;
    m.dim = 2;
    m.noise_dim = 2;
    m.drift = [](double, const Vector& x) {
        Vector b(2);
        b[0] = x[1] * x[1] + 3.0 * x[0] + 4.0 * x[1] + 3.0;
        b[1] = 3.0 * x[0] + 2.0 * x[1] - 2.0;
        return b;
    };
    m.drift_jacobian = [](double, const Vector& x) {
        Matrix j(2, 2);
        j << 3.0, 4.0 + 2.0 * x[1], 3.0, 2.0;
        return j;
    };
    m.diffusion = [](double) { return Matrix::Zero(2, 2); };
    return m;
}

BearingProblem make_bearing_only(double bearing_noise_std) {
    BearingProblem p;

    p.state.dim = 4;
    p.state.noise_dim = 4;
    p.state.drift = [](double, const Vector& x) {
        Vector b(4);
        b << x[2], x[3], 0.0, 0.0;
        return b;
    };
    p.state.drift_jacobian = [](double, const Vector&) {
        Matrix j = Matrix::Zero(4, 4);
        j(0, 2) = 1.0;
        j(1, 3) = 1.0;
        return j;
    };
    Matrix sigma = Matrix::Zero(4, 4);
    sigma.diagonal() << 0.5, 0.5, 0.3, 0.3;
    p.state.diffusion = [sigma](double) { return sigma; };

    p.platform1 = Vector(2);
    p.platform1 << 2.0, 6.0;
    p.platform2 = Vector(2);
    p.platform2 << 10.0, 12.0;

    p.obs.obs_dim = 2;
    const Vector pl1 = p.platform1, pl2 = p.platform2;
    p.obs.observe = [pl1, pl2](const Vector& x) {
        Vector y(2);
        y[0] = std::atan2(x[1] - pl1[1], x[0] - pl1[0]);
        y[1] = std::atan2(x[1] - pl2[1], x[0] - pl2[0]);
        return y;
    };
    p.obs.noise_covariance =
        bearing_noise_std * bearing_noise_std * Matrix::Identity(2, 2);
    p.obs.angular = {true, true};

    p.truth.initial_state = Vector(4);
    p.truth.initial_state << 1.0, 3.0, 10.0, 6.0;
    p.truth.step_size = 0.01;
    p.truth.num_steps = 300;
    p.truth.obs_stride = 1;
    // sharp turn downward at t = 1.2: the truth's vertical velocity flips sign
    p.truth.event_hooks.push_back({120, [](const Vector& x) {
                                       Vector y = x;
                                       y[3] = -y[3];
                                       return y;
                                   }});
    return p;
}

Lorenz96Problem make_lorenz96(int d, double forcing, double sigma) {
    if (d < 4) throw std::invalid_argument("make_lorenz96: dimension must be >= 4");

    Lorenz96Problem p;
    p.state.dim = d;
    p.state.noise_dim = d;
    p.state.drift = [d, forcing](double, const Vector& x) {
        Vector b(d);
        for (int i = 0; i < d; ++i) {
            const int ip1 = (i + 1) % d;
            const int im1 = (i - 1 + d) % d;
            const int im2 = (i - 2 + d) % d;
            b[i] = (x[ip1] - x[im2]) * x[im1] - x[i] + forcing;
        }
        return b;
    };
    p.state.drift_jacobian = [d](double, const Vector& x) {
        Matrix j = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) {
            const int ip1 = (i + 1) % d;
            const int im1 = (i - 1 + d) % d;
            const int im2 = (i - 2 + d) % d;
            j(i, ip1) += x[im1];
            j(i, im2) -= x[im1];
            j(i, im1) += x[ip1] - x[im2];
            j(i, i) -= 1.0;
        }
        return j;
    };
    const Matrix sig = sigma * Matrix::Identity(d, d);
    p.state.diffusion = [sig](double) { return sig; };

    const int obs_dim = (d + 1) / 2; // odd 1-based components
    p.obs.obs_dim = obs_dim;
    p.obs.observe = [d, obs_dim](const Vector& x) {
        Vector y(obs_dim);
        for (int i = 0; i < obs_dim; ++i) y[i] = x[2 * i];
        return y;
    };
    p.obs.noise_covariance = Matrix::Identity(obs_dim, obs_dim);

    p.truth.initial_state = Vector::Constant(d, forcing);
    p.truth.initial_state[0] += 1.0; // kick off the chaotic transient
    p.truth.step_size = 0.001;
    p.truth.num_steps = 3000;
    p.truth.obs_stride = 100;
    return p;
}

} // namespace akf
