#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "akf/harness.hpp"

namespace {

void add_model_options(CLI::App* cmd, akf::ExperimentConfig& cfg) {
    cmd->add_option("--bearing-noise-std", cfg.bearing_noise_std,
                    "Bearing observation noise std (rad)");
    cmd->add_option("--bearing-filter-sigma-v", cfg.bearing_filter_sigma_v,
                    "Velocity process-noise std assumed by the filters");
    cmd->add_option("--bearing-obs-stride", cfg.bearing_obs_stride,
                    "Simulation steps per bearing observation");
    cmd->add_option("--lorenz-dim", cfg.lorenz_dim, "Lorenz-96 state dimension");
    cmd->add_option("--lorenz-forcing", cfg.lorenz_forcing, "Lorenz-96 forcing F");
    cmd->add_option("--lorenz-sigma", cfg.lorenz_sigma, "Lorenz-96 diffusion sigma");
    cmd->add_option("--prior-cov", cfg.prior_cov, "Initial filter prior covariance scale");
    cmd->add_option("--rmse-position-only", cfg.rmse_position_only,
                    "Restrict RMSE to position components (default: per problem)");
    cmd->add_option("--boost-global-samples", cfg.boost.global_samples,
                    "Boosting global samples per round");
    cmd->add_option("--boost-tol", cfg.boost.tol, "Boosting global error tolerance");
    cmd->add_option("--boost-local-samples", cfg.boost.local_samples,
                    "Boosting local fit samples");
    cmd->add_option("--boost-local-iters", cfg.boost.local_opt_max_iters,
                    "Boosting local optimizer max iterations");
    cmd->add_option("--boost-init-cov-scale", cfg.boost.init_cov_scale,
                    "Boosting local fit initial covariance scale");
    cmd->add_option("--boost-full-covariance", cfg.boost.full_covariance,
                    "Fit full kernel covariances (default: per problem)");
    cmd->add_option("--linearization-samples", cfg.linearization_samples,
                    "Samples used to linearize the drift");
    cmd->add_option("--likelihood-half", cfg.likelihood_half,
                    "Include the conventional 1/2 factor in the likelihood exponent");
}

int run_selftest() {
    int failures = 0;
    auto check = [&failures](bool ok, const char* what) {
        std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what);
        if (!ok) ++failures;
    };

    using namespace akf;
    {
        KernelMixture m(1);
        m.add(GaussianKernel(1.0, Vector::Zero(1), Matrix::Identity(1, 1)));
        Vector x0 = Vector::Zero(1);
        check(std::abs(m.evaluate(x0) - 0.3989422804014327) < 1e-12,
              "standard normal peak value");
    }
    {
        const StateModel demo = make_demo2d();
        Vector x = Vector::Zero(2);
        const Vector b0 = demo.drift(0.0, x);
        check(std::abs(b0[0] - 3.0) < 1e-14 && std::abs(b0[1] + 2.0) < 1e-14,
              "demo2d drift at origin");
        check(check_drift_jacobian(demo, 0.0, {Vector::Zero(2)}) < 1e-6,
              "demo2d analytic Jacobian vs finite differences");
    }
    {
        // scalar conjugate update: prior N(0,1), h(x)=x, R=1, y=1 -> N(0.5, 0.5)
        LinearGaussianModel lm;
        lm.B = Matrix::Zero(1, 1);
        lm.c = Vector::Zero(1);
        lm.sigma = Matrix::Zero(1, 1);
        lm.H = Matrix::Identity(1, 1);
        lm.R = Matrix::Identity(1, 1);
        lm.dt = 1.0;
        KalmanBelief belief{Vector::Zero(1), Matrix::Identity(1, 1)};
        Vector y = Vector::Constant(1, 1.0);
        const KalmanBelief post = kalman_step(belief, lm, y);
        check(std::abs(post.mean[0] - 0.5) < 1e-12 &&
                  std::abs(post.covariance(0, 0) - 0.5) < 1e-12,
              "kalman conjugate textbook case");
    }
    {
        // boosting self-fit of a single Gaussian bump
        KernelMixture proposal(2);
        proposal.add(GaussianKernel(1.0, Vector::Zero(2), Matrix::Identity(2, 2)));
        BoostConfig bc;
        bc.max_kernels = 3;
        bc.tol = 1e-9;
        std::mt19937_64 rng(5);
        auto target = [&proposal](const Vector& x) { return proposal.evaluate(x); };
        const BoostResult res = boost_fit({target, proposal}, bc, rng);
        check(!res.mixture.empty() && res.diagnostics.rounds.size() <= 3,
              "boosting self-fit terminates quickly");
    }
    {
        ExperimentConfig cfg;
        cfg.problem = "linear2d";
        cfg.roster = parse_roster("kalman,kernel:1");
        cfg.num_trials = 1;
        cfg.base_seed = 7;
        const RmseReport report = run_experiment(cfg);
        const auto& kf = report.by_name("kalman");
        const auto& kern = report.by_name("kernel1");
        double max_gap = 0.0;
        for (std::size_t i = 0; i < kf.per_step_rmse.size(); ++i)
            max_gap = std::max(max_gap,
                               std::abs(kf.per_step_rmse[i] - kern.per_step_rmse[i]));
        check(max_gap < 1e-5, "kernel filter tracks the Kalman oracle on a linear problem");
    }
    std::printf(failures == 0 ? "selftest passed\n" : "selftest FAILED (%d)\n", failures);
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Gaussian kernel filter: experiments and baselines"};
    app.set_config("--config", "", "Config file with key/value sections (INI)");
    app.require_subcommand(1);

    // demo: Example-1 grids
    akf::Demo2dConfig demo_cfg;
    auto* demo = app.add_subcommand("demo", "Drift-operator demonstration grids (Example 1)");
    demo->add_option("--out-dir", demo_cfg.out_dir, "Output directory")->required();
    demo->add_option("--seed", demo_cfg.seed, "Random seed");
    demo->add_option("--grid-halfwidth", demo_cfg.grid_halfwidth, "Grid half width");
    demo->add_option("--grid-points", demo_cfg.grid_points, "Grid points per axis");
    demo->add_option("--kernels", demo_cfg.kernels, "Kernels to fit");

    // track: single trial with verbose step records
    akf::ExperimentConfig track_cfg;
    std::string track_filters = "kernel:20";
    auto* track = app.add_subcommand("track", "Run one tracking trial with step records");
    track->add_option("--problem", track_cfg.problem, "linear2d | bearing | lorenz96");
    track->add_option("--seed", track_cfg.base_seed, "Random seed")->required();
    track->add_option("--out-dir", track_cfg.out_dir, "Output directory")->required();
    track->add_option("--filters", track_filters, "Comma list, e.g. kernel:20,pf:5000")
        ->required();
    add_model_options(track, track_cfg);

    // bench: repeated-trial RMSE study
    akf::ExperimentConfig bench_cfg;
    std::string bench_filters;
    auto* bench = app.add_subcommand("bench", "Repeated-trial RMSE comparison");
    bench->add_option("--problem", bench_cfg.problem, "linear2d | bearing | lorenz96");
    bench->add_option("--trials", bench_cfg.num_trials, "Number of trials")->required();
    bench->add_option("--seed", bench_cfg.base_seed, "Base seed; trial i uses seed+i")
        ->required();
    bench->add_option("--out-dir", bench_cfg.out_dir, "Output directory")->required();
    bench->add_option("--filters", bench_filters, "Comma list, e.g. kernel:20,pf:5000,enkf:2000")
        ->required();
    add_model_options(bench, bench_cfg);

    auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*demo) {
            const auto result = akf::run_demo2d(demo_cfg);
            std::printf("mass(F) = %.6f\ncorr(F, linear) = %.4f\n", result.mass_true,
                        result.correlation_linear);
            std::printf("residual mean square by kernel count:");
            for (double v : result.round_mse) std::printf(" %.3e", v);
            std::printf("\n");
        } else if (*track) {
            track_cfg.num_trials = 1;
            track_cfg.roster = akf::parse_roster(track_filters);
            const auto report = akf::run_experiment(track_cfg);
            for (const auto& f : report.filters)
                std::printf("%-14s accumulated rmse %12.4f   wall %8.2fs   diverged %d\n",
                            f.name.c_str(), f.accumulated_rmse, f.wall_seconds,
                            f.divergence_count);
        } else if (*bench) {
            bench_cfg.roster = akf::parse_roster(bench_filters);
            const auto report = akf::run_experiment(bench_cfg);
            for (const auto& f : report.filters)
                std::printf("%-14s accumulated rmse %12.4f   wall %8.2fs   diverged %d\n",
                            f.name.c_str(), f.accumulated_rmse, f.wall_seconds,
                            f.divergence_count);
        } else if (*selftest) {
            return run_selftest();
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
