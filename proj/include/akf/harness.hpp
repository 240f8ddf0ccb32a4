#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "akf/baselines.hpp"
#include "akf/filter.hpp"

namespace akf {

struct FilterSpec {
    enum class Kind { Kernel, ParticleFilter, Enkf, Kalman };
    Kind kind = Kind::Kernel;
    int size = 0; // kernel cap K, or ensemble/particle count N
    std::string name;
};

/// Parses "kernel:20", "pf:5000", "enkf:2000" or "kalman".
FilterSpec parse_filter_spec(const std::string& text);
std::vector<FilterSpec> parse_roster(const std::string& comma_separated);

struct BoostOverrides {
    std::optional<int> global_samples;
    std::optional<double> tol;
    std::optional<int> local_samples;
    std::optional<int> local_opt_max_iters;
    std::optional<double> init_cov_scale;
    std::optional<bool> full_covariance;
};

struct ExperimentConfig {
    std::string problem = "bearing"; // linear2d | bearing | lorenz96
    std::vector<FilterSpec> roster;
    int num_trials = 1;
    std::uint64_t base_seed = 0;
    std::string out_dir;

    // model overrides
    double bearing_noise_std = 0.05;
    double bearing_filter_sigma_v = 4.5; // filter-side maneuver noise on velocities
    int bearing_obs_stride = 1;          // simulation steps per bearing observation
    double linear_obs_noise = 0.04;
    int lorenz_dim = 10;
    double lorenz_forcing = 8.0;
    double lorenz_sigma = 0.5;
    double prior_cov = 0.5;
    std::optional<bool> rmse_position_only; // default: per problem

    BoostOverrides boost;
    int linearization_samples = 2000;
    bool likelihood_half = true;
    bool write_trajectories = true;
    bool write_diagnostics = true;
};

struct FilterReport {
    std::string name;
    std::vector<double> per_step_rmse;
    double accumulated_rmse = 0.0;
    double wall_seconds = 0.0;
    int divergence_count = 0;
};

struct RmseReport {
    std::vector<FilterReport> filters;
    int num_steps = 0;
    double dt = 0.0;

    const FilterReport& by_name(const std::string& name) const;
};

/// Runs every rostered filter on shared truth/observation draws for each
/// trial, aggregates cross-trial RMSE, and writes trajectories.csv, rmse.csv,
/// boosting_diagnostics.csv and summary.txt under out_dir (when set).
RmseReport run_experiment(const ExperimentConfig& cfg);

struct Demo2dConfig {
    std::string out_dir;
    std::uint64_t seed = 1;
    double grid_halfwidth = 8.0;
    int grid_points = 161;
    int kernels = 6;
    int linearization_samples = 2000;
};

struct Demo2dResult {
    double mass_true = 0.0;          // trapezoid integral of the target F
    double correlation_linear = 0.0; // grid correlation of F with its linear-drift approximation
    std::vector<double> round_mse;   // residual grid mean square after 0, 1, ... kernels
};

/// Example-1 demonstration: grids of the drift-operator target F, its
/// linear-drift approximation, the nonlinear residual component, and the
/// boosting fit after each round, all written as (x1, x2, value) CSVs.
Demo2dResult run_demo2d(const Demo2dConfig& cfg);

} // namespace akf
