#include <doctest.h>

#include <cmath>
#include <random>

#include "akf/boosting.hpp"
#include "oracles.hpp"

using namespace akf;

namespace {

KernelMixture broad_proposal_2d(double var) {
    KernelMixture m(2);
    m.add(GaussianKernel(1.0, Vector::Zero(2), var * Matrix::Identity(2, 2)));
    return m;
}

KernelMixture three_gaussian_target() {
    KernelMixture m(2);
    Vector mu1(2), mu2(2), mu3(2);
    mu1 << -2.0, -1.0;
    mu2 << 2.0, 0.0;
    mu3 << 0.0, 2.0;
    Matrix c1 = Matrix::Zero(2, 2), c2 = Matrix::Zero(2, 2), c3 = Matrix::Zero(2, 2);
    c1.diagonal() << 0.4, 0.3;
    c2.diagonal() << 0.3, 0.5;
    c3.diagonal() << 0.5, 0.4;
    m.add(GaussianKernel(0.5, mu1, c1));
    m.add(GaussianKernel(0.3, mu2, c2));
    m.add(GaussianKernel(0.2, mu3, c3));
    return m;
}

} // namespace

TEST_CASE("local_fit recovers an exact Gaussian bump") {
    const Vector center = Vector::Zero(2);
    const Matrix proposal_cov = Matrix::Identity(2, 2);
    BoostConfig cfg;
    const Matrix sigma_init = cfg.init_cov_scale * proposal_cov.diagonal().asDiagonal();
    const GaussianKernel truth(0.7, center, sigma_init);

    std::mt19937_64 rng(1);
    const GaussianKernel fit = local_fit(
        [&truth](const Vector& x) { return truth.weight() * truth.density(x); }, center, cfg,
        proposal_cov, rng);
    CHECK(std::abs(fit.weight() - 0.7) / 0.7 < 1e-3);
    CHECK((fit.mean() - center).cwiseAbs().maxCoeff() < 1e-3);
    CHECK((fit.covariance() - sigma_init).cwiseAbs().maxCoeff() / 0.25 < 1e-3);
}

TEST_CASE("local_fit keeps negative weights negative") {
    const Vector center = Vector::Zero(2);
    const Matrix proposal_cov = Matrix::Identity(2, 2);
    BoostConfig cfg;
    const Matrix sigma_init = cfg.init_cov_scale * proposal_cov.diagonal().asDiagonal();
    const GaussianKernel truth(-0.5, center, sigma_init);

    std::mt19937_64 rng(2);
    const GaussianKernel fit = local_fit(
        [&truth](const Vector& x) { return truth.weight() * truth.density(x); }, center, cfg,
        proposal_cov, rng);
    CHECK(fit.weight() < 0.0);
    CHECK(std::abs(fit.weight() + 0.5) < 1e-3);
}

TEST_CASE("local_fit moves the mean toward an offset bump and reduces the objective") {
    const Vector center = Vector::Zero(2);
    Vector offset(2);
    offset << 0.3, -0.3;
    const Matrix proposal_cov = Matrix::Identity(2, 2);
    BoostConfig cfg;
    const Matrix sigma_init = cfg.init_cov_scale * proposal_cov.diagonal().asDiagonal();
    const GaussianKernel truth(0.6, Vector(center + offset), sigma_init);
    auto residual = [&truth](const Vector& x) { return truth.weight() * truth.density(x); };

    std::mt19937_64 rng(3);
    const GaussianKernel fit = local_fit(residual, center, cfg, proposal_cov, rng);
    CHECK((fit.mean() - truth.mean()).norm() < 0.25 * offset.norm());

    // objective on fresh local samples drops well below the do-nothing baseline
    std::mt19937_64 rng2(17);
    std::normal_distribution<double> normal(0.0, 0.5);
    double f0 = 0.0, f1 = 0.0;
    for (int i = 0; i < 200; ++i) {
        Vector x(2);
        x << center[0] + normal(rng2), center[1] + normal(rng2);
        const double r = residual(x);
        f0 += r * r;
        const double e = r - fit.weight() * fit.density(x);
        f1 += e * e;
    }
    CHECK(f1 < 0.1 * f0);
}

TEST_CASE("local_fit signals non-finite residuals") {
    BoostConfig cfg;
    std::mt19937_64 rng(4);
    CHECK_THROWS_AS(local_fit([](const Vector&) { return std::nan(""); }, Vector::Zero(2), cfg,
                              Matrix::Identity(2, 2), rng),
                    LocalFitError);
}

TEST_CASE("boost_fit: self-fit stops after one kernel") {
    KernelMixture proposal = broad_proposal_2d(1.0);
    BoostConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_kernels = 5;
    std::mt19937_64 rng(5);
    const BoostResult res = boost_fit(
        {[&proposal](const Vector& x) { return proposal.evaluate(x); }, proposal}, cfg, rng);
    CHECK(res.mixture.size() == 1);
    CHECK(res.diagnostics.converged);
    REQUIRE(res.diagnostics.rounds.size() == 2);
    CHECK(res.diagnostics.rounds.back().global_error < cfg.tol);
}

TEST_CASE("boost_fit: zero target stops immediately with an empty mixture") {
    KernelMixture proposal = broad_proposal_2d(1.0);
    BoostConfig cfg;
    std::mt19937_64 rng(6);
    const BoostResult res =
        boost_fit({[](const Vector&) { return 0.0; }, proposal}, cfg, rng);
    CHECK(res.mixture.empty());
    CHECK(res.diagnostics.converged);
    REQUIRE(res.diagnostics.rounds.size() == 1);
    CHECK(res.diagnostics.rounds[0].global_error == 0.0);
}

TEST_CASE("boost_fit recovers a well-separated 3-Gaussian mixture") {
    const KernelMixture target = three_gaussian_target();
    KernelMixture proposal = broad_proposal_2d(9.0);
    BoostConfig cfg;
    cfg.max_kernels = 6;
    cfg.tol = 5e-7;
    std::mt19937_64 rng(7);
    const BoostResult res = boost_fit(
        {[&target](const Vector& x) { return target.evaluate(x); }, proposal}, cfg, rng);
    CHECK(res.mixture.size() <= 6);

    double sup_err = 0.0, sup = 0.0;
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            Vector x(2);
            x << -5.0 + 10.0 * i / 49.0, -5.0 + 10.0 * j / 49.0;
            sup = std::max(sup, std::abs(target.evaluate(x)));
            sup_err = std::max(sup_err, std::abs(target.evaluate(x) - res.mixture.evaluate(x)));
        }
    CHECK(sup_err / sup < 0.05);

    // global error shrinks monotonically across rounds
    for (std::size_t i = 1; i < res.diagnostics.rounds.size(); ++i)
        CHECK(res.diagnostics.rounds[i].global_error <=
              res.diagnostics.rounds[i - 1].global_error);
}

TEST_CASE("boost_fit respects the kernel cap") {
    // a spread-out target that one-per-round fitting cannot exhaust
    KernelMixture proposal = broad_proposal_2d(4.0);
    BoostConfig cfg;
    cfg.max_kernels = 3;
    cfg.tol = 1e-16;
    std::mt19937_64 rng(8);
    const BoostResult res = boost_fit(
        {[](const Vector& x) { return std::exp(-0.1 * x.squaredNorm()) * (1.0 + x[0]); },
         proposal},
        cfg, rng);
    CHECK(res.mixture.size() <= 3);
}

TEST_CASE("boost_fit is deterministic for a fixed seed") {
    const KernelMixture target = three_gaussian_target();
    KernelMixture proposal = broad_proposal_2d(9.0);
    BoostConfig cfg;
    cfg.max_kernels = 4;
    auto run = [&]() {
        std::mt19937_64 rng(99);
        return boost_fit({[&target](const Vector& x) { return target.evaluate(x); }, proposal},
                         cfg, rng);
    };
    const BoostResult a = run();
    const BoostResult b = run();
    REQUIRE(a.mixture.size() == b.mixture.size());
    for (std::size_t k = 0; k < a.mixture.size(); ++k) {
        CHECK(a.mixture.kernel(k).weight() == b.mixture.kernel(k).weight());
        CHECK((a.mixture.kernel(k).mean() - b.mixture.kernel(k).mean()).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((a.mixture.kernel(k).covariance() - b.mixture.kernel(k).covariance())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}

TEST_CASE("boost_fit aborts after two consecutive local failures") {
    KernelMixture proposal = broad_proposal_2d(1.0);
    BoostConfig cfg;
    std::mt19937_64 rng(9);
    // finite at most proposal samples, NaN near the worst-error point
    const BoostResult res = boost_fit(
        {[](const Vector& x) {
             return x.squaredNorm() < 1e4 ? std::nan("") : 0.0;
         },
         proposal},
        cfg, rng);
    CHECK(res.diagnostics.aborted);
    CHECK(res.mixture.empty());
}

TEST_CASE("full-covariance local_fit recovers a correlated Gaussian exactly") {
    Vector mu(2);
    mu << 0.4, -0.6;
    Matrix cov(2, 2);
    cov << 0.9, 0.25, 0.25, 0.6;
    const GaussianKernel truth(0.8, mu, cov);

    BoostConfig cfg;
    cfg.full_covariance = true;
    std::mt19937_64 rng(10);
    const GaussianKernel fit = local_fit(
        [&truth](const Vector& x) { return truth.weight() * truth.density(x); }, mu, cfg,
        Matrix(cov * 2.0), rng);
    CHECK(std::abs(fit.weight() - 0.8) < 1e-8);
    CHECK((fit.mean() - mu).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((fit.covariance() - cov).cwiseAbs().maxCoeff() < 1e-8);
}
