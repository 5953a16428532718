#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "caerom/error.hpp"
#include "caerom/lspg.hpp"

using namespace caerom;

namespace {

constexpr double pi = std::numbers::pi;

HeatProblem heat_problem(std::size_t n = 33) {
    HeatProblem p;
    p.mesh = make_mesh(0.0, 1.0, n);
    p.dt = 1e-3;
    for (double x : p.mesh.points()) p.u0.push_back(5.0 * x * (1.0 - x));
    return p;
}

WaveProblem1D wave_problem(std::size_t n = 33) {
    WaveProblem1D p;
    p.mesh = make_mesh(0.0, 1.0, n);
    p.c = 1.0;
    p.dt = 0.5 * p.mesh.dx();
    for (double x : p.mesh.points()) {
        p.u0.push_back(5.0 * x * (1.0 - x));
        p.v0.push_back(3.0 * std::sin(pi * x));
    }
    return p;
}

KsProblem ks_problem(std::size_t n = 64) {
    KsProblem p;
    p.mesh = make_mesh(0.0, 32.0 * pi, n);
    p.dt = 0.05;
    for (double x : p.mesh.points()) p.u0.push_back(std::cos(x / 16.0));
    return p;
}

WaveProblem2D wave2d_problem(std::size_t n = 17) {
    WaveProblem2D p;
    p.mesh = {make_mesh(0.0, 1.0, n), make_mesh(0.0, 1.0, n)};
    p.dt = 0.5 * p.mesh.x.dx();
    for (double x : p.mesh.x.points())
        for (double y : p.mesh.y.points()) {
            p.u0.push_back(std::sin(pi * x) * std::sin(pi * y));
            p.v0.push_back(0.0);
        }
    return p;
}

// u part of a FOM snapshot column.
std::vector<double> u_part(const SnapshotMatrix& s, std::size_t col, std::size_t n) {
    const auto c = s.column(col);
    return {c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n)};
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void expect_identity_rom_matches_fom(const Problem& problem, std::size_t steps) {
    const std::size_t n = initial_state(problem).size();
    auto map = std::make_shared<IdentityMap>(n);
    const auto lspg = make_lspg_problem_padded(problem, map, 0);
    const auto run = run_rom(lspg, problem, steps);
    ASSERT_TRUE(run.ok()) << *run.error;
    const auto fom = run_fom(problem, steps, 1);
    const auto& t = run.trajectory;
    ASSERT_EQ(t.size(), steps + 1);
    const std::size_t given = lspg.residual_model().history_depth();
    for (std::size_t k = 0; k <= steps; ++k) {
        EXPECT_LT(max_abs_diff(t.states[k], u_part(fom, k, n)), 1e-8) << "step " << k;
        EXPECT_DOUBLE_EQ(t.times[k], fom.times()[k]);
        if (k >= given) EXPECT_EQ(t.gn_iterations[k], 1u) << "step " << k;
    }
}

}  // namespace

TEST(GaussNewton, LinearLeastSquaresInOneIteration) {
    Eigen::MatrixXd a(5, 3);
    a << 1, 2, 0, 0, 1, 1, 3, 0, 1, 1, 1, 1, 2, -1, 0;
    Eigen::VectorXd b(5);
    b << 1, -2, 0.5, 3, 1;
    const auto r = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; };
    const auto j = [&](const Eigen::VectorXd&) -> Eigen::MatrixXd { return a; };
    const auto res = gauss_newton(r, j, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(res.status, GnStatus::Converged);
    EXPECT_EQ(res.iterations, 1u);
    EXPECT_FALSE(res.rank_deficient);
    const Eigen::VectorXd ls = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    EXPECT_LT((res.xi - ls).norm(), 1e-12);
}

TEST(GaussNewton, IdentityResidualReachesZero) {
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
    const auto j = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        return Eigen::MatrixXd::Identity(x.size(), x.size());
    };
    Eigen::VectorXd x0(4);
    x0 << 1, -2, 3, 0.5;
    const auto res = gauss_newton(r, j, x0);
    EXPECT_EQ(res.status, GnStatus::Converged);
    EXPECT_EQ(res.iterations, 1u);
    EXPECT_EQ(res.residual_norm, 0.0);
    EXPECT_DOUBLE_EQ(res.initial_norm, x0.norm());
}

TEST(GaussNewton, Rosenbrock) {
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd v(2);
        v << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return v;
    };
    const auto j = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd m(2, 2);
        m << -20.0 * x[0], 10.0, -1.0, 0.0;
        return m;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto res = gauss_newton(r, j, x0);
    EXPECT_TRUE(res.converged());
    EXPECT_NEAR(res.xi[0], 1.0, 1e-10);
    EXPECT_NEAR(res.xi[1], 1.0, 1e-10);
    EXPECT_LT(res.residual_norm, 1e-10);
}

TEST(GaussNewton, RankDeficientGivesMinimumNormStep) {
    // x0 + x1 = 2 has the minimum-norm solution (1, 1).
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, x.sum() - 2); };
    const auto j = [](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Ones(1, 2); };
    const auto res = gauss_newton(r, j, Eigen::VectorXd::Zero(2));
    EXPECT_TRUE(res.rank_deficient);
    EXPECT_NEAR(res.xi[0], 1.0, 1e-14);
    EXPECT_NEAR(res.xi[1], 1.0, 1e-14);
}

TEST(GaussNewton, WrongSignJacobianStagnates) {
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
    const auto j = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        return -Eigen::MatrixXd::Identity(x.size(), x.size());
    };
    const auto res = gauss_newton(r, j, Eigen::VectorXd::Ones(3));
    EXPECT_EQ(res.status, GnStatus::Stagnated);
    EXPECT_EQ(res.iterations, 0u);
    EXPECT_DOUBLE_EQ(res.residual_norm, std::sqrt(3.0));
}

TEST(GaussNewton, MaxIterationsReported) {
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd v(2);
        v << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return v;
    };
    const auto j = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd m(2, 2);
        m << -20.0 * x[0], 10.0, -1.0, 0.0;
        return m;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    GaussNewtonOptions opt;
    opt.max_iter = 1;
    const auto res = gauss_newton(r, j, x0, opt);
    EXPECT_EQ(res.status, GnStatus::MaxIterations);
    EXPECT_FALSE(res.converged());
    EXPECT_EQ(res.iterations, 1u);
}

TEST(GaussNewton, DescentOnEveryIteration) {
    // A mildly nonlinear residual: |r| must not increase between iterates.
    const auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd v(3);
        v << std::sin(x[0]) + x[1] - 0.3, x[0] * x[1] - 0.2, std::exp(0.1 * x[0]) - 1.05;
        return v;
    };
    const auto j = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        Eigen::MatrixXd m(3, 2);
        m << std::cos(x[0]), 1.0, x[1], x[0], 0.1 * std::exp(0.1 * x[0]), 0.0;
        return m;
    };
    Eigen::VectorXd x(2);
    x << 2.0, -1.0;
    double prev = r(x).norm();
    GaussNewtonOptions one;
    one.max_iter = 1;
    for (int k = 0; k < 20; ++k) {
        const auto res = gauss_newton(r, j, x, one);
        EXPECT_LE(res.residual_norm, prev);
        prev = res.residual_norm;
        x = res.xi;
    }
}

TEST(LatentMap, IdentityMapRoundTrip) {
    IdentityMap m(4);
    const std::vector<double> u{1, 2, 3, 4};
    EXPECT_EQ(m.decode(m.encode(u)), u);
    EXPECT_TRUE(m.jacobian(u, JacobianMode::ForwardMode).isIdentity());
    EXPECT_THROW(m.encode(std::vector<double>{1.0}), InvalidArgument);
    for (double v : compute_x_ref(u, m)) EXPECT_EQ(v, 0.0);
}

TEST(Lspg, IdentityHeatReproducesFom) { expect_identity_rom_matches_fom(heat_problem(), 50); }

TEST(Lspg, IdentityWaveReproducesFom) { expect_identity_rom_matches_fom(wave_problem(), 60); }

TEST(Lspg, IdentityWave2DReproducesFom) { expect_identity_rom_matches_fom(wave2d_problem(), 20); }

TEST(Lspg, IdentityKsReproducesFom) { expect_identity_rom_matches_fom(ks_problem(), 30); }

TEST(Lspg, RejectsMismatchedMap) {
    const Problem p = heat_problem(33);
    EXPECT_THROW(make_lspg_problem_padded(p, std::make_shared<IdentityMap>(40), 0), InvalidArgument);
    EXPECT_THROW(make_lspg_problem_padded(p, std::make_shared<IdentityMap>(33), 2), InvalidArgument);
}

namespace {

std::shared_ptr<const Autoencoder> small_autoencoder() {
    AutoencoderSpec spec;
    spec.input_shape = {40, 1};
    spec.n_conv = 2;
    spec.latent_dim = 4;
    spec.base_filters = 4;
    spec.dense_units = 8;
    spec.prelu_init = 0.25;  // keeps the decoder visibly nonlinear
    return std::make_shared<const Autoencoder>(Autoencoder::build(spec, 7));
}

}  // namespace

TEST(Lspg, InitialStateIsExactThroughXref) {
    const Problem p = heat_problem(34);
    auto map = std::make_shared<AutoencoderMap>(small_autoencoder());
    const auto lspg = make_lspg_problem_padded(p, map, 3);
    const auto u0_ext = extend_function(initial_state(p), lspg.mesh());
    const auto xi0 = map->encode(u0_ext);
    EXPECT_LT(max_abs_diff(lspg.full_state(xi0), u0_ext), 1e-12);
    EXPECT_LT(max_abs_diff(lspg.state(xi0), initial_state(p)), 1e-12);
}

TEST(Lspg, ComposedJacobianMatchesFiniteDifferences) {
    const Problem p = ks_problem(34);
    auto map = std::make_shared<AutoencoderMap>(small_autoencoder());
    const auto lspg = make_lspg_problem_padded(p, map, 3);
    const std::vector<std::vector<double>> hist{initial_state(p), initial_state(p)};
    Eigen::VectorXd xi(4);
    xi << 0.3, -0.2, 0.5, 0.1;
    const Eigen::MatrixXd jac = lspg.jacobian(xi, hist);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < xi.size(); ++j) {
        Eigen::VectorXd xp = xi, xm = xi;
        xp[j] += h;
        xm[j] -= h;
        const Eigen::VectorXd fd = (lspg.residual(xp, hist) - lspg.residual(xm, hist)) / (2 * h);
        EXPECT_LT((fd - jac.col(j)).norm(), 1e-6 * std::max(1.0, fd.norm())) << "column " << j;
    }
}

TEST(Lspg, JacobianModesGiveSameTrajectory) {
    const Problem p = heat_problem(34);
    auto map = std::make_shared<AutoencoderMap>(small_autoencoder());
    LspgOptions fwd, fd;
    fd.jacobian_mode = JacobianMode::ThreePoint;
    const auto a = run_rom(make_lspg_problem_padded(p, map, 3, fwd), p, 10);
    const auto b = run_rom(make_lspg_problem_padded(p, map, 3, fd), p, 10);
    ASSERT_TRUE(a.ok()) << *a.error;
    ASSERT_TRUE(b.ok()) << *b.error;
    for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
        EXPECT_LT(max_abs_diff(a.trajectory.states[k], b.trajectory.states[k]), 1e-5) << "step " << k;
    }
}

TEST(Lspg, StepDoesNotIncreaseResidualFromWarmStart) {
    const Problem p = heat_problem(34);
    auto map = std::make_shared<AutoencoderMap>(small_autoencoder());
    const auto lspg = make_lspg_problem_padded(p, map, 3);
    const auto u0_ext = extend_function(initial_state(p), lspg.mesh());
    const auto xi0 = map->encode(u0_ext);
    const std::vector<std::vector<double>> hist{initial_state(p)};
    const auto res = lspg_step(lspg, hist, xi0);
    EXPECT_LE(res.residual_norm, res.initial_norm);
    EXPECT_THROW(lspg_step(lspg, hist, std::vector<double>{0.0}), InvalidArgument);
}

TEST(Lspg, TrajectoryCsv) {
    const Problem p = heat_problem();
    const auto lspg = make_lspg_problem_padded(p, std::make_shared<IdentityMap>(33), 0);
    const auto run = run_rom(lspg, p, 3);
    std::ostringstream out;
    write_trajectory_csv(out, run.trajectory);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,gn_iters,residual_norm");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("0,0,", 0), 0u);
    EXPECT_EQ(std::stod(line.substr(4)), 0.0);
    std::size_t rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4u);
    const auto snaps = trajectory_snapshots(run.trajectory);
    EXPECT_EQ(snaps.cols(), 4u);
    EXPECT_EQ(snaps.rows(), 33u);
}
