#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "caerom/banded.hpp"
#include "caerom/error.hpp"
#include "caerom/fom.hpp"
#include "oracles.hpp"

using namespace caerom;

namespace {

constexpr double pi = std::numbers::pi;

double rel_l2(std::span<const double> a, std::span<const double> b) {
    double n = 0.0, d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        n += (a[i] - b[i]) * (a[i] - b[i]);
        d += b[i] * b[i];
    }
    return std::sqrt(n / d);
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Eigen::MatrixXd dense(const BandedMatrix& m) {
    const auto d = m.to_dense();
    const auto n = static_cast<Eigen::Index>(m.size());
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(d.data(), n, n);
}

Eigen::VectorXd vec(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

HeatProblem heat(std::size_t n, double dt, std::vector<double> u0 = {}) {
    HeatProblem p;
    p.mesh = make_mesh(0.0, 1.0, n);
    p.dt = dt;
    if (u0.empty())
        for (double x : p.mesh.points()) u0.push_back(5.0 * x * (1.0 - x));
    p.u0 = std::move(u0);
    return p;
}

WaveProblem1D wave(std::size_t n, double c, double r) {
    WaveProblem1D p;
    p.mesh = make_mesh(0.0, 1.0, n);
    p.c = c;
    p.dt = r * p.mesh.dx() / c;
    for (double x : p.mesh.points()) {
        p.u0.push_back(std::sin(pi * x));
        p.v0.push_back(0.0);
    }
    return p;
}

KsProblem ks(std::size_t n) {
    KsProblem p;
    p.mesh = make_mesh(0.0, 32.0 * pi, n);
    p.dt = 0.05;
    for (double x : p.mesh.points()) {
        p.u0.push_back(std::cos(x / 16.0) * (1.0 + 0.3 * std::sin(x / 8.0)) + 0.2 * std::cos(3.0 * x / 16.0));
    }
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Banded algebra

TEST(Banded, TridiagonalMatchesDense) {
    const std::size_t n = 12;
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = -1.0 + 0.1 * i;
        up[i] = 0.5 - 0.05 * i;
        di[i] = 4.0 + std::sin(static_cast<double>(i));
        rhs[i] = std::cos(0.4 * i);
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = di[i];
        if (i > 0) a(i, i - 1) = lo[i];
        if (i + 1 < n) a(i, i + 1) = up[i];
    }
    const Eigen::VectorXd ref = a.partialPivLu().solve(vec(rhs));
    const auto x = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-14);
}

TEST(Banded, ZeroPivotReported) {
    const std::vector<double> lo{0, 1}, di{0, 1}, up{1, 0}, rhs{1, 1};
    EXPECT_THROW(solve_tridiagonal(lo, di, up, rhs), NumericalFailure);
}

TEST(Banded, LuWithPivotingMatchesDense) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 15;
    BandedMatrix m(n, 2, 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= std::min(n - 1, i + 2); ++j) m(i, j) = u(gen);
    m(0, 0) = 0.0;  // forces a row swap
    std::vector<double> rhs(n);
    for (double& v : rhs) v = u(gen);
    const Eigen::VectorXd ref = dense(m).partialPivLu().solve(vec(rhs));
    const auto x = solve_banded(m, rhs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-10 * std::max(1.0, std::abs(ref[i])));
}

TEST(Banded, SingularRejected) {
    BandedMatrix m(3, 1, 1);
    m(0, 0) = 1.0;
    m(1, 1) = 0.0;
    m(2, 2) = 1.0;
    EXPECT_THROW(solve_banded(m, std::vector<double>{1, 1, 1}), NumericalFailure);
}

TEST(Banded, MultiplyAndBand) {
    BandedMatrix m(4, 1, 2);
    m(0, 2) = 3.0;
    m(3, 2) = -1.0;
    m(1, 1) = 2.0;
    EXPECT_THROW(m(3, 0), InvalidArgument);
    EXPECT_EQ(m.at(3, 0), 0.0);
    const std::vector<double> x{1, 2, 3, 4};
    const auto y = m.multiply(x);
    EXPECT_EQ(y, (std::vector<double>{9, 4, 0, -3}));
    const std::vector<double> two{1, 2, 3, 4, 0, 0, 1, 0};
    const auto yy = m.multiply_dense(two, 2);
    EXPECT_EQ(std::vector<double>(yy.begin(), yy.begin() + 4), y);
    EXPECT_EQ(std::vector<double>(yy.begin() + 4, yy.end()), (std::vector<double>{3, 0, 0, -1}));
}

// ---------------------------------------------------------------------------
// Heat

TEST(Heat, ZeroIsFixedPoint) {
    const auto p = heat(17, 1e-3);
    for (double v : heat_step(p, std::vector<double>(17, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(Heat, SineDecaysLikeHeatKernel) {
    std::vector<double> s;
    const auto mesh = make_mesh(0.0, 1.0, 65);
    for (double x : mesh.points()) s.push_back(std::sin(pi * x));
    s.back() = 0.0;
    const auto p = heat(65, 1e-4, s);
    const auto next = heat_step(p, s);
    std::vector<double> exact(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) exact[i] = std::exp(-pi * pi * p.dt) * s[i];
    EXPECT_LT(rel_l2(next, exact), 1e-6);
    EXPECT_DOUBLE_EQ(p.r(), 1e-4 / (mesh.dx() * mesh.dx()));
}

TEST(Heat, FourierSeriesOracle) {
    const auto p = heat(65, 1e-4);
    const auto snaps = run_fom(p, 500, 500);
    ASSERT_EQ(snaps.cols(), 2u);
    const double t = snaps.times()[1];
    EXPECT_NEAR(t, 0.05, 1e-14);
    std::vector<double> exact;
    for (double x : p.mesh.points()) exact.push_back(oracle::heat_parabola(x, t));
    EXPECT_LT(rel_l2(snaps.column(1), exact), 1e-3);
}

TEST(Heat, NormNonIncreasing) {
    const auto p = heat(33, 5e-3);
    std::vector<double> u = p.u0;
    double prev = 0.0;
    for (double v : u) prev += v * v;
    for (int k = 0; k < 200; ++k) {
        u = heat_step(p, u);
        double now = 0.0;
        for (double v : u) now += v * v;
        EXPECT_LE(now, prev * (1.0 + 1e-15));
        prev = now;
    }
}

TEST(Heat, Linear) {
    const auto p = heat(21, 1e-3);
    std::vector<double> a(21), b(21), ab(21);
    for (std::size_t i = 1; i + 1 < 21; ++i) {
        a[i] = std::sin(0.3 * i);
        b[i] = std::cos(1.1 * i);
        ab[i] = 2.0 * a[i] - 3.0 * b[i];
    }
    const auto sa = heat_step(p, a), sb = heat_step(p, b), sab = heat_step(p, ab);
    for (std::size_t i = 0; i < 21; ++i) EXPECT_NEAR(sab[i], 2.0 * sa[i] - 3.0 * sb[i], 1e-12);
}

TEST(Heat, Validation) {
    auto p = heat(9, 1e-3);
    p.u0[0] = 0.1;
    EXPECT_THROW(p.validate(), InvalidArgument);
    auto q = heat(9, -1.0);
    EXPECT_THROW(q.validate(), InvalidArgument);
    auto r = heat(9, 1e-3);
    r.bc = BoundaryCondition::periodic();
    EXPECT_THROW(r.validate(), InvalidArgument);
}

TEST(Heat, NeumannConservesMass) {
    auto p = heat(41, 1e-3);
    p.bc = BoundaryCondition::neumann();
    for (std::size_t i = 0; i < p.u0.size(); ++i) p.u0[i] = 1.0 + std::cos(pi * p.mesh.point(i));
    auto u = p.u0;
    // Trapezoid weights make the reflected second difference mass conserving.
    auto mass = [&](const std::vector<double>& v) {
        double s = 0.5 * (v.front() + v.back());
        for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
        return s;
    };
    const double m0 = mass(u);
    for (int k = 0; k < 50; ++k) u = heat_step(p, u);
    EXPECT_NEAR(mass(u), m0, 1e-12 * m0);
}

// ---------------------------------------------------------------------------
// Wave 1D

TEST(Wave1D, ZeroHistory) {
    const auto p = wave(17, 1.0, 0.5);
    const std::vector<double> z(17, 0.0);
    for (double v : wave1d_step(p, z, z)) EXPECT_EQ(v, 0.0);
}

TEST(Wave1D, StandingWaveOnePeriod) {
    const auto p = wave(128, 1.0, 0.5);
    const double period = 2.0;
    const auto steps = static_cast<std::size_t>(std::llround(period / p.dt));
    EXPECT_NEAR(static_cast<double>(steps) * p.dt, period, 1e-12);
    const auto snaps = run_fom(p, steps, steps);
    const auto col = snaps.column(1);
    EXPECT_LT(rel_l2(col.subspan(0, 128), p.u0), 1e-2);
}

TEST(Wave1D, DiscreteEnergyConserved) {
    // E = (4/r^2)|u+ - u|^2 + (u+ + u)^T K (u+ + u) is invariant under the scheme.
    auto p = wave(65, 1.0, 0.9);
    for (std::size_t i = 0; i < 65; ++i) {
        const double x = p.mesh.point(i);
        p.u0[i] = std::sin(pi * x) + 0.3 * std::sin(3 * pi * x);
        p.v0[i] = 2.0 * std::sin(2 * pi * x);
    }
    p.u0.front() = p.u0.back() = p.v0.front() = p.v0.back() = 0.0;
    const double s = 4.0 / (p.r() * p.r());
    auto energy = [&](const std::vector<double>& next, const std::vector<double>& cur) {
        double e = 0.0;
        std::vector<double> w(65);
        for (std::size_t i = 0; i < 65; ++i) {
            e += s * (next[i] - cur[i]) * (next[i] - cur[i]);
            w[i] = next[i] + cur[i];
        }
        for (std::size_t i = 1; i + 1 < 65; ++i) e += w[i] * (2.0 * w[i] - w[i - 1] - w[i + 1]);
        return e;
    };
    std::vector<double> prev = p.u0, cur = wave1d_bootstrap(p);
    const double e0 = energy(cur, prev);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        auto next = wave1d_step(p, cur, prev);
        worst = std::max(worst, std::abs(energy(next, cur) - e0) / e0);
        prev = std::move(cur);
        cur = std::move(next);
    }
    EXPECT_LT(worst, 1e-2);
    EXPECT_LT(worst, 1e-10);  // exact up to rounding
}

TEST(Wave1D, Linear) {
    const auto p = wave(21, 2.0, 0.7);
    std::vector<double> a(21), b(21), c(21), d(21);
    for (std::size_t i = 1; i + 1 < 21; ++i) {
        a[i] = std::sin(0.3 * i);
        b[i] = std::cos(1.1 * i);
        c[i] = 0.5 * i;
        d[i] = -std::sin(2.0 * i);
    }
    std::vector<double> u1(21), u2(21);
    for (std::size_t i = 0; i < 21; ++i) {
        u1[i] = a[i] + 2.0 * c[i];
        u2[i] = b[i] + 2.0 * d[i];
    }
    const auto x = wave1d_step(p, a, b), y = wave1d_step(p, c, d), z = wave1d_step(p, u1, u2);
    for (std::size_t i = 0; i < 21; ++i) EXPECT_NEAR(z[i], x[i] + 2.0 * y[i], 1e-12);
}

TEST(Wave1D, BootstrapFormula) {
    auto p = wave(11, 3.0, 0.5);
    for (std::size_t i = 1; i + 1 < 11; ++i) p.v0[i] = 0.1 * i;
    const auto u1 = wave1d_bootstrap(p);
    const double dx = p.mesh.dx();
    for (std::size_t i = 1; i + 1 < 11; ++i) {
        const double lap = (p.u0[i - 1] - 2.0 * p.u0[i] + p.u0[i + 1]) / (dx * dx);
        EXPECT_NEAR(u1[i], p.u0[i] + p.dt * p.v0[i] + 0.5 * p.dt * p.dt * p.c * p.c * lap, 1e-14);
    }
    EXPECT_EQ(u1.front(), 0.0);
    EXPECT_EQ(u1.back(), 0.0);
}

TEST(Wave1D, SnapshotCarriesVelocity) {
    const auto p = wave(16, 1.0, 0.5);
    const auto s = run_fom(p, 4, 1);
    EXPECT_EQ(s.rows(), 32u);
    EXPECT_EQ(s.cols(), 5u);
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_EQ(s(16 + i, 0), p.v0[i]);
        EXPECT_NEAR(s(16 + i, 3), (s(i, 3) - s(i, 2)) / p.dt, 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Wave 2D

TEST(Wave2D, StencilResponse) {
    WaveProblem2D p;
    p.mesh = {make_mesh(0.0, 1.0, 7), make_mesh(0.0, 1.0, 7)};
    p.dt = 0.5 * p.mesh.x.dx();
    p.u0.assign(49, 0.0);
    p.v0.assign(49, 0.0);
    std::vector<double> u(49, 0.0), z(49, 0.0);
    u[3 * 7 + 3] = 1.0;
    const auto out = wave2d_step(p, u, z);
    const double r2 = p.rx() * p.rx();
    EXPECT_NEAR(out[3 * 7 + 3], 2.0 - 4.0 * r2, 1e-15);
    for (std::size_t q : {2 * 7 + 3, 4 * 7 + 3, 3 * 7 + 2, 3 * 7 + 4}) EXPECT_NEAR(out[q], r2, 1e-15);
    EXPECT_EQ(out[2 * 7 + 2], 0.0);
    for (double v : wave2d_step(p, z, z)) EXPECT_EQ(v, 0.0);
}

TEST(Wave2D, ProductStandingWave) {
    WaveProblem2D p;
    const std::size_t n = 64;
    p.mesh = {make_mesh(0.0, 1.0, n), make_mesh(0.0, 1.0, n)};
    p.dt = 0.5 * p.mesh.x.dx();
    for (double x : p.mesh.x.points())
        for (double y : p.mesh.y.points()) {
            p.u0.push_back(std::sin(pi * x) * std::sin(pi * y));
            p.v0.push_back(0.0);
        }
    for (std::size_t i = 0; i < n; ++i) {
        p.u0[i] = p.u0[(n - 1) * n + i] = p.u0[i * n] = p.u0[i * n + n - 1] = 0.0;
    }
    const auto s = run_fom(p, 50, 50);
    const double t = s.times()[1];
    std::vector<double> exact;
    for (double v : p.u0) exact.push_back(v * std::cos(std::sqrt(2.0) * pi * p.c * t));
    EXPECT_LT(rel_l2(s.column(1).subspan(0, n * n), exact), 5e-2);
}

TEST(Wave2D, CflEnforced) {
    WaveProblem2D p;
    p.mesh = {make_mesh(0.0, 1.0, 9), make_mesh(0.0, 1.0, 9)};
    p.dt = 0.8 * p.mesh.x.dx();
    p.u0.assign(81, 0.0);
    p.v0.assign(81, 0.0);
    EXPECT_THROW(p.validate(), InvalidArgument);
    p.dt = std::sqrt(0.5) * p.mesh.x.dx();
    EXPECT_NO_THROW(p.validate());
}

// ---------------------------------------------------------------------------
// Kuramoto-Sivashinsky

TEST(Ks, Coefficients) {
    const auto p = ks(64);
    const auto k = p.coefficients();
    const double dx = p.mesh.dx(), dt = p.dt;
    EXPECT_DOUBLE_EQ(k.a, dt / (2.0 * std::pow(dx, 4)));
    EXPECT_DOUBLE_EQ(k.e, 1.0 + 3.0 * dt / std::pow(dx, 4) - dt / (dx * dx));
    EXPECT_DOUBLE_EQ(k.a_p, -k.a);
    EXPECT_DOUBLE_EQ(k.b_p, -(dt / (2.0 * dx * dx) - 2.0 * dt / std::pow(dx, 4)));
    EXPECT_DOUBLE_EQ(k.e_p, 1.0 - 3.0 * dt / std::pow(dx, 4) + dt / (dx * dx));
}


TEST(Ks, MatricesMatchDenseRows) {
    const auto p = ks(64);
    EXPECT_LT((dense(ks_implicit_matrix(p, p.u0)) - oracle::ks_dense_a(p, p.u0)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((dense(ks_explicit_matrix(p)) - oracle::ks_dense_d(p)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ks, BandedSolverMatchesDenseLu) { EXPECT_LT(oracle::ks_banded_vs_dense(ks(64), 10), 1e-10); }

TEST(Ks, ZeroIsFixedPoint) {
    auto p = ks(32);
    std::fill(p.u0.begin(), p.u0.end(), 0.0);
    const std::vector<double> z(32, 0.0);
    for (double v : ks_step(p, z, z)) EXPECT_EQ(v, 0.0);
}

TEST(Ks, ConstantsSpanTheFourthDifferenceKernel) {
    // Interior row of A with u = 0: the dt/dx^4 part must sum to zero.
    auto p = ks(1024);
    const auto k = p.coefficients();
    const double dx = p.mesh.dx(), s = p.dt / std::pow(dx, 4), h = p.dt / (dx * dx);
    EXPECT_NEAR(2.0 * k.a + 2.0 * (k.b0 - h / 2.0) + (k.e - 1.0 + h), 0.0, 1e-9 * s);
}

TEST(Ks, FineMeshStaysBounded) {
    auto p = ks(1024);
    const auto snaps = run_fom(p, 199, 1);
    ASSERT_EQ(snaps.cols(), 200u);
    double peak = 0.0;
    for (double v : snaps.data()) peak = std::max(peak, std::abs(v));
    EXPECT_TRUE(std::isfinite(peak));
    EXPECT_LT(peak, 5.0);
}

TEST(Ks, RequiresPeriodic) {
    auto p = ks(32);
    p.bc = BoundaryCondition::dirichlet();
    EXPECT_THROW(p.validate(), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Residuals

namespace {

void expect_consistent(const Problem& problem, std::size_t steps) {
    const auto res = make_residual(model_of(problem), problem);
    const auto s = run_fom(problem, steps, 1);
    const std::size_t n = res->state_size();
    auto u = [&](std::size_t j) {
        const auto c = s.column(j);
        return std::vector<double>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(n));
    };
    const std::size_t start = res->history_depth();
    for (std::size_t j = start; j <= steps; ++j) {
        std::vector<std::vector<double>> h{u(j - 1)};
        if (res->history_depth() == 2) h.push_back(u(j - 2));
        const auto r = res->evaluate(u(j), h);
        EXPECT_LE(max_abs(r), 1e-10) << to_string(res->model()) << " step " << j;
        const auto solved = res->solve(h);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(solved[i], u(j)[i], 1e-12);
    }
}

}  // namespace

TEST(Residual, ConsistentWithSteppers) {
    expect_consistent(heat(33, 1e-3), 20);
    auto w = wave(33, 10.0, 0.5);
    for (std::size_t i = 0; i < 33; ++i) w.v0[i] = 3.0 * std::sin(pi * w.mesh.point(i));
    w.v0.back() = 0.0;
    expect_consistent(w, 20);
    expect_consistent(ks(64), 20);
    WaveProblem2D p;
    p.mesh = {make_mesh(0.0, 1.0, 12), make_mesh(0.0, 1.0, 12)};
    p.dt = 0.5 * p.mesh.x.dx();
    for (double x : p.mesh.x.points())
        for (double y : p.mesh.y.points()) {
            p.u0.push_back(x * (1 - x) * y * (1 - y));
            p.v0.push_back(0.0);
        }
    expect_consistent(p, 20);
}

TEST(Residual, HeatJacobianIsConstant) {
    const Problem p = heat(17, 1e-3);
    const auto r = make_residual(ModelKind::Heat, p);
    EXPECT_TRUE(r->constant_jacobian());
    EXPECT_EQ(r->history_depth(), 1u);
    const std::vector<std::vector<double>> h1{std::vector<double>(17, 0.0)}, h2{std::vector<double>(17, 1.0)};
    EXPECT_EQ(r->jacobian(h1).to_dense(), r->jacobian(h2).to_dense());
}

TEST(Residual, KsJacobianDependsOnState) {
    const Problem p = ks(32);
    const auto r = make_residual(ModelKind::KS, p);
    EXPECT_FALSE(r->constant_jacobian());
    EXPECT_EQ(r->history_depth(), 2u);
}

TEST(Residual, RejectsMismatchedModel) {
    const Problem p = heat(17, 1e-3);
    EXPECT_THROW(make_residual(ModelKind::KS, p), InvalidArgument);
    const auto r = make_residual(ModelKind::Heat, p);
    const std::vector<std::vector<double>> short_hist{std::vector<double>(5, 0.0)};
    EXPECT_THROW(r->rhs(short_hist), InvalidArgument);
    EXPECT_THROW(parse_model("burgers"), InvalidArgument);
}

TEST(RunFom, SampleCounts) {
    const auto s = run_fom(heat(17, 1e-3), 100, 10);
    EXPECT_EQ(s.cols(), 11u);
    EXPECT_EQ(s.rows(), 17u);
    EXPECT_NEAR(s.times()[10], 0.1, 1e-14);
    EXPECT_THROW(run_fom(heat(17, 1e-3), 0, 1), InvalidArgument);
}
