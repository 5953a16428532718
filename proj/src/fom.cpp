#include "caerom/fom.hpp"

#include <algorithm>
#include <cmath>

#include "caerom/error.hpp"

namespace caerom {

void BoundaryCondition::validate() const {
    auto is = [](double a, double b, double x, double y) { return a == x && b == y; };
    bool ok = false;
    switch (kind) {
        case BcKind::Dirichlet: ok = is(alpha1, alpha2, 1, 0) && is(beta1, beta2, 1, 0); break;
        case BcKind::Neumann: ok = is(alpha1, alpha2, 0, 1) && is(beta1, beta2, 0, 1); break;
        case BcKind::Periodic: ok = is(alpha1, alpha2, 0, 0) && is(beta1, beta2, 0, 0); break;
    }
    if (!ok) throw InvalidArgument("BoundaryCondition: selectors inconsistent with kind");
}

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

void require_non_periodic(const BoundaryCondition& bc, const char* who) {
    bc.validate();
    require(bc.kind != BcKind::Periodic, std::string(who) + ": periodic boundaries are only supported for KS");
}

void require_dirichlet_zero(std::span<const double> u, std::size_t first, std::size_t last, const char* who) {
    double scale = 1.0;
    for (double v : u) scale = std::max(scale, std::abs(v));
    require(std::abs(u[first]) <= 1e-12 * scale && std::abs(u[last]) <= 1e-12 * scale,
            std::string(who) + ": Dirichlet boundary values of the initial state must be 0");
}

// Second-difference matrix (2 on the diagonal, -1 off it). Dirichlet boundary
// rows are zero (those nodes are pinned); Neumann rows reflect the ghost point.
BandedMatrix second_difference(std::size_t n, BcKind kind) {
    BandedMatrix k(n, 1, 1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        k(i, i - 1) = -1.0;
        k(i, i) = 2.0;
        k(i, i + 1) = -1.0;
    }
    if (kind == BcKind::Neumann) {
        k(0, 0) = 2.0;
        k(0, 1) = -2.0;
        k(n - 1, n - 1) = 2.0;
        k(n - 1, n - 2) = -2.0;
    }
    return k;
}

// alpha*I + beta*K. With `pin`, Dirichlet rows become (alpha + 2 beta) e_i, the
// interior diagonal, so a least-squares residual weighs the boundary like any other
// node; otherwise they are zero.
BandedMatrix shifted(const BandedMatrix& k, double alpha, double beta, BcKind kind, bool pin) {
    const std::size_t n = k.size();
    BandedMatrix m(n, 1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = (i ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j) {
            m(i, j) = beta * k.at(i, j) + (i == j ? alpha : 0.0);
        }
    }
    if (kind == BcKind::Dirichlet) {
        for (std::size_t i : {std::size_t{0}, n - 1}) {
            for (std::size_t j = (i ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j) {
                m(i, j) = pin && i == j ? alpha + 2.0 * beta : 0.0;
            }
        }
    }
    return m;
}

std::vector<double> solve_tri(const BandedMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    std::vector<double> lo(n, 0.0), di(n), up(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        di[i] = a.at(i, i);
        if (i > 0) lo[i] = a.at(i, i - 1);
        if (i + 1 < n) up[i] = a.at(i, i + 1);
    }
    return solve_tridiagonal(lo, di, up, rhs);
}

void check_len(std::span<const double> v, std::size_t n, const char* who) {
    require(v.size() == n, std::string(who) + ": state has length " + std::to_string(v.size()) + ", expected " +
                               std::to_string(n));
}

struct HeatOps {
    BandedMatrix lhs, rhs;
};

HeatOps heat_ops(const HeatProblem& p) {
    const std::size_t n = p.mesh.size();
    const BandedMatrix k = second_difference(n, p.bc.kind);
    const double r = p.r();
    return {shifted(k, 2.0, r, p.bc.kind, true), shifted(k, 2.0, -r, p.bc.kind, false)};
}

struct WaveOps {
    BandedMatrix plus, minus, plus_free;
};

WaveOps wave_ops(const WaveProblem1D& p) {
    const std::size_t n = p.mesh.size();
    const BandedMatrix k = second_difference(n, p.bc.kind);
    const double s = 4.0 / (p.r() * p.r());
    return {shifted(k, s, 1.0, p.bc.kind, true), shifted(k, s, -1.0, p.bc.kind, false),
            shifted(k, s, 1.0, p.bc.kind, false)};
}

std::vector<double> wave1d_rhs(const WaveOps& ops, std::span<const double> u1, std::span<const double> u2) {
    auto b = ops.minus.multiply(u1);
    const auto c = ops.plus_free.multiply(u2);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 2.0 * b[i] - c[i];
    return b;
}

// (2I - K2D) u1 - u2 via the 5-point stencil.
std::vector<double> wave2d_rhs(const WaveProblem2D& p, std::span<const double> u1, std::span<const double> u2) {
    const std::size_t nx = p.mesh.x.size(), ny = p.mesh.y.size();
    const double rx2 = p.rx() * p.rx(), ry2 = p.ry() * p.ry();
    const bool dirichlet = p.bc.kind == BcKind::Dirichlet;
    auto reflect = [](std::ptrdiff_t i, std::size_t n) -> std::size_t {
        if (i < 0) return static_cast<std::size_t>(-i);
        if (i >= static_cast<std::ptrdiff_t>(n)) return 2 * (n - 1) - static_cast<std::size_t>(i);
        return static_cast<std::size_t>(i);
    };
    std::vector<double> out(nx * ny, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const bool edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
            if (dirichlet && edge) continue;
            const auto ii = static_cast<std::ptrdiff_t>(i), jj = static_cast<std::ptrdiff_t>(j);
            const double c = u1[i * ny + j];
            const double xm = u1[reflect(ii - 1, nx) * ny + j], xp = u1[reflect(ii + 1, nx) * ny + j];
            const double ym = u1[i * ny + reflect(jj - 1, ny)], yp = u1[i * ny + reflect(jj + 1, ny)];
            const double k2d = rx2 * (2.0 * c - xm - xp) + ry2 * (2.0 * c - ym - yp);
            out[i * ny + j] = 2.0 * c - k2d - u2[i * ny + j];
        }
    }
    return out;
}

// Builds a KS matrix from per-row b_i, c_i (0-based) and constant a, e.
// Boundary rows fold the out-of-range stencil entries into the band.
BandedMatrix ks_matrix(std::size_t n, double a, double e, std::span<const double> b, std::span<const double> c) {
    BandedMatrix m(n, 2, 2);
    m(0, 0) = a + b[1] + e;
    m(0, 1) = c[0];
    m(0, 2) = a;
    m(1, 0) = a + b[1];
    m(1, 1) = e;
    m(1, 2) = c[1];
    m(1, 3) = a;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        m(i, i - 2) = a;
        m(i, i - 1) = b[i];
        m(i, i) = e;
        m(i, i + 1) = c[i];
        m(i, i + 2) = a;
    }
    m(n - 2, n - 4) = a;
    m(n - 2, n - 3) = b[n - 2];
    m(n - 2, n - 2) = e;
    m(n - 2, n - 1) = a + c[n - 2];
    m(n - 1, n - 3) = a;
    m(n - 1, n - 2) = b[n - 1];
    m(n - 1, n - 1) = a + e + c[n - 2];
    return m;
}

KsCoefficients ks_coefficients(double dt, double dx) {
    const double dx2 = dx * dx, dx4 = dx2 * dx2;
    KsCoefficients k{};
    k.a = dt / (2.0 * dx4);
    k.b0 = dt / (2.0 * dx2) - 2.0 * dt / dx4;
    // 3 dt/dx^4 on the diagonal completes the half-weighted [1,-4,6,-4,1] stencil;
    // with 2 dt/dx^4 constants are not in its kernel and A^n goes singular once
    // dt/dx^4 is large (fine meshes).
    k.e = 1.0 + 3.0 * dt / dx4 - dt / dx2;
    k.nonlinear = dt / (4.0 * dx);
    k.a_p = -k.a;
    k.b_p = -k.b0;
    k.e_p = 1.0 - 3.0 * dt / dx4 + dt / dx2;
    return k;
}

BandedMatrix ks_implicit(const KsCoefficients& k, std::span<const double> u) {
    const std::size_t n = u.size();
    std::vector<double> b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = u[(i + n - 1) % n];
        const double right = u[(i + 1) % n];
        b[i] = k.b0 - k.nonlinear * left;
        c[i] = k.b0 + k.nonlinear * right;
    }
    return ks_matrix(n, k.a, k.e, b, c);
}

BandedMatrix ks_explicit(const KsCoefficients& k, std::size_t n) {
    const std::vector<double> b(n, k.b_p);
    return ks_matrix(n, k.a_p, k.e_p, b, b);
}

}  // namespace

void HeatProblem::validate() const {
    require(dt > 0.0 && std::isfinite(dt), "HeatProblem: dt must be positive");
    require(k > 0.0 && std::isfinite(k), "HeatProblem: k must be positive");
    require_non_periodic(bc, "HeatProblem");
    check_len(u0, mesh.size(), "HeatProblem");
    if (bc.kind == BcKind::Dirichlet) require_dirichlet_zero(u0, 0, u0.size() - 1, "HeatProblem");
}

void WaveProblem1D::validate() const {
    require(dt > 0.0 && std::isfinite(dt), "WaveProblem1D: dt must be positive");
    require(c > 0.0 && std::isfinite(c), "WaveProblem1D: c must be positive");
    require_non_periodic(bc, "WaveProblem1D");
    check_len(u0, mesh.size(), "WaveProblem1D u0");
    check_len(v0, mesh.size(), "WaveProblem1D v0");
}

void WaveProblem2D::validate() const {
    require(dt > 0.0 && std::isfinite(dt), "WaveProblem2D: dt must be positive");
    require(c > 0.0 && std::isfinite(c), "WaveProblem2D: c must be positive");
    require_non_periodic(bc, "WaveProblem2D");
    check_len(u0, mesh.size(), "WaveProblem2D u0");
    check_len(v0, mesh.size(), "WaveProblem2D v0");
    const double cfl = rx() * rx() + ry() * ry();
    require(cfl <= 1.0 + 1e-12, "WaveProblem2D: CFL violated, r_x^2 + r_y^2 = " + std::to_string(cfl) +
                                    " > 1 (r^2 must not exceed 1/2 on square cells)");
}

KsCoefficients KsProblem::coefficients() const { return ks_coefficients(dt, mesh.dx()); }

void KsProblem::validate() const {
    require(dt > 0.0 && std::isfinite(dt), "KsProblem: dt must be positive");
    require(bc.kind == BcKind::Periodic, "KsProblem: boundary kind must be periodic");
    bc.validate();
    require(mesh.size() >= 5, "KsProblem: need at least 5 grid points");
    check_len(u0, mesh.size(), "KsProblem");
}

ModelKind model_of(const Problem& p) {
    return std::visit(
        [](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, HeatProblem>) return ModelKind::Heat;
            else if constexpr (std::is_same_v<T, WaveProblem1D>) return ModelKind::Wave1D;
            else if constexpr (std::is_same_v<T, WaveProblem2D>) return ModelKind::Wave2D;
            else return ModelKind::KS;
        },
        p);
}

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::Heat: return "heat";
        case ModelKind::Wave1D: return "wave1d";
        case ModelKind::Wave2D: return "wave2d";
        case ModelKind::KS: return "ks";
    }
    return "?";
}

ModelKind parse_model(const std::string& name) {
    if (name == "heat") return ModelKind::Heat;
    if (name == "wave1d" || name == "wave") return ModelKind::Wave1D;
    if (name == "wave2d") return ModelKind::Wave2D;
    if (name == "ks") return ModelKind::KS;
    throw InvalidArgument("unknown model '" + name + "'");
}

const std::vector<double>& initial_state(const Problem& problem) {
    return std::visit([](const auto& q) -> const std::vector<double>& { return q.u0; }, problem);
}

std::vector<double> heat_step(const HeatProblem& problem, std::span<const double> u_prev) {
    check_len(u_prev, problem.mesh.size(), "heat_step");
    const auto ops = heat_ops(problem);
    return solve_tri(ops.lhs, ops.rhs.multiply(u_prev));
}

std::vector<double> wave1d_step(const WaveProblem1D& problem, std::span<const double> u_prev,
                                std::span<const double> u_prev2) {
    check_len(u_prev, problem.mesh.size(), "wave1d_step");
    check_len(u_prev2, problem.mesh.size(), "wave1d_step");
    const auto ops = wave_ops(problem);
    return solve_tri(ops.plus, wave1d_rhs(ops, u_prev, u_prev2));
}

std::vector<double> wave2d_step(const WaveProblem2D& problem, std::span<const double> u_prev,
                                std::span<const double> u_prev2) {
    check_len(u_prev, problem.mesh.size(), "wave2d_step");
    check_len(u_prev2, problem.mesh.size(), "wave2d_step");
    return wave2d_rhs(problem, u_prev, u_prev2);
}

std::vector<double> ks_step(const KsProblem& problem, std::span<const double> u_prev,
                            std::span<const double> u_prev2) {
    check_len(u_prev, problem.mesh.size(), "ks_step");
    check_len(u_prev2, problem.mesh.size(), "ks_step");
    const auto k = problem.coefficients();
    return solve_banded(ks_implicit(k, u_prev), ks_explicit(k, u_prev.size()).multiply(u_prev2));
}

BandedMatrix ks_implicit_matrix(const KsProblem& problem, std::span<const double> u_prev) {
    check_len(u_prev, problem.mesh.size(), "ks_implicit_matrix");
    return ks_implicit(problem.coefficients(), u_prev);
}

BandedMatrix ks_explicit_matrix(const KsProblem& problem) {
    return ks_explicit(problem.coefficients(), problem.mesh.size());
}

std::vector<double> wave1d_bootstrap(const WaveProblem1D& p) {
    p.validate();
    const std::size_t n = p.mesh.size();
    const auto lap = second_difference(n, p.bc.kind).multiply(p.u0);
    const double dx = p.mesh.dx();
    const double f = 0.5 * p.dt * p.dt * p.c * p.c / (dx * dx);
    std::vector<double> u1(n);
    for (std::size_t i = 0; i < n; ++i) u1[i] = p.u0[i] + p.dt * p.v0[i] - f * lap[i];
    if (p.bc.kind == BcKind::Dirichlet) u1.front() = u1.back() = 0.0;
    return u1;
}

std::vector<double> wave2d_bootstrap(const WaveProblem2D& p) {
    p.validate();
    // -K2D u0 = dt^2 c^2 (discrete Laplacian of u0), so u1 = (2I - K2D) u0 / 2 + dt v0.
    const std::vector<double> zero(p.u0.size(), 0.0);
    const auto lead = wave2d_rhs(p, p.u0, zero);  // (2I - K2D) u0
    const std::size_t nx = p.mesh.x.size(), ny = p.mesh.y.size();
    const bool dirichlet = p.bc.kind == BcKind::Dirichlet;
    std::vector<double> u1(p.u0.size(), 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const bool edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
            if (dirichlet && edge) continue;
            const std::size_t q = i * ny + j;
            u1[q] = 0.5 * lead[q] + p.dt * p.v0[q];
        }
    }
    return u1;
}

std::vector<double> ks_bootstrap(const KsProblem& p) {
    p.validate();
    const auto k = ks_coefficients(0.5 * p.dt, p.mesh.dx());
    return solve_banded(ks_implicit(k, p.u0), ks_explicit(k, p.u0.size()).multiply(p.u0));
}

// ---------------------------------------------------------------------------

std::vector<double> ResidualModel::evaluate(std::span<const double> y, History history) const {
    check_history(history);
    if (y.size() != state_size()) throw InvalidArgument("ResidualModel::evaluate: candidate has wrong length");
    auto r = jacobian(history).multiply(y);
    const auto b = rhs(history);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

std::vector<double> ResidualModel::solve(History history) const {
    check_history(history);
    const auto j = jacobian(history);
    const auto b = rhs(history);
    if (j.lower_bandwidth() == 0 && j.upper_bandwidth() == 0) {
        std::vector<double> y(b.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = b[i] / j.at(i, i);
        return y;
    }
    if (j.lower_bandwidth() == 1 && j.upper_bandwidth() == 1) return solve_tri(j, b);
    return solve_banded(j, b);
}

void ResidualModel::check_history(History history) const {
    if (history.size() < history_depth()) {
        throw InvalidArgument(to_string(model()) + " residual needs " + std::to_string(history_depth()) +
                              " history states, got " + std::to_string(history.size()));
    }
    for (std::size_t i = 0; i < history_depth(); ++i) {
        if (history[i].size() != state_size()) throw InvalidArgument("residual history state has wrong length");
    }
}

namespace {

class HeatResidual final : public ResidualModel {
public:
    explicit HeatResidual(const HeatProblem& p) : n_(p.mesh.size()), ops_(heat_ops(p)) {}
    ModelKind model() const override { return ModelKind::Heat; }
    std::size_t state_size() const override { return n_; }
    std::size_t history_depth() const override { return 1; }
    bool constant_jacobian() const override { return true; }
    BandedMatrix jacobian(History) const override { return ops_.lhs; }
    std::vector<double> rhs(History h) const override {
        check_history(h);
        return ops_.rhs.multiply(h[0]);
    }

private:
    std::size_t n_;
    HeatOps ops_;
};

class Wave1DResidual final : public ResidualModel {
public:
    explicit Wave1DResidual(const WaveProblem1D& p) : n_(p.mesh.size()), ops_(wave_ops(p)) {}
    ModelKind model() const override { return ModelKind::Wave1D; }
    std::size_t state_size() const override { return n_; }
    std::size_t history_depth() const override { return 2; }
    bool constant_jacobian() const override { return true; }
    BandedMatrix jacobian(History) const override { return ops_.plus; }
    std::vector<double> rhs(History h) const override {
        check_history(h);
        return wave1d_rhs(ops_, h[0], h[1]);
    }

private:
    std::size_t n_;
    WaveOps ops_;
};

class Wave2DResidual final : public ResidualModel {
public:
    explicit Wave2DResidual(WaveProblem2D p) : p_(std::move(p)) {}
    ModelKind model() const override { return ModelKind::Wave2D; }
    std::size_t state_size() const override { return p_.mesh.size(); }
    std::size_t history_depth() const override { return 2; }
    bool constant_jacobian() const override { return true; }
    BandedMatrix jacobian(History) const override { return BandedMatrix::identity(state_size()); }
    std::vector<double> rhs(History h) const override {
        check_history(h);
        return wave2d_rhs(p_, h[0], h[1]);
    }

private:
    WaveProblem2D p_;
};

class KsResidual final : public ResidualModel {
public:
    explicit KsResidual(const KsProblem& p)
        : n_(p.mesh.size()), coeffs_(p.coefficients()), explicit_(ks_explicit(coeffs_, n_)) {}
    ModelKind model() const override { return ModelKind::KS; }
    std::size_t state_size() const override { return n_; }
    std::size_t history_depth() const override { return 2; }
    bool constant_jacobian() const override { return false; }
    BandedMatrix jacobian(History h) const override {
        check_history(h);
        return ks_implicit(coeffs_, h[0]);
    }
    std::vector<double> rhs(History h) const override {
        check_history(h);
        return explicit_.multiply(h[1]);
    }

private:
    std::size_t n_;
    KsCoefficients coeffs_;
    BandedMatrix explicit_;
};

}  // namespace

std::unique_ptr<ResidualModel> make_residual(ModelKind model, const Problem& problem) {
    if (model != model_of(problem)) {
        throw InvalidArgument("make_residual: model '" + to_string(model) + "' does not match the problem ('" +
                              to_string(model_of(problem)) + "')");
    }
    return std::visit(
        [](const auto& q) -> std::unique_ptr<ResidualModel> {
            q.validate();
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, HeatProblem>) return std::make_unique<HeatResidual>(q);
            else if constexpr (std::is_same_v<T, WaveProblem1D>) return std::make_unique<Wave1DResidual>(q);
            else if constexpr (std::is_same_v<T, WaveProblem2D>) return std::make_unique<Wave2DResidual>(q);
            else return std::make_unique<KsResidual>(q);
        },
        problem);
}

std::vector<double> bootstrap_state(const Problem& problem) {
    return std::visit(
        [](const auto& q) -> std::vector<double> {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, WaveProblem1D>) return wave1d_bootstrap(q);
            else if constexpr (std::is_same_v<T, WaveProblem2D>) return wave2d_bootstrap(q);
            else if constexpr (std::is_same_v<T, KsProblem>) return ks_bootstrap(q);
            else return {};
        },
        problem);
}

SnapshotMatrix run_fom(const Problem& problem, std::size_t steps, std::size_t sample_every) {
    if (steps < 1) throw InvalidArgument("run_fom: steps must be >= 1");
    if (sample_every < 1) throw InvalidArgument("run_fom: sample_every must be >= 1");
    const auto residual = make_residual(model_of(problem), problem);
    const ModelKind kind = residual->model();
    const bool wave = kind == ModelKind::Wave1D || kind == ModelKind::Wave2D;
    const double dt = std::visit([](const auto& q) { return q.dt; }, problem);
    const std::size_t n = residual->state_size();

    std::vector<StateVector> states;
    std::vector<double> times;
    std::vector<double> prev = initial_state(problem);
    std::vector<double> prev2;

    auto record = [&](std::size_t step, const std::vector<double>& u, const std::vector<double>* before) {
        if (step % sample_every != 0) return;
        times.push_back(static_cast<double>(step) * dt);
        if (!wave) {
            states.emplace_back(StateLayout::Scalar, u, n);
            return;
        }
        std::vector<double> v(n);
        if (before == nullptr) {
            v = std::visit(
                [](const auto& q) -> std::vector<double> {
                    if constexpr (requires { q.v0; }) return q.v0;
                    else return {};
                },
                problem);
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = (u[i] - (*before)[i]) / dt;
        }
        states.emplace_back(u, std::move(v));
    };

    record(0, prev, nullptr);
    std::size_t start = 1;
    if (residual->history_depth() == 2) {
        std::vector<double> u1 = bootstrap_state(problem);
        record(1, u1, &prev);
        prev2 = std::move(prev);
        prev = std::move(u1);
        start = 2;
    }
    for (std::size_t step = start; step <= steps; ++step) {
        std::vector<double> next;
        try {
            if (residual->history_depth() == 1) {
                const std::vector<std::vector<double>> h{prev};
                next = residual->solve(h);
            } else {
                const std::vector<std::vector<double>> h{prev, prev2};
                next = residual->solve(h);
            }
        } catch (const NumericalFailure& e) {
            throw NumericalFailure("step " + std::to_string(step) + ": " + e.what());
        }
        for (double v : next) {
            if (!std::isfinite(v)) throw NumericalFailure("step " + std::to_string(step) + ": non-finite state");
        }
        record(step, next, &prev);
        prev2 = std::move(prev);
        prev = std::move(next);
    }
    return assemble_snapshots(states, times);
}

}  // namespace caerom
