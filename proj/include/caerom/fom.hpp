#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "caerom/banded.hpp"
#include "caerom/grid.hpp"

namespace caerom {

enum class BcKind { Dirichlet, Neumann, Periodic };

/// Robin selectors per side: alpha for the left/low end, beta for the right/high end.
/// (1,0) selects Dirichlet and (0,1) Neumann. Only homogeneous conditions are supported.
struct BoundaryCondition {
    double alpha1 = 1.0, alpha2 = 0.0;
    double beta1 = 1.0, beta2 = 0.0;
    BcKind kind = BcKind::Dirichlet;

    static BoundaryCondition dirichlet() { return {1.0, 0.0, 1.0, 0.0, BcKind::Dirichlet}; }
    static BoundaryCondition neumann() { return {0.0, 1.0, 0.0, 1.0, BcKind::Neumann}; }
    static BoundaryCondition periodic() { return {0.0, 0.0, 0.0, 0.0, BcKind::Periodic}; }

    /// Throws InvalidArgument if the selectors do not match `kind`.
    void validate() const;
};

struct HeatProblem {
    Mesh1D mesh;
    double dt = 1e-4;
    double k = 1.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet();
    std::vector<double> u0;

    double r() const { return k * dt / (mesh.dx() * mesh.dx()); }
    void validate() const;
};

struct WaveProblem1D {
    Mesh1D mesh;
    double dt = 1e-3;
    double c = 1.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet();
    std::vector<double> u0;
    std::vector<double> v0;

    double r() const { return c * dt / mesh.dx(); }
    void validate() const;
};

/// Explicit leapfrog; requires r_x^2 + r_y^2 <= 1 (r^2 <= 1/2 on square cells).
struct WaveProblem2D {
    Mesh2D mesh;
    double dt = 1e-3;
    double c = 1.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet();
    std::vector<double> u0;  ///< row-major, x index outermost
    std::vector<double> v0;

    double rx() const { return c * dt / mesh.x.dx(); }
    double ry() const { return c * dt / mesh.y.dx(); }
    void validate() const;
};

/// Constant parts of the Kuramoto-Sivashinsky finite-difference matrices.
struct KsCoefficients {
    double a, b0, e;        ///< implicit side; b_i = c_i = b0 when u = 0
    double nonlinear;       ///< dt / (4 dx), multiplies u_{i-1} in b_i and u_{i+1} in c_i
    double a_p, b_p, e_p;   ///< explicit side (c' == b')
};

struct KsProblem {
    Mesh1D mesh;
    double dt = 0.05;
    std::vector<double> u0;
    BoundaryCondition bc = BoundaryCondition::periodic();

    KsCoefficients coefficients() const;
    void validate() const;
};

enum class ModelKind { Heat, Wave1D, Wave2D, KS };

using Problem = std::variant<HeatProblem, WaveProblem1D, WaveProblem2D, KsProblem>;

ModelKind model_of(const Problem& p);
std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& name);

/// Previous states, most recent first.
using History = std::span<const std::vector<double>>;

std::vector<double> heat_step(const HeatProblem& problem, std::span<const double> u_prev);
std::vector<double> wave1d_step(const WaveProblem1D& problem, std::span<const double> u_prev,
                                std::span<const double> u_prev2);
std::vector<double> wave2d_step(const WaveProblem2D& problem, std::span<const double> u_prev,
                                std::span<const double> u_prev2);
/// A^n is assembled from u_prev, D multiplies u_prev2.
std::vector<double> ks_step(const KsProblem& problem, std::span<const double> u_prev,
                            std::span<const double> u_prev2);

/// Second starting level for the three-level schemes.
/// Wave: u1 = u0 + dt v0 + dt^2/2 c^2 (second difference of u0).
/// KS: one two-level step A(u0) u1 = D u0 with the matrices assembled at dt/2.
std::vector<double> wave1d_bootstrap(const WaveProblem1D& problem);
std::vector<double> wave2d_bootstrap(const WaveProblem2D& problem);
std::vector<double> ks_bootstrap(const KsProblem& problem);

/// Dense-ready assembly of the KS matrices, exposed for verification.
BandedMatrix ks_implicit_matrix(const KsProblem& problem, std::span<const double> u_prev);
BandedMatrix ks_explicit_matrix(const KsProblem& problem);

/// Time-discrete residual r(y) = J(history) y - b(history), where y is the candidate
/// next state. J is constant for the linear schemes and depends on the latest
/// state for KS.
class ResidualModel {
public:
    virtual ~ResidualModel() = default;

    virtual ModelKind model() const = 0;
    virtual std::size_t state_size() const = 0;
    virtual std::size_t history_depth() const = 0;
    virtual bool constant_jacobian() const = 0;

    /// dr/dy.
    virtual BandedMatrix jacobian(History history) const = 0;
    /// The part of the residual independent of y, with sign such that r = J y - b.
    virtual std::vector<double> rhs(History history) const = 0;

    std::vector<double> evaluate(std::span<const double> y, History history) const;
    /// The y with r(y) = 0, i.e. the full-order step.
    std::vector<double> solve(History history) const;

protected:
    void check_history(History history) const;
};

/// Throws InvalidArgument if `model` does not name the alternative held by `problem`.
std::unique_ptr<ResidualModel> make_residual(ModelKind model, const Problem& problem);

/// Integrates `steps` steps and samples every `sample_every` steps, starting with t = 0.
/// Wave models store [u; v] with v^n = (u^n - u^{n-1}) / dt and v^0 = v0.
SnapshotMatrix run_fom(const Problem& problem, std::size_t steps, std::size_t sample_every);

/// u^1 for the three-level schemes (via the bootstraps above); empty for heat.
std::vector<double> bootstrap_state(const Problem& problem);

/// Initial displacement of a problem (and its size on the mesh).
const std::vector<double>& initial_state(const Problem& problem);

}  // namespace caerom
