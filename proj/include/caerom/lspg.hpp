#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caerom/autoencoder.hpp"
#include "caerom/fom.hpp"
#include "caerom/grid.hpp"

namespace caerom {

// ---------------------------------------------------------------------------
// Gauss-Newton

struct GaussNewtonOptions {
    double tol = 1e-8;  ///< on the step: stop when |delta| <= tol (1 + |xi|)
    std::size_t max_iter = 50;
    std::size_t max_halvings = 10;
};

enum class GnStatus {
    Converged,      ///< step below tolerance, or zero residual
    Stagnated,      ///< no halving of the step reduced |r|
    MaxIterations,
};
std::string to_string(GnStatus s);

struct GaussNewtonResult {
    Eigen::VectorXd xi;
    std::size_t iterations = 0;  ///< accepted updates
    double initial_norm = 0.0;
    double residual_norm = 0.0;
    GnStatus status = GnStatus::MaxIterations;
    bool rank_deficient = false;  ///< some linearized solve was done in the minimum-norm sense

    bool converged() const { return status != GnStatus::MaxIterations; }
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Minimizes |r(xi)|_2. Each step solves min |J delta + r| with a complete orthogonal
/// decomposition (column-pivoted QR, minimum-norm when J is rank deficient) and
/// halves the step up to max_halvings times until |r| decreases. A final step that
/// is already below tolerance is not counted, so a linear problem reports one
/// iteration. Never throws on nonconvergence; check status.
GaussNewtonResult gauss_newton(const ResidualFn& residual, const JacobianFn& jacobian, Eigen::VectorXd xi0,
                               const GaussNewtonOptions& options = {});

// ---------------------------------------------------------------------------
// Latent coordinates

/// Encoder/decoder pair on the extended mesh.
class LatentMap {
public:
    virtual ~LatentMap() = default;
    virtual std::size_t latent_dim() const = 0;
    virtual std::size_t state_size() const = 0;
    virtual std::vector<double> encode(std::span<const double> u) const = 0;
    virtual std::vector<double> decode(std::span<const double> xi) const = 0;
    virtual Eigen::MatrixXd jacobian(std::span<const double> xi, JacobianMode mode) const = 0;
};

class AutoencoderMap final : public LatentMap {
public:
    explicit AutoencoderMap(std::shared_ptr<const Autoencoder> ae);

    std::size_t latent_dim() const override { return ae_->latent_dim(); }
    std::size_t state_size() const override { return ae_->state_size(); }
    std::vector<double> encode(std::span<const double> u) const override { return ae_->encode(u); }
    std::vector<double> decode(std::span<const double> xi) const override { return ae_->decode(xi); }
    Eigen::MatrixXd jacobian(std::span<const double> xi, JacobianMode mode) const override {
        return ae_->decoder_jacobian(xi, mode);
    }

private:
    std::shared_ptr<const Autoencoder> ae_;
};

/// g = f = identity on R^n. With x_ref = 0 the ROM reproduces the full-order model.
class IdentityMap final : public LatentMap {
public:
    explicit IdentityMap(std::size_t n) : n_(n) {}

    std::size_t latent_dim() const override { return n_; }
    std::size_t state_size() const override { return n_; }
    std::vector<double> encode(std::span<const double> u) const override;
    std::vector<double> decode(std::span<const double> xi) const override;
    Eigen::MatrixXd jacobian(std::span<const double> xi, JacobianMode mode) const override;

private:
    std::size_t n_;
};

/// x_ref = u0 - g(f(u0)), with u0 on the extended mesh.
std::vector<double> compute_x_ref(std::span<const double> u0_ext, const LatentMap& map);

// ---------------------------------------------------------------------------
// LSPG

struct LspgOptions {
    JacobianMode jacobian_mode = JacobianMode::ForwardMode;
    GaussNewtonOptions gn;
};

/// One reduced model: residual of a full-order scheme on the base mesh, latent map
/// on the extended mesh. Candidate states x_ref + g(xi) are truncated to the base
/// mesh before the residual is evaluated, so the composed Jacobian is
/// (dr/dy) T J_g with T the truncation.
class LspgProblem {
public:
    LspgProblem(std::shared_ptr<const ResidualModel> residual, std::shared_ptr<const LatentMap> map,
                ExtendedMesh ext, std::vector<double> x_ref, LspgOptions options = {});

    const ResidualModel& residual_model() const { return *residual_; }
    const LatentMap& map() const { return *map_; }
    const ExtendedMesh& mesh() const { return ext_; }
    const std::vector<double>& x_ref() const { return x_ref_; }
    const LspgOptions& options() const { return options_; }
    std::size_t latent_dim() const { return map_->latent_dim(); }

    /// x_ref + g(xi) on the extended mesh.
    std::vector<double> full_state(std::span<const double> xi) const;
    /// The same, truncated to the base mesh.
    std::vector<double> state(std::span<const double> xi) const;

    Eigen::VectorXd residual(const Eigen::VectorXd& xi, History history) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& xi, History history) const;

private:
    std::shared_ptr<const ResidualModel> residual_;
    std::shared_ptr<const LatentMap> map_;
    ExtendedMesh ext_;
    std::vector<double> x_ref_;
    LspgOptions options_;
};

/// Builds the residual for `problem`, extends its u0 by `extension_fraction` and
/// anchors x_ref there.
LspgProblem make_lspg_problem(const Problem& problem, std::shared_ptr<const LatentMap> map,
                              double extension_fraction, LspgOptions options = {});
/// Same with an explicit pad (0 for the identity map on the base mesh).
LspgProblem make_lspg_problem_padded(const Problem& problem, std::shared_ptr<const LatentMap> map, std::size_t pad,
                                     LspgOptions options = {});

/// argmin_xi |r(x_ref + g(xi); history)|, warm-started at xi_prev.
GaussNewtonResult lspg_step(const LspgProblem& problem, History history, std::span<const double> xi_prev);

struct LatentTrajectory {
    std::vector<std::vector<double>> xis;
    std::vector<std::vector<double>> states;  ///< base mesh
    std::vector<double> times;
    std::vector<std::size_t> gn_iterations;
    std::vector<double> residual_norms;
    std::size_t rank_deficient_steps = 0;
    std::size_t stagnated_steps = 0;

    std::size_t size() const { return states.size(); }
};

struct RomRun {
    LatentTrajectory trajectory;
    std::optional<std::string> error;  ///< set when a step failed; the trajectory stops before it

    bool ok() const { return !error; }
};

/// Marches `steps` steps. Step 0 is xi0 = f(u0_ext), whose state is u0 exactly.
/// For the three-level schemes step 1 is the full-order bootstrap state (its xi is
/// the Gauss-Newton fit of that state on the manifold); both given levels carry
/// zero iterations and residual 0.
RomRun run_rom(const LspgProblem& lspg, const Problem& problem, std::size_t steps);

/// Header `step,gn_iters,residual_norm`.
void write_trajectory_csv(std::ostream& out, const LatentTrajectory& t);
void write_trajectory_csv(const std::string& path, const LatentTrajectory& t);
SnapshotMatrix trajectory_snapshots(const LatentTrajectory& t);

}  // namespace caerom
