#include "caerom/lspg.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <ostream>

#include "caerom/error.hpp"

namespace caerom {

std::string to_string(GnStatus s) {
    switch (s) {
        case GnStatus::Converged: return "converged";
        case GnStatus::Stagnated: return "stagnated";
        case GnStatus::MaxIterations: return "max-iterations";
    }
    return "?";
}

GaussNewtonResult gauss_newton(const ResidualFn& residual, const JacobianFn& jacobian, Eigen::VectorXd xi0,
                               const GaussNewtonOptions& opt) {
    GaussNewtonResult res;
    res.xi = std::move(xi0);
    Eigen::VectorXd r = residual(res.xi);
    double norm = r.norm();
    res.initial_norm = norm;
    res.residual_norm = norm;
    if (!std::isfinite(norm)) throw NumericalFailure("Gauss-Newton: residual is not finite at the initial point");

    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        if (norm == 0.0) {
            res.status = GnStatus::Converged;
            return res;
        }
        const Eigen::MatrixXd jac = jacobian(res.xi);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
        if (cod.rank() < jac.cols()) res.rank_deficient = true;
        const Eigen::VectorXd delta = cod.solve(-r);
        if (!delta.allFinite()) throw NumericalFailure("Gauss-Newton: linearized solve produced non-finite values");
        if (delta.norm() <= opt.tol * (1.0 + res.xi.norm())) {
            res.status = GnStatus::Converged;
            return res;
        }
        double t = 1.0;
        bool accepted = false;
        for (std::size_t k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
            Eigen::VectorXd cand = res.xi + t * delta;
            Eigen::VectorXd rc = residual(cand);
            const double nc = rc.norm();
            if (nc < norm) {
                res.xi = std::move(cand);
                r = std::move(rc);
                norm = nc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.status = GnStatus::Stagnated;
            return res;
        }
        ++res.iterations;
        res.residual_norm = norm;
        if (t < 1.0 && t * delta.norm() <= opt.tol * (1.0 + res.xi.norm())) {
            res.status = GnStatus::Converged;
            return res;
        }
    }
    res.status = GnStatus::MaxIterations;
    return res;
}

// ---------------------------------------------------------------------------

AutoencoderMap::AutoencoderMap(std::shared_ptr<const Autoencoder> ae) : ae_(std::move(ae)) {
    if (!ae_) throw InvalidArgument("AutoencoderMap: null autoencoder");
}

std::vector<double> IdentityMap::encode(std::span<const double> u) const {
    if (u.size() != n_) throw InvalidArgument("IdentityMap::encode: length mismatch");
    return {u.begin(), u.end()};
}

std::vector<double> IdentityMap::decode(std::span<const double> xi) const {
    if (xi.size() != n_) throw InvalidArgument("IdentityMap::decode: length mismatch");
    return {xi.begin(), xi.end()};
}

Eigen::MatrixXd IdentityMap::jacobian(std::span<const double> xi, JacobianMode) const {
    if (xi.size() != n_) throw InvalidArgument("IdentityMap::jacobian: length mismatch");
    return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
}

std::vector<double> compute_x_ref(std::span<const double> u0_ext, const LatentMap& map) {
    if (u0_ext.size() != map.state_size()) {
        throw InvalidArgument("compute_x_ref: u0 has length " + std::to_string(u0_ext.size()) +
                              " but the latent map expects " + std::to_string(map.state_size()));
    }
    const auto rec = map.decode(map.encode(u0_ext));
    std::vector<double> x(u0_ext.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = u0_ext[i] - rec[i];
    return x;
}

// ---------------------------------------------------------------------------

LspgProblem::LspgProblem(std::shared_ptr<const ResidualModel> residual, std::shared_ptr<const LatentMap> map,
                         ExtendedMesh ext, std::vector<double> x_ref, LspgOptions options)
    : residual_(std::move(residual)), map_(std::move(map)), ext_(std::move(ext)), x_ref_(std::move(x_ref)),
      options_(options) {
    if (!residual_ || !map_) throw InvalidArgument("LspgProblem: null residual or latent map");
    if (residual_->state_size() != ext_.base_size()) {
        throw InvalidArgument("LspgProblem: residual state size " + std::to_string(residual_->state_size()) +
                              " does not match the base mesh (" + std::to_string(ext_.base_size()) + ")");
    }
    if (map_->state_size() != ext_.extended_size()) {
        throw InvalidArgument("LspgProblem: decoder output size " + std::to_string(map_->state_size()) +
                              " does not match the extended mesh (" + std::to_string(ext_.extended_size()) + ")");
    }
    if (x_ref_.size() != ext_.extended_size()) throw InvalidArgument("LspgProblem: x_ref has the wrong length");
}

std::vector<double> LspgProblem::full_state(std::span<const double> xi) const {
    auto y = map_->decode(xi);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += x_ref_[i];
    return y;
}

std::vector<double> LspgProblem::state(std::span<const double> xi) const {
    return truncate_function(full_state(xi), ext_);
}

Eigen::VectorXd LspgProblem::residual(const Eigen::VectorXd& xi, History history) const {
    const auto r = residual_->evaluate(state(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size()))),
                                       history);
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

Eigen::MatrixXd LspgProblem::jacobian(const Eigen::VectorXd& xi, History history) const {
    const std::span<const double> x(xi.data(), static_cast<std::size_t>(xi.size()));
    const Eigen::MatrixXd jg = map_->jacobian(x, options_.jacobian_mode);
    const std::size_t d = latent_dim(), n = ext_.base_size();
    // Truncate each column, then apply dr/dy.
    std::vector<double> tj(n * d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto col = truncate_function(
            std::span<const double>(jg.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(jg.rows())),
            ext_);
        std::copy(col.begin(), col.end(), tj.begin() + static_cast<std::ptrdiff_t>(j * n));
    }
    const auto prod = residual_->jacobian(history).multiply_dense(tj, d);
    return Eigen::Map<const Eigen::MatrixXd>(prod.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
}

namespace {

ExtendedMesh extended_for(const Problem& problem, std::size_t pad) {
    return std::visit(
        [pad](const auto& q) -> ExtendedMesh {
            return ExtendedMesh(q.mesh, pad);
        },
        problem);
}

ExtendedMesh extended_for_fraction(const Problem& problem, double fraction) {
    return std::visit([fraction](const auto& q) -> ExtendedMesh { return extend_mesh(q.mesh, fraction); }, problem);
}

LspgProblem assemble(const Problem& problem, std::shared_ptr<const LatentMap> map, ExtendedMesh ext,
                     LspgOptions options) {
    if (!map) throw InvalidArgument("make_lspg_problem: null latent map");
    std::shared_ptr<const ResidualModel> residual = make_residual(model_of(problem), problem);
    const auto u0_ext = extend_function(initial_state(problem), ext);
    auto x_ref = compute_x_ref(u0_ext, *map);
    return LspgProblem(std::move(residual), std::move(map), std::move(ext), std::move(x_ref), options);
}

}  // namespace

LspgProblem make_lspg_problem(const Problem& problem, std::shared_ptr<const LatentMap> map, double extension_fraction,
                              LspgOptions options) {
    return assemble(problem, std::move(map), extended_for_fraction(problem, extension_fraction), options);
}

LspgProblem make_lspg_problem_padded(const Problem& problem, std::shared_ptr<const LatentMap> map, std::size_t pad,
                                     LspgOptions options) {
    return assemble(problem, std::move(map), extended_for(problem, pad), options);
}

GaussNewtonResult lspg_step(const LspgProblem& p, History history, std::span<const double> xi_prev) {
    if (xi_prev.size() != p.latent_dim()) throw InvalidArgument("lspg_step: warm start has the wrong length");
    if (history.size() < p.residual_model().history_depth()) {
        throw InvalidArgument("lspg_step: history depth " + std::to_string(history.size()) + " < " +
                              std::to_string(p.residual_model().history_depth()));
    }
    Eigen::VectorXd xi0 = Eigen::Map<const Eigen::VectorXd>(xi_prev.data(), static_cast<Eigen::Index>(xi_prev.size()));
    // The Jacobian of the residual in y is fixed within a step.
    return gauss_newton([&](const Eigen::VectorXd& xi) { return p.residual(xi, history); },
                        [&](const Eigen::VectorXd& xi) { return p.jacobian(xi, history); }, std::move(xi0),
                        p.options().gn);
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Least-squares fit of a base-mesh state on the manifold, warm-started at xi0.
GaussNewtonResult fit_state(const LspgProblem& p, std::span<const double> target, std::span<const double> xi0) {
    const Eigen::Map<const Eigen::VectorXd> u(target.data(), static_cast<Eigen::Index>(target.size()));
    const auto res = [&](const Eigen::VectorXd& xi) -> Eigen::VectorXd {
        const auto s = p.state(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
        return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())) - u;
    };
    const auto jac = [&](const Eigen::VectorXd& xi) -> Eigen::MatrixXd {
        const Eigen::MatrixXd jg =
            p.map().jacobian(std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())),
                             p.options().jacobian_mode);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(target.size()), jg.cols());
        for (Eigen::Index j = 0; j < jg.cols(); ++j) {
            const auto col = truncate_function(
                std::span<const double>(jg.col(j).data(), static_cast<std::size_t>(jg.rows())), p.mesh());
            out.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
        }
        return out;
    };
    return gauss_newton(res, jac, Eigen::Map<const Eigen::VectorXd>(xi0.data(), static_cast<Eigen::Index>(xi0.size())),
                        p.options().gn);
}

}  // namespace

RomRun run_rom(const LspgProblem& lspg, const Problem& problem, std::size_t steps) {
    if (steps < 1) throw InvalidArgument("run_rom: steps must be >= 1");
    const ResidualModel& model = lspg.residual_model();
    if (model.model() != model_of(problem)) throw InvalidArgument("run_rom: problem and residual model differ");
    const double dt = std::visit([](const auto& q) { return q.dt; }, problem);

    RomRun run;
    LatentTrajectory& t = run.trajectory;
    auto push = [&](std::vector<double> xi, std::vector<double> state, std::size_t iters, double rnorm) {
        t.times.push_back(static_cast<double>(t.states.size()) * dt);
        t.xis.push_back(std::move(xi));
        t.states.push_back(std::move(state));
        t.gn_iterations.push_back(iters);
        t.residual_norms.push_back(rnorm);
    };

    const auto u0_ext = extend_function(initial_state(problem), lspg.mesh());
    auto xi = lspg.map().encode(u0_ext);
    push(xi, lspg.state(xi), 0, 0.0);

    std::vector<std::vector<double>> history{t.states.back()};
    if (model.history_depth() == 2) {
        auto u1 = bootstrap_state(problem);
        const auto fit = fit_state(lspg, u1, xi);
        xi = to_std(fit.xi);
        push(xi, u1, 0, 0.0);
        history.insert(history.begin(), std::move(u1));
    }

    for (std::size_t step = t.states.size(); step <= steps; ++step) {
        GaussNewtonResult gn;
        try {
            gn = lspg_step(lspg, history, xi);
        } catch (const std::exception& e) {
            run.error = "step " + std::to_string(step) + ": " + e.what();
            return run;
        }
        if (!gn.converged()) {
            run.error = "step " + std::to_string(step) + ": Gauss-Newton did not converge in " +
                        std::to_string(gn.iterations) + " iterations (|r| = " + format_real(gn.residual_norm) + ")";
            return run;
        }
        if (gn.rank_deficient) ++t.rank_deficient_steps;
        if (gn.status == GnStatus::Stagnated) ++t.stagnated_steps;
        xi = to_std(gn.xi);
        auto state = lspg.state(xi);
        push(xi, state, gn.iterations, gn.residual_norm);
        history.insert(history.begin(), std::move(state));
        history.resize(model.history_depth());
    }
    return run;
}

void write_trajectory_csv(std::ostream& out, const LatentTrajectory& t) {
    out << "step,gn_iters,residual_norm\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << i << ',' << t.gn_iterations[i] << ',' << format_real(t.residual_norms[i]) << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const LatentTrajectory& t) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_trajectory_csv(out, t);
    if (!out) throw IoError("write failed: " + path);
}

SnapshotMatrix trajectory_snapshots(const LatentTrajectory& t) {
    if (t.size() == 0) throw InvalidArgument("trajectory_snapshots: empty trajectory");
    const std::size_t rows = t.states.front().size();
    std::vector<double> data;
    data.reserve(rows * t.size());
    for (const auto& s : t.states) data.insert(data.end(), s.begin(), s.end());
    return SnapshotMatrix(rows, std::move(data), t.times);
}

}  // namespace caerom
