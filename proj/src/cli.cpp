#include "caerom/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "caerom/analysis.hpp"
#include "caerom/autoencoder.hpp"
#include "caerom/error.hpp"
#include "caerom/filter.hpp"
#include "caerom/lspg.hpp"

namespace caerom {

namespace {

constexpr double pi = std::numbers::pi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> read_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        std::stringstream parts(tok);
        std::string item;
        while (std::getline(parts, item, ',')) {
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                v.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw InvalidArgument(path + ": '" + item + "' is not a number");
            }
        }
    }
    return v;
}

bool is_file_selector(const std::string& s) { return s.rfind("file:", 0) == 0; }

std::vector<double> from_file(const std::string& selector, std::size_t expected) {
    auto v = read_values(selector.substr(5));
    if (v.size() != expected) {
        throw InvalidArgument(selector + " holds " + std::to_string(v.size()) + " values, the mesh has " +
                              std::to_string(expected));
    }
    return v;
}

BoundaryCondition parse_bc(const std::string& name) {
    if (name == "dirichlet") return BoundaryCondition::dirichlet();
    if (name == "neumann") return BoundaryCondition::neumann();
    if (name == "periodic") return BoundaryCondition::periodic();
    throw InvalidArgument("unknown boundary condition '" + name + "'");
}

std::size_t isqrt_exact(std::size_t v) {
    auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v))));
    return r * r == v ? r : 0;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string real_or_nan(double v) { return std::isfinite(v) ? format_real(v) : (std::isnan(v) ? "nan" : "inf"); }

double rel_or_nan(std::span<const double> a, std::span<const double> b) {
    try {
        return rel_l2_error(a, b);
    } catch (const ZeroReference&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::ofstream open_out(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

void require_file(const std::string& what, const std::string& path) {
    if (path.empty()) throw InvalidArgument(what + " is required");
    if (!std::filesystem::exists(path)) throw IoError(what + " " + path + " does not exist");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const Mesh1D& mesh_1d(const Problem& p) {
    if (auto* h = std::get_if<HeatProblem>(&p)) return h->mesh;
    if (auto* w = std::get_if<WaveProblem1D>(&p)) return w->mesh;
    return std::get<KsProblem>(p).mesh;
}

std::size_t base_size(const Problem& p) {
    if (auto* w = std::get_if<WaveProblem2D>(&p)) return w->mesh.size();
    return mesh_1d(p).size();
}

ExtendedMesh extension_of(const Problem& p, double fraction) {
    if (auto* w = std::get_if<WaveProblem2D>(&p)) return extend_mesh(w->mesh, fraction);
    return extend_mesh(mesh_1d(p), fraction);
}

std::pair<std::size_t, std::size_t> steps_and_every(const RunConfig& c) {
    std::size_t every = c.every, steps = 0;
    if (c.samples == 1) throw InvalidArgument("samples must be 0 (every step) or at least 2");
    if (c.samples > 1) {
        if (c.steps) {
            if (*c.steps % (c.samples - 1) != 0) {
                throw InvalidArgument("steps " + std::to_string(*c.steps) + " cannot be split into " +
                                      std::to_string(c.samples) + " evenly spaced samples");
            }
            steps = *c.steps;
            every = steps / (c.samples - 1);
        } else {
            steps = (c.samples - 1) * every;
        }
    } else {
        steps = c.steps.value_or(100);
    }
    if (every == 0 || steps == 0) throw InvalidArgument("steps and every must be positive");
    if (steps % every != 0) throw InvalidArgument("steps must be a multiple of every");
    return {steps, every};
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_fom(const RunConfig& c, std::ostream& out) {
    const auto problem = build_problem(c);
    const auto [steps, every] = steps_and_every(c);
    const std::string path = c.out.empty() ? c.model + "_fom.csv" : c.out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto snaps = run_fom(problem, steps, every);
    const double secs = seconds_since(t0);
    auto f = open_out(path);
    write_snapshot_csv(f, snaps);
    out << "fom: " << to_string(model_of(problem)) << ", " << steps << " steps, " << snaps.rows() << " x "
        << snaps.cols() << " snapshots -> " << path << " (" << secs << " s)\n";
    return kExitOk;
}

std::size_t check_gen(const RunConfig& c) {
    (void)parse_data_method(c.method);
    c.trig.validate();
    if (c.dims != 1 && c.dims != 2) throw InvalidArgument("dims must be 1 or 2");
    if (c.channels < 1) throw InvalidArgument("channels must be at least 1");
    const auto nb = base_points_for(c.mesh, c.extension);
    if (!nb) {
        throw InvalidArgument("no base mesh pads to " + std::to_string(c.mesh) + " points with extension " +
                              std::to_string(c.extension));
    }
    return *nb;
}

int cmd_gen(const RunConfig& c, std::ostream& out) {
    const auto method = parse_data_method(c.method);
    const std::optional<std::size_t> nb = check_gen(c);
    const double x0 = c.x_min.value_or(0.0), x1 = c.x_max.value_or(1.0);
    const ExtendedMesh ext(make_mesh(x0, x1, *nb), (c.mesh - *nb) / 2);
    const Mesh1D axis = ext.extended_axis(0);
    const std::string path = c.out.empty() ? "trainset.bin" : c.out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto set = c.dims == 1 ? build_training_set(c.count, axis, method, c.channels, c.trig, c.seed, c.threads)
                                 : build_training_set(c.count, Mesh2D{axis, axis}, method, c.channels, c.trig,
                                                      c.seed, c.threads);
    write_training_set(path, set);
    out << "gen: " << set.n_samples << " " << to_string(method) << " samples of length " << set.input_length
        << " (base " << *nb << " points on [" << x0 << ", " << x1 << "], pad " << ext.pad() << ") -> " << path
        << " (" << seconds_since(t0) << " s)\n";
    return kExitOk;
}

AutoencoderSpec spec_for(const RunConfig& c, const TrainingSet& data) {
    AutoencoderSpec s;
    const std::size_t per_channel = data.input_length / data.channels;
    if (data.tensor2d) {
        const std::size_t side = isqrt_exact(per_channel);
        if (side == 0) throw InvalidArgument("2D training rows are not square");
        s.input_shape = {side, side, data.channels};
    } else {
        s.input_shape = {per_channel, data.channels};
    }
    s.latent_dim = c.latent_dim;
    s.n_conv = c.n_conv;
    s.n_dense = c.n_dense;
    s.kernel_size = c.kernel;
    s.base_filters = c.filters;
    s.dense_units = c.units;
    s.prelu_init = c.prelu;
    s.output_sigma = c.output_sigma;
    s.validate();
    return s;
}

TrainingSet head(const TrainingSet& data, std::size_t n) {
    TrainingSet t = data;
    t.n_samples = n;
    t.samples.resize(n * data.input_length);
    return t;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
    require_file("--data", c.data);
    const auto data = read_training_set(c.data);
    const auto spec = spec_for(c, data);
    TrainConfig tc = c.train;
    tc.seed = c.seed;
    tc.validate();
    const std::size_t mesh_size = spec.input_size() / spec.channels();

    if (!c.sweep.empty()) {
        for (auto n : c.sweep) {
            if (n == 0 || n > data.n_samples) {
                throw InvalidArgument("sweep size " + std::to_string(n) + " exceeds the " +
                                      std::to_string(data.n_samples) + " samples in " + c.data);
            }
        }
        const std::string path = c.history.empty() ? "train_sweep.csv" : c.history;
        auto f = open_out(path);
        f << "size,seed,epochs,epochs_to_threshold,final_train_loss,best_val_loss\n";
        for (auto n : c.sweep) {
            const auto subset = head(data, n);
            std::vector<double> reached;
            for (std::size_t s = 0; s < c.sweep_seeds; ++s) {
                const std::uint64_t seed = c.seed + s;
                auto ae = Autoencoder::build(spec, seed);
                TrainConfig run = tc;
                run.seed = seed;
                const auto h = ae.fit(subset, run);
                const auto e = epochs_to_threshold(h.train_loss, c.threshold);
                const double ev = e ? static_cast<double>(*e) : std::numeric_limits<double>::infinity();
                reached.push_back(ev);
                f << n << ',' << seed << ',' << h.epochs() << ',' << (e ? std::to_string(*e) : "inf") << ','
                  << format_real(h.train_loss.back()) << ','
                  << format_real(*std::min_element(h.val_loss.begin(), h.val_loss.end())) << '\n';
            }
            out << "sweep: N = " << n << ", median epochs to loss <= " << c.threshold << ": " << median(reached)
                << "\n";
        }
        out << "sweep -> " << path << "\n";
        return kExitOk;
    }

    const std::string path = c.out.empty() ? bank_path(default_bank_dir(), mesh_size, spec.latent_dim) : c.out;
    const std::string hpath =
        c.history.empty() ? std::filesystem::path(path).replace_extension("").string() + "_history.csv" : c.history;
    auto ae = Autoencoder::build(spec, c.seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto h = ae.fit(data, tc, [&](std::size_t e, double tl, double vl) {
        out << "epoch " << e << "  train " << tl << "  val " << vl << '\n' << std::flush;
    });
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    save_autoencoder(path, ae);
    auto f = open_out(hpath);
    f << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < h.epochs(); ++e)
        f << e + 1 << ',' << format_real(h.train_loss[e]) << ',' << format_real(h.val_loss[e]) << '\n';
    out << "train: " << ae.network().param_count() << " parameters, " << h.epochs() << " epochs ("
        << to_string(h.stop) << "), best val " << h.val_loss[h.best_epoch - 1] << " at epoch " << h.best_epoch
        << " -> " << path << ", history " << hpath << " (" << seconds_since(t0) << " s)\n";
    return kExitOk;
}

int cmd_reconstruct(const RunConfig& c, std::ostream& out) {
    require_file("--weights", c.weights);
    require_file("--snapshots", c.snapshots);
    if (c.field != "all" && c.field != "u" && c.field != "v") throw InvalidArgument("field must be all, u or v");
    if (c.blur < 0.0) throw InvalidArgument("blur must be >= 0");
    const auto ae = load_autoencoder(c.weights);
    const auto snaps = read_snapshot_csv(c.snapshots);
    const auto& spec = ae.spec();
    const std::size_t ch = spec.channels(), rank = spec.spatial_rank(), extent = spec.input_shape[0];

    std::size_t rows = snaps.rows(), offset = 0;
    if (c.field != "all") {
        if (rows % 2) throw InvalidArgument("--field " + c.field + " needs a snapshot with [u; v] rows");
        rows /= 2;
        offset = c.field == "v" ? rows : 0;
    }
    if (rows % ch) throw InvalidArgument("snapshot rows do not split into " + std::to_string(ch) + " channels");
    const std::size_t per = rows / ch;
    const std::size_t nb = rank == 1 ? per : isqrt_exact(per);
    if (nb == 0 || nb > extent || (extent - nb) % 2) {
        throw InvalidArgument("snapshots with " + std::to_string(per) + " points per channel cannot be padded to the " +
                              "model's " + shape_string(spec.input_shape) + " input");
    }
    const std::size_t pad = (extent - nb) / 2;
    const auto base = make_mesh(0.0, 1.0, nb);
    const ExtendedMesh ext = rank == 1 ? ExtendedMesh(base, pad) : ExtendedMesh(Mesh2D{base, base}, pad);
    const std::size_t ne = ext.extended_size(), nbase = ext.base_size();
    const auto shape = ext.extended_shape();

    std::vector<double> ext_data, trunc_data, err_trunc, err_ext;
    for (std::size_t j = 0; j < snaps.cols(); ++j) {
        const auto col = snaps.column(j).subspan(offset, rows);
        std::vector<double> ue;
        for (std::size_t k = 0; k < ch; ++k) {
            const auto block = extend_function(col.subspan(k * nbase, nbase), ext);
            ue.insert(ue.end(), block.begin(), block.end());
        }
        auto r = ae.reconstruct(ue);
        std::vector<double> rt;
        for (std::size_t k = 0; k < ch; ++k) {
            std::span<double> block(r.data() + k * ne, ne);
            if (c.blur > 0.0) {
                const auto f = gaussian_filter(block, shape, 1, c.blur);
                std::copy(f.begin(), f.end(), block.begin());
            }
            const auto t = truncate_function(block, ext);
            rt.insert(rt.end(), t.begin(), t.end());
        }
        err_trunc.push_back(rel_or_nan(rt, col));
        err_ext.push_back(rel_or_nan(r, ue));
        ext_data.insert(ext_data.end(), r.begin(), r.end());
        trunc_data.insert(trunc_data.end(), rt.begin(), rt.end());
    }
    const std::vector<double> times(snaps.times().begin(), snaps.times().end());
    const std::string prefix = c.out.empty() ? "recon" : c.out;
    {
        auto f = open_out(prefix + "_extended.csv");
        write_snapshot_csv(f, SnapshotMatrix(ch * ne, ext_data, times));
    }
    {
        auto f = open_out(prefix + "_truncated.csv");
        write_snapshot_csv(f, SnapshotMatrix(rows, trunc_data, times));
    }
    auto f = open_out(prefix + "_errors.csv");
    f << "snapshot,time,rel_l2_truncated,rel_l2_extended\n";
    std::vector<double> finite;
    for (std::size_t j = 0; j < err_trunc.size(); ++j) {
        f << j << ',' << format_real(times[j]) << ',' << real_or_nan(err_trunc[j]) << ',' << real_or_nan(err_ext[j])
          << '\n';
        if (std::isfinite(err_trunc[j])) finite.push_back(err_trunc[j]);
    }
    out << "reconstruct: " << snaps.cols() << " snapshots, pad " << pad << (c.blur > 0 ? ", blurred" : "");
    if (!finite.empty()) {
        out << ", truncated rel L2 median " << median(finite) << " max "
            << *std::max_element(finite.begin(), finite.end());
    }
    out << " -> " << prefix << "_{extended,truncated,errors}.csv\n";
    return kExitOk;
}

int cmd_rom(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto problem = build_problem(c);
    const std::size_t steps = c.steps.value_or(100);
    LspgOptions opts;
    opts.jacobian_mode = parse_jacobian_mode(c.jacobian);

    std::optional<LspgProblem> lspg;
    std::string source = "identity decoder";
    if (c.identity_decoder) {
        lspg.emplace(make_lspg_problem_padded(problem, std::make_shared<IdentityMap>(base_size(problem)), 0, opts));
    } else {
        const auto ext = extension_of(problem, c.extension);
        const std::string path =
            c.weights.empty() ? bank_path(default_bank_dir(), ext.extended_size(), c.latent_dim) : c.weights;
        require_file("weights", path);
        auto ae = std::make_shared<const Autoencoder>(load_autoencoder(path));
        if (ae->spec().channels() != 1 || ae->state_size() != ext.extended_size()) {
            throw InvalidArgument(path + " expects input " + shape_string(ae->spec().input_shape) + " but the " +
                                  std::to_string(base_size(problem)) + "-point mesh extended by " +
                                  std::to_string(c.extension) + " has " + std::to_string(ext.extended_size()) +
                                  " points");
        }
        lspg.emplace(make_lspg_problem(problem, std::make_shared<AutoencoderMap>(ae), c.extension, opts));
        source = path;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_rom(*lspg, problem, steps);
    const double secs = seconds_since(t0);
    const auto fom = run_fom(problem, steps, 1);
    const auto& t = run.trajectory;
    const std::size_t n = base_size(problem);

    const std::string prefix = c.out.empty() ? c.model + "_rom" : c.out;
    {
        auto f = open_out(prefix + "_trajectory.csv");
        write_trajectory_csv(f, t);
    }
    if (t.size() > 0) {
        auto f = open_out(prefix + "_states.csv");
        write_snapshot_csv(f, trajectory_snapshots(t));
    }
    double worst = 0.0, final_err = std::numeric_limits<double>::quiet_NaN(), max_abs = 0.0;
    bool one_iteration = true;
    {
        auto f = open_out(prefix + "_compare.csv");
        f << "step,time,rom_fom_rel_l2\n";
        for (std::size_t j = 0; j < t.size(); ++j) {
            const auto ref = fom.column(j).subspan(0, n);
            const double e = rel_or_nan(t.states[j], ref);
            f << j << ',' << format_real(t.times[j]) << ',' << real_or_nan(e) << '\n';
            if (std::isfinite(e)) worst = std::max(worst, e);
            final_err = e;
            for (std::size_t i = 0; i < n; ++i) max_abs = std::max(max_abs, std::abs(t.states[j][i] - ref[i]));
            if (j >= lspg->residual_model().history_depth() && t.gn_iterations[j] != 1) one_iteration = false;
        }
    }
    std::size_t iters = 0;
    for (auto k : t.gn_iterations) iters += k;
    out << "rom: " << to_string(model_of(problem)) << " with " << source << ", " << t.size() - (t.size() ? 1 : 0)
        << " of " << steps << " steps, jacobian " << to_string(opts.jacobian_mode) << ", " << iters
        << " Gauss-Newton iterations, " << t.stagnated_steps << " stagnated, " << t.rank_deficient_steps
        << " rank-deficient (" << secs << " s)\n";
    out << "rom: final rel L2 vs FOM " << final_err << ", max over steps " << worst << " -> " << prefix
        << "_{trajectory,states,compare}.csv\n";
    if (!run.ok()) {
        err << "rom: " << *run.error << '\n';
        return kExitNumerical;
    }
    if (c.identity_decoder) {
        const bool pass = max_abs <= 1e-8 && one_iteration;
        out << "identity check: max |rom - fom| = " << max_abs << ", one Gauss-Newton iteration per step: "
            << (one_iteration ? "yes" : "no") << (pass ? " (pass)" : " (FAIL)") << '\n';
        if (!pass) return kExitNumerical;
    }
    return kExitOk;
}

int cmd_svd(const RunConfig& c, std::ostream& out) {
    require_file("--snapshots", c.snapshots);
    const auto snaps = read_snapshot_csv(c.snapshots);
    const auto s = singular_values(snaps);
    const std::string path = c.out.empty() ? "spectrum.csv" : c.out;
    auto f = open_out(path);
    write_spectrum_csv(f, s);
    double sum = 0.0;
    for (double v : s.sigmas) sum += v * v;
    const double f2 = s.frobenius * s.frobenius;
    out << "svd: " << snaps.rows() << " x " << snaps.cols() << ", sigma_1 = " << s.sigmas.front()
        << ", sigma_min = " << s.sigmas.back() << ", Frobenius identity rel err "
        << (f2 > 0 ? std::abs(sum - f2) / f2 : 0.0) << " -> " << path << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Option registration

template <class T>
void opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    app->add_option(name, target, help)->capture_default_str();
}

void optional_real(CLI::App* app, const std::string& name, std::optional<double>& target, const std::string& help) {
    app->add_option_function<double>(name, [&target](double v) { target = v; }, help);
}

void problem_options(CLI::App* app, RunConfig& c) {
    app->add_option("--model", c.model, "heat, wave1d, wave2d or ks")
        ->check(CLI::IsMember({"heat", "wave1d", "wave2d", "ks"}))
        ->capture_default_str();
    opt(app, "--n", c.n, "mesh points per axis");
    opt(app, "--ny", c.ny, "y points for wave2d (0: same as n)");
    optional_real(app, "--xmin", c.x_min, "domain start (model default)");
    optional_real(app, "--xmax", c.x_max, "domain end (model default)");
    optional_real(app, "--dt", c.dt, "time step (model default)");
    opt(app, "--courant", c.courant, "c dt / dx for wave models without --dt");
    app->add_option_function<std::size_t>("--steps", [&c](std::size_t v) { c.steps = v; }, "time steps");
    opt(app, "--samples", c.samples, "snapshot columns (0: every step)");
    opt(app, "--every", c.every, "steps between snapshots");
    opt(app, "--c", c.c, "wave speed");
    opt(app, "--k", c.k, "diffusivity");
    app->add_option("--bc", c.bc, "dirichlet, neumann or periodic (model default)")
        ->check(CLI::IsMember({"dirichlet", "neumann", "periodic"}));
    opt(app, "--u0", c.u0, "initial field name or file:<path>");
    opt(app, "--v0", c.v0, "initial velocity name or file:<path>");
}

void autoencoder_options(CLI::App* app, RunConfig& c) {
    opt(app, "--latent", c.latent_dim, "latent dimension");
    opt(app, "--nconv", c.n_conv, "convolutional units");
    opt(app, "--ndense", c.n_dense, "hidden dense layers");
    opt(app, "--kernel", c.kernel, "convolution kernel size");
    opt(app, "--filters", c.filters, "filters of the first conv unit");
    opt(app, "--units", c.units, "hidden dense width");
    opt(app, "--prelu", c.prelu, "initial PReLU slope");
    opt(app, "--output-sigma", c.output_sigma, "Gaussian filter width on the decoder output (0: none)");
}

void train_options(CLI::App* app, RunConfig& c) {
    opt(app, "--batch", c.train.batch_size, "minibatch size");
    opt(app, "--val-split", c.train.validation_split, "validation fraction");
    opt(app, "--target", c.train.target_val_loss, "stop when the validation loss reaches this");
    opt(app, "--patience", c.train.patience, "early-stopping patience (epochs)");
    opt(app, "--epochs", c.train.max_epochs, "maximum epochs");
    opt(app, "--lr", c.train.learning_rate, "Adam learning rate");
    opt(app, "--lr-decay", c.train.lr_decay, "learning-rate factor on a plateau (0: off)");
    opt(app, "--lr-decay-patience", c.train.lr_decay_patience, "plateau length before decaying");
    opt(app, "--min-lr", c.train.min_learning_rate, "learning-rate floor");
    opt(app, "--divergence-factor", c.train.divergence_factor, "roll back epochs this much worse than the best");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> named_field(const std::string& selector, const Mesh1D& mesh) {
    if (is_file_selector(selector)) return from_file(selector, mesh.size());
    std::vector<double> v;
    for (double x : mesh.points()) {
        if (selector == "zero") v.push_back(0.0);
        else if (selector == "parabola") v.push_back(5.0 * x * (1.0 - x));
        else if (selector == "sine") v.push_back(std::sin(pi * x));
        else if (selector == "sine3") v.push_back(3.0 * std::sin(pi * x));
        else if (selector == "cos16") v.push_back(std::cos(pi * x / 16.0));
        else if (selector == "expsin2") v.push_back(std::exp(-x) * std::sin(pi * x) * std::sin(pi * x));
        else throw InvalidArgument("unknown 1D field '" + selector + "'");
    }
    return v;
}

std::vector<double> named_field(const std::string& selector, const Mesh2D& mesh) {
    if (is_file_selector(selector)) return from_file(selector, mesh.size());
    std::vector<double> v;
    for (double x : mesh.x.points()) {
        for (double y : mesh.y.points()) {
            if (selector == "zero") v.push_back(0.0);
            else if (selector == "gauss") v.push_back(std::exp(-20.0 * (x * x + y * y)));
            else if (selector == "sine2d") v.push_back(std::sin(pi * x) * std::sin(pi * y));
            else throw InvalidArgument("unknown 2D field '" + selector + "'");
        }
    }
    return v;
}

void RunConfig::validate_problem() const {
    (void)parse_model(model);
    if (!bc.empty()) (void)parse_bc(bc);
    if (n < 3) throw InvalidArgument("n must be at least 3");
    if (!(extension >= 0.0 && extension <= 0.5)) throw InvalidArgument("extension must lie in [0, 0.5]");
    if (!(courant > 0.0)) throw InvalidArgument("courant must be positive");
    if (dt && !(*dt > 0.0)) throw InvalidArgument("dt must be positive");
    for (const auto* sel : {&u0, &v0})
        if (is_file_selector(*sel)) require_file("initial field", sel->substr(5));
}

Problem build_problem(const RunConfig& c) {
    c.validate_problem();
    const auto kind = parse_model(c.model);
    auto bc_or = [&](BoundaryCondition d) { return c.bc.empty() ? d : parse_bc(c.bc); };
    switch (kind) {
        case ModelKind::Heat: {
            HeatProblem p;
            p.mesh = make_mesh(c.x_min.value_or(0.0), c.x_max.value_or(1.0), c.n);
            p.dt = c.dt.value_or(1e-4);
            p.k = c.k;
            p.bc = bc_or(BoundaryCondition::dirichlet());
            p.u0 = named_field(c.u0.empty() ? "parabola" : c.u0, p.mesh);
            p.validate();
            return p;
        }
        case ModelKind::Wave1D: {
            WaveProblem1D p;
            p.mesh = make_mesh(c.x_min.value_or(0.0), c.x_max.value_or(1.0), c.n);
            p.c = c.c;
            p.dt = c.dt.value_or(c.courant * p.mesh.dx() / c.c);
            p.bc = bc_or(BoundaryCondition::dirichlet());
            p.u0 = named_field(c.u0.empty() ? "parabola" : c.u0, p.mesh);
            p.v0 = named_field(c.v0.empty() ? "zero" : c.v0, p.mesh);
            p.validate();
            return p;
        }
        case ModelKind::Wave2D: {
            WaveProblem2D p;
            const double x0 = c.x_min.value_or(-1.0), x1 = c.x_max.value_or(1.0);
            p.mesh = Mesh2D{make_mesh(x0, x1, c.n), make_mesh(x0, x1, c.ny ? c.ny : c.n)};
            p.c = c.c;
            p.dt = c.dt.value_or(c.courant * std::min(p.mesh.x.dx(), p.mesh.y.dx()) / c.c);
            p.bc = bc_or(BoundaryCondition::dirichlet());
            p.u0 = named_field(c.u0.empty() ? "gauss" : c.u0, p.mesh);
            p.v0 = named_field(c.v0.empty() ? "zero" : c.v0, p.mesh);
            p.validate();
            return p;
        }
        case ModelKind::KS: {
            KsProblem p;
            p.mesh = make_mesh(c.x_min.value_or(0.0), c.x_max.value_or(32.0 * pi), c.n);
            p.dt = c.dt.value_or(0.05);
            p.bc = bc_or(BoundaryCondition::periodic());
            p.u0 = named_field(c.u0.empty() ? "cos16" : c.u0, p.mesh);
            p.validate();
            return p;
        }
    }
    throw InvalidArgument("unknown model");
}

std::optional<std::size_t> base_points_for(std::size_t total, double fraction) {
    for (std::size_t m = 3; m <= total; ++m) {
        const auto pad = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
        if (m + 2 * pad == total) return m;
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
        const std::uint64_t here = offset;
        offset += line.size() + 1;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw FormatError(path + ": expected 'key = value'", here);
        std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
        if (key.empty()) throw FormatError(path + ": empty key", here);
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Autoencoder reduced-order models: full-order solvers, training and LSPG"};
    app.name("caerom");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto add = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", "key = value file; command-line flags override it");
        s->add_option("--seed", c.seed, "random seed")->capture_default_str();
        s->add_option("--out", c.out, "output file or prefix");
        s->add_flag("--check", c.check, "validate the options and exit (input files are not opened)");
        return s;
    };

    auto* fom = add("fom", "run a full-order model and write a snapshot CSV");
    problem_options(fom, c);

    auto* gen = add("gen", "generate random smooth training functions");
    gen->add_option("--method", c.method, "bbp or trig")->check(CLI::IsMember({"bbp", "trig"}))->capture_default_str();
    opt(gen, "--n", c.count, "number of samples");
    opt(gen, "--mesh", c.mesh, "points per axis of each sample, pad included");
    opt(gen, "--extension", c.extension, "pad fraction of the base mesh");
    optional_real(gen, "--xmin", c.x_min, "base domain start (0)");
    optional_real(gen, "--xmax", c.x_max, "base domain end (1)");
    opt(gen, "--dims", c.dims, "1, or 2 for tensored samples");
    opt(gen, "--channels", c.channels, "independent draws per sample");
    opt(gen, "--nmax", c.trig.n_max, "trig: most sinusoids per sample");
    opt(gen, "--amax", c.trig.a_max, "trig: largest amplitude");
    opt(gen, "--omegamax", c.trig.omega_max, "trig: largest angular frequency");
    opt(gen, "--threads", c.threads, "worker threads (output does not depend on it)");

    auto* train = add("train", "train an autoencoder on a generated data set");
    train->add_option("--data", c.data, "training-set file from gen");
    autoencoder_options(train, c);
    train_options(train, c);
    train->add_option("--history", c.history, "history CSV (sweep CSV with --sweep)");
    train->add_option("--sweep", c.sweep, "data-set sizes for an epochs-to-threshold sweep")->delimiter(',');
    opt(train, "--sweep-seeds", c.sweep_seeds, "seeds per sweep size");
    opt(train, "--threshold", c.threshold, "training loss defining epochs-to-threshold");

    auto* recon = add("reconstruct", "pass snapshots through a trained autoencoder");
    recon->add_option("--weights", c.weights, "weight file");
    recon->add_option("--snapshots", c.snapshots, "snapshot CSV");
    opt(recon, "--blur", c.blur, "Gaussian filter width applied to reconstructions (0: none)");
    recon->add_option("--field", c.field, "all, or u / v of a [u; v] snapshot")
        ->check(CLI::IsMember({"all", "u", "v"}))
        ->capture_default_str();

    auto* rom = add("rom", "march a manifold LSPG reduced model and compare with the full model");
    problem_options(rom, c);
    rom->add_option("--weights", c.weights, "weight file (default: bank entry for the extended mesh)");
    opt(rom, "--extension", c.extension, "pad fraction of the base mesh");
    opt(rom, "--latent", c.latent_dim, "latent dimension used to pick the bank entry");
    rom->add_option("--jacobian", c.jacobian, "forward or 3point")
        ->check(CLI::IsMember({"forward", "3point"}))
        ->capture_default_str();
    rom->add_flag("--identity-decoder", c.identity_decoder, "use g = identity (linear exactness check)");

    auto* svd = add("svd", "singular values of a snapshot matrix");
    svd->add_option("--snapshots", c.snapshots, "snapshot CSV");

    // Config files are spliced in right after the subcommand as --key=value tokens, so
    // explicit flags (parsed later, take-last) win.
    std::vector<std::string> rest, from_files;
    try {
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string cfg;
            if (args[i] == "--config") {
                if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file");
                cfg = args[++i];
            } else if (args[i].rfind("--config=", 0) == 0) {
                cfg = args[i].substr(9);
            } else {
                rest.push_back(args[i]);
                continue;
            }
            for (const auto& [k, v] : read_config_file(cfg)) from_files.push_back("--" + k + "=" + v);
        }
    } catch (const IoError& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitConfig;
    }
    std::vector<std::string> tokens{"caerom"};
    if (!rest.empty()) tokens.push_back(rest.front());
    tokens.insert(tokens.end(), from_files.begin(), from_files.end());
    if (!rest.empty()) tokens.insert(tokens.end(), rest.begin() + 1, rest.end());
    std::vector<const char*> argv;
    for (const auto& t : tokens) argv.push_back(t.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "caerom: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (c.check) {
            if (fom->parsed() || rom->parsed()) (void)build_problem(c);
            if (fom->parsed()) (void)steps_and_every(c);
            if (rom->parsed()) (void)parse_jacobian_mode(c.jacobian);
            if (gen->parsed()) check_gen(c);
            if (train->parsed()) {
                TrainConfig tc = c.train;
                tc.validate();
            }
            out << "config ok\n";
            return kExitOk;
        }
        if (fom->parsed()) return cmd_fom(c, out);
        if (gen->parsed()) return cmd_gen(c, out);
        if (train->parsed()) return cmd_train(c, out);
        if (recon->parsed()) return cmd_reconstruct(c, out);
        if (rom->parsed()) return cmd_rom(c, out, err);
        if (svd->parsed()) return cmd_svd(c, out);
    } catch (const InvalidArgument& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalFailure& e) {
        err << "caerom: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FormatError& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitIo;
    } catch (const IoError& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "caerom: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitConfig;
}

}  // namespace caerom
