#include "caerom/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "binary_io.hpp"
#include "caerom/banded.hpp"
#include "caerom/error.hpp"

namespace caerom {

void TrigParams::validate() const {
    if (n_max < 1 || !(a_max > 0.0) || !(omega_max > 0.0)) {
        throw InvalidArgument("TrigParams: n_max, a_max and omega_max must be positive");
    }
}

std::vector<double> brownian_bridge(std::size_t n_steps, RandomSource& rng) {
    if (n_steps < 4) throw InvalidArgument("brownian_bridge: need at least 4 steps for a cubic spline");
    const double dt = 1.0 / static_cast<double>(n_steps);
    const double sdt = std::sqrt(dt);
    std::vector<double> b(n_steps);
    b[0] = rng.normal();
    for (std::size_t n = 1; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        b[n] = b[n - 1] * (1.0 - dt / (1.0 - t)) + sdt * rng.normal();
    }
    return b;
}

std::vector<double> natural_cubic_spline(double x0, double x1, std::span<const double> y,
                                         std::span<const double> at) {
    const std::size_t m = y.size();
    if (m < 2) throw InvalidArgument("natural_cubic_spline: need at least 2 knots");
    const double h = (x1 - x0) / static_cast<double>(m - 1);
    // Second derivatives; natural ends M_0 = M_{m-1} = 0.
    std::vector<double> sec(m, 0.0);
    if (m > 2) {
        const std::size_t k = m - 2;
        std::vector<double> lo(k, 1.0), di(k, 4.0), up(k, 1.0), rhs(k);
        for (std::size_t i = 0; i < k; ++i) rhs[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
        const auto inner = solve_tridiagonal(lo, di, up, rhs);
        std::copy(inner.begin(), inner.end(), sec.begin() + 1);
    }
    std::vector<double> out(at.size());
    for (std::size_t q = 0; q < at.size(); ++q) {
        const double x = at[q];
        const double s = std::floor((x - x0) / h);
        const std::size_t k = s <= 0.0 ? 0 : std::min(m - 2, static_cast<std::size_t>(s));
        const double xl = x0 + static_cast<double>(k) * h;
        const double a = (xl + h - x), b = (x - xl);
        out[q] = sec[k] * a * a * a / (6.0 * h) + sec[k + 1] * b * b * b / (6.0 * h) +
                 (y[k] / h - sec[k] * h / 6.0) * a + (y[k + 1] / h - sec[k + 1] * h / 6.0) * b;
    }
    return out;
}

std::vector<double> bbp_sample(const Mesh1D& mesh, RandomSource& rng) {
    const std::size_t knots = rng.uniform_index(4, mesh.size());
    const auto bridge = brownian_bridge(knots, rng);
    return natural_cubic_spline(mesh.x_min(), mesh.x_max(), bridge, mesh.points());
}

std::vector<double> trig_sample(const Mesh1D& mesh, const TrigParams& params, RandomSource& rng) {
    params.validate();
    const auto xs = mesh.points();
    std::vector<double> f(xs.size(), 0.0);
    const std::size_t terms = rng.uniform_index(1, params.n_max);
    for (std::size_t j = 0; j < terms; ++j) {
        const double omega = rng.uniform_upper(0.0, params.omega_max);
        const double amp = rng.uniform_upper(0.0, params.a_max);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < xs.size(); ++i) f[i] += amp * std::sin(omega * xs[i] + phase);
    }
    return f;
}

namespace {

std::vector<double> sample_1d(const Mesh1D& mesh, DataMethod method, const TrigParams& params, RandomSource& rng) {
    return method == DataMethod::BBP ? bbp_sample(mesh, rng) : trig_sample(mesh, params, rng);
}

template <typename Fill>
void fill_rows(TrainingSet& set, unsigned threads, Fill fill) {
    const std::size_t n = set.n_samples;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fill(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fill(i);
        });
    }
}

}  // namespace

std::vector<double> tensor2d_sample(const Mesh2D& mesh, DataMethod method, const TrigParams& params,
                                    RandomSource& rng) {
    const auto g = sample_1d(mesh.x, method, params, rng);
    const auto h = sample_1d(mesh.y, method, params, rng);
    std::vector<double> f(g.size() * h.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j) f[i * h.size() + j] = g[i] * h[j];
    return f;
}

TrainingSet build_training_set(std::size_t n, const Mesh1D& mesh, DataMethod method, std::size_t channels,
                               const TrigParams& params, std::uint64_t seed, unsigned threads) {
    if (n < 1) throw InvalidArgument("build_training_set: need at least one sample");
    if (channels != 1 && channels != 2) throw InvalidArgument("build_training_set: channels must be 1 or 2");
    params.validate();
    TrainingSet set{n, mesh.size() * channels, channels, method, false, seed, {}};
    set.samples.resize(n * set.input_length);
    fill_rows(set, threads, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        double* row = set.samples.data() + i * set.input_length;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const auto f = sample_1d(mesh, method, params, rng);
            std::copy(f.begin(), f.end(), row + ch * mesh.size());
        }
    });
    return set;
}

TrainingSet build_training_set(std::size_t n, const Mesh2D& mesh, DataMethod method, std::size_t channels,
                               const TrigParams& params, std::uint64_t seed, unsigned threads) {
    if (n < 1) throw InvalidArgument("build_training_set: need at least one sample");
    if (channels != 1 && channels != 2) throw InvalidArgument("build_training_set: channels must be 1 or 2");
    params.validate();
    TrainingSet set{n, mesh.size() * channels, channels, method, true, seed, {}};
    set.samples.resize(n * set.input_length);
    fill_rows(set, threads, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        double* row = set.samples.data() + i * set.input_length;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const auto f = tensor2d_sample(mesh, method, params, rng);
            std::copy(f.begin(), f.end(), row + ch * mesh.size());
        }
    });
    return set;
}

namespace {
constexpr std::string_view kDataMagic = "ROMDATA1";
}

void write_training_set(const std::string& path, const TrainingSet& set) {
    detail::BinaryWriter w(path);
    w.magic(kDataMagic);
    w.u64(set.n_samples);
    w.u64(set.input_length);
    w.u64(set.channels);
    w.u64((set.tensor2d ? 2u : 0u) + (set.method == DataMethod::Trig ? 1u : 0u));
    w.u64(set.seed);
    w.f64s(set.samples);
    w.finish();
}

TrainingSet read_training_set(const std::string& path) {
    detail::BinaryReader r(path);
    r.expect_magic(kDataMagic);
    TrainingSet set;
    set.n_samples = r.u64();
    set.input_length = r.u64();
    set.channels = r.u64();
    const auto tag_at = r.offset();
    const std::uint64_t tag = r.u64();
    if (tag > 3) throw FormatError("unknown method tag " + std::to_string(tag), tag_at);
    set.tensor2d = tag >= 2;
    set.method = tag % 2 == 1 ? DataMethod::Trig : DataMethod::BBP;
    set.seed = r.u64();
    if (set.channels != 1 && set.channels != 2) throw FormatError("channels must be 1 or 2", tag_at - 8);
    if (set.input_length == 0 || set.n_samples == 0 ||
        r.remaining() / 8 / set.input_length < set.n_samples) {
        throw FormatError("sample payload truncated", r.offset());
    }
    set.samples.resize(set.n_samples * set.input_length);
    r.f64s(set.samples);
    if (!r.at_end()) throw FormatError("trailing bytes after samples", r.offset());
    return set;
}

std::string to_string(DataMethod m) { return m == DataMethod::BBP ? "bbp" : "trig"; }

DataMethod parse_data_method(const std::string& name) {
    if (name == "bbp") return DataMethod::BBP;
    if (name == "trig") return DataMethod::Trig;
    throw InvalidArgument("unknown data method '" + name + "' (expected bbp or trig)");
}

}  // namespace caerom
