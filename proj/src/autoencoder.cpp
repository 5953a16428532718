#include "caerom/autoencoder.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "binary_io.hpp"
#include "caerom/error.hpp"

namespace caerom {

double AutoencoderSpec::reduction_factor() const {
    return static_cast<double>(input_size()) / static_cast<double>(latent_dim);
}

void AutoencoderSpec::validate() const {
    if (input_shape.size() < 2 || input_shape.size() > 3) {
        throw InvalidArgument("autoencoder input must have 1 or 2 spatial axes plus channels, got " +
                              shape_string(input_shape));
    }
    if (channels() == 0) throw InvalidArgument("autoencoder input needs at least one channel");
    if (latent_dim < 1) throw InvalidArgument("latent_dim must be at least 1");
    if (kernel_size % 2 == 0) throw InvalidArgument("kernel_size must be odd");
    if (base_filters < 1 || dense_units < 1) throw InvalidArgument("filter and unit counts must be positive");
    if (n_conv > 20) throw InvalidArgument("n_conv is unreasonably large");
    if (!(output_sigma >= 0.0)) throw InvalidArgument("output_sigma must be >= 0");
    if (!std::isfinite(prelu_init)) throw InvalidArgument("prelu_init must be finite");
    const std::size_t factor = std::size_t{1} << n_conv;
    for (std::size_t a = 0; a < spatial_rank(); ++a) {
        if (input_shape[a] == 0 || input_shape[a] % factor != 0) {
            throw InvalidArgument("input extent " + std::to_string(input_shape[a]) + " is not divisible by " +
                                  std::to_string(factor) + " (2^n_conv)");
        }
    }
}

namespace {

std::size_t filters_at(const AutoencoderSpec& s, std::size_t unit) { return s.base_filters << unit; }

Shape bottleneck_shape(const AutoencoderSpec& s) {
    Shape shape = s.input_shape;
    for (std::size_t a = 0; a < s.spatial_rank(); ++a) shape[a] >>= s.n_conv;
    shape.back() = s.n_conv == 0 ? s.channels() : filters_at(s, s.n_conv - 1);
    return shape;
}

}  // namespace

std::vector<LayerSpec> encoder_layers(const AutoencoderSpec& s) {
    s.validate();
    std::vector<LayerSpec> layers;
    for (std::size_t i = 0; i < s.n_conv; ++i) {
        layers.push_back(LayerSpec::conv(s.spatial_rank(), filters_at(s, i), s.kernel_size));
        layers.push_back(LayerSpec::prelu(s.prelu_init));
        layers.push_back(LayerSpec::of(LayerKind::AvgPool));
    }
    layers.push_back(LayerSpec::of(LayerKind::Flatten));
    for (std::size_t i = 0; i < s.n_dense; ++i) {
        layers.push_back(LayerSpec::dense(s.dense_units));
        layers.push_back(LayerSpec::prelu(s.prelu_init));
    }
    layers.push_back(LayerSpec::dense(s.latent_dim));
    return layers;
}

std::vector<LayerSpec> decoder_layers(const AutoencoderSpec& s) {
    s.validate();
    const Shape bottleneck = bottleneck_shape(s);
    std::vector<LayerSpec> layers;
    // Reverse of [Dense(units) PReLU]^n_dense Dense(d): Dense, then (PReLU Dense)^n_dense,
    // the last dense landing on the flattened bottleneck.
    layers.push_back(LayerSpec::dense(s.n_dense > 0 ? s.dense_units : shape_size(bottleneck)));
    for (std::size_t i = 0; i < s.n_dense; ++i) {
        layers.push_back(LayerSpec::prelu(s.prelu_init));
        layers.push_back(LayerSpec::dense(i + 1 < s.n_dense ? s.dense_units : shape_size(bottleneck)));
    }
    layers.push_back(LayerSpec::reshape(bottleneck));
    for (std::size_t k = s.n_conv; k-- > 0;) {
        layers.push_back(LayerSpec::of(LayerKind::UpSample));
        layers.push_back(LayerSpec::prelu(s.prelu_init));
        layers.push_back(LayerSpec::conv(s.spatial_rank(), k == 0 ? s.channels() : filters_at(s, k - 1), s.kernel_size));
    }
    if (s.output_sigma > 0.0) layers.push_back(LayerSpec::gaussian(s.output_sigma));
    return layers;
}

std::string to_string(JacobianMode m) { return m == JacobianMode::ForwardMode ? "forward" : "3point"; }

JacobianMode parse_jacobian_mode(const std::string& name) {
    if (name == "forward") return JacobianMode::ForwardMode;
    if (name == "3point") return JacobianMode::ThreePoint;
    throw InvalidArgument("unknown jacobian mode '" + name + "' (expected forward or 3point)");
}

Autoencoder::Autoencoder(AutoencoderSpec spec, Network net, std::size_t encoder_end)
    : spec_(std::move(spec)), net_(std::move(net)), encoder_end_(encoder_end) {}

Autoencoder Autoencoder::build(const AutoencoderSpec& spec, std::uint64_t init_seed) {
    auto layers = encoder_layers(spec);
    const std::size_t boundary = layers.size();
    const auto dec = decoder_layers(spec);
    layers.insert(layers.end(), dec.begin(), dec.end());
    Network net(spec.input_shape, layers);
    net.init(init_seed);
    return Autoencoder(spec, std::move(net), boundary);
}

Tensor Autoencoder::to_tensor(std::span<const double> rows) const {
    const std::size_t n = state_size(), c = spec_.channels(), pts = n / c;
    if (rows.size() % n != 0) {
        throw InvalidArgument("state length " + std::to_string(rows.size()) + " is not a multiple of " +
                              std::to_string(n));
    }
    Tensor t(rows.size() / n, spec_.input_shape);
    if (c == 1) {
        std::copy(rows.begin(), rows.end(), t.data.begin());
        return t;
    }
    for (std::size_t b = 0; b < t.batch(); ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < pts; ++p) t.data[b * n + p * c + ch] = rows[b * n + ch * pts + p];
    return t;
}

std::vector<double> Autoencoder::from_tensor(const Tensor& t) const {
    const std::size_t n = state_size(), c = spec_.channels(), pts = n / c;
    if (c == 1) return t.data;
    std::vector<double> rows(t.data.size());
    for (std::size_t b = 0; b < t.batch(); ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < pts; ++p) rows[b * n + ch * pts + p] = t.data[b * n + p * c + ch];
    return rows;
}

std::vector<double> Autoencoder::encode(std::span<const double> u) const {
    if (u.size() != state_size()) {
        throw InvalidArgument("encode: state has length " + std::to_string(u.size()) + ", expected " +
                              std::to_string(state_size()));
    }
    return encode_rows(u);
}

std::vector<double> Autoencoder::decode(std::span<const double> xi) const {
    if (xi.size() != latent_dim()) {
        throw InvalidArgument("decode: latent vector has length " + std::to_string(xi.size()) + ", expected " +
                              std::to_string(latent_dim()));
    }
    return decode_rows(xi);
}

std::vector<double> Autoencoder::reconstruct(std::span<const double> u) const { return decode(encode(u)); }

std::vector<double> Autoencoder::encode_rows(std::span<const double> rows) const {
    return net_.forward(to_tensor(rows), 0, encoder_end_).data;
}

std::vector<double> Autoencoder::decode_rows(std::span<const double> rows) const {
    const std::size_t d = latent_dim();
    if (rows.size() % d != 0) throw InvalidArgument("decode: latent rows do not match latent_dim");
    Tensor z(rows.size() / d, {d});
    std::copy(rows.begin(), rows.end(), z.data.begin());
    return from_tensor(net_.forward(z, encoder_end_));
}

Eigen::MatrixXd Autoencoder::decoder_jacobian(std::span<const double> xi, JacobianMode mode) const {
    const std::size_t d = latent_dim(), n = state_size();
    if (xi.size() != d) throw InvalidArgument("decoder_jacobian: latent vector has the wrong length");
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    if (mode == JacobianMode::ForwardMode) {
        Tensor primal(1, {d});
        std::copy(xi.begin(), xi.end(), primal.data.begin());
        Tensor basis(d, {d});
        for (std::size_t j = 0; j < d; ++j) basis.data[j * d + j] = 1.0;
        const auto cols = from_tensor(net_.tangent(primal, basis, encoder_end_));
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j * n + i];
        return jac;
    }
    // Central differences, all 2d perturbed points decoded as one batch.
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    std::vector<double> points(2 * d * d), steps(d);
    for (std::size_t j = 0; j < d; ++j) {
        steps[j] = root_eps * std::max(1.0, std::abs(xi[j]));
        for (int side = 0; side < 2; ++side) {
            double* p = points.data() + (2 * j + static_cast<std::size_t>(side)) * d;
            std::copy(xi.begin(), xi.end(), p);
            p[j] += side == 0 ? steps[j] : -steps[j];
        }
    }
    const auto out = decode_rows(points);
    for (std::size_t j = 0; j < d; ++j) {
        const double* plus = out.data() + 2 * j * n;
        const double* minus = plus + n;
        // The realized step, which differs from steps[j] by rounding of xi + h.
        const double h2 = (xi[j] + steps[j]) - (xi[j] - steps[j]);
        for (std::size_t i = 0; i < n; ++i)
            jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (plus[i] - minus[i]) / h2;
    }
    return jac;
}

TrainHistory Autoencoder::fit(const TrainingSet& data, const TrainConfig& config, const EpochCallback& on_epoch) {
    if (data.input_length != state_size()) {
        throw InvalidArgument("training rows have length " + std::to_string(data.input_length) +
                              " but the autoencoder expects " + std::to_string(state_size()));
    }
    if (data.n_samples == 0) throw InvalidArgument("train: empty dataset");
    const Tensor x = to_tensor(data.samples);
    auto hist = train(net_, x, config, on_epoch);
    fingerprint = {config.seed, data.method, hist.epochs()};
    return hist;
}

// ---------------------------------------------------------------------------
namespace {
constexpr std::string_view kWeightMagic = "ROMAE_01";
}

void save_autoencoder(const std::string& path, const Autoencoder& ae) {
    const auto& s = ae.spec();
    detail::BinaryWriter w(path);
    w.magic(kWeightMagic);
    w.u64(s.input_shape.size());
    for (auto dim : s.input_shape) w.u64(dim);
    w.u64(s.n_conv);
    w.u64(s.n_dense);
    w.u64(s.latent_dim);
    w.u64(s.kernel_size);
    w.u64(s.base_filters);
    w.u64(s.dense_units);
    w.f64(s.output_sigma);
    w.f64(s.prelu_init);
    w.u64(ae.fingerprint.seed);
    w.u8(ae.fingerprint.method == DataMethod::Trig ? 1 : 0);
    w.u64(ae.fingerprint.epochs);
    const Network& net = ae.network();
    w.u64(ae.encoder_end());
    w.u64(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Layer& l = net.layer(i);
        w.u8(static_cast<std::uint8_t>(l.kind()));
        w.u64(l.output_shape().size());
        for (auto dim : l.output_shape()) w.u64(dim);
        const auto p = net.layer_params(i);
        w.u64(p.size());
        w.f64s(p);
    }
    w.finish();
}

Autoencoder load_autoencoder(const std::string& path) {
    detail::BinaryReader r(path);
    r.expect_magic(kWeightMagic);
    AutoencoderSpec s;
    const auto rank_at = r.offset();
    const std::uint64_t rank = r.u64();
    if (rank < 2 || rank > 3) throw FormatError("input rank must be 2 or 3", rank_at);
    s.input_shape.resize(rank);
    for (auto& dim : s.input_shape) dim = r.u64();
    s.n_conv = r.u64();
    s.n_dense = r.u64();
    s.latent_dim = r.u64();
    s.kernel_size = r.u64();
    s.base_filters = r.u64();
    s.dense_units = r.u64();
    s.output_sigma = r.f64();
    s.prelu_init = r.f64();
    const auto header_end = r.offset();
    TrainingFingerprint fp;
    fp.seed = r.u64();
    const auto method_at = r.offset();
    const std::uint8_t method = r.u8();
    if (method > 1) throw FormatError("unknown data method tag", method_at);
    fp.method = method == 1 ? DataMethod::Trig : DataMethod::BBP;
    fp.epochs = r.u64();

    std::optional<Autoencoder> built;
    try {
        built = Autoencoder::build(s);
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("inconsistent header: ") + e.what(), header_end);
    }
    Autoencoder ae = std::move(*built);
    ae.fingerprint = fp;
    Network& net = ae.network();
    const auto boundary_at = r.offset();
    if (r.u64() != ae.encoder_end()) throw FormatError("encoder boundary does not match the model shape", boundary_at);
    const auto count_at = r.offset();
    if (r.u64() != net.size()) throw FormatError("layer count does not match the model shape", count_at);
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto kind_at = r.offset();
        if (r.u8() != static_cast<std::uint8_t>(net.layer(i).kind())) {
            throw FormatError("layer " + std::to_string(i) + " has the wrong kind", kind_at);
        }
        const auto shape_at = r.offset();
        const std::uint64_t out_rank = r.u64();
        if (out_rank > 8) throw FormatError("layer rank out of range", shape_at);
        Shape shape(out_rank);
        for (auto& dim : shape) dim = r.u64();
        if (shape != net.layer(i).output_shape()) {
            throw FormatError("layer " + std::to_string(i) + " has shape " + shape_string(shape) + ", expected " +
                                  shape_string(net.layer(i).output_shape()),
                              shape_at);
        }
        const auto count_at2 = r.offset();
        const auto params = net.layer_params(i);
        if (r.u64() != params.size()) {
            throw FormatError("layer " + std::to_string(i) + " parameter count mismatch", count_at2);
        }
        r.f64s(params);
    }
    if (!r.at_end()) throw FormatError("trailing bytes after the last layer", r.offset());
    return ae;
}

std::string bank_file_name(std::size_t mesh_size, std::size_t latent_dim) {
    return "ae_" + std::to_string(mesh_size) + "_" + std::to_string(latent_dim) + ".bin";
}

std::string default_bank_dir() {
    const char* env = std::getenv("ROM_BANK_DIR");
    return env && *env ? std::string(env) : std::string("bank");
}

std::string bank_path(const std::string& dir, std::size_t mesh_size, std::size_t latent_dim) {
    return (std::filesystem::path(dir) / bank_file_name(mesh_size, latent_dim)).string();
}

}  // namespace caerom
