#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caerom/datagen.hpp"
#include "caerom/neural.hpp"

namespace caerom {

struct AutoencoderSpec {
    Shape input_shape{64, 1};  ///< spatial extents (1 or 2 axes) then channels
    std::size_t n_conv = 3;
    std::size_t n_dense = 1;
    std::size_t latent_dim = 8;
    std::size_t kernel_size = 5;
    std::size_t base_filters = 8;  ///< doubles with every conv unit
    std::size_t dense_units = 32;  ///< width of the hidden dense layers
    double output_sigma = 0.0;     ///< > 0 appends a fixed Gaussian filter to the decoder
    /// Initial PReLU slope. 1 starts training from a linear network; with 0.25 the
    /// 64 -> 8 model stalls near MSE 7e-3 on trig data.
    double prelu_init = 1.0;

    std::size_t spatial_rank() const { return input_shape.size() - 1; }
    std::size_t channels() const { return input_shape.back(); }
    std::size_t input_size() const { return shape_size(input_shape); }
    double reduction_factor() const;

    /// Throws InvalidArgument naming the required factor when an axis is not divisible
    /// by 2^n_conv.
    void validate() const;
    bool operator==(const AutoencoderSpec&) const = default;
};

/// Layer lists. The decoder is the encoder reversed, AvgPool <-> UpSample and
/// Flatten <-> Reshape swapped, conv filters mirrored; its last conv is linear.
std::vector<LayerSpec> encoder_layers(const AutoencoderSpec& spec);
std::vector<LayerSpec> decoder_layers(const AutoencoderSpec& spec);

struct TrainingFingerprint {
    std::uint64_t seed = 0;
    DataMethod method = DataMethod::Trig;
    std::uint64_t epochs = 0;
    bool operator==(const TrainingFingerprint&) const = default;
};

enum class JacobianMode { ForwardMode, ThreePoint };
std::string to_string(JacobianMode m);
JacobianMode parse_jacobian_mode(const std::string& name);

/// Encoder and decoder as one network split at `encoder_end()`.
///
/// States are passed in the solver layout: a multi-channel state is the channel
/// blocks one after another ([u; v]). The network itself works channels-last.
class Autoencoder {
public:
    /// Untrained network with seeded initial weights.
    static Autoencoder build(const AutoencoderSpec& spec, std::uint64_t init_seed = 0);

    const AutoencoderSpec& spec() const { return spec_; }
    const Network& network() const { return net_; }
    Network& network() { return net_; }
    std::size_t encoder_end() const { return encoder_end_; }
    std::size_t latent_dim() const { return spec_.latent_dim; }
    std::size_t state_size() const { return spec_.input_size(); }

    TrainingFingerprint fingerprint;

    std::vector<double> encode(std::span<const double> u) const;
    std::vector<double> decode(std::span<const double> xi) const;
    std::vector<double> reconstruct(std::span<const double> u) const;

    /// Batched versions over rows of a row-major matrix (batch x state_size / latent_dim).
    std::vector<double> encode_rows(std::span<const double> rows) const;
    std::vector<double> decode_rows(std::span<const double> rows) const;

    /// state_size x d matrix dg/dxi at xi.
    Eigen::MatrixXd decoder_jacobian(std::span<const double> xi, JacobianMode mode) const;

    /// Converts between the solver layout and the channels-last network layout.
    Tensor to_tensor(std::span<const double> rows) const;
    std::vector<double> from_tensor(const Tensor& t) const;

    /// Trains on a data set whose rows are states in the solver layout.
    TrainHistory fit(const TrainingSet& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

private:
    Autoencoder(AutoencoderSpec spec, Network net, std::size_t encoder_end);

    AutoencoderSpec spec_;
    Network net_;
    std::size_t encoder_end_;
};

/// Weight file: "ROMAE_01", little-endian. Header holds the AutoencoderSpec fields and the
/// training fingerprint, then the encoder boundary and layer count, then per layer
/// its kind (u8), output rank and dims (u64), parameter count and f64 parameters.
void save_autoencoder(const std::string& path, const Autoencoder& ae);
/// Throws FormatError (with byte offset) on bad magic, truncation or a layer table
/// that does not match the AutoencoderSpec.
Autoencoder load_autoencoder(const std::string& path);

/// Bank layout: <dir>/ae_<meshsize>_<latent>.bin, meshsize being the product of the
/// spatial extents.
std::string bank_file_name(std::size_t mesh_size, std::size_t latent_dim);
/// ROM_BANK_DIR when set, otherwise "bank".
std::string default_bank_dir();
std::string bank_path(const std::string& dir, std::size_t mesh_size, std::size_t latent_dim);

}  // namespace caerom
