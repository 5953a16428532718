#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caerom/random.hpp"

namespace caerom {

/// Per-sample shape: spatial extents followed by channels, e.g. {64, 1} or {72, 72, 1}.
/// Dense layers work on rank-1 shapes {units}.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_string(const Shape& s);

/// Batch of samples, row-major, batch index outermost.
struct Tensor {
    std::vector<std::size_t> shape;  ///< {batch, sample shape...}
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t batch, const Shape& sample, double fill = 0.0);

    std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t sample_size() const { return batch() ? data.size() / batch() : 0; }
    Shape sample_shape() const { return Shape(shape.begin() + 1, shape.end()); }
    std::span<double> sample(std::size_t i) { return std::span<double>(data).subspan(i * sample_size(), sample_size()); }
    std::span<const double> sample(std::size_t i) const {
        return std::span<const double>(data).subspan(i * sample_size(), sample_size());
    }
};

enum class LayerKind : std::uint8_t {
    Conv1D = 1,
    Conv2D = 2,
    AvgPool = 3,
    UpSample = 4,
    Dense = 5,
    PReLU = 6,
    Linear = 7,
    Flatten = 8,
    Reshape = 9,
    GaussianFilter = 10,
};

std::string to_string(LayerKind k);

struct LayerSpec {
    LayerKind kind = LayerKind::Linear;
    std::size_t kernel_size = 5;  ///< convolutions, odd
    std::size_t filters = 8;      ///< convolutions
    std::size_t units = 0;        ///< dense
    Shape target;                 ///< reshape
    double sigma = 1.0;           ///< Gaussian filter, in grid points
    double slope = 0.25;          ///< PReLU initial negative-branch slope

    static LayerSpec conv(std::size_t rank, std::size_t filters, std::size_t kernel = 5);
    static LayerSpec dense(std::size_t units);
    static LayerSpec reshape(Shape target);
    static LayerSpec gaussian(double sigma);
    static LayerSpec prelu(double slope = 0.25);
    static LayerSpec of(LayerKind k);
};

/// A stateless layer. Parameters live in the owning Network and are passed in as spans.
class Layer {
public:
    Layer(LayerKind kind, Shape in, Shape out) : kind_(kind), in_(std::move(in)), out_(std::move(out)) {}
    virtual ~Layer() = default;

    LayerKind kind() const { return kind_; }
    const Shape& input_shape() const { return in_; }
    const Shape& output_shape() const { return out_; }

    virtual std::size_t param_count() const { return 0; }
    virtual void init_params(std::span<double> /*params*/, Rng& /*rng*/) const {}

    virtual void forward(const Tensor& x, std::span<const double> params, Tensor& y) const = 0;
    /// Adds dL/dparams into `grads` and, when `dx` is non-null, writes dL/dx.
    virtual void backward(const Tensor& x, const Tensor& dy, std::span<const double> params,
                          std::span<double> grads, Tensor* dx) const = 0;
    /// Directional derivative: tangents (any batch) through the layer linearised at the
    /// single-sample primal input `x`.
    virtual void tangent(const Tensor& x, const Tensor& dx, std::span<const double> params, Tensor& dy) const;

protected:
    Tensor make_output(std::size_t batch) const { return Tensor(batch, out_); }

private:
    LayerKind kind_;
    Shape in_, out_;
};

/// Builds a layer for the given input shape. Throws InvalidArgument on incompatible shapes.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input);

/// Sequential stack of layers with one flat parameter vector.
class Network {
public:
    Network(Shape input, const std::vector<LayerSpec>& specs);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    std::size_t size() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }
    const std::vector<LayerSpec>& specs() const { return specs_; }
    const Shape& input_shape() const { return input_; }
    const Shape& output_shape() const;

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::span<double> layer_params(std::size_t i);
    std::span<const double> layer_params(std::size_t i) const;
    std::size_t param_count() const { return params_.size(); }

    /// Glorot-uniform kernels, zero biases, PReLU slopes from their LayerSpec (0.25 unless set).
    void init(std::uint64_t seed);

    /// Runs layers [begin, end). end = npos means the last layer.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    Tensor forward(const Tensor& x, std::size_t begin = 0, std::size_t end = npos) const;

    /// Inputs of every layer in [begin, end) plus the final output.
    struct Tape {
        std::size_t begin = 0;
        std::vector<Tensor> activations;
        const Tensor& output() const { return activations.back(); }
    };
    Tape forward_record(const Tensor& x, std::size_t begin = 0, std::size_t end = npos) const;
    /// Accumulates dL/dparams (full-length `grads`) for the layers on the tape.
    /// Returns dL/d(tape input) when `want_input_grad` is set.
    Tensor backward(const Tape& tape, const Tensor& dy, std::span<double> grads, bool want_input_grad = false) const;

    /// Pushes a batch of tangent vectors through [begin, end) linearised at the single sample `x`.
    Tensor tangent(const Tensor& x, const Tensor& tangents, std::size_t begin = 0, std::size_t end = npos) const;

private:
    std::size_t resolve_end(std::size_t end) const;
    void build();

    Shape input_;
    std::vector<LayerSpec> specs_;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<std::size_t> offsets_;  // size() + 1 entries
    std::vector<double> params_;
};

/// Mean over all elements of (pred - target)^2.
double mse_loss(const Tensor& pred, const Tensor& target);
/// d mse / d pred.
Tensor mse_gradient(const Tensor& pred, const Tensor& target);

/// Classic Adam with bias correction.
struct AdamState {
    std::uint64_t step_count = 0;
    std::vector<double> m, v;
    double alpha = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

enum class StopReason { TargetReached, EarlyStopped, MaxEpochs };
std::string to_string(StopReason r);

struct TrainConfig {
    std::size_t batch_size = 128;
    double validation_split = 0.2;
    double target_val_loss = 1e-5;
    std::size_t patience = 10;
    std::size_t max_epochs = 100;
    std::uint64_t seed = 0;
    double learning_rate = 0.01;
    /// Multiply the learning rate by lr_decay after lr_decay_patience epochs without
    /// validation improvement (0 disables).
    double lr_decay = 0.5;
    std::size_t lr_decay_patience = 5;
    double min_learning_rate = 1e-5;
    /// An epoch whose validation loss exceeds divergence_factor times the best so far
    /// is rolled back to the best weights with reset moments and a decayed learning
    /// rate (0 disables).
    double divergence_factor = 3.0;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    StopReason stop = StopReason::MaxEpochs;
    std::size_t best_epoch = 0;  ///< 1-based epoch with the lowest validation loss

    std::size_t epochs() const { return train_loss.size(); }
};

/// First 1-based epoch whose loss is <= threshold; empty when never reached.
std::optional<std::size_t> epochs_to_threshold(const std::vector<double>& losses, double threshold);

/// Called after every epoch with (epoch, train loss, validation loss).
using EpochCallback = std::function<void(std::size_t, double, double)>;

/// Autoencoding fit (targets = inputs). One seeded shuffle fixes the validation tail;
/// training rows are reshuffled every epoch. Stops when the validation loss reaches the
/// target, after `patience` epochs without improvement (restoring the best weights),
/// or at max_epochs.
TrainHistory train(Network& net, const Tensor& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace caerom
