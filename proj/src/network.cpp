#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "caerom/error.hpp"
#include "caerom/neural.hpp"

namespace caerom {

Network::Network(Shape input, const std::vector<LayerSpec>& specs) : input_(std::move(input)), specs_(specs) {
    if (specs_.empty()) throw InvalidArgument("network needs at least one layer");
    build();
}

Network::Network(const Network& other) : input_(other.input_), specs_(other.specs_) {
    build();
    params_ = other.params_;
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

void Network::build() {
    layers_.clear();
    offsets_.assign(1, 0);
    Shape shape = input_;
    for (const auto& spec : specs_) {
        layers_.push_back(make_layer(spec, shape));
        shape = layers_.back()->output_shape();
        offsets_.push_back(offsets_.back() + layers_.back()->param_count());
    }
    params_.assign(offsets_.back(), 0.0);
}

const Shape& Network::output_shape() const { return layers_.back()->output_shape(); }

std::span<double> Network::layer_params(std::size_t i) {
    return std::span<double>(params_).subspan(offsets_.at(i), offsets_.at(i + 1) - offsets_[i]);
}

std::span<const double> Network::layer_params(std::size_t i) const {
    return std::span<const double>(params_).subspan(offsets_.at(i), offsets_.at(i + 1) - offsets_[i]);
}

void Network::init(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->init_params(layer_params(i), rng);
}

std::size_t Network::resolve_end(std::size_t end) const {
    if (end == npos) return layers_.size();
    if (end > layers_.size()) throw InvalidArgument("layer range past the end of the network");
    return end;
}

Tensor Network::forward(const Tensor& x, std::size_t begin, std::size_t end) const {
    end = resolve_end(end);
    if (begin > end) throw InvalidArgument("layer range is reversed");
    Tensor cur = x, next;
    for (std::size_t i = begin; i < end; ++i) {
        layers_[i]->forward(cur, layer_params(i), next);
        std::swap(cur, next);
    }
    return cur;
}

Network::Tape Network::forward_record(const Tensor& x, std::size_t begin, std::size_t end) const {
    end = resolve_end(end);
    if (begin > end) throw InvalidArgument("layer range is reversed");
    Tape tape;
    tape.begin = begin;
    tape.activations.reserve(end - begin + 1);
    tape.activations.push_back(x);
    for (std::size_t i = begin; i < end; ++i) {
        Tensor y;
        layers_[i]->forward(tape.activations.back(), layer_params(i), y);
        tape.activations.push_back(std::move(y));
    }
    return tape;
}

Tensor Network::backward(const Tape& tape, const Tensor& dy, std::span<double> grads, bool want_input_grad) const {
    if (grads.size() != params_.size()) throw InvalidArgument("gradient buffer size does not match the network");
    const std::size_t count = tape.activations.size() - 1;
    Tensor cur = dy, next;
    for (std::size_t k = count; k-- > 0;) {
        const std::size_t i = tape.begin + k;
        const bool need_dx = k > 0 || want_input_grad;
        layers_[i]->backward(tape.activations[k], cur, layer_params(i),
                             grads.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]), need_dx ? &next : nullptr);
        if (need_dx) std::swap(cur, next);
    }
    return want_input_grad ? cur : Tensor{};
}

Tensor Network::tangent(const Tensor& x, const Tensor& tangents, std::size_t begin, std::size_t end) const {
    end = resolve_end(end);
    if (x.batch() != 1) throw InvalidArgument("tangent: the primal input must be a single sample");
    Tensor primal = x, primal_next, cur = tangents, next;
    for (std::size_t i = begin; i < end; ++i) {
        layers_[i]->tangent(primal, cur, layer_params(i), next);
        std::swap(cur, next);
        if (i + 1 < end) {
            layers_[i]->forward(primal, layer_params(i), primal_next);
            std::swap(primal, primal_next);
        }
    }
    return cur;
}

double mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape != target.shape) {
        throw InvalidArgument("mse_loss: shapes " + shape_string(pred.shape) + " and " + shape_string(target.shape) +
                              " differ");
    }
    if (pred.data.empty()) throw InvalidArgument("mse_loss: empty tensors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.data.size());
}

Tensor mse_gradient(const Tensor& pred, const Tensor& target) {
    if (pred.shape != target.shape) throw InvalidArgument("mse_gradient: shape mismatch");
    Tensor g = pred;
    const double scale = 2.0 / static_cast<double>(pred.data.size());
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = scale * (pred.data[i] - target.data[i]);
    return g;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
    if (params.size() != grads.size()) throw InvalidArgument("adam_step: parameter and gradient sizes differ");
    if (s.m.empty()) {
        s.m.assign(params.size(), 0.0);
        s.v.assign(params.size(), 0.0);
    }
    if (s.m.size() != params.size()) throw InvalidArgument("adam_step: optimizer state has the wrong size");
    ++s.step_count;
    const double t = static_cast<double>(s.step_count);
    const double c1 = 1.0 - std::pow(s.beta1, t);
    const double c2 = 1.0 - std::pow(s.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
        const double mhat = s.m[i] / c1;
        const double vhat = s.v[i] / c2;
        params[i] -= s.alpha * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::TargetReached: return "target-reached";
        case StopReason::EarlyStopped: return "early-stopped";
        case StopReason::MaxEpochs: return "max-epochs";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
    if (!(validation_split >= 0.0 && validation_split < 1.0)) {
        throw InvalidArgument("validation_split must lie in [0, 1)");
    }
    if (max_epochs == 0) throw InvalidArgument("max_epochs must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
    if (std::isnan(target_val_loss)) throw InvalidArgument("target_val_loss is NaN");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("lr_decay must lie in (0, 1]");
    if (!(divergence_factor >= 0.0)) throw InvalidArgument("divergence_factor must be >= 0");
}

namespace {

Tensor gather(const Tensor& data, std::span<const std::size_t> rows) {
    Tensor out(rows.size(), data.sample_shape());
    const std::size_t per = data.sample_size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(data.data.begin() + static_cast<std::ptrdiff_t>(rows[r] * per), per,
                    out.data.begin() + static_cast<std::ptrdiff_t>(r * per));
    }
    return out;
}

// Mean squared error over a set of rows, evaluated in chunks.
double evaluate(const Network& net, const Tensor& data, std::span<const std::size_t> rows, std::size_t chunk) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (std::size_t b = 0; b < rows.size(); b += chunk) {
        const auto part = rows.subspan(b, std::min(chunk, rows.size() - b));
        const Tensor x = gather(data, part);
        total += mse_loss(net.forward(x), x) * static_cast<double>(x.data.size());
    }
    return total / static_cast<double>(rows.size() * data.sample_size());
}

}  // namespace

TrainHistory train(Network& net, const Tensor& data, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (data.batch() == 0) throw InvalidArgument("train: empty dataset");
    if (data.sample_shape() != net.input_shape()) {
        throw InvalidArgument("train: data shape " + shape_string(data.sample_shape()) + " does not match network input " +
                              shape_string(net.input_shape()));
    }
    const std::size_t n = data.batch();
    const auto n_val = static_cast<std::size_t>(std::floor(config.validation_split * static_cast<double>(n)));
    const std::size_t n_train = n - n_val;
    if (n_train < 1) throw InvalidArgument("train: no rows left for training after the validation split");

    Rng rng(config.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<std::size_t> val_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    // Without a validation tail the stopping rules watch the training loss.
    const bool has_val = !val_rows.empty();

    AdamState adam;
    adam.alpha = config.learning_rate;
    double alpha = adam.alpha;
    std::vector<double> grads(net.param_count());
    std::vector<double> best_params = net.params();
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    TrainHistory hist;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(train_rows.begin(), train_rows.end());
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < n_train; b += config.batch_size) {
            const auto rows = std::span<const std::size_t>(train_rows).subspan(b, std::min(config.batch_size, n_train - b));
            const Tensor x = gather(data, rows);
            const auto tape = net.forward_record(x);
            loss_sum += mse_loss(tape.output(), x) * static_cast<double>(rows.size());
            std::fill(grads.begin(), grads.end(), 0.0);
            net.backward(tape, mse_gradient(tape.output(), x), grads);
            adam_step(net.params(), grads, adam);
        }
        const double train_loss = loss_sum / static_cast<double>(n_train);
        const bool guard = config.divergence_factor > 0.0 && std::isfinite(best);
        if (!std::isfinite(train_loss) && !guard) {
            throw NumericalFailure("training diverged at epoch " + std::to_string(epoch));
        }
        const double val_loss = has_val ? evaluate(net, data, val_rows, 512) : train_loss;
        const bool diverged = guard && !(val_loss <= config.divergence_factor * best);
        hist.train_loss.push_back(train_loss);
        hist.val_loss.push_back(val_loss);
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);

        if (diverged) {
            // Roll back to the best weights with fresh moments and a smaller step.
            net.params() = best_params;
            adam = AdamState{};
            adam.alpha = std::max(config.min_learning_rate, alpha * config.lr_decay);
            ++since_best;
        } else if (val_loss < best) {
            best = val_loss;
            best_params = net.params();
            hist.best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
            if (config.lr_decay_patience > 0 && since_best % config.lr_decay_patience == 0) {
                adam.alpha = std::max(config.min_learning_rate, adam.alpha * config.lr_decay);
            }
        }
        alpha = adam.alpha;
        if (!diverged && val_loss <= config.target_val_loss) {
            hist.stop = StopReason::TargetReached;
            return hist;
        }
        if (config.patience > 0 && since_best >= config.patience) {
            net.params() = best_params;
            hist.stop = StopReason::EarlyStopped;
            return hist;
        }
    }
    hist.stop = StopReason::MaxEpochs;
    return hist;
}

std::optional<std::size_t> epochs_to_threshold(const std::vector<double>& losses, double threshold) {
    for (std::size_t e = 0; e < losses.size(); ++e)
        if (losses[e] <= threshold) return e + 1;
    return std::nullopt;
}

}  // namespace caerom
