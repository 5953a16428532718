#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "caerom/error.hpp"
#include "caerom/filter.hpp"
#include "caerom/neural.hpp"

namespace caerom {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapRow = Eigen::Map<const Eigen::RowVectorXd>;
using MapRow = Eigen::Map<Eigen::RowVectorXd>;

namespace {

// out[j] += sum_i d[i][j] in a fixed order. Eigen's vectorized reductions peel by the
// runtime address of unaligned maps, which makes repeated runs differ in the last bits.
void add_column_sums(const double* d, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[j] += d[i * cols + j];
}

}  // namespace

std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::string shape_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out + "]";
}

Tensor::Tensor(std::size_t batch, const Shape& sample, double fill) {
    shape.reserve(sample.size() + 1);
    shape.push_back(batch);
    shape.insert(shape.end(), sample.begin(), sample.end());
    data.assign(batch * shape_size(sample), fill);
}

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1D: return "Conv1D";
        case LayerKind::Conv2D: return "Conv2D";
        case LayerKind::AvgPool: return "AvgPool";
        case LayerKind::UpSample: return "UpSample";
        case LayerKind::Dense: return "Dense";
        case LayerKind::PReLU: return "PReLU";
        case LayerKind::Linear: return "Linear";
        case LayerKind::Flatten: return "Flatten";
        case LayerKind::Reshape: return "Reshape";
        case LayerKind::GaussianFilter: return "GaussianFilter";
    }
    return "?";
}

LayerSpec LayerSpec::conv(std::size_t rank, std::size_t filters, std::size_t kernel) {
    LayerSpec s;
    s.kind = rank == 2 ? LayerKind::Conv2D : LayerKind::Conv1D;
    s.filters = filters;
    s.kernel_size = kernel;
    return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    return s;
}

LayerSpec LayerSpec::reshape(Shape target) {
    LayerSpec s;
    s.kind = LayerKind::Reshape;
    s.target = std::move(target);
    return s;
}

LayerSpec LayerSpec::gaussian(double sigma) {
    LayerSpec s;
    s.kind = LayerKind::GaussianFilter;
    s.sigma = sigma;
    return s;
}

LayerSpec LayerSpec::prelu(double slope) {
    LayerSpec s;
    s.kind = LayerKind::PReLU;
    s.slope = slope;
    return s;
}

LayerSpec LayerSpec::of(LayerKind k) {
    LayerSpec s;
    s.kind = k;
    return s;
}

void Layer::tangent(const Tensor& /*x*/, const Tensor& dx, std::span<const double> params, Tensor& dy) const {
    // Parameter-free linear layers: the tangent map is the layer itself.
    forward(dx, params, dy);
}

namespace {

void check_input(const Layer& l, const Tensor& x) {
    if (x.sample_shape() != l.input_shape()) {
        throw InvalidArgument(to_string(l.kind()) + ": input shape " + shape_string(x.sample_shape()) +
                              " does not match " + shape_string(l.input_shape()));
    }
}

void glorot(std::span<double> w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// Same-padded, stride-1 convolution over 1 or 2 spatial axes via im2col + GEMM.
// Parameters: kernel [taps * c_in, c_out] row-major, then bias [c_out].
class Conv final : public Layer {
public:
    Conv(LayerKind kind, const Shape& in, std::size_t filters, std::size_t kernel)
        : Layer(kind, in, out_shape(in, filters)), rank_(in.size() - 1), k_(kernel), c_in_(in.back()), c_out_(filters) {
        if (kernel % 2 == 0 || kernel == 0) throw InvalidArgument("convolution kernel size must be odd");
        taps_ = rank_ == 1 ? k_ : k_ * k_;
        pixels_ = shape_size(in) / c_in_;
    }

    static Shape out_shape(const Shape& in, std::size_t filters) {
        Shape s = in;
        s.back() = filters;
        return s;
    }

    std::size_t param_count() const override { return taps_ * c_in_ * c_out_ + c_out_; }

    void init_params(std::span<double> p, Rng& rng) const override {
        glorot(p.first(taps_ * c_in_ * c_out_), taps_ * c_in_, taps_ * c_out_, rng);
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(taps_ * c_in_ * c_out_), p.end(), 0.0);
    }

    void forward(const Tensor& x, std::span<const double> p, Tensor& y) const override { run(x, p, y, true); }

    void tangent(const Tensor&, const Tensor& dx, std::span<const double> p, Tensor& dy) const override {
        run(dx, p, dy, false);
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double> p, std::span<double> g,
                  Tensor* dx) const override {
        const std::size_t batch = x.batch();
        const std::size_t width = taps_ * c_in_;
        ConstMapMat w(p.data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(c_out_));
        MapMat gw(g.data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(c_out_));
        if (dx) *dx = Tensor(batch, input_shape());
        std::vector<double> cols;
        for (std::size_t b0 = 0; b0 < batch; b0 += chunk()) {
            const std::size_t b1 = std::min(batch, b0 + chunk());
            const auto rows = static_cast<Eigen::Index>((b1 - b0) * pixels_);
            im2col(x, b0, b1, cols);
            ConstMapMat c(cols.data(), rows, static_cast<Eigen::Index>(width));
            ConstMapMat d(dy.data.data() + b0 * pixels_ * c_out_, rows, static_cast<Eigen::Index>(c_out_));
            gw.noalias() += c.transpose() * d;
            add_column_sums(d.data(), static_cast<std::size_t>(rows), c_out_, g.data() + width * c_out_);
            if (dx) {
                RowMat dc = d * w.transpose();
                col2im(dc.data(), b0, b1, *dx);
            }
        }
    }

private:
    std::size_t chunk() const {
        const std::size_t per = pixels_ * taps_ * c_in_;
        return std::max<std::size_t>(1, (std::size_t{1} << 21) / std::max<std::size_t>(per, 1));
    }

    void run(const Tensor& x, std::span<const double> p, Tensor& y, bool bias) const {
        check_input(*this, x);
        const std::size_t batch = x.batch();
        const std::size_t width = taps_ * c_in_;
        y = make_output(batch);
        ConstMapMat w(p.data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(c_out_));
        ConstMapRow b(p.data() + width * c_out_, static_cast<Eigen::Index>(c_out_));
        std::vector<double> cols;
        for (std::size_t b0 = 0; b0 < batch; b0 += chunk()) {
            const std::size_t b1 = std::min(batch, b0 + chunk());
            const auto rows = static_cast<Eigen::Index>((b1 - b0) * pixels_);
            im2col(x, b0, b1, cols);
            ConstMapMat c(cols.data(), rows, static_cast<Eigen::Index>(width));
            MapMat out(y.data.data() + b0 * pixels_ * c_out_, rows, static_cast<Eigen::Index>(c_out_));
            out.noalias() = c * w;
            if (bias) out.rowwise() += b;
        }
    }

    // Row (sample, pixel) holds the c_in values under each kernel tap, zero outside.
    void im2col(const Tensor& x, std::size_t b0, std::size_t b1, std::vector<double>& cols) const {
        const std::size_t width = taps_ * c_in_;
        cols.assign((b1 - b0) * pixels_ * width, 0.0);
        const auto half = static_cast<std::ptrdiff_t>(k_ / 2);
        const std::size_t n0 = input_shape()[0];
        const std::size_t n1 = rank_ == 2 ? input_shape()[1] : 1;
        for (std::size_t s = b0; s < b1; ++s) {
            const double* src = x.data.data() + s * pixels_ * c_in_;
            double* dst = cols.data() + (s - b0) * pixels_ * width;
            for (std::size_t i = 0; i < n0; ++i) {
                for (std::size_t j = 0; j < n1; ++j) {
                    double* row = dst + (i * n1 + j) * width;
                    for (std::size_t ki = 0; ki < (rank_ == 2 ? k_ : 1); ++ki) {
                        for (std::size_t kj = 0; kj < k_; ++kj) {
                            std::ptrdiff_t si, sj;
                            if (rank_ == 1) {
                                si = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(kj) - half;
                                sj = 0;
                            } else {
                                si = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(ki) - half;
                                sj = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(kj) - half;
                            }
                            if (si < 0 || sj < 0 || si >= static_cast<std::ptrdiff_t>(n0) ||
                                sj >= static_cast<std::ptrdiff_t>(n1)) {
                                continue;
                            }
                            const std::size_t tap = ki * k_ + kj;
                            std::memcpy(row + tap * c_in_,
                                        src + (static_cast<std::size_t>(si) * n1 + static_cast<std::size_t>(sj)) * c_in_,
                                        c_in_ * sizeof(double));
                        }
                    }
                }
            }
        }
    }

    void col2im(const double* cols, std::size_t b0, std::size_t b1, Tensor& dx) const {
        const std::size_t width = taps_ * c_in_;
        const auto half = static_cast<std::ptrdiff_t>(k_ / 2);
        const std::size_t n0 = input_shape()[0];
        const std::size_t n1 = rank_ == 2 ? input_shape()[1] : 1;
        for (std::size_t s = b0; s < b1; ++s) {
            double* dst = dx.data.data() + s * pixels_ * c_in_;
            const double* src = cols + (s - b0) * pixels_ * width;
            for (std::size_t i = 0; i < n0; ++i) {
                for (std::size_t j = 0; j < n1; ++j) {
                    const double* row = src + (i * n1 + j) * width;
                    for (std::size_t ki = 0; ki < (rank_ == 2 ? k_ : 1); ++ki) {
                        for (std::size_t kj = 0; kj < k_; ++kj) {
                            std::ptrdiff_t si, sj;
                            if (rank_ == 1) {
                                si = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(kj) - half;
                                sj = 0;
                            } else {
                                si = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(ki) - half;
                                sj = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(kj) - half;
                            }
                            if (si < 0 || sj < 0 || si >= static_cast<std::ptrdiff_t>(n0) ||
                                sj >= static_cast<std::ptrdiff_t>(n1)) {
                                continue;
                            }
                            const std::size_t tap = ki * k_ + kj;
                            double* t = dst + (static_cast<std::size_t>(si) * n1 + static_cast<std::size_t>(sj)) * c_in_;
                            for (std::size_t c = 0; c < c_in_; ++c) t[c] += row[tap * c_in_ + c];
                        }
                    }
                }
            }
        }
    }

    std::size_t rank_, k_, c_in_, c_out_;
    std::size_t taps_ = 0, pixels_ = 0;
};

// ---------------------------------------------------------------------------
class Dense final : public Layer {
public:
    Dense(const Shape& in, std::size_t units) : Layer(LayerKind::Dense, in, {units}), n_in_(in.at(0)), n_out_(units) {
        if (in.size() != 1) throw InvalidArgument("Dense expects a flat input, got " + shape_string(in));
        if (units == 0) throw InvalidArgument("Dense needs at least one unit");
    }

    std::size_t param_count() const override { return n_in_ * n_out_ + n_out_; }

    void init_params(std::span<double> p, Rng& rng) const override {
        glorot(p.first(n_in_ * n_out_), n_in_, n_out_, rng);
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(n_in_ * n_out_), p.end(), 0.0);
    }

    void forward(const Tensor& x, std::span<const double> p, Tensor& y) const override { run(x, p, y, true); }
    void tangent(const Tensor&, const Tensor& dx, std::span<const double> p, Tensor& dy) const override {
        run(dx, p, dy, false);
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double> p, std::span<double> g,
                  Tensor* dx) const override {
        const auto b = static_cast<Eigen::Index>(x.batch());
        const auto ni = static_cast<Eigen::Index>(n_in_), no = static_cast<Eigen::Index>(n_out_);
        ConstMapMat xm(x.data.data(), b, ni);
        ConstMapMat d(dy.data.data(), b, no);
        ConstMapMat w(p.data(), ni, no);
        MapMat(g.data(), ni, no).noalias() += xm.transpose() * d;
        add_column_sums(dy.data.data(), x.batch(), n_out_, g.data() + n_in_ * n_out_);
        if (dx) {
            *dx = Tensor(x.batch(), input_shape());
            MapMat(dx->data.data(), b, ni).noalias() = d * w.transpose();
        }
    }

private:
    void run(const Tensor& x, std::span<const double> p, Tensor& y, bool bias) const {
        check_input(*this, x);
        const auto b = static_cast<Eigen::Index>(x.batch());
        const auto ni = static_cast<Eigen::Index>(n_in_), no = static_cast<Eigen::Index>(n_out_);
        y = make_output(x.batch());
        MapMat out(y.data.data(), b, no);
        out.noalias() = ConstMapMat(x.data.data(), b, ni) * ConstMapMat(p.data(), ni, no);
        if (bias) out.rowwise() += ConstMapRow(p.data() + n_in_ * n_out_, no);
    }

    std::size_t n_in_, n_out_;
};

// ---------------------------------------------------------------------------
// f(x) = x for x > 0, a x otherwise, one slope per channel (last axis).
// The derivative at exactly 0 is taken from the positive branch.
class PReLU final : public Layer {
public:
    PReLU(const Shape& in, double init) : Layer(LayerKind::PReLU, in, in), channels_(in.back()), init_(init) {}

    std::size_t param_count() const override { return channels_; }
    void init_params(std::span<double> p, Rng&) const override { std::fill(p.begin(), p.end(), init_); }

    void forward(const Tensor& x, std::span<const double> p, Tensor& y) const override {
        check_input(*this, x);
        y = x;
        const std::size_t c = channels_;
        for (std::size_t i = 0; i < y.data.size(); ++i) {
            if (y.data[i] < 0.0) y.data[i] *= p[i % c];
        }
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double> p, std::span<double> g,
                  Tensor* dx) const override {
        const std::size_t c = channels_;
        if (dx) *dx = dy;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            if (x.data[i] < 0.0) {
                g[i % c] += dy.data[i] * x.data[i];
                if (dx) dx->data[i] *= p[i % c];
            }
        }
    }

    void tangent(const Tensor& x, const Tensor& dx, std::span<const double> p, Tensor& dy) const override {
        check_input(*this, dx);
        dy = dx;
        const std::size_t per = x.sample_size(), c = channels_;
        for (std::size_t t = 0; t < dx.batch(); ++t) {
            double* row = dy.data.data() + t * per;
            for (std::size_t i = 0; i < per; ++i) {
                if (x.data[i] < 0.0) row[i] *= p[i % c];
            }
        }
    }

private:
    std::size_t channels_;
    double init_;
};

// ---------------------------------------------------------------------------
// Factor-2 average pooling (pairs in 1D, 2x2 blocks in 2D).
class AvgPool final : public Layer {
public:
    explicit AvgPool(const Shape& in) : Layer(LayerKind::AvgPool, in, pooled(in)) {}

    static Shape pooled(const Shape& in) {
        if (in.size() < 2 || in.size() > 3) throw InvalidArgument("AvgPool expects 1 or 2 spatial axes");
        Shape out = in;
        for (std::size_t a = 0; a + 1 < in.size(); ++a) {
            if (in[a] % 2 != 0) {
                throw InvalidArgument("AvgPool: spatial extent " + std::to_string(in[a]) + " is odd");
            }
            out[a] = in[a] / 2;
        }
        return out;
    }

    void forward(const Tensor& x, std::span<const double>, Tensor& y) const override {
        check_input(*this, x);
        y = make_output(x.batch());
        visit(x.batch(), [&](std::size_t src, std::size_t dst, double w) { y.data[dst] += w * x.data[src]; });
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double>, std::span<double>,
                  Tensor* dx) const override {
        if (!dx) return;
        *dx = Tensor(x.batch(), input_shape());
        visit(x.batch(), [&](std::size_t src, std::size_t dst, double w) { dx->data[src] += w * dy.data[dst]; });
    }

private:
    template <typename F>
    void visit(std::size_t batch, F f) const {
        const Shape& in = input_shape();
        const std::size_t c = in.back();
        const std::size_t in_size = shape_size(in), out_size = shape_size(output_shape());
        if (in.size() == 2) {
            const std::size_t n = in[0] / 2;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < 2; ++k)
                        for (std::size_t ch = 0; ch < c; ++ch)
                            f(b * in_size + (2 * i + k) * c + ch, b * out_size + i * c + ch, 0.5);
            return;
        }
        const std::size_t h = in[0] / 2, w = in[1] / 2;
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    for (std::size_t di = 0; di < 2; ++di)
                        for (std::size_t dj = 0; dj < 2; ++dj)
                            for (std::size_t ch = 0; ch < c; ++ch)
                                f(b * in_size + ((2 * i + di) * in[1] + 2 * j + dj) * c + ch,
                                  b * out_size + (i * w + j) * c + ch, 0.25);
    }
};

// Nearest-neighbour repetition by 2 along every spatial axis.
class UpSample final : public Layer {
public:
    explicit UpSample(const Shape& in) : Layer(LayerKind::UpSample, in, doubled(in)) {}

    static Shape doubled(const Shape& in) {
        if (in.size() < 2 || in.size() > 3) throw InvalidArgument("UpSample expects 1 or 2 spatial axes");
        Shape out = in;
        for (std::size_t a = 0; a + 1 < in.size(); ++a) out[a] = 2 * in[a];
        return out;
    }

    void forward(const Tensor& x, std::span<const double>, Tensor& y) const override {
        check_input(*this, x);
        y = make_output(x.batch());
        visit(x.batch(), [&](std::size_t src, std::size_t dst) { y.data[dst] = x.data[src]; });
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double>, std::span<double>,
                  Tensor* dx) const override {
        if (!dx) return;
        *dx = Tensor(x.batch(), input_shape());
        visit(x.batch(), [&](std::size_t src, std::size_t dst) { dx->data[src] += dy.data[dst]; });
    }

private:
    template <typename F>
    void visit(std::size_t batch, F f) const {
        const Shape& out = output_shape();
        const std::size_t c = out.back();
        const std::size_t in_size = shape_size(input_shape()), out_size = shape_size(out);
        if (out.size() == 2) {
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < out[0]; ++i)
                    for (std::size_t ch = 0; ch < c; ++ch) f(b * in_size + (i / 2) * c + ch, b * out_size + i * c + ch);
            return;
        }
        const std::size_t w_in = input_shape()[1];
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < out[0]; ++i)
                for (std::size_t j = 0; j < out[1]; ++j)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        f(b * in_size + ((i / 2) * w_in + j / 2) * c + ch, b * out_size + (i * out[1] + j) * c + ch);
    }
};

// Identity on the data; Flatten/Reshape only relabel the shape, Linear is the
// identity activation.
class Relabel final : public Layer {
public:
    Relabel(LayerKind kind, const Shape& in, Shape out) : Layer(kind, in, std::move(out)) {
        if (shape_size(input_shape()) != shape_size(output_shape())) {
            throw InvalidArgument(to_string(kind) + ": cannot map " + shape_string(input_shape()) + " to " +
                                  shape_string(output_shape()));
        }
    }

    void forward(const Tensor& x, std::span<const double>, Tensor& y) const override {
        check_input(*this, x);
        y = Tensor(x.batch(), output_shape());
        y.data = x.data;
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double>, std::span<double>,
                  Tensor* dx) const override {
        if (!dx) return;
        *dx = Tensor(x.batch(), input_shape());
        dx->data = dy.data;
    }
};

// Fixed (non-trainable) Gaussian smoothing over the spatial axes.
class Gaussian final : public Layer {
public:
    Gaussian(const Shape& in, double sigma) : Layer(LayerKind::GaussianFilter, in, in), sigma_(sigma) {
        if (in.size() < 2 || in.size() > 3) throw InvalidArgument("GaussianFilter expects 1 or 2 spatial axes");
        gaussian_kernel(sigma);
        spatial_.assign(in.begin(), in.end() - 1);
    }

    void forward(const Tensor& x, std::span<const double>, Tensor& y) const override {
        check_input(*this, x);
        y = make_output(x.batch());
        for (std::size_t b = 0; b < x.batch(); ++b) {
            const auto f = gaussian_filter(x.sample(b), spatial_, input_shape().back(), sigma_);
            std::copy(f.begin(), f.end(), y.sample(b).begin());
        }
    }

    void backward(const Tensor& x, const Tensor& dy, std::span<const double>, std::span<double>,
                  Tensor* dx) const override {
        if (!dx) return;
        *dx = Tensor(x.batch(), input_shape());
        for (std::size_t b = 0; b < x.batch(); ++b) {
            const auto f = gaussian_filter_adjoint(dy.sample(b), spatial_, input_shape().back(), sigma_);
            std::copy(f.begin(), f.end(), dx->sample(b).begin());
        }
    }

private:
    double sigma_;
    std::vector<std::size_t> spatial_;
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& in) {
    if (in.empty() || shape_size(in) == 0) throw InvalidArgument("layer input shape is empty");
    switch (spec.kind) {
        case LayerKind::Conv1D:
            if (in.size() != 2) throw InvalidArgument("Conv1D expects [length, channels], got " + shape_string(in));
            return std::make_unique<Conv>(spec.kind, in, spec.filters, spec.kernel_size);
        case LayerKind::Conv2D:
            if (in.size() != 3) throw InvalidArgument("Conv2D expects [h, w, channels], got " + shape_string(in));
            return std::make_unique<Conv>(spec.kind, in, spec.filters, spec.kernel_size);
        case LayerKind::AvgPool: return std::make_unique<AvgPool>(in);
        case LayerKind::UpSample: return std::make_unique<UpSample>(in);
        case LayerKind::Dense: return std::make_unique<Dense>(in, spec.units);
        case LayerKind::PReLU: return std::make_unique<PReLU>(in, spec.slope);
        case LayerKind::Linear: return std::make_unique<Relabel>(LayerKind::Linear, in, in);
        case LayerKind::Flatten: return std::make_unique<Relabel>(LayerKind::Flatten, in, Shape{shape_size(in)});
        case LayerKind::Reshape: return std::make_unique<Relabel>(LayerKind::Reshape, in, spec.target);
        case LayerKind::GaussianFilter: return std::make_unique<Gaussian>(in, spec.sigma);
    }
    throw InvalidArgument("unknown layer kind");
}

}  // namespace caerom
