#include "caerom/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caerom/error.hpp"

namespace caerom {

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian filter: sigma must be >= 0");
    if (sigma == 0.0) return {1.0};
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        w[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    return w;
}

namespace {

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

// Filters along one axis. The field is viewed as [outer, n, inner]. The forward pass
// is x_i + sum_k w_k (x_j - x_i), which leaves constants bit-exact; the adjoint adds
// the matching (1 - sum w) diagonal.
void filter_axis(const std::vector<double>& w, const double* in, double* out, std::size_t outer, std::size_t n,
                 std::size_t inner, bool adjoint) {
    const auto radius = static_cast<std::ptrdiff_t>(w.size() / 2);
    const double diag = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        const double* src = in + o * n * inner;
        double* dst = out + o * n * inner;
        if (!adjoint) {
            std::copy(src, src + n * inner, dst);
        } else {
            for (std::size_t i = 0; i < n * inner; ++i) dst[i] = diag * src[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const double wk = w[static_cast<std::size_t>(k + radius)];
                const std::size_t j = reflect(static_cast<std::ptrdiff_t>(i) + k, n);
                if (!adjoint) {
                    for (std::size_t c = 0; c < inner; ++c)
                        dst[i * inner + c] += wk * (src[j * inner + c] - src[i * inner + c]);
                } else {
                    for (std::size_t c = 0; c < inner; ++c) dst[j * inner + c] += wk * src[i * inner + c];
                }
            }
        }
    }
}

std::vector<double> apply(std::span<const double> values, std::span<const std::size_t> spatial, std::size_t channels,
                          double sigma, bool adjoint) {
    if (spatial.empty() || spatial.size() > 2) throw InvalidArgument("gaussian filter: 1 or 2 spatial axes");
    std::size_t total = channels;
    for (auto s : spatial) total *= s;
    if (values.size() != total) throw InvalidArgument("gaussian filter: value count does not match the shape");
    const auto w = gaussian_kernel(sigma);
    std::vector<double> a(values.begin(), values.end());
    if (w.size() == 1) return a;
    std::vector<double> b(a.size());
    if (spatial.size() == 1) {
        filter_axis(w, a.data(), b.data(), 1, spatial[0], channels, adjoint);
        return b;
    }
    // x (rows) then y (columns); the adjoint runs the passes in reverse order.
    const std::size_t nx = spatial[0], ny = spatial[1];
    if (!adjoint) {
        filter_axis(w, a.data(), b.data(), 1, nx, ny * channels, false);
        filter_axis(w, b.data(), a.data(), nx, ny, channels, false);
    } else {
        filter_axis(w, a.data(), b.data(), nx, ny, channels, true);
        filter_axis(w, b.data(), a.data(), 1, nx, ny * channels, true);
    }
    return a;
}

}  // namespace

std::vector<double> gaussian_filter(std::span<const double> values, std::span<const std::size_t> spatial,
                                    std::size_t channels, double sigma) {
    return apply(values, spatial, channels, sigma, false);
}

std::vector<double> gaussian_filter_adjoint(std::span<const double> values, std::span<const std::size_t> spatial,
                                            std::size_t channels, double sigma) {
    return apply(values, spatial, channels, sigma, true);
}

std::vector<double> gaussian_filter(std::span<const double> values, double sigma) {
    const std::size_t n[] = {values.size()};
    return apply(values, n, 1, sigma, false);
}

std::vector<double> gaussian_filter(std::span<const double> values, std::size_t nx, std::size_t ny, double sigma) {
    const std::size_t n[] = {nx, ny};
    return apply(values, n, 1, sigma, false);
}

}  // namespace caerom
