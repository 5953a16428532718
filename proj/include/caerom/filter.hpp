#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace caerom {

/// Sampled Gaussian with radius ceil(3 sigma), normalised to sum 1. sigma = 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing of a field laid out row-major as [spatial..., channels]
/// (1 or 2 spatial axes). Boundaries use half-sample reflection (edge value repeated),
/// which preserves constants and, for symmetric kernels, the sum of the field.
/// Throws InvalidArgument for negative sigma.
std::vector<double> gaussian_filter(std::span<const double> values, std::span<const std::size_t> spatial,
                                    std::size_t channels, double sigma);

/// Convenience overloads for a single-channel vector or nx-by-ny field.
std::vector<double> gaussian_filter(std::span<const double> values, double sigma);
std::vector<double> gaussian_filter(std::span<const double> values, std::size_t nx, std::size_t ny, double sigma);

/// Transpose of gaussian_filter (needed to backpropagate through a fixed filter layer).
std::vector<double> gaussian_filter_adjoint(std::span<const double> values, std::span<const std::size_t> spatial,
                                            std::size_t channels, double sigma);

}  // namespace caerom
