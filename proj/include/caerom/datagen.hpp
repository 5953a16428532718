#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "caerom/grid.hpp"
#include "caerom/random.hpp"

namespace caerom {

struct TrigParams {
    std::size_t n_max = 10;
    double a_max = 5.0;
    double omega_max = 10.0;

    void validate() const;
};

enum class DataMethod { BBP, Trig };

/// Random smooth functions used as autoencoder training data. Row i holds sample i;
/// with two channels the row is [u; v] from two independent draws.
struct TrainingSet {
    std::size_t n_samples = 0;
    std::size_t input_length = 0;  ///< per row, channels included
    std::size_t channels = 1;
    DataMethod method = DataMethod::Trig;
    bool tensor2d = false;
    std::uint64_t seed = 0;
    std::vector<double> samples;  ///< row-major n_samples x input_length

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(samples).subspan(i * input_length, input_length);
    }
};

/// Bridge path of length n_steps: B[0] ~ N(0,1), then for n = 1..n_steps-1 with
/// t = n/n_steps, B[n] = B[n-1] (1 - dt/(1 - t)) + sqrt(dt) N(0,1).
std::vector<double> brownian_bridge(std::size_t n_steps, RandomSource& rng);

/// Natural cubic spline through knots placed uniformly on [x0, x1], evaluated at `at`.
std::vector<double> natural_cubic_spline(double x0, double x1, std::span<const double> knot_values,
                                         std::span<const double> at);

/// Bridge with a random number of knots in [4, n], splined over the mesh span.
std::vector<double> bbp_sample(const Mesh1D& mesh, RandomSource& rng);

/// Sum of N ~ U{1..n_max} sinusoids A sin(w x + phi), A ~ U(0, a_max], w ~ U(0, omega_max],
/// phi ~ U[0, 2 pi).
std::vector<double> trig_sample(const Mesh1D& mesh, const TrigParams& params, RandomSource& rng);

/// Outer product g(x) h(y) of two independent 1D samples, row-major with x outermost.
std::vector<double> tensor2d_sample(const Mesh2D& mesh, DataMethod method, const TrigParams& params,
                                    RandomSource& rng);

/// Sample i is drawn from Rng::stream(seed, i), so the result does not depend on `threads`.
TrainingSet build_training_set(std::size_t n, const Mesh1D& mesh, DataMethod method, std::size_t channels,
                               const TrigParams& params, std::uint64_t seed, unsigned threads = 1);
TrainingSet build_training_set(std::size_t n, const Mesh2D& mesh, DataMethod method, std::size_t channels,
                               const TrigParams& params, std::uint64_t seed, unsigned threads = 1);

/// Binary layout: "ROMDATA1", then little-endian u64 N, input_length, channels,
/// method tag (0 BBP, 1 Trig, 2 tensored BBP, 3 tensored Trig), seed, followed by
/// N * input_length f64 values row-major.
void write_training_set(const std::string& path, const TrainingSet& set);
TrainingSet read_training_set(const std::string& path);

std::string to_string(DataMethod m);
DataMethod parse_data_method(const std::string& name);

}  // namespace caerom
