#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "caerom/datagen.hpp"
#include "caerom/fom.hpp"
#include "caerom/neural.hpp"

namespace caerom {

/// Every setting a subcommand can read. Empty strings and unset optionals fall back
/// to per-model defaults (see build_problem).
struct RunConfig {
    // Full-order problem.
    std::string model = "heat";
    std::size_t n = 64;
    std::size_t ny = 0;  ///< 2D only, 0 means n
    std::optional<double> x_min, x_max;
    std::optional<double> dt;
    double courant = 0.5;  ///< wave models without dt: dt = courant dx / c
    std::optional<std::size_t> steps;
    std::size_t samples = 0;  ///< snapshot columns wanted, 0 means every step
    std::size_t every = 1;
    double c = 1.0;
    double k = 1.0;
    std::string bc;
    std::string u0, v0;

    // Autoencoder.
    double extension = 0.05;
    std::size_t latent_dim = 8;
    std::size_t n_conv = 3;
    std::size_t n_dense = 1;
    std::size_t kernel = 5;
    std::size_t filters = 8;
    std::size_t units = 32;
    double prelu = 1.0;
    double output_sigma = 0.0;

    // Training data.
    std::string method = "trig";
    std::size_t count = 10000;
    std::size_t mesh = 64;  ///< points per axis of each sample, pad included
    std::size_t dims = 1;
    std::size_t channels = 1;
    TrigParams trig;
    unsigned threads = 1;

    TrainConfig train;
    std::vector<std::size_t> sweep;
    std::size_t sweep_seeds = 3;
    double threshold = 1e-3;

    std::uint64_t seed = 0;
    std::string jacobian = "forward";
    bool identity_decoder = false;
    double blur = 0.0;
    std::string field = "all";
    bool check = false;  ///< validate and exit without opening inputs or running

    std::string out, data, weights, snapshots, history;

    /// Cross-field checks that need no computation. Throws InvalidArgument; IoError for
    /// missing input files.
    void validate_problem() const;
};

/// Named initial fields. 1D: zero, parabola (5x(1-x)), sine (sin pi x), sine3
/// (3 sin pi x), cos16 (cos(pi x/16)), expsin2 (e^-x sin^2 pi x). 2D: zero, gauss
/// (e^{-20(x^2+y^2)}), sine2d (sin pi x sin pi y). Any mesh: file:<path> with
/// whitespace- or comma-separated values.
std::vector<double> named_field(const std::string& selector, const Mesh1D& mesh);
std::vector<double> named_field(const std::string& selector, const Mesh2D& mesh);

/// Builds and validates the problem (CFL included) before anything runs.
Problem build_problem(const RunConfig& config);

/// Base-mesh size m with m + 2 round(fraction m) == total, if one exists.
std::optional<std::size_t> base_points_for(std::size_t total, double fraction);

/// `key = value` lines; '#' starts a comment. Throws IoError / FormatError.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

/// Exit codes.
inline constexpr int kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4;

/// Entry point of the command-line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caerom
