#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "caerom/datagen.hpp"
#include "caerom/error.hpp"
#include "caerom/random.hpp"

using namespace caerom;

namespace {

// Replays a fixed list of draws.
class ScriptedSource final : public RandomSource {
public:
    std::deque<std::size_t> indices;
    std::deque<double> reals;
    double normal_value = 0.0;

    std::size_t uniform_index(std::size_t, std::size_t) override { return pop(indices); }
    double uniform(double, double) override { return pop(reals); }
    double uniform_upper(double, double) override { return pop(reals); }
    double normal() override { return normal_value; }

private:
    template <typename T>
    static T pop(std::deque<T>& q) {
        if (q.empty()) throw std::logic_error("script exhausted");
        T v = q.front();
        q.pop_front();
        return v;
    }
};

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("caerom_" + name)).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Rng

TEST(Rng, SeedReproducible) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_NE(Rng(42).next_u64(), Rng(43).next_u64());
    EXPECT_NE(Rng::stream(1, 0).next_u64(), Rng::stream(1, 1).next_u64());
    EXPECT_EQ(Rng::stream(1, 7).next_u64(), Rng::stream(1, 7).next_u64());
}

TEST(Rng, Ranges) {
    Rng r(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform(2.0, 3.0);
        EXPECT_GE(u, 2.0);
        EXPECT_LT(u, 3.0);
        const double w = r.uniform_upper(0.0, 1.0);
        EXPECT_GT(w, 0.0);
        EXPECT_LE(w, 1.0);
        const auto k = r.uniform_index(4, 9);
        EXPECT_GE(k, 4u);
        EXPECT_LE(k, 9u);
    }
}

TEST(Rng, NormalMoments) {
    Rng r(11);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(n));
    EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, ShuffleIsPermutation) {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    Rng r(9);
    r.shuffle(v.begin(), v.end());
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

// ---------------------------------------------------------------------------
// Brownian bridge

TEST(Bridge, MinimumLength) {
    Rng r(1);
    const auto b = brownian_bridge(4, r);
    ASSERT_EQ(b.size(), 4u);
    for (double v : b) EXPECT_TRUE(std::isfinite(v));
    EXPECT_THROW(brownian_bridge(3, r), InvalidArgument);
}

TEST(Bridge, ZeroNoiseStaysZero) {
    ScriptedSource s;
    for (double v : brownian_bridge(10, s)) EXPECT_EQ(v, 0.0);
}

TEST(Bridge, VarianceMatchesRecurrence) {
    // The recurrence is linear in independent normals, so Var B[n] obeys
    // v[n] = v[n-1] (1 - dt/(1-t))^2 + dt, v[0] = 1.
    const std::size_t steps = 16;
    const double dt = 1.0 / steps;
    std::vector<double> exact(steps);
    exact[0] = 1.0;
    for (std::size_t n = 1; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const double f = 1.0 - dt / (1.0 - t);
        exact[n] = exact[n - 1] * f * f + dt;
    }
    const int draws = 100000;
    std::vector<double> s(steps, 0.0), s2(steps, 0.0);
    Rng r(2024);
    for (int k = 0; k < draws; ++k) {
        const auto b = brownian_bridge(steps, r);
        for (std::size_t n = 0; n < steps; ++n) {
            s[n] += b[n];
            s2[n] += b[n] * b[n];
        }
    }
    for (std::size_t n = 0; n < steps; ++n) {
        const double mean = s[n] / draws, var = s2[n] / draws - mean * mean;
        // Gaussian sample variance has standard error v sqrt(2/N).
        EXPECT_LT(std::abs(var - exact[n]), 3.0 * exact[n] * std::sqrt(2.0 / draws)) << "n = " << n;
    }
}

// ---------------------------------------------------------------------------
// Spline and samplers

TEST(Spline, InterpolatesKnots) {
    const std::vector<double> y{0.3, -1.0, 2.0, 0.5, 0.0, 1.5};
    std::vector<double> knots;
    for (std::size_t i = 0; i < y.size(); ++i) knots.push_back(2.0 + 3.0 * static_cast<double>(i) / 5.0);
    const auto v = natural_cubic_spline(2.0, 5.0, y, knots);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(v[i], y[i], 1e-12);
}

TEST(Spline, ReproducesLines) {
    const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
    const std::vector<double> at{0.0, 0.1, 0.37, 0.5, 0.99, 1.0};
    const auto v = natural_cubic_spline(0.0, 1.0, y, at);
    for (std::size_t i = 0; i < at.size(); ++i) EXPECT_NEAR(v[i], 1.0 + 6.0 * at[i], 1e-12);
}

TEST(Bbp, KnotsAtEveryPointGivesBridge) {
    const auto mesh = make_mesh(0.0, 1.0, 12);
    Rng a(77), b(77);
    // Force n_x = n by drawing with a scripted index, then replay the same normals.
    struct Forced final : RandomSource {
        Rng& inner;
        explicit Forced(Rng& r) : inner(r) {}
        std::size_t uniform_index(std::size_t, std::size_t hi) override { return hi; }
        double uniform(double lo, double hi) override { return inner.uniform(lo, hi); }
        double uniform_upper(double lo, double hi) override { return inner.uniform_upper(lo, hi); }
        double normal() override { return inner.normal(); }
    } forced(a);
    const auto sample = bbp_sample(mesh, forced);
    const auto bridge = brownian_bridge(12, b);
    ASSERT_EQ(sample.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(sample[i], bridge[i], 1e-12);
}

TEST(Bbp, LengthAndFinite) {
    Rng r(5);
    const auto mesh = make_mesh(0.0, 1.0, 500);
    for (int k = 0; k < 20; ++k) {
        const auto s = bbp_sample(mesh, r);
        ASSERT_EQ(s.size(), 500u);
        for (double v : s) ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(Trig, SingleTermIsSine) {
    ScriptedSource s;
    s.indices = {1};
    s.reals = {std::numbers::pi, 1.0, 0.0};  // omega, A, phi
    const auto mesh = make_mesh(0.0, 1.0, 9);
    const auto f = trig_sample(mesh, TrigParams{}, s);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(f[i], std::sin(std::numbers::pi * mesh.point(i)));
}

TEST(Trig, BoundedAndDefaults) {
    const TrigParams d;
    EXPECT_EQ(d.n_max, 10u);
    EXPECT_EQ(d.a_max, 5.0);
    EXPECT_EQ(d.omega_max, 10.0);
    Rng r(8);
    const auto mesh = make_mesh(0.0, 1.0, 64);
    for (int k = 0; k < 1000; ++k)
        for (double v : trig_sample(mesh, d, r)) ASSERT_LE(std::abs(v), 50.0);
    TrigParams bad;
    bad.a_max = 0.0;
    EXPECT_THROW(trig_sample(mesh, bad, r), InvalidArgument);
}

TEST(Tensor2D, RankOne) {
    const Mesh2D mesh{make_mesh(0.0, 1.0, 12), make_mesh(0.0, 1.0, 9)};
    Rng r(3);
    for (DataMethod m : {DataMethod::Trig, DataMethod::BBP}) {
        const auto f = tensor2d_sample(mesh, m, TrigParams{}, r);
        ASSERT_EQ(f.size(), 108u);
        const Eigen::Map<const Eigen::Matrix<double, 12, 9, Eigen::RowMajor>> a(f.data());
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        const auto sv = svd.singularValues();
        EXPECT_LE(sv[1], 1e-10 * sv[0]);
    }
}

TEST(Tensor2D, ForcedConstantFactor) {
    // g = 1 when the x sample is A sin(w x + phi) with w -> 0+, A = 1, phi = pi/2.
    ScriptedSource s;
    s.indices = {1, 1};
    s.reals = {1e-300, 1.0, std::numbers::pi / 2, 2.0, 1.5, 0.25};
    const Mesh2D mesh{make_mesh(0.0, 1.0, 4), make_mesh(0.0, 1.0, 5)};
    const auto f = tensor2d_sample(mesh, DataMethod::Trig, TrigParams{}, s);
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(f[i * 5 + j], f[j]);
}

// ---------------------------------------------------------------------------
// Training sets

TEST(TrainingSet, ShapeAndDeterminism) {
    const auto mesh = make_mesh(0.0, 1.0, 20);
    const auto a = build_training_set(30, mesh, DataMethod::Trig, 2, TrigParams{}, 17);
    EXPECT_EQ(a.n_samples, 30u);
    EXPECT_EQ(a.input_length, 40u);
    EXPECT_EQ(a.samples.size(), 1200u);
    const auto b = build_training_set(30, mesh, DataMethod::Trig, 2, TrigParams{}, 17, 4);
    EXPECT_EQ(a.samples, b.samples);
    const auto c = build_training_set(30, mesh, DataMethod::Trig, 2, TrigParams{}, 18);
    EXPECT_NE(a.samples, c.samples);
    // The two channels are independent draws.
    const auto row = a.row(0);
    EXPECT_FALSE(std::equal(row.begin(), row.begin() + 20, row.begin() + 20));
    EXPECT_THROW(build_training_set(0, mesh, DataMethod::Trig, 1, TrigParams{}, 1), InvalidArgument);
}

TEST(TrainingSet, FileRoundTrip) {
    const auto mesh = make_mesh(0.0, 1.0, 10);
    const auto a = build_training_set(7, mesh, DataMethod::BBP, 1, TrigParams{}, 3);
    const auto path = temp_path("set.bin");
    write_training_set(path, a);
    const auto b = read_training_set(path);
    EXPECT_EQ(b.samples, a.samples);
    EXPECT_EQ(b.method, DataMethod::BBP);
    EXPECT_EQ(b.seed, 3u);
    EXPECT_EQ(b.channels, 1u);

    // Truncation is reported as a format error.
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    EXPECT_THROW(read_training_set(path), FormatError);
    {
        std::ofstream bad(path, std::ios::binary);
        bad << "NOTADATA";
    }
    EXPECT_THROW(read_training_set(path), FormatError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_training_set(path), IoError);
}

TEST(TrainingSet, TensorSet) {
    const Mesh2D mesh{make_mesh(0.0, 1.0, 6), make_mesh(0.0, 1.0, 6)};
    const auto a = build_training_set(4, mesh, DataMethod::Trig, 1, TrigParams{}, 2);
    EXPECT_TRUE(a.tensor2d);
    EXPECT_EQ(a.input_length, 36u);
}

TEST(DataMethod, Names) {
    EXPECT_EQ(parse_data_method("bbp"), DataMethod::BBP);
    EXPECT_EQ(parse_data_method(to_string(DataMethod::Trig)), DataMethod::Trig);
    EXPECT_THROW(parse_data_method("fourier"), InvalidArgument);
}
