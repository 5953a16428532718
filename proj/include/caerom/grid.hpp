#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace caerom {

/// Uniform 1D grid including both endpoints.
class Mesh1D {
public:
    Mesh1D() = default;

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }

    /// x_min + i*dx, except the last point which is x_max exactly.
    double point(std::size_t i) const;
    std::vector<double> points() const;

    bool operator==(const Mesh1D&) const = default;

private:
    friend Mesh1D make_mesh(double x_min, double x_max, std::size_t n);
    Mesh1D(double x_min, double x_max, std::size_t n);

    double x_min_ = 0.0;
    double x_max_ = 1.0;
    std::size_t n_ = 3;
    double dx_ = 0.5;
};

/// Throws InvalidArgument unless x_max > x_min and n >= 3.
Mesh1D make_mesh(double x_min, double x_max, std::size_t n);

/// Tensor-product grid. Fields on it are stored row-major with x as the row index.
struct Mesh2D {
    Mesh1D x;
    Mesh1D y;

    std::size_t size() const { return x.size() * y.size(); }
    bool operator==(const Mesh2D&) const = default;
};

/// Bookkeeping for a mesh padded by `pad` points on every side of every axis.
class ExtendedMesh {
public:
    ExtendedMesh(Mesh1D base, std::size_t pad);
    ExtendedMesh(Mesh2D base, std::size_t pad);

    std::size_t dims() const { return axes_.size(); }
    std::size_t pad() const { return pad_; }
    const Mesh1D& base_axis(std::size_t axis) const { return axes_.at(axis); }
    /// The padded axis: same spacing, pad points beyond each end.
    Mesh1D extended_axis(std::size_t axis) const;

    std::size_t base_size() const;
    std::size_t extended_size() const;
    /// Per-axis point counts of the padded grid.
    std::vector<std::size_t> extended_shape() const;

private:
    std::vector<Mesh1D> axes_;
    std::size_t pad_;
};

/// Pads by round(fraction * n) points per side; 0 <= fraction <= 0.5.
/// For 2D meshes n is the smaller axis count.
ExtendedMesh extend_mesh(const Mesh1D& mesh, double fraction);
ExtendedMesh extend_mesh(const Mesh2D& mesh, double fraction);

/// Tangent-line extension onto the padded grid. Boundary slopes use the
/// one-sided stencil (-3f0 + 4f1 - f2) / (2dx). In 2D the x axis is padded
/// first, then y, so corners come from the second pass.
std::vector<double> extend_function(std::span<const double> values, const ExtendedMesh& ext);

/// Inverse of extend_function: drops the pad.
std::vector<double> truncate_function(std::span<const double> values_ext, const ExtendedMesh& ext);

enum class StateLayout { Scalar, ScalarWithVelocity };

/// A discretized state. ScalarWithVelocity stores u then v contiguously.
class StateVector {
public:
    StateVector(StateLayout layout, std::vector<double> values, std::size_t mesh_points);
    StateVector(std::vector<double> u, std::vector<double> v);

    StateLayout layout() const { return layout_; }
    std::size_t mesh_points() const { return mesh_points_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> u() const;
    std::span<const double> v() const;

private:
    StateLayout layout_;
    std::vector<double> values_;
    std::size_t mesh_points_;
};

/// Column-major matrix of time samples; column j is the state at times()[j].
class SnapshotMatrix {
public:
    SnapshotMatrix(std::size_t rows, std::vector<double> data, std::vector<double> times);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return times_.size(); }
    std::span<const double> times() const { return times_; }
    std::span<const double> data() const { return data_; }
    std::span<const double> column(std::size_t j) const;
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

private:
    std::size_t rows_;
    std::vector<double> data_;
    std::vector<double> times_;
};

SnapshotMatrix assemble_snapshots(std::span<const StateVector> states, std::span<const double> times);

/// CSV: "rows,cols", then the times, then one line per row. 17 significant digits.
void write_snapshot_csv(std::ostream& out, const SnapshotMatrix& m);
void write_snapshot_csv(const std::string& path, const SnapshotMatrix& m);
SnapshotMatrix read_snapshot_csv(std::istream& in);
SnapshotMatrix read_snapshot_csv(const std::string& path);

/// Shortest-roundtrip-safe text form used by every CSV writer.
std::string format_real(double v);

}  // namespace caerom
