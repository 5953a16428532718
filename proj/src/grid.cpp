#include "caerom/grid.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "caerom/error.hpp"

namespace caerom {

Mesh1D::Mesh1D(double x_min, double x_max, std::size_t n)
    : x_min_(x_min), x_max_(x_max), n_(n), dx_((x_max - x_min) / static_cast<double>(n - 1)) {}

double Mesh1D::point(std::size_t i) const {
    if (i + 1 == n_) return x_max_;
    return x_min_ + static_cast<double>(i) * dx_;
}

std::vector<double> Mesh1D::points() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = point(i);
    return xs;
}

Mesh1D make_mesh(double x_min, double x_max, std::size_t n) {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw InvalidArgument("make_mesh: need x_max > x_min");
    }
    if (n < 3) throw InvalidArgument("make_mesh: need at least 3 points, got " + std::to_string(n));
    return Mesh1D(x_min, x_max, n);
}

ExtendedMesh::ExtendedMesh(Mesh1D base, std::size_t pad) : axes_{base}, pad_(pad) {}

ExtendedMesh::ExtendedMesh(Mesh2D base, std::size_t pad) : axes_{base.x, base.y}, pad_(pad) {}

Mesh1D ExtendedMesh::extended_axis(std::size_t axis) const {
    const Mesh1D& b = axes_.at(axis);
    if (pad_ == 0) return b;
    const double shift = static_cast<double>(pad_) * b.dx();
    return make_mesh(b.x_min() - shift, b.x_max() + shift, b.size() + 2 * pad_);
}

std::size_t ExtendedMesh::base_size() const {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.size();
    return n;
}

std::size_t ExtendedMesh::extended_size() const {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.size() + 2 * pad_;
    return n;
}

std::vector<std::size_t> ExtendedMesh::extended_shape() const {
    std::vector<std::size_t> shape;
    for (const auto& a : axes_) shape.push_back(a.size() + 2 * pad_);
    return shape;
}

namespace {

std::size_t pad_count(double fraction, std::size_t n) {
    if (!(fraction >= 0.0 && fraction <= 0.5)) {
        throw InvalidArgument("extend_mesh: fraction must lie in [0, 0.5]");
    }
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

// Pads one strided line of length n (stride s) into `out` (stride so) with pad
// tangent-line points per side.
void extend_line(const double* in, std::size_t n, std::size_t s, double* out, std::size_t so,
                 std::size_t pad) {
    const double f0 = in[0], f1 = in[s], f2 = in[2 * s];
    const double g0 = in[(n - 1) * s], g1 = in[(n - 2) * s], g2 = in[(n - 3) * s];
    // Slopes per grid step (the dx cancels against the offset k*dx).
    const double left = 0.5 * (-3.0 * f0 + 4.0 * f1 - f2);
    const double right = 0.5 * (3.0 * g0 - 4.0 * g1 + g2);
    for (std::size_t k = 1; k <= pad; ++k) {
        out[(pad - k) * so] = f0 - static_cast<double>(k) * left;
        out[(pad + n - 1 + k) * so] = g0 + static_cast<double>(k) * right;
    }
    for (std::size_t i = 0; i < n; ++i) out[(pad + i) * so] = in[i * s];
}

}  // namespace

ExtendedMesh extend_mesh(const Mesh1D& mesh, double fraction) {
    return ExtendedMesh(mesh, pad_count(fraction, mesh.size()));
}

ExtendedMesh extend_mesh(const Mesh2D& mesh, double fraction) {
    return ExtendedMesh(mesh, pad_count(fraction, std::min(mesh.x.size(), mesh.y.size())));
}

std::vector<double> extend_function(std::span<const double> values, const ExtendedMesh& ext) {
    if (values.size() != ext.base_size()) {
        throw InvalidArgument("extend_function: expected " + std::to_string(ext.base_size()) +
                              " values, got " + std::to_string(values.size()));
    }
    const std::size_t p = ext.pad();
    if (ext.dims() == 1) {
        std::vector<double> out(ext.extended_size());
        extend_line(values.data(), values.size(), 1, out.data(), 1, p);
        return out;
    }
    const std::size_t nx = ext.base_axis(0).size(), ny = ext.base_axis(1).size();
    const std::size_t ex = nx + 2 * p, ey = ny + 2 * p;
    // x pass: (nx x ny) -> (ex x ny)
    std::vector<double> mid(ex * ny);
    for (std::size_t j = 0; j < ny; ++j) extend_line(values.data() + j, nx, ny, mid.data() + j, ny, p);
    // y pass: (ex x ny) -> (ex x ey)
    std::vector<double> out(ex * ey);
    for (std::size_t i = 0; i < ex; ++i) extend_line(mid.data() + i * ny, ny, 1, out.data() + i * ey, 1, p);
    return out;
}

std::vector<double> truncate_function(std::span<const double> values_ext, const ExtendedMesh& ext) {
    if (values_ext.size() != ext.extended_size()) {
        throw InvalidArgument("truncate_function: expected " + std::to_string(ext.extended_size()) +
                              " values, got " + std::to_string(values_ext.size()));
    }
    const std::size_t p = ext.pad();
    if (ext.dims() == 1) {
        const std::size_t n = ext.base_size();
        return {values_ext.begin() + static_cast<std::ptrdiff_t>(p),
                values_ext.begin() + static_cast<std::ptrdiff_t>(p + n)};
    }
    const std::size_t nx = ext.base_axis(0).size(), ny = ext.base_axis(1).size();
    const std::size_t ey = ny + 2 * p;
    std::vector<double> out(nx * ny);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) out[i * ny + j] = values_ext[(i + p) * ey + (j + p)];
    return out;
}

StateVector::StateVector(StateLayout layout, std::vector<double> values, std::size_t mesh_points)
    : layout_(layout), values_(std::move(values)), mesh_points_(mesh_points) {
    const std::size_t expected = layout == StateLayout::Scalar ? mesh_points : 2 * mesh_points;
    if (values_.size() != expected) {
        throw InvalidArgument("StateVector: length " + std::to_string(values_.size()) +
                              " does not match layout (expected " + std::to_string(expected) + ")");
    }
}

StateVector::StateVector(std::vector<double> u, std::vector<double> v)
    : layout_(StateLayout::ScalarWithVelocity), mesh_points_(u.size()) {
    if (u.size() != v.size()) throw InvalidArgument("StateVector: u and v lengths differ");
    values_ = std::move(u);
    values_.insert(values_.end(), v.begin(), v.end());
}

std::span<const double> StateVector::u() const {
    return std::span<const double>(values_).first(mesh_points_);
}

std::span<const double> StateVector::v() const {
    if (layout_ != StateLayout::ScalarWithVelocity) throw InvalidArgument("StateVector: no velocity channel");
    return std::span<const double>(values_).subspan(mesh_points_);
}

SnapshotMatrix::SnapshotMatrix(std::size_t rows, std::vector<double> data, std::vector<double> times)
    : rows_(rows), data_(std::move(data)), times_(std::move(times)) {
    if (rows_ == 0 || times_.empty()) throw InvalidArgument("SnapshotMatrix: empty");
    if (data_.size() != rows_ * times_.size()) throw InvalidArgument("SnapshotMatrix: data size mismatch");
    for (std::size_t j = 1; j < times_.size(); ++j) {
        if (!(times_[j] > times_[j - 1])) throw InvalidArgument("SnapshotMatrix: times must increase strictly");
    }
}

std::span<const double> SnapshotMatrix::column(std::size_t j) const {
    return std::span<const double>(data_).subspan(j * rows_, rows_);
}

SnapshotMatrix assemble_snapshots(std::span<const StateVector> states, std::span<const double> times) {
    if (states.empty()) throw InvalidArgument("assemble_snapshots: no states");
    if (states.size() != times.size()) throw InvalidArgument("assemble_snapshots: one time per state required");
    const StateVector& first = states.front();
    std::vector<double> data;
    data.reserve(first.values().size() * states.size());
    for (const auto& s : states) {
        if (s.layout() != first.layout() || s.mesh_points() != first.mesh_points()) {
            throw InvalidArgument("assemble_snapshots: heterogeneous states");
        }
        data.insert(data.end(), s.values().begin(), s.values().end());
    }
    return SnapshotMatrix(first.values().size(), std::move(data), {times.begin(), times.end()});
}

std::string format_real(double v) {
    std::array<char, 40> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 16);
    return std::string(buf.data(), res.ptr);
}

void write_snapshot_csv(std::ostream& out, const SnapshotMatrix& m) {
    out << m.rows() << ',' << m.cols() << '\n';
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m.times()[j]);
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
        out << '\n';
    }
}

void write_snapshot_csv(const std::string& path, const SnapshotMatrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_snapshot_csv(out, m);
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<double> parse_row(const std::string& line, std::uint64_t offset) {
    std::vector<double> vals;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        double v = 0.0;
        auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) throw FormatError("bad number in CSV", offset + (p - line.data()));
        vals.push_back(v);
        p = res.ptr;
        if (p < end && *p == ',') ++p;
        else if (p < end && *p != '\r') throw FormatError("expected ','", offset + (p - line.data()));
        else break;
    }
    return vals;
}

}  // namespace

SnapshotMatrix read_snapshot_csv(std::istream& in) {
    std::string line;
    std::uint64_t offset = 0;
    if (!std::getline(in, line)) throw FormatError("missing header", offset);
    std::size_t rows = 0, cols = 0;
    {
        const auto dims = parse_row(line, offset);
        if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1) throw FormatError("header must be rows,cols", offset);
        rows = static_cast<std::size_t>(dims[0]);
        cols = static_cast<std::size_t>(dims[1]);
    }
    offset += line.size() + 1;
    if (!std::getline(in, line)) throw FormatError("missing times line", offset);
    auto times = parse_row(line, offset);
    if (times.size() != cols) throw FormatError("times line has wrong length", offset);
    offset += line.size() + 1;
    std::vector<double> data(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw FormatError("truncated CSV", offset);
        const auto vals = parse_row(line, offset);
        if (vals.size() != cols) throw FormatError("row " + std::to_string(i) + " has wrong length", offset);
        for (std::size_t j = 0; j < cols; ++j) data[j * rows + i] = vals[j];
        offset += line.size() + 1;
    }
    return SnapshotMatrix(rows, std::move(data), std::move(times));
}

SnapshotMatrix read_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_snapshot_csv(in);
}

}  // namespace caerom
