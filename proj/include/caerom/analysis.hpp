#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "caerom/grid.hpp"

namespace caerom {

struct SingularSpectrum {
    std::vector<double> sigmas;  ///< descending, nonnegative
    double frobenius = 0.0;
};

/// Singular values of a column-major rows x cols matrix via the eigenvectors of the
/// smaller Gram matrix (cyclic Jacobi): sigma_j is the norm of A applied to the j-th
/// eigenvector, which stays accurate for tiny singular values.
SingularSpectrum singular_values(std::size_t rows, std::size_t cols, std::span<const double> data);
SingularSpectrum singular_values(const SnapshotMatrix& a);

struct SymmetricEigen {
    std::size_t n = 0;
    std::vector<double> values;   ///< descending
    std::vector<double> vectors;  ///< row-major n x n, column j pairs with values[j]
};

/// Cyclic Jacobi on a symmetric row-major n x n matrix. Sweeps until the
/// off-diagonal Frobenius norm is below tol times the full norm.
SymmetricEigen symmetric_eigen(std::size_t n, std::vector<double> a, double tol = 1e-12);

/// sqrt(sum_{i>k} sigma_i^2 / sum sigma_i^2); 0 for an all-zero spectrum.
double pod_projection_error(const SingularSpectrum& s, std::size_t k);

/// |a - b| / |b|. Throws ZeroReference when |b| = 0.
double rel_l2_error(std::span<const double> a, std::span<const double> b);

/// `index,sigma`, one row per value, 1-based.
void write_spectrum_csv(std::ostream& out, const SingularSpectrum& s);
void write_spectrum_csv(const std::string& path, const SingularSpectrum& s);

}  // namespace caerom
