#pragma once

#include <cstddef>
#include <vector>

namespace paraug {

// Eigendecomposition A = Q diag(values) Q^T of a dense symmetric matrix.
// `vectors` is row-major n x n; column k is the eigenvector for values[k].
// Eigenvalues are sorted ascending.
struct SymmetricEigen {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<double> vectors;
};

// Cyclic Jacobi rotations. `matrix` is row-major n x n and must be symmetric.
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n);

} // namespace paraug
