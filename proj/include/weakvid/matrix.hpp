#ifndef WEAKVID_MATRIX_HPP
#define WEAKVID_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace weakvid {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// classifiers; not a general-purpose library.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations:
// A = V diag(w) V^T with V's columns holding the eigenvectors.
void jacobi_eigen_symmetric(Matrix A, std::vector<double>& eigenvalues, Matrix& eigenvectors);

} // namespace weakvid

#endif
