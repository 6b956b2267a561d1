#pragma once

#include <vector>

#include "ongraph/matrix.hpp"

namespace ongraph {

struct EighResult {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices. Deterministic;
// accurate to machine precision at the matrix sizes used here (n <= 64).
EighResult jacobi_eigh(const Matrix& sym);

// Largest singular value of a symmetric matrix: power iteration on m^2 with
// a Jacobi fallback if the iteration stalls. Relative accuracy ~1e-12.
// warm, when given, is used as the starting vector and receives the final one.
double spectral_norm(const Matrix& sym);
double spectral_norm(const Matrix& sym, std::vector<double>* warm);

// Symmetric PSD square root; eigenvalues below zero are clipped to zero.
Matrix psd_sqrt(const Matrix& sym);

// Smallest and largest eigenvalues (via Jacobi), for PSD checks.
std::pair<double, double> eig_range(const Matrix& sym);

}  // namespace ongraph
