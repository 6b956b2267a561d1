#pragma once

#include <cstddef>
#include <vector>

namespace ongraph {

// Dense row-major double matrix. Arithmetic that sits on a hot path is
// delegated to the kernel table; everything else is plain loops.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return d_.size(); }
    bool empty() const { return d_.empty(); }

    double& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    int rows_, cols_;
    std::vector<double> d_;
};

// All binary ops throw DimensionError on shape mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double alpha);

double frobenius_norm(const Matrix& a);
double l1_norm(const Matrix& a);           // entrywise absolute sum
double l21_norm(const Matrix& a);          // sum of column 2-norms
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

bool is_symmetric(const Matrix& a, double tol);
// a <- (a + a^T) / 2; exact for bitwise-symmetric input.
void symmetrize(Matrix& a);

}  // namespace ongraph
