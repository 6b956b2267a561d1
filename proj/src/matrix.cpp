#include "ongraph/matrix.hpp"

#include <cmath>
#include <string>

#include "ongraph/errors.hpp"
#include "ongraph/kernels.hpp"

namespace ongraph {

namespace {
void require(bool cond, const char* what) {
    if (!cond) throw DimensionError(what);
}
}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    if (!out.empty() && a.cols() > 0)
        kernels::active().matmul(out.data(), a.data(), b.data(), a.rows(), a.cols(), b.cols());
    return out;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    require(a.cols() == static_cast<int>(x.size()), "matvec: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(a.rows()), 0.0);
    if (a.rows() > 0 && a.cols() > 0)
        kernels::active().matvec(out.data(), a.data(), x.data(), a.rows(), a.cols());
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    if (!a.empty()) kernels::active().transpose(out.data(), a.data(), a.rows(), a.cols());
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add: shape mismatch");
    Matrix out(a.rows(), a.cols());
    kernels::active().vadd(out.data(), a.data(), b.data(), a.size());
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "sub: shape mismatch");
    Matrix out(a.rows(), a.cols());
    kernels::active().vsub(out.data(), a.data(), b.data(), a.size());
    return out;
}

Matrix scaled(const Matrix& a, double alpha) {
    Matrix out(a.rows(), a.cols());
    kernels::active().scale(out.data(), a.data(), alpha, a.size());
    return out;
}

double frobenius_norm(const Matrix& a) {
    return std::sqrt(kernels::active().dot(a.data(), a.data(), a.size()));
}

double l1_norm(const Matrix& a) { return kernels::active().asum(a.data(), a.size()); }

double l21_norm(const Matrix& a) {
    if (a.empty()) return 0.0;
    std::vector<double> sums(static_cast<std::size_t>(a.cols()), 0.0);
    kernels::active().colwise_sumsq(sums.data(), a.data(), a.rows(), a.cols());
    double total = 0.0;
    for (double s : sums) total += std::sqrt(s);
    return total;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    const double* d = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(d[i]));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("max_abs_diff: shape mismatch");
    double m = 0.0;
    const double* da = a.data();
    const double* db = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(da[i] - db[i]));
    return m;
}

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

void symmetrize(Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("symmetrize: matrix not square");
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
}

}  // namespace ongraph
