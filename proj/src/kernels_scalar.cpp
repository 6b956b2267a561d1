#include "ongraph/kernels.hpp"

#include <cmath>
#include <cstring>

namespace ongraph::kernels {
namespace {

void matmul(double* out, const double* a, const double* b, int m, int k, int n) {
    std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        double* orow = out + static_cast<std::size_t>(i) * n;
        const double* arow = a + static_cast<std::size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            const double* brow = b + static_cast<std::size_t>(kk) * n;
            for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
}

void matvec(double* out, const double* a, const double* x, int m, int n) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += arow[j] * x[j];
        out[i] = acc;
    }
}

void transpose(double* out, const double* a, int m, int n) {
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
}

void vadd(double* out, const double* a, const double* b, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = a[i] + b[i];
}

void vsub(double* out, const double* a, const double* b, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = a[i] - b[i];
}

void axpy(double* out, const double* x, double alpha, const double* y, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = x[i] + alpha * y[i];
}

void fma3(double* out, const double* x, double alpha, const double* y, const double* z,
          std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = x[i] + alpha * (y[i] + z[i]);
}

void scale(double* out, const double* a, double alpha, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) out[i] = a[i] * alpha;
}

double dot(const double* a, const double* b, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += a[i] * b[i];
    return acc;
}

double asum(const double* a, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += std::fabs(a[i]);
    return acc;
}

void soft_threshold_nonneg(double* out, const double* q, double thr, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        const double v = q[i] - thr;
        out[i] = v > 0.0 ? v : 0.0;
    }
}

void masked_soft_threshold(double* out, const double* q, const double* mask, const double* vals,
                           double thr, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        const double v = q[i] - thr;
        const double t = v > 0.0 ? v : 0.0;
        out[i] = t + mask[i] * (vals[i] - t);
    }
}

void colwise_sumsq(double* sums, const double* a, int rows, int cols) {
    std::memset(sums, 0, sizeof(double) * static_cast<std::size_t>(cols));
    for (int i = 0; i < rows; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) sums[j] += arow[j] * arow[j];
    }
}

void colwise_scale(double* out, const double* a, const double* scales, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * cols;
        double* orow = out + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) orow[j] = arow[j] * scales[j];
    }
}

void rank_one_cov_update(double* c, const double* x, double t, int n) {
    const double w = t - 1.0;
    const double inv_t = 1.0 / t;
    for (int i = 0; i < n; ++i) {
        double* crow = c + static_cast<std::size_t>(i) * n;
        const double xi = x[i];
        for (int j = 0; j < n; ++j) crow[j] = (w * crow[j] + xi * x[j]) * inv_t;
    }
}

constexpr Ops kScalarOps = {
    matmul,        matvec, transpose,            vadd,
    vsub,          axpy,   fma3,                 scale,
    dot,           asum,   soft_threshold_nonneg, masked_soft_threshold,
    colwise_sumsq, colwise_scale, rank_one_cov_update, "scalar",
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace ongraph::kernels
