#pragma once

#include <cstddef>

// Dense double-precision kernels behind the estimator's inner loops.
// Scalar reference implementations always exist; an AVX2+FMA variant of the
// same table is selected at runtime when the CPU supports it. Variants are
// equivalence-tested against the scalar reference.

namespace ongraph::kernels {

struct Ops {
    // out(m x n) = a(m x k) * b(k x n), row-major. out must not alias a or b.
    void (*matmul)(double* out, const double* a, const double* b, int m, int k, int n);
    // out(m) = a(m x n) * x(n)
    void (*matvec)(double* out, const double* a, const double* x, int m, int n);
    // out(n x m) = a(m x n)^T. out must not alias a.
    void (*transpose)(double* out, const double* a, int m, int n);
    void (*vadd)(double* out, const double* a, const double* b, std::size_t len);
    void (*vsub)(double* out, const double* a, const double* b, std::size_t len);
    // out = x + alpha * y
    void (*axpy)(double* out, const double* x, double alpha, const double* y, std::size_t len);
    // out = x + alpha * (y + z)
    void (*fma3)(double* out, const double* x, double alpha, const double* y, const double* z,
                 std::size_t len);
    void (*scale)(double* out, const double* a, double alpha, std::size_t len);
    double (*dot)(const double* a, const double* b, std::size_t len);
    // sum of |a_i|
    double (*asum)(const double* a, std::size_t len);
    // out = max(0, q - thr)
    void (*soft_threshold_nonneg)(double* out, const double* q, double thr, std::size_t len);
    // out_i = mask_i != 0 ? vals_i : max(0, q_i - thr); mask entries are 0.0/1.0
    void (*masked_soft_threshold)(double* out, const double* q, const double* mask,
                                  const double* vals, double thr, std::size_t len);
    // sums(cols) = per-column sum of squares of a(rows x cols)
    void (*colwise_sumsq)(double* sums, const double* a, int rows, int cols);
    // out(i,j) = a(i,j) * scales(j)
    void (*colwise_scale)(double* out, const double* a, const double* scales, int rows, int cols);
    // c(n x n) = ((t-1) * c + x x^T) / t
    void (*rank_one_cov_update)(double* c, const double* x, double t, int n);
    const char* name;
};

enum class Backend { Auto, Scalar, Avx2 };

// Scalar reference table; always available.
const Ops& scalar_ops();

// AVX2 table, or nullptr when unsupported by the CPU or not compiled in.
const Ops* avx2_ops();

bool avx2_supported();

// Active table used by the library. Auto resolves to AVX2 when supported.
const Ops& active();
Backend active_backend();

// Force a backend (throws ongraph::ConfigError when unavailable). Intended
// for tests and the CLI's kernel override; not thread-safe against in-flight
// computation.
void select(Backend b);

Backend parse_backend(const char* name);

}  // namespace ongraph::kernels
