// AVX2+FMA variants of the kernel table. This TU is compiled with
// -mavx2 -mfma and must only be reached after a runtime CPU check.

#include "ongraph/kernels.hpp"

#include <cmath>
#include <cstring>
#include <immintrin.h>

namespace ongraph::kernels {
namespace {

void matmul(double* out, const double* a, const double* b, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        double* orow = out + static_cast<std::size_t>(i) * n;
        const double* arow = a + static_cast<std::size_t>(i) * k;
        int j = 0;
        for (; j + 16 <= n; j += 16) {
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            __m256d acc2 = _mm256_setzero_pd();
            __m256d acc3 = _mm256_setzero_pd();
            for (int kk = 0; kk < k; ++kk) {
                const __m256d av = _mm256_set1_pd(arow[kk]);
                const double* brow = b + static_cast<std::size_t>(kk) * n + j;
                acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), acc0);
                acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), acc1);
                acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), acc2);
                acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), acc3);
            }
            _mm256_storeu_pd(orow + j, acc0);
            _mm256_storeu_pd(orow + j + 4, acc1);
            _mm256_storeu_pd(orow + j + 8, acc2);
            _mm256_storeu_pd(orow + j + 12, acc3);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d acc = _mm256_setzero_pd();
            for (int kk = 0; kk < k; ++kk) {
                const __m256d av = _mm256_set1_pd(arow[kk]);
                acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + static_cast<std::size_t>(kk) * n + j),
                                      acc);
            }
            _mm256_storeu_pd(orow + j, acc);
        }
        for (; j < n; ++j) {
            double acc = 0.0;
            for (int kk = 0; kk < k; ++kk)
                acc += arow[kk] * b[static_cast<std::size_t>(kk) * n + j];
            orow[j] = acc;
        }
    }
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void matvec(double* out, const double* a, const double* x, int m, int n) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * n;
        __m256d acc = _mm256_setzero_pd();
        int j = 0;
        for (; j + 4 <= n; j += 4)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(x + j), acc);
        double s = hsum(acc);
        for (; j < n; ++j) s += arow[j] * x[j];
        out[i] = s;
    }
}

void transpose(double* out, const double* a, int m, int n) {
    const int mb = m & ~3;
    const int nb = n & ~3;
    for (int i = 0; i < mb; i += 4) {
        for (int j = 0; j < nb; j += 4) {
            const double* src = a + static_cast<std::size_t>(i) * n + j;
            const __m256d r0 = _mm256_loadu_pd(src);
            const __m256d r1 = _mm256_loadu_pd(src + n);
            const __m256d r2 = _mm256_loadu_pd(src + 2 * n);
            const __m256d r3 = _mm256_loadu_pd(src + 3 * n);
            const __m256d t0 = _mm256_unpacklo_pd(r0, r1);
            const __m256d t1 = _mm256_unpackhi_pd(r0, r1);
            const __m256d t2 = _mm256_unpacklo_pd(r2, r3);
            const __m256d t3 = _mm256_unpackhi_pd(r2, r3);
            double* dst = out + static_cast<std::size_t>(j) * m + i;
            _mm256_storeu_pd(dst, _mm256_permute2f128_pd(t0, t2, 0x20));
            _mm256_storeu_pd(dst + m, _mm256_permute2f128_pd(t1, t3, 0x20));
            _mm256_storeu_pd(dst + 2 * m, _mm256_permute2f128_pd(t0, t2, 0x31));
            _mm256_storeu_pd(dst + 3 * m, _mm256_permute2f128_pd(t1, t3, 0x31));
        }
        for (int j = nb; j < n; ++j)
            for (int ii = i; ii < i + 4; ++ii)
                out[static_cast<std::size_t>(j) * m + ii] = a[static_cast<std::size_t>(ii) * n + j];
    }
    for (int i = mb; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
}

void vadd(double* out, const double* a, const double* b, std::size_t len) {
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < len; ++i) out[i] = a[i] + b[i];
}

void vsub(double* out, const double* a, const double* b, std::size_t len) {
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < len; ++i) out[i] = a[i] - b[i];
}

void axpy(double* out, const double* x, double alpha, const double* y, std::size_t len) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < len; ++i) out[i] = x[i] + alpha * y[i];
}

void fma3(double* out, const double* x, double alpha, const double* y, const double* z,
          std::size_t len) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d s = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(av, s, _mm256_loadu_pd(x + i)));
    }
    for (; i < len; ++i) out[i] = x[i] + alpha * (y[i] + z[i]);
}

void scale(double* out, const double* a, double alpha, std::size_t len) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(a + i)));
    for (; i < len; ++i) out[i] = a[i] * alpha;
}

double dot(const double* a, const double* b, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= len; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) s += a[i] * b[i];
    return s;
}

double asum(const double* a, std::size_t len) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
    double s = hsum(acc);
    for (; i < len; ++i) s += std::fabs(a[i]);
    return s;
}

void soft_threshold_nonneg(double* out, const double* q, double thr, std::size_t len) {
    const __m256d tv = _mm256_set1_pd(thr);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(zero, _mm256_sub_pd(_mm256_loadu_pd(q + i), tv)));
    for (; i < len; ++i) {
        const double v = q[i] - thr;
        out[i] = v > 0.0 ? v : 0.0;
    }
}

void masked_soft_threshold(double* out, const double* q, const double* mask, const double* vals,
                           double thr, std::size_t len) {
    const __m256d tv = _mm256_set1_pd(thr);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d t = _mm256_max_pd(zero, _mm256_sub_pd(_mm256_loadu_pd(q + i), tv));
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(vals + i), t);
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(mask + i), d, t));
    }
    for (; i < len; ++i) {
        const double v = q[i] - thr;
        const double t = v > 0.0 ? v : 0.0;
        out[i] = t + mask[i] * (vals[i] - t);
    }
}

void colwise_sumsq(double* sums, const double* a, int rows, int cols) {
    std::memset(sums, 0, sizeof(double) * static_cast<std::size_t>(cols));
    for (int i = 0; i < rows; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * cols;
        int j = 0;
        for (; j + 4 <= cols; j += 4) {
            const __m256d v = _mm256_loadu_pd(arow + j);
            _mm256_storeu_pd(sums + j, _mm256_fmadd_pd(v, v, _mm256_loadu_pd(sums + j)));
        }
        for (; j < cols; ++j) sums[j] += arow[j] * arow[j];
    }
}

void colwise_scale(double* out, const double* a, const double* scales, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * cols;
        double* orow = out + static_cast<std::size_t>(i) * cols;
        int j = 0;
        for (; j + 4 <= cols; j += 4)
            _mm256_storeu_pd(orow + j,
                             _mm256_mul_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(scales + j)));
        for (; j < cols; ++j) orow[j] = arow[j] * scales[j];
    }
}

void rank_one_cov_update(double* c, const double* x, double t, int n) {
    const __m256d wv = _mm256_set1_pd(t - 1.0);
    const __m256d iv = _mm256_set1_pd(1.0 / t);
    const double w = t - 1.0;
    const double inv_t = 1.0 / t;
    for (int i = 0; i < n; ++i) {
        double* crow = c + static_cast<std::size_t>(i) * n;
        const __m256d xi = _mm256_set1_pd(x[i]);
        int j = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d acc =
                _mm256_fmadd_pd(xi, _mm256_loadu_pd(x + j),
                                _mm256_mul_pd(wv, _mm256_loadu_pd(crow + j)));
            _mm256_storeu_pd(crow + j, _mm256_mul_pd(acc, iv));
        }
        for (; j < n; ++j) crow[j] = (w * crow[j] + x[i] * x[j]) * inv_t;
    }
}

constexpr Ops kAvx2Ops = {
    matmul,        matvec, transpose,            vadd,
    vsub,          axpy,   fma3,                 scale,
    dot,           asum,   soft_threshold_nonneg, masked_soft_threshold,
    colwise_sumsq, colwise_scale, rank_one_cov_update, "avx2",
};

}  // namespace

const Ops* avx2_ops_impl() { return &kAvx2Ops; }

}  // namespace ongraph::kernels
