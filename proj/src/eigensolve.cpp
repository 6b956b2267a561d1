#include "ongraph/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ongraph/errors.hpp"
#include "ongraph/kernels.hpp"

namespace ongraph {

namespace {

double offdiag_sumsq(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
    return s;
}

}  // namespace

EighResult jacobi_eigh(const Matrix& sym) {
    if (sym.rows() != sym.cols()) throw DimensionError("jacobi_eigh: matrix not square");
    const int n = sym.rows();
    Matrix a = sym;
    Matrix v = Matrix::identity(n);

    const double total = kernels::active().dot(a.data(), a.data(), a.size());
    const double stop = 1e-30 * std::max(total, 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        if (offdiag_sumsq(a) <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    EighResult out;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[static_cast<std::size_t>(k)] = a(order[k], order[k]);
        for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

double spectral_norm(const Matrix& sym) {
    std::vector<double> scratch;
    return spectral_norm(sym, &scratch);
}

double spectral_norm(const Matrix& sym, std::vector<double>* warm) {
    if (sym.rows() != sym.cols()) throw DimensionError("spectral_norm: matrix not square");
    const int n = sym.rows();
    if (n == 0) return 0.0;

    std::vector<double> v;
    if (warm && static_cast<int>(warm->size()) == n) {
        v = *warm;
    } else {
        v.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0 + 0.125 * (i % 7);
    }
    double vnorm = std::sqrt(kernels::active().dot(v.data(), v.data(), v.size()));
    if (!(vnorm > 0.0) || !std::isfinite(vnorm)) {
        std::fill(v.begin(), v.end(), 1.0);
        vnorm = std::sqrt(static_cast<double>(n));
    }
    for (double& x : v) x /= vnorm;

    // Power iteration on sym^2 so opposite-sign extreme eigenvalues cannot
    // cancel; the Rayleigh quotient converges to the squared spectral norm.
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> u(static_cast<std::size_t>(n));
    const auto& ops = kernels::active();
    double theta_prev = -1.0;
    int stable = 0;
    for (int iter = 0; iter < 500; ++iter) {
        ops.matvec(w.data(), sym.data(), v.data(), n, n);
        const double theta = ops.dot(w.data(), w.data(), w.size());
        if (theta == 0.0) {
            if (warm) *warm = v;
            return 0.0;
        }
        if (theta_prev >= 0.0 && std::fabs(theta - theta_prev) <= 1e-14 * theta) {
            if (++stable >= 2) {
                if (warm) *warm = v;
                return std::sqrt(theta);
            }
        } else {
            stable = 0;
        }
        theta_prev = theta;
        ops.matvec(u.data(), sym.data(), w.data(), n, n);
        const double unorm = std::sqrt(ops.dot(u.data(), u.data(), u.size()));
        if (!(unorm > 0.0) || !std::isfinite(unorm)) break;
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] / unorm;
    }

    // Stalled (clustered or adversarial spectrum): fall back to Jacobi.
    const EighResult e = jacobi_eigh(sym);
    double best = 0.0;
    for (double lam : e.eigenvalues) best = std::max(best, std::fabs(lam));
    if (warm && !e.eigenvalues.empty()) {
        const auto it = std::max_element(
            e.eigenvalues.begin(), e.eigenvalues.end(),
            [](double x, double y) { return std::fabs(x) < std::fabs(y); });
        const int k = static_cast<int>(it - e.eigenvalues.begin());
        warm->resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) (*warm)[static_cast<std::size_t>(i)] = e.eigenvectors(i, k);
    }
    return best;
}

Matrix psd_sqrt(const Matrix& sym) {
    const EighResult e = jacobi_eigh(sym);
    const int n = sym.rows();
    Matrix scaled_vectors(n, n);
    for (int k = 0; k < n; ++k) {
        const double lam = e.eigenvalues[static_cast<std::size_t>(k)];
        const double f = lam > 0.0 ? std::sqrt(lam) : 0.0;
        for (int i = 0; i < n; ++i) scaled_vectors(i, k) = e.eigenvectors(i, k) * f;
    }
    return matmul(scaled_vectors, transpose(e.eigenvectors));
}

std::pair<double, double> eig_range(const Matrix& sym) {
    const EighResult e = jacobi_eigh(sym);
    if (e.eigenvalues.empty()) return {0.0, 0.0};
    return {e.eigenvalues.front(), e.eigenvalues.back()};
}

}  // namespace ongraph
