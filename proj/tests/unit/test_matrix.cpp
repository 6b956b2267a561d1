#include <doctest.h>

#include <cmath>

#include "ongraph/eigensolve.hpp"
#include "ongraph/errors.hpp"
#include "ongraph/matrix.hpp"
#include "ongraph/rng.hpp"

#ifdef ONGRAPH_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace ongraph;

namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.gaussian();
    return m;
}

Matrix random_symmetric(Rng& rng, int n) {
    Matrix m = random_matrix(rng, n, n);
    symmetrize(m);
    return m;
}

}  // namespace

TEST_CASE("matmul basics and dimension guards") {
    Matrix a(2, 3), b(3, 2);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(0, 2) = 3;
    a(1, 0) = 4;
    a(1, 1) = 5;
    a(1, 2) = 6;
    b(0, 0) = 7;
    b(1, 0) = 8;
    b(2, 0) = 9;
    b(0, 1) = 1;
    b(1, 1) = 2;
    b(2, 1) = 3;
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == doctest::Approx(50));
    CHECK(c(1, 0) == doctest::Approx(122));
    CHECK(c(0, 1) == doctest::Approx(14));
    CHECK(c(1, 1) == doctest::Approx(32));
    CHECK_THROWS_AS(matmul(a, a), DimensionError);
}

#ifdef ONGRAPH_HAVE_EIGEN
TEST_CASE("matmul matches Eigen on random instances") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform_int(40));
        const int k = 1 + static_cast<int>(rng.uniform_int(40));
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        const Matrix a = random_matrix(rng, m, k);
        const Matrix b = random_matrix(rng, k, n);
        const Matrix c = matmul(a, b);
        Eigen::MatrixXd ea(m, k), eb(k, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) ea(i, j) = a(i, j);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) eb(i, j) = b(i, j);
        const Eigen::MatrixXd ec = ea * eb;
        double worst = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, std::fabs(ec(i, j) - c(i, j)));
        CHECK(worst < 1e-12 * (1.0 + ec.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("jacobi eigendecomposition matches Eigen") {
    Rng rng(11);
    for (int n : {2, 5, 10, 28}) {
        const Matrix m = random_symmetric(rng, n);
        const EighResult got = jacobi_eigh(m);
        Eigen::MatrixXd em(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) em(i, j) = m(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em);
        for (int k = 0; k < n; ++k)
            CHECK(got.eigenvalues[static_cast<std::size_t>(k)] ==
                  doctest::Approx(es.eigenvalues()(k)).epsilon(1e-10));
        // residual check: M v = lambda v
        for (int k = 0; k < n; ++k) {
            std::vector<double> v(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = got.eigenvectors(i, k);
            const auto mv = matvec(m, v);
            double resid = 0.0;
            for (int i = 0; i < n; ++i)
                resid += std::pow(mv[static_cast<std::size_t>(i)] -
                                      got.eigenvalues[static_cast<std::size_t>(k)] *
                                          v[static_cast<std::size_t>(i)],
                                  2);
            CHECK(std::sqrt(resid) < 1e-9 * (1.0 + std::fabs(got.eigenvalues.back())));
        }
    }
}

TEST_CASE("spectral norm matches a dense eigensolver oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(12));
        const Matrix m = random_symmetric(rng, n);
        Eigen::MatrixXd em(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) em(i, j) = m(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em);
        const double expected = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(spectral_norm(m) == doctest::Approx(expected).epsilon(1e-8));
    }
}
#endif

TEST_CASE("spectral norm trivial cases") {
    CHECK(spectral_norm(Matrix::identity(6)) == doctest::Approx(1.0));
    Matrix d(3, 3);
    d(0, 0) = 3;
    d(1, 1) = -7;
    d(2, 2) = 2;
    CHECK(spectral_norm(d) == doctest::Approx(7.0));
    CHECK(spectral_norm(Matrix(4, 4)) == doctest::Approx(0.0));
    // equal and opposite extremes stall plain power iteration; the squared
    // operator handles them
    Matrix e(2, 2);
    e(0, 0) = 3;
    e(1, 1) = -3;
    CHECK(spectral_norm(e) == doctest::Approx(3.0));
}

TEST_CASE("psd sqrt clips negative eigenvalues") {
    Rng rng(17);
    const Matrix m = random_symmetric(rng, 6);
    const Matrix c = matmul(m, m);  // PSD
    const Matrix root = psd_sqrt(c);
    const Matrix back = matmul(root, root);
    CHECK(max_abs_diff(back, c) < 1e-10 * (1.0 + max_abs(c)));
    // a slightly indefinite input still yields a PSD square
    Matrix wobble = c;
    wobble(0, 0) -= 1e-14;
    const Matrix r2 = psd_sqrt(wobble);
    const auto [lo, hi] = eig_range(matmul(r2, transpose(r2)));
    CHECK(lo > -1e-12 * (1.0 + hi));
}

TEST_CASE("norm helpers") {
    Matrix m(2, 2);
    m(0, 0) = 3;
    m(0, 1) = -4;
    CHECK(frobenius_norm(m) == doctest::Approx(5.0));
    CHECK(l1_norm(m) == doctest::Approx(7.0));
    CHECK(max_abs(m) == doctest::Approx(4.0));
    // column norms: col0 = (3,0), col1 = (-4,0)
    CHECK(l21_norm(m) == doctest::Approx(7.0));
}
