#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ongraph/eigensolve.hpp"
#include "ongraph/errors.hpp"
#include "ongraph/estimator.hpp"
#include "ongraph/metrics.hpp"
#include "ongraph/signal.hpp"

using namespace ongraph;

TEST_CASE("polynomial covariance trivial filters") {
    const Gso g = generate_er(5, 0.5, 3);
    const CovarianceModel ident = polynomial_covariance(g, {{1.0}});
    CHECK(max_abs_diff(ident.c(), Matrix::identity(5)) == 0.0);

    Matrix zero(4, 4);
    const Gso zg = Gso::from_matrix(zero);
    const CovarianceModel c4 = polynomial_covariance(zg, {{2.0, 5.0, -1.0}});
    CHECK(max_abs_diff(c4.c(), scaled(Matrix::identity(4), 4.0)) == 0.0);

    CHECK_THROWS_AS(polynomial_covariance(g, {{}}), ConfigError);
    CHECK_THROWS_AS(polynomial_covariance(g, {{0.0, 0.0}}), ConfigError);
}

TEST_CASE("built covariances commute with their source") {
    Rng rng(5);
    for (int trial = 0; trial < 12; ++trial) {
        const Gso g = generate_er(6, 0.45, 1000 + trial);
        PolynomialFilter f;
        for (int l = 0; l < 3; ++l) f.coeffs.push_back(rng.gaussian());
        if (f.coeffs[0] == 0.0 && f.coeffs[1] == 0.0 && f.coeffs[2] == 0.0) continue;
        const CovarianceModel model = polynomial_covariance(g, f);
        const Matrix cs = matmul(model.c(), g.entries());
        const Matrix sc = matmul(g.entries(), model.c());
        const double denom = frobenius_norm(cs);
        CHECK(frobenius_norm(sub(cs, sc)) < 1e-12 * (denom > 0 ? denom : 1.0));
        CHECK(frobenius_norm(sub(cs, sc)) <= 1e-10 * (1.0 + denom));
        const auto [lo, hi] = eig_range(model.c());
        CHECK(lo >= -1e-9 * hi);
    }
}

TEST_CASE("sampling reproduces the target covariance") {
    const CovarianceModel ident = CovarianceModel::from_matrix(Matrix::identity(4));
    const Matrix x = sample_signals(ident, 100000, 11);
    REQUIRE(x.rows() == 4);
    REQUIRE(x.cols() == 100000);
    Matrix emp(4, 4);
    for (int r = 0; r < x.cols(); ++r)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) emp(i, j) += x(i, r) * x(j, r) / x.cols();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(emp(i, j) - (i == j ? 1.0 : 0.0)) < 0.02);

    Matrix d(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    const Matrix y = sample_signals(CovarianceModel::from_matrix(d), 100000, 12);
    double v0 = 0.0, v1 = 0.0;
    for (int r = 0; r < y.cols(); ++r) {
        v0 += y(0, r) * y(0, r);
        v1 += y(1, r) * y(1, r);
    }
    v0 /= y.cols();
    v1 /= y.cols();
    CHECK(std::fabs(v0 - 4.0) < 0.2);
    CHECK(std::fabs(v1 - 1.0) < 0.05);
}

TEST_CASE("sampling edge cases and determinism") {
    const CovarianceModel ident = CovarianceModel::from_matrix(Matrix::identity(3));
    const Matrix empty = sample_signals(ident, 0, 5);
    CHECK(empty.cols() == 0);

    const Matrix a = sample_signals(ident, 50, 5);
    const Matrix b = sample_signals(ident, 50, 5);
    CHECK(max_abs_diff(a, b) == 0.0);

    Matrix indef(2, 2);
    indef(0, 0) = 1.0;
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(CovarianceModel::from_matrix(indef), NumericError);
}

TEST_CASE("cov_update matches the recursive formula") {
    // first sample annihilates any prior carried with weight t0 = 0
    Matrix prior(2, 2);
    prior(0, 0) = 3.0;
    prior(1, 1) = 5.0;
    prior(0, 1) = prior(1, 0) = 1.0;
    StreamingCovariance sc = StreamingCovariance::warm_start(prior, 0);
    sc.update({2.0, -1.0});
    CHECK(sc.t() == 1);
    CHECK(sc.c_hat()(0, 0) == 4.0);
    CHECK(sc.c_hat()(0, 1) == -2.0);
    CHECK(sc.c_hat()(1, 1) == 1.0);

    // scalar: 9 at t=1, then x=1 -> (9+1)/2 = 5
    Matrix nine(1, 1);
    nine(0, 0) = 9.0;
    StreamingCovariance s1 = StreamingCovariance::warm_start(nine, 1);
    s1.update({1.0});
    CHECK(s1.c_hat()(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s1.t() == 2);

    StreamingCovariance s2(3);
    CHECK_THROWS_AS(s2.update({1.0, 2.0}), DimensionError);
}

TEST_CASE("streaming covariance equals the batch mean of outer products") {
    Rng rng(23);
    const int o = 6, t = 1000;
    StreamingCovariance sc(o);
    Matrix batch(o, o);
    std::vector<double> x(o);
    for (int s = 1; s <= t; ++s) {
        for (double& v : x) v = rng.gaussian();
        sc.update(x);
        for (int i = 0; i < o; ++i)
            for (int j = 0; j < o; ++j) batch(i, j) += x[i] * x[j];
    }
    for (int i = 0; i < o; ++i)
        for (int j = 0; j < o; ++j) batch(i, j) /= t;
    CHECK(max_abs_diff(sc.c_hat(), batch) < 1e-10);
    CHECK(sc.sigma() == doctest::Approx(spectral_norm(sc.c_hat())).epsilon(1e-10));
}

TEST_CASE("warm start behaves as absorbed history") {
    // zero prior with t0 = 0 equals a cold start
    StreamingCovariance cold(2);
    StreamingCovariance warm = StreamingCovariance::warm_start(Matrix(2, 2), 0);
    cold.update({1.0, 2.0});
    warm.update({1.0, 2.0});
    CHECK(max_abs_diff(cold.c_hat(), warm.c_hat()) == 0.0);

    // batch of 50, then 50 more, equals the batch of 100
    Rng rng(31);
    const int o = 4;
    std::vector<std::vector<double>> samples;
    for (int s = 0; s < 100; ++s) {
        std::vector<double> x(o);
        for (double& v : x) v = rng.gaussian();
        samples.push_back(x);
    }
    Matrix first50(o, o);
    for (int s = 0; s < 50; ++s)
        for (int i = 0; i < o; ++i)
            for (int j = 0; j < o; ++j) first50(i, j) += samples[s][i] * samples[s][j] / 50.0;
    StreamingCovariance sc = StreamingCovariance::warm_start(first50, 50);
    for (int s = 50; s < 100; ++s) sc.update(samples[s]);
    Matrix all(o, o);
    for (int s = 0; s < 100; ++s)
        for (int i = 0; i < o; ++i)
            for (int j = 0; j < o; ++j) all(i, j) += samples[s][i] * samples[s][j] / 100.0;
    CHECK(max_abs_diff(sc.c_hat(), all) < 1e-10);

    const StreamingCovariance id = StreamingCovariance::warm_start(Matrix::identity(5), 10);
    CHECK(id.sigma() == doctest::Approx(1.0));

    Matrix asym(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(StreamingCovariance::warm_start(asym, 1), NumericError);
    Matrix indef(2, 2);
    indef(0, 0) = -1.0;
    CHECK_THROWS_AS(StreamingCovariance::warm_start(indef, 1), NumericError);
}

TEST_CASE("observed-block residual vanishes with the exact covariance") {
    const Gso g = generate_er(8, 0.4, 17);
    Rng rng(17);
    const CovarianceModel model = draw_covariance(g, 3, rng);
    const NodePartition part = partition_uniform(8, 2, 18);
    const GroundTruthScene scene = extract_blocks(g, part);

    const int o = part.o(), h = part.h();
    Matrix c_o(o, o), c_oh(o, h);
    for (int a = 0; a < o; ++a) {
        for (int b = 0; b < o; ++b) c_o(a, b) = model.c()(part.observed[a], part.observed[b]);
        for (int b = 0; b < h; ++b) c_oh(a, b) = model.c()(part.observed[a], part.hidden[b]);
    }
    const Matrix p = matmul(c_oh, scene.s_ho);
    const double resid = residual_norm(c_o, scene.s_o, p);
    CHECK(resid < 1e-10);

    // with a streamed covariance the residual shrinks as t grows
    const Matrix signals = sample_signals(model, 100000, 19);
    StreamingCovariance sc(o);
    std::vector<double> x(o);
    double resid_1e3 = 0.0;
    for (int t = 1; t <= 100000; ++t) {
        for (int a = 0; a < o; ++a) x[static_cast<std::size_t>(a)] = signals(part.observed[a], t - 1);
        sc.update(x);
        if (t == 1000) resid_1e3 = residual_norm(sc.c_hat(), scene.s_o, p);
    }
    const double resid_1e5 = residual_norm(sc.c_hat(), scene.s_o, p);
    CHECK(resid_1e5 < resid_1e3);
}

TEST_CASE("signal csv round trip") {
    const CovarianceModel ident = CovarianceModel::from_matrix(Matrix::identity(3));
    const Matrix x = sample_signals(ident, 7, 2);
    std::stringstream ss;
    write_signal_csv(x, ss);
    const SignalCsv back = read_signal_csv(ss);
    REQUIRE(back.columns.size() == 3);
    CHECK(back.columns[0] == "node_0");
    CHECK(max_abs_diff(back.signals, x) == 0.0);

    std::istringstream ragged("node_0,node_1\n1.0,2.0\n3.0\n");
    CHECK_THROWS_AS(read_signal_csv(ragged), IngestError);
    std::istringstream nonnum("node_0\nfoo\n");
    CHECK_THROWS_AS(read_signal_csv(nonnum), IngestError);
}

TEST_CASE("draw_covariance rejects rank-deficient filters deterministically") {
    const Gso g = generate_er(10, 0.2, 44);
    Rng r1(9), r2(9);
    const CovarianceModel a = draw_covariance(g, 3, r1);
    const CovarianceModel b = draw_covariance(g, 3, r2);
    CHECK(max_abs_diff(a.c(), b.c()) == 0.0);
    const auto [lo, hi] = eig_range(a.c());
    CHECK(lo >= 1e-8 * hi);
}
