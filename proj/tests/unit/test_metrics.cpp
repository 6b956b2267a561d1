#include <doctest.h>

#include <cmath>

#include "ongraph/errors.hpp"
#include "ongraph/estimator.hpp"
#include "ongraph/graph.hpp"
#include "ongraph/metrics.hpp"
#include "ongraph/rng.hpp"

using namespace ongraph;

namespace {

Matrix random_symmetric(Rng& rng, int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.gaussian();
    symmetrize(m);
    return m;
}

}  // namespace

TEST_CASE("normalized error basics") {
    const Gso g = generate_er(6, 0.5, 3);
    CHECK(normalized_error(g.entries(), g.entries()) == doctest::Approx(0.0));
    CHECK(normalized_error(g.entries(), Matrix(6, 6)) == doctest::Approx(1.0));
    CHECK(normalized_error(g.entries(), scaled(g.entries(), 2.0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(normalized_error(Matrix(4, 4), Matrix(4, 4)), NumericError);
}

TEST_CASE("normalized error is permutation invariant") {
    Rng rng(5);
    const Matrix a = random_symmetric(rng, 7);
    const Matrix b = random_symmetric(rng, 7);
    const double base = normalized_error(a, b);
    // apply a fixed relabeling to both arguments
    const int perm[7] = {3, 0, 6, 1, 5, 2, 4};
    Matrix pa(7, 7), pb(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            pa(i, j) = a(perm[i], perm[j]);
            pb(i, j) = b(perm[i], perm[j]);
        }
    CHECK(normalized_error(pa, pb) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("edge classification against a brute-force confusion count") {
    const Gso truth = generate_er(6, 0.4, 9);
    Rng rng(11);
    Matrix est(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            est(i, j) = rng.uniform();
            est(j, i) = est(i, j);
        }
    const double thr = 0.5;
    const EdgeClassification got = edge_classification(truth.entries(), est, thr);

    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            const bool t = truth(i, j) != 0.0;
            const bool p = est(i, j) > thr;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
            tn += !t && !p;
        }
    const double prec = tp + fp ? double(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / (tp + fn) : 0.0;
    CHECK(got.precision == doctest::Approx(prec));
    CHECK(got.recall == doctest::Approx(rec));

    const EdgeClassification perfect =
        edge_classification(truth.entries(), truth.entries(), 0.5);
    CHECK(perfect.precision == doctest::Approx(1.0));
    CHECK(perfect.recall == doctest::Approx(1.0));
    CHECK(perfect.f1 == doctest::Approx(1.0));

    const EdgeClassification nothing = edge_classification(truth.entries(), Matrix(6, 6), 0.5);
    CHECK(nothing.recall == doctest::Approx(0.0));
    CHECK(nothing.f1 == doctest::Approx(0.0));
}

TEST_CASE("residual norm identities") {
    Rng rng(13);
    const Matrix s = random_symmetric(rng, 5);
    Matrix p_sym = random_symmetric(rng, 5);
    CHECK(residual_norm(Matrix::identity(5), s, p_sym) < 1e-14);

    // residual_norm^2 * mu/2 == penalty_g, definitionally
    Matrix p(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) p(i, j) = rng.gaussian();
    const Matrix c = matmul(s, s);
    const double r = residual_norm(c, random_symmetric(rng, 5), p);
    // recompute with the same inputs
    Rng rng2(13);
    (void)rng2;
    const Matrix s2 = random_symmetric(rng, 5);
    const double rr = residual_norm(c, s2, p);
    const double g = penalty_g(c, s2, p, 0.7);
    CHECK(rr * rr * 0.7 / 2.0 == doctest::Approx(g).epsilon(1e-12));
    CHECK(r >= 0.0);
}

TEST_CASE("relative threshold helper") {
    Matrix m(2, 2);
    m(0, 1) = m(1, 0) = 0.8;
    CHECK(relative_threshold(m) == doctest::Approx(0.24));
    CHECK(relative_threshold(m, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("trial trace consistency checks") {
    TrialTrace tr;
    tr.sample_index = {1, 10};
    tr.err = {0.5, 0.4};
    tr.objective = {1.0, 0.9};
    tr.residual = {2.0, 1.5};
    CHECK_NOTHROW(tr.check_consistent());
    tr.err.pop_back();
    CHECK_THROWS_AS(tr.check_consistent(), DimensionError);
}
