#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ongraph/errors.hpp"
#include "ongraph/estimator.hpp"
#include "ongraph/rng.hpp"
#include "ongraph/signal.hpp"

using namespace ongraph;

namespace {

Matrix random_matrix(Rng& rng, int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.gaussian();
    return m;
}

Matrix random_symmetric(Rng& rng, int n) {
    Matrix m = random_matrix(rng, n);
    symmetrize(m);
    return m;
}

// Central finite differences of penalty_g, entry by entry.
Matrix fd_grad(const Matrix& c, const Matrix& s, const Matrix& p, double mu, bool wrt_s,
               double eps = 1e-6) {
    const int n = s.rows();
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Matrix plus = wrt_s ? s : p;
            Matrix minus = plus;
            plus(i, j) += eps;
            minus(i, j) -= eps;
            const double fp = wrt_s ? penalty_g(c, plus, p, mu) : penalty_g(c, s, plus, mu);
            const double fm = wrt_s ? penalty_g(c, minus, p, mu) : penalty_g(c, s, minus, mu);
            g(i, j) = (fp - fm) / (2.0 * eps);
        }
    return g;
}

double rel_error(const Matrix& got, const Matrix& want) {
    const double denom = std::max(frobenius_norm(want), 1e-12);
    return frobenius_norm(sub(got, want)) / denom;
}

}  // namespace

TEST_CASE("penalty_g hand examples") {
    Rng rng(3);
    const Matrix s = random_symmetric(rng, 4);
    CHECK(penalty_g(Matrix::identity(4), s, Matrix(4, 4), 1.7) == doctest::Approx(0.0));

    // p symmetric and s commuting with c: both residual parts vanish
    const Matrix c = matmul(s, s);
    Matrix p_sym = random_symmetric(rng, 4);
    CHECK(penalty_g(c, s, p_sym, 2.0) < 1e-18 * std::pow(frobenius_norm(c), 4));

    Matrix c2(2, 2);
    c2(0, 0) = 1.0;
    c2(1, 1) = 2.0;
    Matrix s2(2, 2);
    s2(0, 1) = s2(1, 0) = 1.0;
    CHECK(penalty_g(c2, s2, Matrix(2, 2), 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(penalty_g(c2, Matrix(3, 3), Matrix(2, 2), 1.0), DimensionError);
}

TEST_CASE("gradients vanish on zero residual and scale with mu") {
    Rng rng(5);
    const Matrix s = random_symmetric(rng, 4);
    const Matrix c = Matrix::identity(4);
    const Matrix p(4, 4);
    CHECK(frobenius_norm(grad_s(c, s, p, 0.8)) == doctest::Approx(0.0));
    CHECK(frobenius_norm(grad_p(c, s, p, 0.8)) == doctest::Approx(0.0));

    const Matrix cr = random_symmetric(rng, 4);
    const Matrix pr = random_matrix(rng, 4);
    const Matrix g1 = grad_s(cr, s, pr, 0.7);
    const Matrix g2 = grad_s(cr, s, pr, 1.4);
    CHECK(max_abs_diff(scaled(g1, 2.0), g2) < 1e-12 * (1.0 + max_abs(g2)));
}

TEST_CASE("grad_p hand example") {
    Matrix c(2, 2);
    c(0, 0) = 1.0;
    c(1, 1) = 2.0;
    Matrix s(2, 2);
    s(0, 1) = s(1, 0) = 1.0;
    const Matrix g = grad_p(c, s, Matrix(2, 2), 1.0);
    CHECK(g(0, 0) == doctest::Approx(0.0));
    CHECK(g(0, 1) == doctest::Approx(-2.0));
    CHECK(g(1, 0) == doctest::Approx(2.0));
    CHECK(g(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(7);
    for (int n : {3, 5, 8}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix c = random_symmetric(rng, n);
            const Matrix s = random_symmetric(rng, n);
            const Matrix p = random_matrix(rng, n);
            const double mu = 0.25 + rng.uniform();
            CHECK(rel_error(grad_s(c, s, p, mu), fd_grad(c, s, p, mu, true)) < 1e-5);
            CHECK(rel_error(grad_p(c, s, p, mu), fd_grad(c, s, p, mu, false)) < 1e-5);
        }
    }
}

TEST_CASE("grad_s stays symmetric on symmetric inputs") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix c = random_symmetric(rng, 6);
        const Matrix s = random_symmetric(rng, 6);
        const Matrix p = random_matrix(rng, 6);
        const Matrix g = grad_s(c, s, p, 0.5);
        const double scale = std::max(1.0, max_abs(g));
        CHECK(is_symmetric(g, 1e-12 * scale));
    }
}

TEST_CASE("prox_s entrywise behavior") {
    const KnownEdgeSet empty;
    CHECK(max_abs(prox_s(Matrix(4, 4), 0.3, empty)) == 0.0);

    Matrix q(3, 3);
    q(0, 1) = q(1, 0) = 0.5;
    q(0, 2) = q(2, 0) = 0.1;
    q(1, 2) = q(2, 1) = -0.4;
    q(0, 0) = 9.0;  // diagonal must be forced back to zero
    const Matrix out = prox_s(q, 0.2, empty);
    CHECK(out(0, 1) == doctest::Approx(0.3));
    CHECK(out(0, 2) == 0.0);
    CHECK(out(1, 2) == 0.0);
    CHECK(out(0, 0) == 0.0);

    const KnownEdgeSet omega(3, {{0, 1, 1.0}});
    Rng rng(11);
    const Matrix any = random_matrix(rng, 3);
    const Matrix clamped = prox_s(any, 0.2, omega);
    CHECK(clamped(0, 1) == 1.0);
    CHECK(clamped(1, 0) == 1.0);

    CHECK_THROWS_AS(prox_s(q, 0.0, empty), ConfigError);
    CHECK_THROWS_AS(prox_s(q, 0.2, KnownEdgeSet(5, {{0, 1, 1.0}})), ConfigError);
}

TEST_CASE("prox_s feasibility closure on random inputs") {
    Rng rng(13);
    const KnownEdgeSet omega(6, {{0, 3, 1.0}, {2, 4, 0.0}});
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix q = random_matrix(rng, 6);
        const Matrix out = prox_s(q, 0.05 + rng.uniform(), omega);
        CHECK(validate_gso(out).ok());
        CHECK(out(0, 3) == 1.0);
        CHECK(out(2, 4) == 0.0);
    }
}

TEST_CASE("prox_p column shrinkage") {
    Matrix q(2, 2);
    q(0, 0) = 2.0;  // column 0 has norm 2
    q(0, 1) = 0.3;  // column 1 has norm 0.3 <= tau
    const Matrix out = prox_p(q, 0.5);
    CHECK(out(0, 0) == doctest::Approx(1.5));  // scaled by 1 - 0.5/2
    CHECK(out(0, 1) == 0.0);
    CHECK(max_abs(prox_p(Matrix(3, 3), 0.2)) == 0.0);
    CHECK_THROWS_AS(prox_p(q, 0.0), ConfigError);
}

TEST_CASE("prox operators are nonexpansive") {
    Rng rng(17);
    const KnownEdgeSet omega(5, {{1, 3, 1.0}});
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix a = random_matrix(rng, 5);
        const Matrix b = random_matrix(rng, 5);
        const double gamma = 0.05 + rng.uniform();
        CHECK(frobenius_norm(sub(prox_s(a, gamma, omega), prox_s(b, gamma, omega))) <=
              frobenius_norm(sub(a, b)) * (1.0 + 1e-12));
        CHECK(frobenius_norm(sub(prox_p(a, gamma), prox_p(b, gamma))) <=
              frobenius_norm(sub(a, b)) * (1.0 + 1e-12));
    }
}

TEST_CASE("step size rule") {
    CHECK(step_size(1.0, 0.5, 0.95) == doctest::Approx(0.95));
    const double g0 = step_size(0.0, 0.5, 0.95);
    CHECK(std::isfinite(g0));
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const double sigma = rng.uniform() * 100.0;
        const double mu = 0.01 + rng.uniform();
        const double gamma = step_size(sigma, mu, 0.95);
        CHECK(gamma * 2.0 * mu * sigma * sigma < 1.0);
    }
}

TEST_CASE("objective composes its three terms") {
    CHECK(objective(Matrix(3, 3), Matrix(3, 3), Matrix::identity(3), 0.5, 0.1) ==
          doctest::Approx(0.0));

    Matrix s(3, 3);
    s(0, 1) = s(1, 0) = 0.5;
    CHECK(objective(s, Matrix(3, 3), Matrix::identity(3), 0.5, 1.0) == doctest::Approx(1.0));

    Rng rng(21);
    const Matrix c = random_symmetric(rng, 5);
    const Matrix ss = random_symmetric(rng, 5);
    const Matrix p = random_matrix(rng, 5);
    const double expected = l1_norm(ss) + 0.3 * l21_norm(p) + penalty_g(c, ss, p, 0.7);
    CHECK(objective(ss, p, c, 0.7, 0.3) == doctest::Approx(expected).epsilon(1e-12));
}

namespace {

struct ExactScene {
    GroundTruthScene scene;
    Matrix c_o;
    StreamingCovariance sc{1};
};

ExactScene exact_scene(int n, int h, std::uint64_t seed, double p_edge = 0.4) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        const Gso g = generate_er(n, p_edge, seed + attempt * 1000);
        const NodePartition part = partition_uniform(n, h, seed + 1 + attempt);
        GroundTruthScene scene = extract_blocks(g, part);
        if (frobenius_norm(scene.s_o) == 0.0) continue;
        Rng rng(seed + 2);
        const CovarianceModel model = draw_covariance(g, 3, rng);
        const int o = part.o();
        Matrix c_o(o, o);
        for (int a = 0; a < o; ++a)
            for (int b = 0; b < o; ++b)
                c_o(a, b) = model.c()(part.observed[a], part.observed[b]);
        ExactScene out{std::move(scene), c_o, StreamingCovariance::warm_start(c_o, 1000)};
        return out;
    }
}

}  // namespace

TEST_CASE("online_step holds a fully clamped truth fixed") {
    const ExactScene ex = exact_scene(6, 0, 31);
    const int o = 6;
    // clamp every pair to the truth
    std::vector<KnownEdge> clamp;
    for (int i = 0; i < o; ++i)
        for (int j = i + 1; j < o; ++j) clamp.push_back({i, j, ex.scene.s_o(i, j)});
    EstimatorConfig cfg;
    cfg.hidden_aware = false;
    cfg.known_edges = KnownEdgeSet(o, clamp);
    EstimatorState st = EstimatorState::initial(o, cfg);
    CHECK(max_abs_diff(st.s_hat, ex.scene.s_o) == 0.0);
    online_step(st, ex.sc, cfg);
    CHECK(max_abs_diff(st.s_hat, ex.scene.s_o) == 0.0);
    CHECK(max_abs(st.p_hat) == 0.0);
}

TEST_CASE("inner iterations decompose into repeated single steps") {
    const ExactScene ex = exact_scene(7, 1, 37);
    const int o = ex.scene.partition.o();
    EstimatorConfig three;
    three.inner_iters = 3;
    three.known_edges = KnownEdgeSet::sample_from(ex.scene.s_o, 0.15, 5);
    EstimatorConfig one = three;
    one.inner_iters = 1;

    EstimatorState a = EstimatorState::initial(o, three);
    EstimatorState b = a;
    online_step(a, ex.sc, three);
    for (int k = 0; k < 3; ++k) online_step(b, ex.sc, one);  // gamma frozen: same covariance
    CHECK(max_abs_diff(a.s_hat, b.s_hat) == 0.0);
    CHECK(max_abs_diff(a.p_hat, b.p_hat) == 0.0);
}

TEST_CASE("one online step strictly decreases the composite objective") {
    const ExactScene ex = exact_scene(7, 1, 41);
    const int o = ex.scene.partition.o();
    EstimatorConfig cfg;
    // clamp a true edge so the initial point is not already stationary
    std::vector<KnownEdge> clamp;
    for (int i = 0; i < o && clamp.empty(); ++i)
        for (int j = i + 1; j < o && clamp.empty(); ++j)
            if (ex.scene.s_o(i, j) != 0.0) clamp.push_back({i, j, 1.0});
    REQUIRE_FALSE(clamp.empty());
    cfg.known_edges = KnownEdgeSet(o, clamp);
    EstimatorState st = EstimatorState::initial(o, cfg);
    const double before = objective(st.s_hat, st.p_hat, ex.c_o, cfg.mu, cfg.rho);
    online_step(st, ex.sc, cfg);
    const double after = objective(st.s_hat, st.p_hat, ex.c_o, cfg.mu, cfg.rho);
    CHECK(after < before);
    CHECK(st.gamma * 2.0 * cfg.mu * ex.sc.sigma() * ex.sc.sigma() < 1.0);
}

TEST_CASE("hidden-unaware runs keep p identically zero") {
    const ExactScene ex = exact_scene(8, 2, 43);
    const int o = ex.scene.partition.o();
    EstimatorConfig cfg;
    cfg.hidden_aware = false;
    cfg.inner_iters = 4;
    cfg.known_edges = KnownEdgeSet::sample_from(ex.scene.s_o, 0.15, 9);
    EstimatorState st = EstimatorState::initial(o, cfg);
    for (int t = 0; t < 25; ++t) online_step(st, ex.sc, cfg);
    CHECK(max_abs(st.p_hat) == 0.0);
}

TEST_CASE("batch_solve with the identity covariance keeps only clamps") {
    EstimatorConfig cfg;
    cfg.known_edges = KnownEdgeSet(5, {{0, 2, 1.0}});
    const BatchResult res = batch_solve(Matrix::identity(5), cfg, 5000, 1e-12);
    CHECK(res.converged);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const bool clamped = (i == 0 && j == 2) || (i == 2 && j == 0);
            CHECK(res.s(i, j) == (clamped ? 1.0 : 0.0));
        }
    CHECK(max_abs(res.p) == 0.0);
    for (std::size_t k = 1; k < res.objectives.size(); ++k)
        CHECK(res.objectives[k] <=
              res.objectives[k - 1] + 1e-12 * std::max(1.0, std::fabs(res.objectives[k - 1])));
}

TEST_CASE("batch_solve stopping-rule edges") {
    const ExactScene ex = exact_scene(7, 1, 47);
    EstimatorConfig cfg;
    cfg.known_edges = KnownEdgeSet::sample_from(ex.scene.s_o, 0.15, 11);
    const BatchResult one =
        batch_solve(ex.c_o, cfg, 100, std::numeric_limits<double>::infinity());
    CHECK(one.iterations == 1);
    CHECK(one.converged);

    const BatchResult capped = batch_solve(ex.c_o, cfg, 3, 0.0);
    CHECK(capped.iterations == 3);
    CHECK_FALSE(capped.converged);

    Matrix bad(3, 3);
    bad(0, 0) = -1.0;
    EstimatorConfig plain;
    CHECK_THROWS_AS(batch_solve(bad, plain, 10, 1e-6), NumericError);
}

TEST_CASE("checkpoint round trip is exact") {
    Rng rng(53);
    EstimatorState st;
    st.s_hat = random_matrix(rng, 5);
    st.p_hat = random_matrix(rng, 5);
    st.gamma = 0.12345678901234567;
    st.t = 9876543210L;
    std::stringstream ss;
    save_checkpoint(st, ss);
    const EstimatorState back = load_checkpoint(ss);
    CHECK(back.t == st.t);
    CHECK(back.gamma == st.gamma);
    CHECK(max_abs_diff(back.s_hat, st.s_hat) == 0.0);
    CHECK(max_abs_diff(back.p_hat, st.p_hat) == 0.0);

    std::istringstream bad("gamma 1\n");
    CHECK_THROWS_AS(load_checkpoint(bad), IngestError);
}

TEST_CASE("tracking diagnostics on a small static scene") {
    const Gso g = generate_er(7, 0.45, 61);
    const NodePartition part = partition_uniform(7, 1, 62);
    const GroundTruthScene scene = extract_blocks(g, part);
    REQUIRE(frobenius_norm(scene.s_o) > 0.0);
    Rng rng(63);
    const CovarianceModel model = draw_covariance(g, 3, rng);
    const Matrix signals = sample_signals(model, 320, 64);
    const int o = part.o();
    Matrix obs(o, signals.cols());
    for (int a = 0; a < o; ++a)
        for (int t = 0; t < signals.cols(); ++t)
            obs(a, t) = signals(part.observed[a], t);

    EstimatorConfig cfg;
    cfg.mu = 0.05;
    cfg.known_edges = KnownEdgeSet::sample_from(scene.s_o, 0.15, 65);
    TrackingOptions opt;
    opt.warmup = 20;
    opt.batch_tol = 1e-8;
    const TrackingDiagnostics diag = tracking_diagnostics(obs, cfg, opt);

    REQUIRE(diag.sample_index.size() == 301u);  // t = 0..300
    CHECK(diag.sample_index.front() == 0);
    CHECK(diag.lhs.front() >= 0.0);
    // L recomputed from the emitted factors matches the running product
    double log_l = 0.0;
    constexpr double ln10 = 2.302585092994045684;
    for (std::size_t i = 0; i < diag.gammas.size(); ++i) {
        log_l += std::log(5.0 * diag.gammas[i] * (diag.sigmas[i] + 1.0) * (diag.sigmas[i] + 1.0));
        if (i < diag.sample_index.size())
            CHECK(diag.log10_l[i] == log_l / ln10);
    }
    // offline optima settle: late variability far below the early one
    const double v_early = diag.v[1];
    const double v_late = diag.v.back();
    CHECK(v_late < v_early);
    for (char r : diag.reliable) CHECK(r == 1);

    TrackingOptions strided = opt;
    strided.stride = 50;
    const TrackingDiagnostics thin = tracking_diagnostics(obs, cfg, strided);
    for (std::size_t i = 0; i < thin.sample_index.size(); ++i)
        CHECK(thin.sample_index[i] % 50 == 0);
}
