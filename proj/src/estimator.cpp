#include "ongraph/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ongraph/eigensolve.hpp"
#include "ongraph/errors.hpp"
#include "ongraph/kernels.hpp"

namespace ongraph {

void EstimatorConfig::validate(int o) const {
    std::string problems;
    if (!(mu > 0.0)) problems += "mu must be positive; ";
    if (!(rho > 0.0)) problems += "rho must be positive; ";
    if (!(step_safety > 0.0 && step_safety < 1.0)) problems += "step_safety must be in (0,1); ";
    if (inner_iters < 1) problems += "inner_iters must be >= 1; ";
    if (!known_edges.empty() && known_edges.n() != o)
        problems += "known edge set indexed for a different block size; ";
    if (!problems.empty()) throw ConfigError("estimator config: " + problems);
}

EstimatorState EstimatorState::initial(int o, const EstimatorConfig& cfg) {
    EstimatorState st;
    st.s_hat = prox_s(Matrix(o, o), 1.0, cfg.known_edges);
    st.p_hat = Matrix(o, o);
    st.gamma = 0.0;
    st.t = 0;
    return st;
}

namespace {

void require_square_conformal(const Matrix& c, const Matrix& s, const Matrix& p) {
    if (c.rows() != c.cols() || s.rows() != s.cols() || p.rows() != p.cols())
        throw DimensionError("estimator: matrices must be square");
    if (c.rows() != s.rows() || c.rows() != p.rows())
        throw DimensionError("estimator: conformal dimensions required");
}

}  // namespace

Matrix commutation_residual(const Matrix& c, const Matrix& s, const Matrix& p) {
    require_square_conformal(c, s, p);
    const auto& ops = kernels::active();
    Matrix r = matmul(c, s);
    ops.vadd(r.data(), r.data(), p.data(), r.size());
    const Matrix sc = matmul(s, c);
    ops.vsub(r.data(), r.data(), sc.data(), r.size());
    const Matrix pt = transpose(p);
    ops.vsub(r.data(), r.data(), pt.data(), r.size());
    return r;
}

double penalty_g(const Matrix& c, const Matrix& s, const Matrix& p, double mu) {
    const Matrix r = commutation_residual(c, s, p);
    const double f = frobenius_norm(r);
    return 0.5 * mu * f * f;
}

Matrix grad_s(const Matrix& c, const Matrix& s, const Matrix& p, double mu) {
    const Matrix r = commutation_residual(c, s, p);
    Matrix out = sub(matmul(c, r), matmul(r, c));
    kernels::active().scale(out.data(), out.data(), mu, out.size());
    return out;
}

Matrix grad_p(const Matrix& c, const Matrix& s, const Matrix& p, double mu) {
    Matrix r = commutation_residual(c, s, p);
    kernels::active().scale(r.data(), r.data(), 2.0 * mu, r.size());
    return r;
}

Matrix prox_s(const Matrix& q, double gamma, const KnownEdgeSet& known_edges) {
    if (q.rows() != q.cols()) throw DimensionError("prox_s: matrix not square");
    if (!(gamma > 0.0)) throw ConfigError("prox_s: gamma must be positive");
    if (!known_edges.empty() && known_edges.n() != q.rows())
        throw ConfigError("prox_s: known edge set indexed for a different block size");
    Matrix b = q;
    symmetrize(b);
    Matrix out(q.rows(), q.cols());
    const auto& ops = kernels::active();
    if (known_edges.empty())
        ops.soft_threshold_nonneg(out.data(), b.data(), gamma, b.size());
    else
        ops.masked_soft_threshold(out.data(), b.data(), known_edges.mask().data(),
                                  known_edges.values().data(), gamma, b.size());
    for (int i = 0; i < out.rows(); ++i) out(i, i) = 0.0;
    return out;
}

Matrix prox_p(const Matrix& q, double tau) {
    if (!(tau > 0.0)) throw ConfigError("prox_p: tau must be positive");
    const int rows = q.rows();
    const int cols = q.cols();
    Matrix out(rows, cols);
    if (q.empty()) return out;
    std::vector<double> sums(static_cast<std::size_t>(cols), 0.0);
    const auto& ops = kernels::active();
    ops.colwise_sumsq(sums.data(), q.data(), rows, cols);
    for (int j = 0; j < cols; ++j) {
        const double norm = std::sqrt(sums[static_cast<std::size_t>(j)]);
        sums[static_cast<std::size_t>(j)] = norm > tau ? 1.0 - tau / norm : 0.0;
    }
    ops.colwise_scale(out.data(), q.data(), sums.data(), rows, cols);
    return out;
}

double step_size(double sigma, double mu, double step_safety) {
    constexpr double sigma_floor = 1e-8;
    const double s2 = std::max(sigma * sigma, sigma_floor * sigma_floor);
    return step_safety / (2.0 * mu * s2);
}

double objective(const Matrix& s, const Matrix& p, const Matrix& c, double mu, double rho) {
    return l1_norm(s) + rho * l21_norm(p) + penalty_g(c, s, p, mu);
}

namespace {

void ensure_workspace(StepWorkspace& w, int n) {
    if (w.cs.rows() != n) {
        w.cs = Matrix(n, n);
        w.a = Matrix(n, n);
        w.at = Matrix(n, n);
        w.r = Matrix(n, n);
        w.cr = Matrix(n, n);
        w.crt = Matrix(n, n);
        w.b = Matrix(n, n);
    }
}

// R = (c s + p) - (c s + p)^T, valid whenever c and s are symmetric (the
// on-path invariant); equals c s + p - s c - p^T there.
void residual_fast(Matrix& r, const Matrix& c, const Matrix& s, const Matrix& p,
                   StepWorkspace& w) {
    const int n = s.rows();
    const auto& ops = kernels::active();
    ops.matmul(w.cs.data(), c.data(), s.data(), n, n, n);
    ops.vadd(w.a.data(), w.cs.data(), p.data(), w.a.size());
    ops.transpose(w.at.data(), w.a.data(), n, n);
    ops.vsub(r.data(), w.a.data(), w.at.data(), r.size());
}

void prox_s_inplace(Matrix& s, Matrix& b, double gamma, const KnownEdgeSet& known_edges) {
    symmetrize(b);
    const auto& ops = kernels::active();
    if (known_edges.empty())
        ops.soft_threshold_nonneg(s.data(), b.data(), gamma, b.size());
    else
        ops.masked_soft_threshold(s.data(), b.data(), known_edges.mask().data(),
                                  known_edges.values().data(), gamma, b.size());
    for (int i = 0; i < s.rows(); ++i) s(i, i) = 0.0;
}

void prox_p_inplace(Matrix& p, const Matrix& b, double tau, std::vector<double>& sums) {
    const int n = b.rows();
    sums.assign(static_cast<std::size_t>(n), 0.0);
    const auto& ops = kernels::active();
    ops.colwise_sumsq(sums.data(), b.data(), n, n);
    for (int j = 0; j < n; ++j) {
        const double norm = std::sqrt(sums[static_cast<std::size_t>(j)]);
        sums[static_cast<std::size_t>(j)] = norm > tau ? 1.0 - tau / norm : 0.0;
    }
    ops.colwise_scale(p.data(), b.data(), sums.data(), n, n);
}

// One proximal-gradient sweep at a fixed covariance: gradient step + prox on
// S, then (hidden-aware only) gradient step + prox on P at the updated S.
void inner_sweep(Matrix& s, Matrix& p, const Matrix& c, const EstimatorConfig& cfg,
                 double gamma_s, double gamma_p, StepWorkspace& w, std::vector<double>& sums) {
    const int n = s.rows();
    const auto& ops = kernels::active();
    ensure_workspace(w, n);

    residual_fast(w.r, c, s, p, w);
    // grad_s = mu (c R - R c) = mu (c R + (c R)^T) since R is antisymmetric
    ops.matmul(w.cr.data(), c.data(), w.r.data(), n, n, n);
    ops.transpose(w.crt.data(), w.cr.data(), n, n);
    ops.fma3(w.b.data(), s.data(), -gamma_s * cfg.mu, w.cr.data(), w.crt.data(), w.b.size());
    prox_s_inplace(s, w.b, gamma_s, cfg.known_edges);

    if (cfg.hidden_aware) {
        residual_fast(w.r, c, s, p, w);
        ops.axpy(w.b.data(), p.data(), -2.0 * gamma_p * cfg.mu, w.r.data(), w.b.size());
        prox_p_inplace(p, w.b, gamma_p * cfg.rho, sums);
    }
}

// The smooth curvature of the P block is 4*mu regardless of sigma. Online
// steps follow the shared per-sample step but cap it at step_safety/(4*mu)
// so a small-sigma covariance cannot turn the P update into an ascent step.
// The batch solver takes the full safe P step: the shared step is sized for
// the S block's sigma^2 curvature and makes P crawl when sigma is large.
double online_p_step(double gamma, const EstimatorConfig& cfg) {
    return std::min(gamma, cfg.step_safety / (4.0 * cfg.mu));
}

double batch_p_step(const EstimatorConfig& cfg) { return cfg.step_safety / (4.0 * cfg.mu); }

}  // namespace

void online_step(EstimatorState& state, const StreamingCovariance& sc, const EstimatorConfig& cfg,
                 StepWorkspace* ws) {
    const int o = sc.o();
    cfg.validate(o);
    if (state.s_hat.rows() != o || state.s_hat.cols() != o || state.p_hat.rows() != o ||
        state.p_hat.cols() != o)
        throw DimensionError("online_step: state does not match covariance block size");

    const double gamma = step_size(sc.sigma(), cfg.mu, cfg.step_safety);
    const double gamma_p = online_p_step(gamma, cfg);
    state.gamma = gamma;
    state.t = sc.t();

    StepWorkspace local;
    StepWorkspace& w = ws ? *ws : local;
    std::vector<double> sums;
    for (int k = 0; k < cfg.inner_iters; ++k)
        inner_sweep(state.s_hat, state.p_hat, sc.c_hat(), cfg, gamma, gamma_p, w, sums);
}

BatchResult batch_solve(const Matrix& c, const EstimatorConfig& cfg, int max_iters, double tol,
                        const Matrix* warm_s, const Matrix* warm_p) {
    const int o = c.rows();
    if (c.cols() != o) throw DimensionError("batch_solve: covariance not square");
    cfg.validate(o);
    if (max_iters < 1) throw ConfigError("batch_solve: max_iters must be >= 1");
    if (!is_symmetric(c, 1e-12 * std::max(1.0, max_abs(c))))
        throw NumericError("batch_solve: covariance not symmetric");
    const auto [lo, hi] = eig_range(c);
    if (lo < -1e-9 * std::max(hi, 0.0))
        throw NumericError("batch_solve: covariance not PSD within tolerance");
    const double sigma = std::max(std::fabs(lo), std::fabs(hi));

    const double gamma = step_size(sigma, cfg.mu, cfg.step_safety);
    const double gamma_p = batch_p_step(cfg);

    EstimatorState st = EstimatorState::initial(o, cfg);
    if (warm_s) {
        if (!warm_s->same_shape(st.s_hat)) throw DimensionError("batch_solve: warm s shape");
        st.s_hat = *warm_s;
    }
    if (warm_p) {
        if (!warm_p->same_shape(st.p_hat)) throw DimensionError("batch_solve: warm p shape");
        st.p_hat = *warm_p;
    }

    BatchResult out;
    out.objectives.reserve(static_cast<std::size_t>(std::min(max_iters, 1 << 20)) + 1);
    out.objectives.push_back(objective(st.s_hat, st.p_hat, c, cfg.mu, cfg.rho));

    StepWorkspace w;
    std::vector<double> sums;
    Matrix s_prev(o, o), p_prev(o, o);
    for (int k = 1; k <= max_iters; ++k) {
        s_prev = st.s_hat;
        p_prev = st.p_hat;
        inner_sweep(st.s_hat, st.p_hat, c, cfg, gamma, gamma_p, w, sums);
        const double obj = objective(st.s_hat, st.p_hat, c, cfg.mu, cfg.rho);
        const double prev = out.objectives.back();
        if (obj > prev + 1e-12 * std::max(1.0, std::fabs(prev)))
            throw NumericError("batch_solve: objective increased (step size misconfigured?)");
        out.objectives.push_back(obj);
        out.iterations = k;
        const double delta = frobenius_norm(sub(st.s_hat, s_prev)) +
                             frobenius_norm(sub(st.p_hat, p_prev));
        if (delta < tol) {
            out.converged = true;
            break;
        }
    }
    out.s = std::move(st.s_hat);
    out.p = std::move(st.p_hat);
    return out;
}

namespace {

void write_matrix_csv(const Matrix& m, std::ostream& os) {
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            os << (j ? "," : "") << buf;
        }
        os << "\n";
    }
}

Matrix parse_matrix_lines(const std::vector<std::string>& lines) {
    const int rows = static_cast<int>(lines.size());
    if (rows == 0) throw IngestError("checkpoint: empty matrix block");
    std::vector<double> values;
    int cols = -1;
    for (const auto& line : lines) {
        std::istringstream ls(line);
        std::string cell;
        int got = 0;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw IngestError("checkpoint: non-numeric matrix entry");
            values.push_back(v);
            ++got;
        }
        if (cols < 0)
            cols = got;
        else if (cols != got)
            throw IngestError("checkpoint: ragged matrix block");
    }
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = values[static_cast<std::size_t>(i) * cols + j];
    return m;
}

}  // namespace

void save_checkpoint(const EstimatorState& state, std::ostream& os) {
    char buf[64];
    os << "t " << state.t << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", state.gamma);
    os << "gamma " << buf << "\n";
    os << "s_hat\n";
    write_matrix_csv(state.s_hat, os);
    os << "p_hat\n";
    write_matrix_csv(state.p_hat, os);
}

void save_checkpoint(const EstimatorState& state, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    save_checkpoint(state, os);
    if (!os) throw IoError("write failed: " + path);
}

EstimatorState load_checkpoint(std::istream& is) {
    EstimatorState st;
    std::string line;
    if (!std::getline(is, line) || line.rfind("t ", 0) != 0)
        throw IngestError("checkpoint: missing 't' line");
    st.t = std::stol(line.substr(2));
    if (!std::getline(is, line) || line.rfind("gamma ", 0) != 0)
        throw IngestError("checkpoint: missing 'gamma' line");
    st.gamma = std::strtod(line.substr(6).c_str(), nullptr);
    if (!std::getline(is, line) || line != "s_hat")
        throw IngestError("checkpoint: missing 's_hat' marker");
    std::vector<std::string> s_lines, p_lines;
    bool in_p = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line == "p_hat") {
            in_p = true;
            continue;
        }
        (in_p ? p_lines : s_lines).push_back(line);
    }
    if (!in_p) throw IngestError("checkpoint: missing 'p_hat' marker");
    st.s_hat = parse_matrix_lines(s_lines);
    st.p_hat = parse_matrix_lines(p_lines);
    if (st.s_hat.rows() != st.s_hat.cols() || !st.s_hat.same_shape(st.p_hat))
        throw IngestError("checkpoint: matrix blocks are not square and conformal");
    return st;
}

EstimatorState load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IngestError("cannot open checkpoint: " + path);
    return load_checkpoint(is);
}

TrackingDiagnostics tracking_diagnostics(const Matrix& observed_signals,
                                         const EstimatorConfig& cfg,
                                         const TrackingOptions& opt) {
    const int o = observed_signals.rows();
    const long total = observed_signals.cols();
    cfg.validate(o);
    if (opt.stride < 1) throw ConfigError("tracking: stride must be >= 1");
    if (opt.warmup < 1 || opt.warmup >= total)
        throw ConfigError("tracking: warmup must leave samples to stream");

    // Prior covariance from the warmup block so sigma_0 > 0 and gamma_0 is a
    // meaningful step.
    Matrix c0(o, o);
    std::vector<double> x(static_cast<std::size_t>(o));
    for (int w = 0; w < opt.warmup; ++w) {
        for (int i = 0; i < o; ++i) x[static_cast<std::size_t>(i)] = observed_signals(i, w);
        kernels::active().rank_one_cov_update(c0.data(), x.data(), static_cast<double>(w + 1), o);
    }
    StreamingCovariance sc = StreamingCovariance::warm_start(std::move(c0), opt.warmup);

    const long steps = total - opt.warmup;
    TrackingDiagnostics diag;
    diag.gammas.reserve(static_cast<std::size_t>(steps) + 1);
    diag.sigmas.reserve(static_cast<std::size_t>(steps) + 1);

    EstimatorState online = EstimatorState::initial(o, cfg);
    BatchResult star = batch_solve(sc.c_hat(), cfg, opt.batch_max_iters, opt.batch_tol);
    bool star_ok = star.converged;
    const double gap0 = frobenius_norm(sub(online.s_hat, star.s)) +
                        frobenius_norm(sub(online.p_hat, star.p));

    diag.sigmas.push_back(sc.sigma());
    diag.gammas.push_back(step_size(sc.sigma(), cfg.mu, cfg.step_safety));
    double log_l = std::log(5.0 * diag.gammas[0] * (diag.sigmas[0] + 1.0) *
                            (diag.sigmas[0] + 1.0));  // log L_0
    double sum_v = 0.0;                               // gap-normalized variability sum
    constexpr double ln10 = 2.302585092994045684;

    diag.sample_index.push_back(0);
    diag.lhs.push_back(gap0);
    diag.v.push_back(0.0);
    diag.log10_l.push_back(log_l / ln10);
    diag.log10_rhs.push_back(gap0 > 0.0 ? std::log10(gap0) : -std::numeric_limits<double>::infinity());
    diag.satisfied.push_back(1);  // rhs at t=0 equals gap0 = lhs
    diag.reliable.push_back(star_ok ? 1 : 0);

    for (long t = 1; t <= steps; ++t) {
        for (int i = 0; i < o; ++i)
            x[static_cast<std::size_t>(i)] = observed_signals(i, opt.warmup + t - 1);
        sc.update(x);
        online_step(online, sc, cfg);
        diag.sigmas.push_back(sc.sigma());
        diag.gammas.push_back(online.gamma);

        const double log_l_prev = log_l;  // log L_{t-1}
        log_l += std::log(5.0 * online.gamma * (sc.sigma() + 1.0) * (sc.sigma() + 1.0));

        const bool solve_here = opt.stride == 1 || t % opt.stride == 0 || (t + 1) % opt.stride == 0;
        bool have_v = false;
        double v_t = 0.0;
        bool rel = star_ok;
        if (solve_here) {
            const bool prev_solved = star_ok;
            const Matrix prev_s = star.s;
            const Matrix prev_p = star.p;
            const bool prev_adjacent = opt.stride == 1 || (t - 1) % opt.stride == 0 ||
                                       t % opt.stride == 0;
            star = batch_solve(sc.c_hat(), cfg, opt.batch_max_iters, opt.batch_tol, &star.s,
                               &star.p);
            star_ok = star.converged;
            rel = star_ok && prev_solved;
            if (prev_adjacent) {
                v_t = frobenius_norm(sub(star.s, prev_s)) + frobenius_norm(sub(star.p, prev_p));
                have_v = true;
                // v_{t-1} / L_{t-1}, evaluated in logs to dodge overflow
                if (v_t > 0.0) sum_v += std::exp(std::log(v_t) - log_l_prev);
            }
        }

        if (t % opt.stride == 0) {
            const double lhs = frobenius_norm(sub(online.s_hat, star.s)) +
                               frobenius_norm(sub(online.p_hat, star.p));
            const double bracket = gap0 + sum_v;
            const double log10_rhs =
                bracket > 0.0 ? (log_l_prev / ln10 + std::log10(bracket))
                              : -std::numeric_limits<double>::infinity();
            const double log10_lhs =
                lhs > 0.0 ? std::log10(lhs) : -std::numeric_limits<double>::infinity();
            diag.sample_index.push_back(t);
            diag.lhs.push_back(lhs);
            diag.v.push_back(have_v ? v_t : std::numeric_limits<double>::quiet_NaN());
            diag.log10_l.push_back(log_l / ln10);
            diag.log10_rhs.push_back(log10_rhs);
            diag.satisfied.push_back(log10_lhs <= log10_rhs ? 1 : 0);
            diag.reliable.push_back(rel ? 1 : 0);
        }
    }
    return diag;
}

}  // namespace ongraph
