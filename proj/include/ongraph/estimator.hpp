#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ongraph/graph.hpp"
#include "ongraph/matrix.hpp"
#include "ongraph/signal.hpp"

namespace ongraph {

struct EstimatorConfig {
    double mu = 0.5;          // commutativity penalty weight
    double rho = 0.1;         // group-sparsity weight on P
    double step_safety = 0.95;  // kappa in (0,1)
    int inner_iters = 1;      // proximal-gradient repetitions per sample
    bool hidden_aware = true; // false: P is pinned at zero (hidden-unaware baseline)
    KnownEdgeSet known_edges;

    void validate(int o) const;  // throws ConfigError
};

struct EstimatorState {
    Matrix s_hat;
    Matrix p_hat;
    double gamma = 0.0;
    long t = 0;

    // Feasible zero point: all entries zero except clamped known edges.
    static EstimatorState initial(int o, const EstimatorConfig& cfg);
};

// R = c s + p - s c - p^T
Matrix commutation_residual(const Matrix& c, const Matrix& s, const Matrix& p);

// (mu/2) ||R||_F^2
double penalty_g(const Matrix& c, const Matrix& s, const Matrix& p, double mu);

// mu (c R - R c)
Matrix grad_s(const Matrix& c, const Matrix& s, const Matrix& p, double mu);

// 2 mu R
Matrix grad_p(const Matrix& c, const Matrix& s, const Matrix& p, double mu);

// Symmetrize, then entrywise: diagonal -> 0, clamped entries -> their known
// values, all else max(0, q_ij - gamma).
Matrix prox_s(const Matrix& q, double gamma, const KnownEdgeSet& known_edges);

// Column-wise group shrinkage: col_j -> max(0, 1 - tau/||col_j||_2) col_j.
Matrix prox_p(const Matrix& q, double tau);

// kappa / (2 mu max(sigma^2, sigma_floor^2)); guarantees gamma*2*mu*sigma^2 < 1.
double step_size(double sigma, double mu, double step_safety);

// ||s||_1 + rho ||p||_{2,1} + penalty_g(c, s, p, mu)
double objective(const Matrix& s, const Matrix& p, const Matrix& c, double mu, double rho);

// Scratch buffers reused across steps; optional but saves allocation churn
// in per-sample loops.
struct StepWorkspace {
    Matrix cs, a, at, r, cr, crt, b;
};

// One online update from the current covariance estimate: refreshes gamma
// from sc.sigma(), then runs cfg.inner_iters proximal-gradient sweeps with
// that step. Hidden-unaware configs skip the P update entirely.
void online_step(EstimatorState& state, const StreamingCovariance& sc,
                 const EstimatorConfig& cfg, StepWorkspace* ws = nullptr);

struct BatchResult {
    Matrix s, p;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objectives;  // value after each iteration
};

// Proximal-gradient iterations with a fixed covariance until the iterate
// change drops below tol or max_iters is hit. The objective sequence is
// checked to be non-increasing (1e-12 relative slack) and a violation
// throws NumericError.
BatchResult batch_solve(const Matrix& c, const EstimatorConfig& cfg, int max_iters, double tol,
                        const Matrix* warm_s = nullptr, const Matrix* warm_p = nullptr);

// Plain-text checkpoint: "t", "gamma", then s_hat and p_hat as dense
// row-major CSV blocks at 17 significant digits (exact round trip).
void save_checkpoint(const EstimatorState& state, std::ostream& os);
void save_checkpoint(const EstimatorState& state, const std::string& path);
EstimatorState load_checkpoint(std::istream& is);
EstimatorState load_checkpoint(const std::string& path);

struct TrackingOptions {
    int stride = 1;
    int warmup = 16;          // samples absorbed into the prior covariance
    int batch_max_iters = 50000;
    double batch_tol = 1e-9;
};

// Per-sample comparison of the online iterates against freshly solved batch
// optima, with the product constants of the tracking bound. l and rhs are
// kept in log10 since the running product overflows quickly.
struct TrackingDiagnostics {
    std::vector<long> sample_index;
    std::vector<double> lhs;        // ||S_hat - S*|| + ||P_hat - P*||
    std::vector<double> v;          // ||S*_{t+1} - S*_t|| + ||P*_{t+1} - P*_t||
    std::vector<double> log10_l;    // log10 of the running product L_t
    std::vector<double> log10_rhs;  // log10 of the bound's right-hand side
    std::vector<char> satisfied;    // lhs <= rhs at this t
    std::vector<char> reliable;     // batch solves converged at this t
    std::vector<double> gammas;     // gamma_i for every i (dense, from i=0)
    std::vector<double> sigmas;     // sigma_i for every i (dense, from i=0)
};

// Streams observed_signals (node x time) through the online estimator while
// solving the batch problem at every stride-th sample. Exact bound sums
// require stride == 1; larger strides only thin the emitted rows and
// accumulate the variability sum over the sampled indices.
TrackingDiagnostics tracking_diagnostics(const Matrix& observed_signals,
                                         const EstimatorConfig& cfg,
                                         const TrackingOptions& opt = {});

}  // namespace ongraph
