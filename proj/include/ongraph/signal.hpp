#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ongraph/graph.hpp"
#include "ongraph/matrix.hpp"
#include "ongraph/rng.hpp"

namespace ongraph {

struct PolynomialFilter {
    std::vector<double> coeffs;  // h_0 ... h_{L-1}
    void validate() const;       // nonempty, at least one nonzero coefficient
};

// Covariance built as (sum_l h_l S^l)^2: symmetric, PSD, and commuting with
// its source GSO by construction.
class CovarianceModel {
public:
    static CovarianceModel build(const Gso& s, const PolynomialFilter& filter);

    // Wraps an explicit covariance (symmetric, PSD within 1e-9 * spectral
    // norm). source is optional; commutativity is only guaranteed for built
    // models.
    static CovarianceModel from_matrix(Matrix c, Matrix source = {});

    const Matrix& c() const { return c_; }
    const Matrix& source_gso() const { return source_; }
    double spectral() const { return spectral_; }
    int n() const { return c_.rows(); }

private:
    CovarianceModel() = default;
    Matrix c_;
    Matrix source_;
    double spectral_ = 0.0;
};

CovarianceModel polynomial_covariance(const Gso& s, const PolynomialFilter& filter);

// Draws standard-normal coefficients of the given order, rejecting filters
// whose covariance is numerically rank-deficient (min eig < rank_tol * max).
CovarianceModel draw_covariance(const Gso& s, int filter_order, Rng& rng,
                                double rank_tol = 1e-8);

// n x count matrix whose columns are i.i.d. N(0, model.c) samples, generated
// through the symmetric PSD square root. Deterministic per seed.
Matrix sample_signals(const CovarianceModel& model, int count, std::uint64_t seed);

// Running sample covariance of an observed-node stream with 1/t weighting;
// the incoming sample at time t carries weight 1/t. Tracks the spectral
// norm after every update. Single-owner mutable state.
class StreamingCovariance {
public:
    explicit StreamingCovariance(int o) : c_hat_(o, o), t_(0), sigma_(0.0) {}

    // Begins from a prior covariance estimate weighted as t0 samples.
    // c0 must be symmetric and PSD within 1e-9 * spectral norm.
    static StreamingCovariance warm_start(Matrix c0, long t0);

    void update(const std::vector<double>& x);
    void update(const double* x, int len);

    const Matrix& c_hat() const { return c_hat_; }
    long t() const { return t_; }
    double sigma() const { return sigma_; }
    int o() const { return c_hat_.rows(); }

private:
    Matrix c_hat_;
    long t_;
    double sigma_;
    std::vector<double> power_warm_;
};

// Signal stream CSV: header "node_0,...,node_{N-1}", one row per time step.
// In-memory streams are node x time (columns are samples).
void write_signal_csv(const Matrix& signals, std::ostream& os);
void write_signal_csv(const Matrix& signals, const std::string& path);
struct SignalCsv {
    std::vector<std::string> columns;
    Matrix signals;  // node x time
};
SignalCsv read_signal_csv(std::istream& is);
SignalCsv read_signal_csv(const std::string& path);

}  // namespace ongraph
