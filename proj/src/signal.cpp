#include "ongraph/signal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ongraph/eigensolve.hpp"
#include "ongraph/errors.hpp"
#include "ongraph/kernels.hpp"

namespace ongraph {

void PolynomialFilter::validate() const {
    if (coeffs.empty()) throw ConfigError("polynomial filter needs at least one coefficient");
    for (double h : coeffs)
        if (h != 0.0) return;
    throw ConfigError("polynomial filter must have a nonzero coefficient");
}

CovarianceModel CovarianceModel::build(const Gso& s, const PolynomialFilter& filter) {
    filter.validate();
    const int n = s.n();

    // m = sum_l h_l S^l, accumulated through explicit powers.
    Matrix m(n, n);
    Matrix power = Matrix::identity(n);
    for (std::size_t l = 0; l < filter.coeffs.size(); ++l) {
        if (l > 0) power = matmul(power, s.entries());
        kernels::active().axpy(m.data(), m.data(), filter.coeffs[l], power.data(), m.size());
    }
    // m is mathematically symmetric; kill rounding drift so m*m is bitwise
    // symmetric.
    symmetrize(m);

    CovarianceModel model;
    model.c_ = matmul(m, m);
    model.source_ = s.entries();
    model.spectral_ = spectral_norm(model.c_);
    return model;
}

CovarianceModel CovarianceModel::from_matrix(Matrix c, Matrix source) {
    if (c.rows() != c.cols()) throw DimensionError("covariance model: matrix not square");
    if (!is_symmetric(c, 1e-12 * std::max(1.0, max_abs(c))))
        throw NumericError("covariance model: matrix not symmetric");
    const auto [lo, hi] = eig_range(c);
    if (lo < -1e-9 * std::max(hi, 0.0))
        throw NumericError("covariance model: matrix not PSD within tolerance");
    CovarianceModel model;
    model.c_ = std::move(c);
    model.source_ = std::move(source);
    model.spectral_ = std::max(std::fabs(lo), std::fabs(hi));
    return model;
}

CovarianceModel polynomial_covariance(const Gso& s, const PolynomialFilter& filter) {
    return CovarianceModel::build(s, filter);
}

CovarianceModel draw_covariance(const Gso& s, int filter_order, Rng& rng, double rank_tol) {
    if (filter_order < 1) throw ConfigError("draw_covariance: filter order must be >= 1");
    for (int attempt = 0; attempt < 64; ++attempt) {
        PolynomialFilter f;
        f.coeffs.resize(static_cast<std::size_t>(filter_order));
        for (double& h : f.coeffs) h = rng.gaussian();
        CovarianceModel model = CovarianceModel::build(s, f);
        const auto [lo, hi] = eig_range(model.c());
        if (hi > 0.0 && lo >= rank_tol * hi) return model;
    }
    throw NumericError("draw_covariance: could not draw a well-conditioned covariance");
}

Matrix sample_signals(const CovarianceModel& model, int count, std::uint64_t seed) {
    if (count < 0) throw ConfigError("sample_signals: negative count");
    const int n = model.n();
    Matrix out(n, count);
    if (count == 0) return out;

    const auto [lo, hi] = eig_range(model.c());
    if (lo < -1e-9 * std::max(hi, 0.0))
        throw NumericError("sample_signals: covariance is not PSD within tolerance");
    const Matrix root = psd_sqrt(model.c());

    Rng rng(seed);
    std::vector<double> z(static_cast<std::size_t>(n));
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = 0; r < count; ++r) {
        for (double& v : z) v = rng.gaussian();
        kernels::active().matvec(x.data(), root.data(), z.data(), n, n);
        for (int i = 0; i < n; ++i) out(i, r) = x[static_cast<std::size_t>(i)];
    }
    return out;
}

StreamingCovariance StreamingCovariance::warm_start(Matrix c0, long t0) {
    if (c0.rows() != c0.cols()) throw DimensionError("warm_start: matrix not square");
    if (t0 < 0) throw ConfigError("warm_start: negative sample count");
    if (!is_symmetric(c0, 1e-12 * std::max(1.0, max_abs(c0))))
        throw NumericError("warm_start: prior covariance not symmetric");
    const auto [lo, hi] = eig_range(c0);
    if (lo < -1e-9 * std::max(hi, 0.0))
        throw NumericError("warm_start: prior covariance not PSD within tolerance");
    StreamingCovariance sc(c0.rows());
    sc.c_hat_ = std::move(c0);
    sc.t_ = t0;
    sc.sigma_ = spectral_norm(sc.c_hat_, &sc.power_warm_);
    return sc;
}

void StreamingCovariance::update(const std::vector<double>& x) {
    update(x.data(), static_cast<int>(x.size()));
}

void StreamingCovariance::update(const double* x, int len) {
    if (len != o()) throw DimensionError("cov update: sample length differs from block size");
    ++t_;
    kernels::active().rank_one_cov_update(c_hat_.data(), x, static_cast<double>(t_), o());
    sigma_ = spectral_norm(c_hat_, &power_warm_);
}

void write_signal_csv(const Matrix& signals, std::ostream& os) {
    const int n = signals.rows();
    const int t = signals.cols();
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << "node_" << i;
    os << "\n";
    char buf[64];
    for (int r = 0; r < t; ++r) {
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", signals(i, r));
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
}

void write_signal_csv(const Matrix& signals, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_signal_csv(signals, os);
    if (!os) throw IoError("write failed: " + path);
}

SignalCsv read_signal_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IngestError("signal csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    SignalCsv out;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) out.columns.push_back(cell);
    }
    const auto n = out.columns.size();
    if (n == 0) throw IngestError("signal csv: no columns in header");

    std::vector<double> values;
    int lineno = 1;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t got = 0;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw IngestError("signal csv: non-numeric field at line " +
                                  std::to_string(lineno));
            values.push_back(v);
            ++got;
        }
        if (got != n)
            throw IngestError("signal csv: ragged row at line " + std::to_string(lineno) +
                              " (expected " + std::to_string(n) + " fields, got " +
                              std::to_string(got) + ")");
        ++rows;
    }

    out.signals = Matrix(static_cast<int>(n), static_cast<int>(rows));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n; ++i)
            out.signals(static_cast<int>(i), static_cast<int>(r)) = values[r * n + i];
    return out;
}

SignalCsv read_signal_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IngestError("cannot open signal csv: " + path);
    return read_signal_csv(is);
}

}  // namespace ongraph
