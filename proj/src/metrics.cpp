#include "ongraph/metrics.hpp"

#include <cmath>

#include "ongraph/errors.hpp"
#include "ongraph/estimator.hpp"

namespace ongraph {

double normalized_error(const Matrix& s_true, const Matrix& s_hat) {
    if (!s_true.same_shape(s_hat)) throw DimensionError("normalized_error: shape mismatch");
    const double denom = frobenius_norm(s_true);
    if (denom == 0.0) throw NumericError("normalized_error: reference matrix is all-zero");
    const double num = frobenius_norm(sub(s_true, s_hat));
    return (num * num) / (denom * denom);
}

EdgeClassification edge_classification(const Matrix& s_true, const Matrix& s_hat,
                                       double threshold) {
    if (!s_true.same_shape(s_hat)) throw DimensionError("edge_classification: shape mismatch");
    if (threshold < 0.0) throw ConfigError("edge_classification: threshold must be >= 0");
    long tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < s_true.rows(); ++i)
        for (int j = i + 1; j < s_true.cols(); ++j) {
            const bool truth = s_true(i, j) != 0.0;
            const bool pred = s_hat(i, j) > threshold;
            if (pred && truth)
                ++tp;
            else if (pred)
                ++fp;
            else if (truth)
                ++fn;
        }
    EdgeClassification out;
    out.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

double relative_threshold(const Matrix& s_hat, double fraction) {
    return fraction * max_abs(s_hat);
}

double residual_norm(const Matrix& c, const Matrix& s, const Matrix& p) {
    return frobenius_norm(commutation_residual(c, s, p));
}

void TrialTrace::check_consistent() const {
    const auto n = sample_index.size();
    if (err.size() != n || objective.size() != n || residual.size() != n)
        throw DimensionError("trial trace: series lengths differ");
    for (double e : err)
        if (e < 0.0) throw NumericError("trial trace: negative error value");
}

}  // namespace ongraph
