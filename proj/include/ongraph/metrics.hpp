#pragma once

#include <string>
#include <vector>

#include "ongraph/matrix.hpp"

namespace ongraph {

// ||s_true - s_hat||_F^2 / ||s_true||_F^2. Throws NumericError when s_true
// is all-zero (the metric is undefined).
double normalized_error(const Matrix& s_true, const Matrix& s_hat);

struct EdgeClassification {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Upper-triangle edge detection: predicted where s_hat > threshold. F1 is 0
// when precision + recall is 0.
EdgeClassification edge_classification(const Matrix& s_true, const Matrix& s_hat,
                                       double threshold);

// Default detection threshold: fraction of the largest estimated entry.
double relative_threshold(const Matrix& s_hat, double fraction = 0.3);

// ||c s + p - s c - p^T||_F
double residual_norm(const Matrix& c, const Matrix& s, const Matrix& p);

// One labeled metric series over a sample grid.
struct TrialTrace {
    std::vector<long> sample_index;
    std::vector<double> err;
    std::vector<double> objective;
    std::vector<double> residual;
    std::string method_label;
    std::string config_digest;

    void check_consistent() const;  // equal lengths, err >= 0
};

}  // namespace ongraph
