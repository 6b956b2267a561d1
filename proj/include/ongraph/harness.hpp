#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ongraph/estimator.hpp"
#include "ongraph/metrics.hpp"

namespace ongraph {

enum class ExperimentKind { SyntheticIters, HiddenSweep, ExternalStream, DiagnoseBound };

// Flat experiment description; every run is a pure function of (spec, seed).
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::SyntheticIters;

    int n = 30;                      // node count (synthetic)
    double edge_prob = 0.1;          // ER edge probability
    std::vector<int> hidden_counts{2};
    int filter_order = 3;            // L
    long samples = 20000;            // T
    std::vector<int> inner_iters{1, 10, 100};
    std::vector<std::string> methods{"onst", "onst-h", "offst-h"};
    int trials = 20;
    std::uint64_t base_seed = 1;

    double mu = 0.5;
    double rho = 0.1;
    double step_safety = 0.95;
    double omega_fraction = 0.1;

    int diagnostics_stride = 1;
    long change_point = 0;           // 0 = static scene
    int grid_points = 30;
    int workers = 0;                 // 0 = hardware concurrency
    bool standardize = true;         // external streams only
    std::vector<int> stream_hidden;  // designated hidden columns (external)
    long warmup = 0;                 // 0 = auto (external stream / diagnose)
    int offline_max_iters = 3000;
    double offline_tol = 1e-7;
    std::string kernels = "auto";

    // Throws ConfigError listing every violation.
    void validate() const;

    // Resolved key/value echo, sorted by key.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

// key = value lines, '#' comments, lists comma-separated.
// Unknown keys are config errors.
void apply_config_kv(ExperimentSpec& spec, const std::string& key, const std::string& value);
void load_config_file(ExperimentSpec& spec, const std::string& path);

struct ExperimentResult {
    std::vector<TrialTrace> median;  // one trace per column label
    std::vector<TrialTrace> mean;
    std::vector<std::pair<std::string, std::string>> meta;
};

ExperimentResult run_synthetic_iters(const ExperimentSpec& spec);
ExperimentResult run_hidden_sweep(const ExperimentSpec& spec);
ExperimentResult run_external_stream(const ExperimentSpec& spec, const std::string& csv_path);

struct DiagnoseResult {
    TrackingDiagnostics diag;
    std::vector<std::pair<std::string, std::string>> meta;
};
DiagnoseResult run_diagnose_bound(const ExperimentSpec& spec);

enum class TraceSeries { Err, Objective, Residual };

// "samples" column plus one column per trace, lexicographic by label,
// >= 9 significant digits. All traces must share the sample grid.
void emit_csv(const std::vector<TrialTrace>& traces, std::ostream& os,
              TraceSeries series = TraceSeries::Err);
void emit_csv(const std::vector<TrialTrace>& traces, const std::string& path,
              TraceSeries series = TraceSeries::Err);

void emit_diagnose_csv(const TrackingDiagnostics& diag, std::ostream& os);
void emit_diagnose_csv(const TrackingDiagnostics& diag, const std::string& path);

void write_meta(const std::vector<std::pair<std::string, std::string>>& meta,
                const std::string& path);

// ~points log-spaced unique integers in [1, t_max].
std::vector<long> make_log_grid(long t_max, int points);

}  // namespace ongraph
