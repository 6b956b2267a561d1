// ongraph: online graph topology inference from streaming signals with
// hidden nodes. Subcommands mirror the experiment kinds; every run is a
// deterministic function of its configuration and seed.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ongraph/errors.hpp"
#include "ongraph/harness.hpp"
#include "ongraph/kernels.hpp"

namespace {

struct CliOptions {
    ongraph::ExperimentSpec spec;
    std::string config_path;
    std::string out_path = "ongraph_out.csv";
    std::string stream_path;
    std::string kernels = "auto";
};

std::string strip_ext(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "flat key = value config file");
    cmd->add_option("--seed", opt.spec.base_seed, "base seed");
    cmd->add_option("--trials", opt.spec.trials, "number of trials");
    cmd->add_option("--out", opt.out_path, "output CSV path");
    cmd->add_option("--samples", opt.spec.samples, "sample budget T");
    cmd->add_option("--n", opt.spec.n, "node count");
    cmd->add_option("--p", opt.spec.edge_prob, "edge probability");
    cmd->add_option("--hidden", opt.spec.hidden_counts, "hidden node count(s)")
        ->delimiter(',');
    cmd->add_option("--inner", opt.spec.inner_iters, "inner iteration count(s)")->delimiter(',');
    cmd->add_option("--methods", opt.spec.methods, "methods (onst,onst-h,offst-h)")
        ->delimiter(',');
    cmd->add_option("--mu", opt.spec.mu, "commutativity penalty weight");
    cmd->add_option("--rho", opt.spec.rho, "group sparsity weight");
    cmd->add_option("--step-safety", opt.spec.step_safety, "step size safety factor");
    cmd->add_option("--omega-fraction", opt.spec.omega_fraction, "known-edge fraction");
    cmd->add_option("--filter-order", opt.spec.filter_order, "covariance polynomial order");
    cmd->add_option("--grid-points", opt.spec.grid_points, "metric grid size");
    cmd->add_option("--change-point", opt.spec.change_point,
                    "regenerate the ground truth at this sample index");
    cmd->add_option("--stride", opt.spec.diagnostics_stride, "diagnostics stride");
    cmd->add_option("--warmup", opt.spec.warmup, "warmup samples (0 = auto)");
    cmd->add_option("--workers", opt.spec.workers, "parallel trial workers (0 = auto)");
    cmd->add_option("--offline-max-iters", opt.spec.offline_max_iters,
                    "batch solver iteration cap");
    cmd->add_option("--offline-tol", opt.spec.offline_tol, "batch solver tolerance");
    cmd->add_option("--kernels", opt.kernels, "kernel backend: auto|scalar|avx2");
}

void finalize_spec(CliOptions& opt, CLI::App* cmd) {
    // Config file first, then explicit flags override it.
    if (!opt.config_path.empty()) {
        ongraph::ExperimentSpec from_file = opt.spec;
        ongraph::load_config_file(from_file, opt.config_path);
        // re-apply flags the user actually passed
        ongraph::ExperimentSpec& spec = opt.spec;
        std::swap(spec, from_file);
        auto reapply = [&](const char* flag, auto member_ptr) {
            if (cmd->count(flag)) spec.*member_ptr = from_file.*member_ptr;
        };
        reapply("--seed", &ongraph::ExperimentSpec::base_seed);
        reapply("--trials", &ongraph::ExperimentSpec::trials);
        reapply("--samples", &ongraph::ExperimentSpec::samples);
        reapply("--n", &ongraph::ExperimentSpec::n);
        reapply("--p", &ongraph::ExperimentSpec::edge_prob);
        reapply("--hidden", &ongraph::ExperimentSpec::hidden_counts);
        reapply("--inner", &ongraph::ExperimentSpec::inner_iters);
        reapply("--methods", &ongraph::ExperimentSpec::methods);
        reapply("--mu", &ongraph::ExperimentSpec::mu);
        reapply("--rho", &ongraph::ExperimentSpec::rho);
        reapply("--step-safety", &ongraph::ExperimentSpec::step_safety);
        reapply("--omega-fraction", &ongraph::ExperimentSpec::omega_fraction);
        reapply("--filter-order", &ongraph::ExperimentSpec::filter_order);
        reapply("--grid-points", &ongraph::ExperimentSpec::grid_points);
        reapply("--change-point", &ongraph::ExperimentSpec::change_point);
        reapply("--stride", &ongraph::ExperimentSpec::diagnostics_stride);
        reapply("--warmup", &ongraph::ExperimentSpec::warmup);
        reapply("--workers", &ongraph::ExperimentSpec::workers);
        reapply("--offline-max-iters", &ongraph::ExperimentSpec::offline_max_iters);
        reapply("--offline-tol", &ongraph::ExperimentSpec::offline_tol);
        if (!cmd->count("--kernels")) opt.kernels = spec.kernels;
    }
    opt.spec.kernels = opt.kernels;
    ongraph::kernels::select(ongraph::kernels::parse_backend(opt.kernels.c_str()));
}

void write_experiment(const ongraph::ExperimentResult& result, const std::string& out_path) {
    const std::string base = strip_ext(out_path);
    ongraph::emit_csv(result.median, out_path, ongraph::TraceSeries::Err);
    ongraph::emit_csv(result.mean, base + "_mean.csv", ongraph::TraceSeries::Err);
    ongraph::emit_csv(result.median, base + "_objective.csv", ongraph::TraceSeries::Objective);
    ongraph::emit_csv(result.median, base + "_residual.csv", ongraph::TraceSeries::Residual);
    ongraph::write_meta(result.meta, base + ".meta");
    std::cout << "wrote " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online graph topology inference from streaming signals"};
    app.require_subcommand(1);

    CliOptions synth, sweep, stream, diagnose;

    CLI::App* cmd_synth =
        app.add_subcommand("synth-iters", "synthetic run over inner-iteration counts");
    synth.spec.kind = ongraph::ExperimentKind::SyntheticIters;
    add_common_flags(cmd_synth, synth);

    CLI::App* cmd_sweep = app.add_subcommand("hidden-sweep", "synthetic sweep over hidden counts");
    sweep.spec.kind = ongraph::ExperimentKind::HiddenSweep;
    sweep.spec.n = 20;
    sweep.spec.samples = 10000;
    sweep.spec.hidden_counts = {2, 5};
    sweep.spec.inner_iters = {10};
    add_common_flags(cmd_sweep, sweep);

    CLI::App* cmd_stream = app.add_subcommand("stream", "run on an external signal CSV");
    stream.spec.kind = ongraph::ExperimentKind::ExternalStream;
    stream.spec.inner_iters = {10};
    stream.spec.methods = {"onst", "onst-h"};
    stream.spec.samples = 1000000000L;  // consume the whole stream by default
    cmd_stream->add_option("signals", stream.stream_path, "input signal CSV")->required();
    cmd_stream
        ->add_option("--hidden-nodes", stream.spec.stream_hidden,
                     "designated hidden column indices")
        ->delimiter(',');
    cmd_stream->add_flag("--no-standardize", "skip per-column standardization");
    add_common_flags(cmd_stream, stream);

    CLI::App* cmd_diag =
        app.add_subcommand("diagnose-bound", "tracking-bound diagnostics on a small instance");
    diagnose.spec.kind = ongraph::ExperimentKind::DiagnoseBound;
    diagnose.spec.n = 9;
    diagnose.spec.hidden_counts = {1};
    diagnose.spec.mu = 0.01;
    diagnose.spec.samples = 2500;
    diagnose.spec.inner_iters = {1};
    diagnose.spec.offline_max_iters = 50000;
    diagnose.spec.offline_tol = 1e-9;
    add_common_flags(cmd_diag, diagnose);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_synth->parsed()) {
            finalize_spec(synth, cmd_synth);
            write_experiment(ongraph::run_synthetic_iters(synth.spec), synth.out_path);
        } else if (cmd_sweep->parsed()) {
            finalize_spec(sweep, cmd_sweep);
            write_experiment(ongraph::run_hidden_sweep(sweep.spec), sweep.out_path);
        } else if (cmd_stream->parsed()) {
            finalize_spec(stream, cmd_stream);
            if (cmd_stream->count("--no-standardize")) stream.spec.standardize = false;
            write_experiment(ongraph::run_external_stream(stream.spec, stream.stream_path),
                             stream.out_path);
        } else if (cmd_diag->parsed()) {
            finalize_spec(diagnose, cmd_diag);
            const ongraph::DiagnoseResult result = ongraph::run_diagnose_bound(diagnose.spec);
            ongraph::emit_diagnose_csv(result.diag, diagnose.out_path);
            ongraph::write_meta(result.meta, strip_ext(diagnose.out_path) + ".meta");
            long satisfied = 0;
            for (char s : result.diag.satisfied) satisfied += s;
            std::cout << "wrote " << diagnose.out_path << " (bound satisfied at " << satisfied
                      << "/" << result.diag.satisfied.size() << " sampled t)\n";
        }
    } catch (const ongraph::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ongraph::IngestError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
