#include "ongraph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ongraph/errors.hpp"
#include "ongraph/kernels.hpp"
#include "ongraph/rng.hpp"
#include "ongraph/signal.hpp"

namespace ongraph {

namespace {

std::string fmt_g(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? "," : "") + std::to_string(xs[i]);
    return out;
}

std::string join_strings(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SyntheticIters: return "synthetic-iters";
        case ExperimentKind::HiddenSweep: return "hidden-sweep";
        case ExperimentKind::ExternalStream: return "external-stream";
        case ExperimentKind::DiagnoseBound: return "diagnose-bound";
    }
    return "?";
}

std::uint64_t kind_tag(ExperimentKind k) { return static_cast<std::uint64_t>(k) + 0x6b00; }

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<long> make_log_grid(long t_max, int points) {
    if (t_max < 1) throw ConfigError("sample grid needs t_max >= 1");
    if (points < 1) throw ConfigError("sample grid needs at least one point");
    std::set<long> grid;
    if (points == 1 || t_max == 1) {
        grid.insert(t_max);
    } else {
        const double lo = 0.0;
        const double hi = std::log10(static_cast<double>(t_max));
        for (int k = 0; k < points; ++k) {
            const double f = lo + (hi - lo) * static_cast<double>(k) / (points - 1);
            long t = std::lround(std::pow(10.0, f));
            t = std::min(std::max<long>(1, t), t_max);
            grid.insert(t);
        }
        grid.insert(t_max);
    }
    return {grid.begin(), grid.end()};
}

void ExperimentSpec::validate() const {
    std::string v;
    if (n < 2) v += "n must be >= 2; ";
    if (edge_prob < 0.0 || edge_prob > 1.0) v += "p must lie in [0,1]; ";
    if (samples < 1) v += "samples must be >= 1; ";
    if (trials < 1) v += "trials must be >= 1; ";
    if (hidden_counts.empty()) v += "hidden list must be nonempty; ";
    for (int h : hidden_counts)
        if (h < 0 || 2 * h >= n) v += "hidden count " + std::to_string(h) + " violates h < n/2; ";
    if (filter_order < 1) v += "filter_order must be >= 1; ";
    if (inner_iters.empty()) v += "inner list must be nonempty; ";
    for (int k : inner_iters)
        if (k < 1) v += "inner iteration counts must be >= 1; ";
    if (methods.empty()) v += "methods list must be nonempty; ";
    for (const auto& m : methods)
        if (m != "onst" && m != "onst-h" && m != "offst-h")
            v += "unknown method '" + m + "' (allowed: onst, onst-h, offst-h); ";
    if (!(mu > 0.0)) v += "mu must be positive; ";
    if (!(rho > 0.0)) v += "rho must be positive; ";
    if (!(step_safety > 0.0 && step_safety < 1.0)) v += "step_safety must be in (0,1); ";
    if (omega_fraction <= 0.0 || omega_fraction > 1.0) v += "omega_fraction must be in (0,1]; ";
    if (diagnostics_stride < 1) v += "stride must be >= 1; ";
    if (change_point < 0 || change_point >= samples)
        if (change_point != 0) v += "change_point must lie in [1, samples); ";
    if (grid_points < 1) v += "grid_points must be >= 1; ";
    if (offline_max_iters < 1) v += "offline_max_iters must be >= 1; ";
    if (!(offline_tol > 0.0)) v += "offline_tol must be positive; ";
    if (warmup < 0) v += "warmup must be >= 0; ";
    if (kind == ExperimentKind::HiddenSweep && inner_iters.size() != 1)
        v += "hidden-sweep uses a single inner iteration count; ";
    for (int idx : stream_hidden)
        if (idx < 0) v += "hidden node indices must be >= 0; ";
    if (!v.empty()) throw ConfigError("invalid experiment spec: " + v);
}

std::vector<std::pair<std::string, std::string>> ExperimentSpec::echo() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("change_point", std::to_string(change_point));
    kv.emplace_back("filter_order", std::to_string(filter_order));
    kv.emplace_back("grid_points", std::to_string(grid_points));
    kv.emplace_back("hidden", join_ints(hidden_counts));
    if (!stream_hidden.empty()) kv.emplace_back("hidden_nodes", join_ints(stream_hidden));
    kv.emplace_back("inner", join_ints(inner_iters));
    kv.emplace_back("kernels", kernels);
    kv.emplace_back("kind", kind_name(kind));
    kv.emplace_back("methods", join_strings(methods));
    kv.emplace_back("mu", fmt_g(mu, 17));
    kv.emplace_back("n", std::to_string(n));
    kv.emplace_back("offline_max_iters", std::to_string(offline_max_iters));
    kv.emplace_back("offline_tol", fmt_g(offline_tol, 17));
    kv.emplace_back("omega_fraction", fmt_g(omega_fraction, 17));
    kv.emplace_back("p", fmt_g(edge_prob, 17));
    kv.emplace_back("rho", fmt_g(rho, 17));
    kv.emplace_back("samples", std::to_string(samples));
    kv.emplace_back("seed", std::to_string(base_seed));
    kv.emplace_back("standardize", standardize ? "true" : "false");
    kv.emplace_back("step_safety", fmt_g(step_safety, 17));
    kv.emplace_back("stride", std::to_string(diagnostics_stride));
    kv.emplace_back("trials", std::to_string(trials));
    kv.emplace_back("warmup", std::to_string(warmup));
    kv.emplace_back("workers", std::to_string(workers));
    return kv;
}

void apply_config_kv(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "n")
        spec.n = static_cast<int>(parse_long(value, key));
    else if (key == "p")
        spec.edge_prob = parse_double(value, key);
    else if (key == "hidden") {
        spec.hidden_counts.clear();
        for (const auto& s : split_list(value))
            spec.hidden_counts.push_back(static_cast<int>(parse_long(s, key)));
    } else if (key == "hidden_nodes") {
        spec.stream_hidden.clear();
        for (const auto& s : split_list(value))
            spec.stream_hidden.push_back(static_cast<int>(parse_long(s, key)));
    } else if (key == "filter_order")
        spec.filter_order = static_cast<int>(parse_long(value, key));
    else if (key == "samples")
        spec.samples = parse_long(value, key);
    else if (key == "inner") {
        spec.inner_iters.clear();
        for (const auto& s : split_list(value))
            spec.inner_iters.push_back(static_cast<int>(parse_long(s, key)));
    } else if (key == "methods")
        spec.methods = split_list(value);
    else if (key == "trials")
        spec.trials = static_cast<int>(parse_long(value, key));
    else if (key == "seed")
        spec.base_seed = static_cast<std::uint64_t>(parse_long(value, key));
    else if (key == "mu")
        spec.mu = parse_double(value, key);
    else if (key == "rho")
        spec.rho = parse_double(value, key);
    else if (key == "step_safety")
        spec.step_safety = parse_double(value, key);
    else if (key == "omega_fraction")
        spec.omega_fraction = parse_double(value, key);
    else if (key == "stride")
        spec.diagnostics_stride = static_cast<int>(parse_long(value, key));
    else if (key == "change_point")
        spec.change_point = parse_long(value, key);
    else if (key == "grid_points")
        spec.grid_points = static_cast<int>(parse_long(value, key));
    else if (key == "workers")
        spec.workers = static_cast<int>(parse_long(value, key));
    else if (key == "standardize")
        spec.standardize = parse_bool(value, key);
    else if (key == "warmup")
        spec.warmup = parse_long(value, key);
    else if (key == "offline_max_iters")
        spec.offline_max_iters = static_cast<int>(parse_long(value, key));
    else if (key == "offline_tol")
        spec.offline_tol = parse_double(value, key);
    else if (key == "kernels")
        spec.kernels = value;
    else
        throw ConfigError("config: unknown key '" + key + "'");
}

void load_config_file(ExperimentSpec& spec, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            if (x == std::string::npos) return std::string();
            const auto y = s.find_last_not_of(" \t\r");
            return s.substr(x, y - x + 1);
        };
        apply_config_kv(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

namespace {

// One estimator column in an experiment: label + per-phase configs.
struct MethodRun {
    std::string label;
    bool offline = false;
    EstimatorConfig cfg1, cfg2;  // cfg2 applies past the change point
};

struct PhaseScene {
    GroundTruthScene scene;
    KnownEdgeSet omega;
};

struct SyntheticTrial {
    PhaseScene phase1, phase2;
    bool has_change = false;
    Matrix obs_signals;  // O x T
};

GroundTruthScene make_scene(const ExperimentSpec& spec, int h, int trial, std::uint64_t extra,
                            int* attempt_out) {
    const std::uint64_t tag = kind_tag(spec.kind);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Gso g = generate_er(
            spec.n, spec.edge_prob,
            derive_seed(spec.base_seed, {tag, extra, static_cast<std::uint64_t>(trial),
                                         static_cast<std::uint64_t>(attempt), seed_tag::graph}));
        const NodePartition part = partition_uniform(
            spec.n, h,
            derive_seed(spec.base_seed, {tag, extra, static_cast<std::uint64_t>(trial),
                                         static_cast<std::uint64_t>(attempt),
                                         seed_tag::partition}));
        GroundTruthScene scene = extract_blocks(g, part);
        if (frobenius_norm(scene.s_o) > 0.0) {
            if (attempt_out) *attempt_out = attempt;
            return scene;
        }
    }
    throw NumericError("could not generate a scene with a nonzero observed block");
}

SyntheticTrial make_synthetic_trial(const ExperimentSpec& spec, int h, int trial) {
    const std::uint64_t tag = kind_tag(spec.kind);
    SyntheticTrial out;
    int attempt = 0;
    out.phase1.scene = make_scene(spec, h, trial, 0, &attempt);
    Rng filter_rng(derive_seed(spec.base_seed, {tag, 0, static_cast<std::uint64_t>(trial),
                                                static_cast<std::uint64_t>(attempt),
                                                seed_tag::filter}));
    const CovarianceModel cov1 =
        draw_covariance(out.phase1.scene.full_gso, spec.filter_order, filter_rng);
    out.phase1.omega = KnownEdgeSet::sample_from(
        out.phase1.scene.s_o, spec.omega_fraction,
        derive_seed(spec.base_seed, {tag, 0, static_cast<std::uint64_t>(trial), seed_tag::omega}));

    out.has_change = spec.change_point > 0;
    const long t1 = out.has_change ? spec.change_point : spec.samples;
    const Matrix sig1 = sample_signals(
        cov1, static_cast<int>(t1),
        derive_seed(spec.base_seed, {tag, 0, static_cast<std::uint64_t>(trial), seed_tag::signals}));
    const auto& part = out.phase1.scene.partition;

    Matrix sig2;
    if (out.has_change) {
        // The graph is regenerated at the change point but node identities
        // stay, so phase 2 keeps the phase-1 partition. Prior knowledge is
        // re-sampled against the new truth (refreshed historical data).
        GroundTruthScene scene2;
        int attempt2 = 0;
        for (;; ++attempt2) {
            if (attempt2 >= 64)
                throw NumericError("could not regenerate a post-change scene");
            const Gso g2 = generate_er(
                spec.n, spec.edge_prob,
                derive_seed(spec.base_seed,
                            {tag, seed_tag::change, static_cast<std::uint64_t>(trial),
                             static_cast<std::uint64_t>(attempt2), seed_tag::graph}));
            scene2 = extract_blocks(g2, part);
            if (frobenius_norm(scene2.s_o) > 0.0) break;
        }
        Rng filter_rng2(derive_seed(
            spec.base_seed, {tag, seed_tag::change, static_cast<std::uint64_t>(trial),
                             static_cast<std::uint64_t>(attempt2), seed_tag::filter}));
        const CovarianceModel cov2 =
            draw_covariance(scene2.full_gso, spec.filter_order, filter_rng2);
        out.phase2.omega = KnownEdgeSet::sample_from(
            scene2.s_o, spec.omega_fraction,
            derive_seed(spec.base_seed,
                        {tag, seed_tag::change, static_cast<std::uint64_t>(trial), seed_tag::omega}));
        out.phase2.scene = std::move(scene2);
        sig2 = sample_signals(
            cov2, static_cast<int>(spec.samples - t1),
            derive_seed(spec.base_seed, {tag, seed_tag::change, static_cast<std::uint64_t>(trial),
                                         seed_tag::signals}));
    } else {
        out.phase2 = out.phase1;
    }

    const int o = part.o();
    out.obs_signals = Matrix(o, static_cast<int>(spec.samples));
    for (int a = 0; a < o; ++a) {
        const int node = part.observed[static_cast<std::size_t>(a)];
        for (long t = 0; t < t1; ++t)
            out.obs_signals(a, static_cast<int>(t)) = sig1(node, static_cast<int>(t));
        for (long t = t1; t < spec.samples; ++t)
            out.obs_signals(a, static_cast<int>(t)) = sig2(node, static_cast<int>(t - t1));
    }
    return out;
}

EstimatorConfig base_config(const ExperimentSpec& spec, bool hidden_aware, int inner,
                            const KnownEdgeSet& omega) {
    EstimatorConfig cfg;
    cfg.mu = spec.mu;
    cfg.rho = spec.rho;
    cfg.step_safety = spec.step_safety;
    cfg.inner_iters = inner;
    cfg.hidden_aware = hidden_aware;
    cfg.known_edges = omega;
    return cfg;
}

std::vector<MethodRun> build_methods(const ExperimentSpec& spec, const SyntheticTrial& trial,
                                     const std::string& label_suffix, bool label_with_inner) {
    std::vector<MethodRun> runs;
    auto has = [&](const char* m) {
        return std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end();
    };
    for (int k : spec.inner_iters) {
        for (const bool hidden_aware : {false, true}) {
            if (hidden_aware && !has("onst-h")) continue;
            if (!hidden_aware && !has("onst")) continue;
            MethodRun run;
            run.label = hidden_aware ? "OnST-H" : "OnST";
            if (label_with_inner) run.label += "-" + std::to_string(k);
            run.label += label_suffix;
            run.cfg1 = base_config(spec, hidden_aware, k, trial.phase1.omega);
            run.cfg2 = base_config(spec, hidden_aware, k, trial.phase2.omega);
            runs.push_back(std::move(run));
        }
        if (!label_with_inner) break;  // single inner count per method
    }
    if (has("offst-h")) {
        MethodRun run;
        run.label = "OffST-H" + label_suffix;
        run.offline = true;
        run.cfg1 = base_config(spec, true, 1, trial.phase1.omega);
        run.cfg2 = base_config(spec, true, 1, trial.phase2.omega);
        runs.push_back(std::move(run));
    }
    return runs;
}

// Streams one trial through every method on the identical sample sequence.
// Returns series[method][grid_point] for err, objective and residual.
struct TrialSeries {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> err, obj, resid;
};

TrialSeries run_trial_methods(const ExperimentSpec& spec, const SyntheticTrial& trial,
                              std::vector<MethodRun> methods, const std::vector<long>& grid) {
    const int o = trial.obs_signals.rows();
    TrialSeries series;
    series.labels.reserve(methods.size());
    for (const auto& m : methods) series.labels.push_back(m.label);
    series.err.assign(methods.size(), {});
    series.obj.assign(methods.size(), {});
    series.resid.assign(methods.size(), {});

    StreamingCovariance sc(o);
    std::vector<EstimatorState> states;
    std::vector<StepWorkspace> workspaces(methods.size());
    std::vector<Matrix> warm_s(methods.size()), warm_p(methods.size());
    std::vector<char> warm_ready(methods.size(), 0);
    for (const auto& m : methods) states.push_back(EstimatorState::initial(o, m.cfg1));

    std::vector<double> x(static_cast<std::size_t>(o));
    std::size_t grid_idx = 0;
    for (long t = 1; t <= spec.samples && grid_idx < grid.size(); ++t) {
        const bool phase2 = trial.has_change && t > spec.change_point;
        for (int i = 0; i < o; ++i)
            x[static_cast<std::size_t>(i)] = trial.obs_signals(i, static_cast<int>(t - 1));
        sc.update(x);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (methods[m].offline) continue;
            const EstimatorConfig& cfg = phase2 ? methods[m].cfg2 : methods[m].cfg1;
            online_step(states[m], sc, cfg, &workspaces[m]);
        }
        if (t == grid[grid_idx]) {
            const Matrix& truth = phase2 ? trial.phase2.scene.s_o : trial.phase1.scene.s_o;
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const EstimatorConfig& cfg = phase2 ? methods[m].cfg2 : methods[m].cfg1;
                const Matrix* s = nullptr;
                const Matrix* p = nullptr;
                if (methods[m].offline) {
                    BatchResult res = batch_solve(sc.c_hat(), cfg, spec.offline_max_iters,
                                                  spec.offline_tol,
                                                  warm_ready[m] ? &warm_s[m] : nullptr,
                                                  warm_ready[m] ? &warm_p[m] : nullptr);
                    warm_s[m] = std::move(res.s);
                    warm_p[m] = std::move(res.p);
                    warm_ready[m] = 1;
                    s = &warm_s[m];
                    p = &warm_p[m];
                } else {
                    s = &states[m].s_hat;
                    p = &states[m].p_hat;
                }
                series.err[m].push_back(normalized_error(truth, *s));
                series.obj[m].push_back(objective(*s, *p, sc.c_hat(), cfg.mu, cfg.rho));
                series.resid[m].push_back(residual_norm(sc.c_hat(), *s, *p));
            }
            ++grid_idx;
        }
    }
    return series;
}

std::string config_digest(const ExperimentSpec& spec) {
    return "mu=" + fmt_g(spec.mu) + ";rho=" + fmt_g(spec.rho) + ";kappa=" +
           fmt_g(spec.step_safety) + ";inner=" + join_ints(spec.inner_iters) + ";omega=" +
           fmt_g(spec.omega_fraction) + ";seed=" + std::to_string(spec.base_seed) + ";trials=" +
           std::to_string(spec.trials);
}

// Aggregates per-trial series into median and mean traces, sorted by label.
ExperimentResult aggregate(const ExperimentSpec& spec, const std::vector<long>& grid,
                           const std::vector<TrialSeries>& trials) {
    ExperimentResult out;
    if (trials.empty()) return out;
    const auto& labels = trials.front().labels;
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

    for (std::size_t oi : order) {
        TrialTrace med, avg;
        med.method_label = avg.method_label = labels[oi];
        med.config_digest = avg.config_digest = config_digest(spec);
        med.sample_index = avg.sample_index = grid;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<double> e, ob, rs;
            e.reserve(trials.size());
            for (const auto& tr : trials) {
                e.push_back(tr.err[oi][g]);
                ob.push_back(tr.obj[oi][g]);
                rs.push_back(tr.resid[oi][g]);
            }
            med.err.push_back(median_of(e));
            med.objective.push_back(median_of(ob));
            med.residual.push_back(median_of(rs));
            avg.err.push_back(mean_of(e));
            avg.objective.push_back(mean_of(ob));
            avg.residual.push_back(mean_of(rs));
        }
        out.median.push_back(std::move(med));
        out.mean.push_back(std::move(avg));
    }
    out.meta = spec.echo();
    out.meta.emplace_back("kernels_resolved",
                          kernels::active_backend() == kernels::Backend::Scalar ? "scalar"
                                                                                : "avx2");
    return out;
}

}  // namespace

ExperimentResult run_synthetic_iters(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::SyntheticIters)
        throw ConfigError("run_synthetic_iters: spec kind mismatch");
    spec.validate();
    const std::vector<long> grid = make_log_grid(spec.samples, spec.grid_points);
    const int h = spec.hidden_counts.front();

    std::vector<TrialSeries> results(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, spec.workers, [&](int trial) {
        const SyntheticTrial tr = make_synthetic_trial(spec, h, trial);
        results[static_cast<std::size_t>(trial)] =
            run_trial_methods(spec, tr, build_methods(spec, tr, "", true), grid);
    });
    return aggregate(spec, grid, results);
}

ExperimentResult run_hidden_sweep(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::HiddenSweep)
        throw ConfigError("run_hidden_sweep: spec kind mismatch");
    spec.validate();
    const std::vector<long> grid = make_log_grid(spec.samples, spec.grid_points);

    std::vector<TrialSeries> results(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, spec.workers, [&](int trial) {
        TrialSeries merged;
        for (int h : spec.hidden_counts) {
            const SyntheticTrial tr = make_synthetic_trial(spec, h, trial);
            const std::string suffix = " H=" + std::to_string(h);
            TrialSeries one =
                run_trial_methods(spec, tr, build_methods(spec, tr, suffix, false), grid);
            merged.labels.insert(merged.labels.end(), one.labels.begin(), one.labels.end());
            merged.err.insert(merged.err.end(), one.err.begin(), one.err.end());
            merged.obj.insert(merged.obj.end(), one.obj.begin(), one.obj.end());
            merged.resid.insert(merged.resid.end(), one.resid.begin(), one.resid.end());
        }
        results[static_cast<std::size_t>(trial)] = std::move(merged);
    });
    return aggregate(spec, grid, results);
}

namespace {

struct StreamData {
    std::vector<std::string> columns;
    Matrix signals;  // node x time, post drop/standardize
};

StreamData prepare_stream(const ExperimentSpec& spec, const SignalCsv& csv) {
    const int n = csv.signals.rows();
    const int t = csv.signals.cols();
    if (t < 2) throw IngestError("signal stream: need at least 2 samples");

    std::vector<double> mean(static_cast<std::size_t>(n), 0.0);
    std::vector<double> stdev(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int r = 0; r < t; ++r) s += csv.signals(i, r);
        mean[static_cast<std::size_t>(i)] = s / t;
        double q = 0.0;
        for (int r = 0; r < t; ++r) {
            const double d = csv.signals(i, r) - mean[static_cast<std::size_t>(i)];
            q += d * d;
        }
        stdev[static_cast<std::size_t>(i)] = std::sqrt(q / t);
    }

    StreamData out;
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        const bool constant =
            stdev[static_cast<std::size_t>(i)] <=
            1e-12 * (std::fabs(mean[static_cast<std::size_t>(i)]) + 1.0);
        if (spec.standardize && constant) {
            std::cerr << "warning: dropping constant column '" << csv.columns[i] << "'\n";
            continue;
        }
        keep.push_back(i);
    }
    if (keep.empty()) throw IngestError("signal stream: all columns are constant");

    out.signals = Matrix(static_cast<int>(keep.size()), t);
    for (std::size_t a = 0; a < keep.size(); ++a) {
        const int i = keep[a];
        out.columns.push_back(csv.columns[static_cast<std::size_t>(i)]);
        const double m = mean[static_cast<std::size_t>(i)];
        const double sd = stdev[static_cast<std::size_t>(i)];
        for (int r = 0; r < t; ++r) {
            const double v = csv.signals(i, r);
            out.signals(static_cast<int>(a), r) = spec.standardize ? (v - m) / sd : v;
        }
    }
    return out;
}

// Prior-knowledge clamps from the warmup window: the strongest |correlation|
// pairs are clamped to 1, an equal share of the weakest to 0.
KnownEdgeSet omega_from_correlations(const Matrix& signals, long warmup, double fraction) {
    const int n = signals.rows();
    Matrix c(n, n);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (long w = 0; w < warmup; ++w) {
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = signals(i, static_cast<int>(w));
        kernels::active().rank_one_cov_update(c.data(), x.data(), static_cast<double>(w + 1), n);
    }
    struct Scored {
        double score;
        int i, j;
    };
    std::vector<Scored> scored;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = std::sqrt(std::max(c(i, i) * c(j, j), 1e-300));
            scored.push_back({std::fabs(c(i, j)) / d, i, j});
        }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    const auto total = static_cast<long>(scored.size());
    const long want = std::max<long>(1, std::lround(fraction * static_cast<double>(total)));
    const long ones = (want + 1) / 2;
    const long zeros = std::min(want - ones, total - ones);
    std::vector<KnownEdge> edges;
    for (long k = 0; k < ones; ++k) edges.push_back({scored[k].i, scored[k].j, 1.0});
    for (long k = 0; k < zeros; ++k) {
        const auto& s = scored[static_cast<std::size_t>(total - 1 - k)];
        edges.push_back({s.i, s.j, 0.0});
    }
    std::sort(edges.begin(), edges.end(), [](const KnownEdge& a, const KnownEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return KnownEdgeSet(n, std::move(edges));
}

}  // namespace

ExperimentResult run_external_stream(const ExperimentSpec& spec, const std::string& csv_path) {
    if (spec.kind != ExperimentKind::ExternalStream)
        throw ConfigError("run_external_stream: spec kind mismatch");
    spec.validate();

    const SignalCsv csv = read_signal_csv(csv_path);
    const StreamData stream = prepare_stream(spec, csv);
    const int n = stream.signals.rows();
    const long total = stream.signals.cols();
    const long samples = std::min<long>(spec.samples, total);

    // Hidden nodes: designated indices or a uniform draw of hidden_counts[0].
    std::vector<int> hidden = spec.stream_hidden;
    if (hidden.empty()) {
        const int h = spec.hidden_counts.front();
        if (2 * h >= n) throw ConfigError("stream: hidden count must satisfy h < n/2");
        const NodePartition part = partition_uniform(
            n, h, derive_seed(spec.base_seed, {kind_tag(spec.kind), seed_tag::partition}));
        hidden = part.hidden;
    } else {
        std::sort(hidden.begin(), hidden.end());
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            if (hidden[i] < 0 || hidden[i] >= n)
                throw ConfigError("stream: hidden node index out of range after column drops");
            if (i > 0 && hidden[i] == hidden[i - 1])
                throw ConfigError("stream: duplicate hidden node index");
        }
        if (2 * static_cast<int>(hidden.size()) >= n)
            throw ConfigError("stream: hidden count must satisfy h < n/2");
    }
    std::vector<int> observed;
    for (int i = 0; i < n; ++i)
        if (!std::binary_search(hidden.begin(), hidden.end(), i)) observed.push_back(i);
    const int o = static_cast<int>(observed.size());

    const long warmup =
        spec.warmup > 0 ? std::min(spec.warmup, samples) : std::max<long>(30, samples / 10);
    const KnownEdgeSet omega_full =
        omega_from_correlations(stream.signals, warmup, spec.omega_fraction);

    // Restrict the prior to observed pairs; keep at least one 1-clamp so the
    // all-zero solution stays excluded.
    std::vector<KnownEdge> obs_edges;
    bool has_positive = false;
    std::vector<int> inverse(static_cast<std::size_t>(n), -1);
    for (int a = 0; a < o; ++a) inverse[static_cast<std::size_t>(observed[a])] = a;
    for (const auto& e : omega_full.edges()) {
        const int a = inverse[static_cast<std::size_t>(e.i)];
        const int b = inverse[static_cast<std::size_t>(e.j)];
        if (a < 0 || b < 0) continue;
        obs_edges.push_back({std::min(a, b), std::max(a, b), e.value});
        has_positive = has_positive || e.value > 0.0;
    }
    if (!has_positive) {
        // Clamp the strongest observed pair from the warmup correlations.
        KnownEdgeSet fallback = omega_from_correlations(stream.signals, warmup, 1e-9);
        for (const auto& e : fallback.edges()) {
            const int a = inverse[static_cast<std::size_t>(e.i)];
            const int b = inverse[static_cast<std::size_t>(e.j)];
            if (a >= 0 && b >= 0) {
                obs_edges.push_back({std::min(a, b), std::max(a, b), 1.0});
                break;
            }
        }
    }
    std::sort(obs_edges.begin(), obs_edges.end(), [](const KnownEdge& a, const KnownEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    obs_edges.erase(std::unique(obs_edges.begin(), obs_edges.end(),
                                [](const KnownEdge& a, const KnownEdge& b) {
                                    return a.i == b.i && a.j == b.j;
                                }),
                    obs_edges.end());
    const KnownEdgeSet omega_obs(o, std::move(obs_edges));

    // Full-node reference chain is hidden-unaware: with every node observed
    // there is no P to account for.
    const EstimatorConfig cfg_truth = base_config(spec, false, 1, omega_full);
    EstimatorConfig cfg_onst = base_config(spec, false, spec.inner_iters.front(), omega_obs);
    EstimatorConfig cfg_onsth = base_config(spec, true, spec.inner_iters.front(), omega_obs);

    const std::vector<long> grid = make_log_grid(samples, spec.grid_points);

    StreamingCovariance sc_full(n);
    StreamingCovariance sc_obs(o);
    EstimatorState st_onst = EstimatorState::initial(o, cfg_onst);
    EstimatorState st_onsth = EstimatorState::initial(o, cfg_onsth);
    StepWorkspace ws1, ws2;
    Matrix truth_s, truth_p;
    bool truth_ready = false;

    TrialSeries series;
    series.labels = {"OnST", "OnST-H"};
    series.err.assign(2, {});
    series.obj.assign(2, {});
    series.resid.assign(2, {});

    std::vector<double> xf(static_cast<std::size_t>(n));
    std::vector<double> xo(static_cast<std::size_t>(o));
    std::size_t grid_idx = 0;
    for (long t = 1; t <= samples && grid_idx < grid.size(); ++t) {
        for (int i = 0; i < n; ++i)
            xf[static_cast<std::size_t>(i)] = stream.signals(i, static_cast<int>(t - 1));
        for (int a = 0; a < o; ++a)
            xo[static_cast<std::size_t>(a)] = xf[static_cast<std::size_t>(observed[a])];
        sc_full.update(xf);
        sc_obs.update(xo);
        online_step(st_onst, sc_obs, cfg_onst, &ws1);
        online_step(st_onsth, sc_obs, cfg_onsth, &ws2);
        if (t == grid[grid_idx]) {
            BatchResult ref = batch_solve(sc_full.c_hat(), cfg_truth, spec.offline_max_iters,
                                          spec.offline_tol, truth_ready ? &truth_s : nullptr,
                                          truth_ready ? &truth_p : nullptr);
            truth_s = std::move(ref.s);
            truth_p = std::move(ref.p);
            truth_ready = true;
            Matrix truth_block(o, o);
            for (int a = 0; a < o; ++a)
                for (int b = 0; b < o; ++b) truth_block(a, b) = truth_s(observed[a], observed[b]);
            const EstimatorState* sts[2] = {&st_onst, &st_onsth};
            const EstimatorConfig* cfgs[2] = {&cfg_onst, &cfg_onsth};
            for (int m = 0; m < 2; ++m) {
                const double err = frobenius_norm(truth_block) > 0.0
                                       ? normalized_error(truth_block, sts[m]->s_hat)
                                       : frobenius_norm(sts[m]->s_hat);
                series.err[static_cast<std::size_t>(m)].push_back(err);
                series.obj[static_cast<std::size_t>(m)].push_back(objective(
                    sts[m]->s_hat, sts[m]->p_hat, sc_obs.c_hat(), cfgs[m]->mu, cfgs[m]->rho));
                series.resid[static_cast<std::size_t>(m)].push_back(
                    residual_norm(sc_obs.c_hat(), sts[m]->s_hat, sts[m]->p_hat));
            }
            ++grid_idx;
        }
    }

    ExperimentResult out = aggregate(spec, grid, {series});
    out.meta.emplace_back("stream_columns", std::to_string(n));
    out.meta.emplace_back("stream_samples", std::to_string(samples));
    out.meta.emplace_back("stream_hidden_resolved", join_ints(hidden));
    out.meta.emplace_back("stream_warmup_resolved", std::to_string(warmup));
    return out;
}

DiagnoseResult run_diagnose_bound(const ExperimentSpec& spec) {
    if (spec.kind != ExperimentKind::DiagnoseBound)
        throw ConfigError("run_diagnose_bound: spec kind mismatch");
    spec.validate();
    const int h = spec.hidden_counts.front();

    const GroundTruthScene scene = make_scene(spec, h, 0, 0, nullptr);
    Rng filter_rng(derive_seed(spec.base_seed, {kind_tag(spec.kind), seed_tag::filter}));
    const CovarianceModel cov = draw_covariance(scene.full_gso, spec.filter_order, filter_rng);
    const int o = scene.partition.o();
    const long warmup = spec.warmup > 0 ? spec.warmup : std::max<long>(16, o);
    const Matrix signals =
        sample_signals(cov, static_cast<int>(spec.samples + warmup),
                       derive_seed(spec.base_seed, {kind_tag(spec.kind), seed_tag::signals}));
    const KnownEdgeSet omega = KnownEdgeSet::sample_from(
        scene.s_o, spec.omega_fraction,
        derive_seed(spec.base_seed, {kind_tag(spec.kind), seed_tag::omega}));

    Matrix obs(o, signals.cols());
    for (int a = 0; a < o; ++a)
        for (int t = 0; t < signals.cols(); ++t)
            obs(a, t) = signals(scene.partition.observed[static_cast<std::size_t>(a)], t);

    const EstimatorConfig cfg = base_config(spec, true, spec.inner_iters.front(), omega);
    TrackingOptions opt;
    opt.stride = spec.diagnostics_stride;
    opt.warmup = static_cast<int>(warmup);
    opt.batch_max_iters = spec.offline_max_iters;
    opt.batch_tol = spec.offline_tol;

    DiagnoseResult out;
    out.diag = tracking_diagnostics(obs, cfg, opt);
    out.meta = spec.echo();
    out.meta.emplace_back("kernels_resolved",
                          kernels::active_backend() == kernels::Backend::Scalar ? "scalar"
                                                                                : "avx2");
    out.meta.emplace_back("observed_nodes", std::to_string(o));
    return out;
}

void emit_csv(const std::vector<TrialTrace>& traces, std::ostream& os, TraceSeries series) {
    if (traces.empty()) throw ConfigError("emit_csv: no traces");
    for (const auto& tr : traces) {
        tr.check_consistent();
        if (tr.sample_index != traces.front().sample_index)
            throw ConfigError("emit_csv: traces do not share a sample grid");
    }
    std::vector<std::size_t> order(traces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return traces[a].method_label < traces[b].method_label;
    });

    os << "samples";
    for (std::size_t oi : order) os << "," << traces[oi].method_label;
    os << "\n";
    const auto& grid = traces.front().sample_index;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        os << grid[g];
        for (std::size_t oi : order) {
            const TrialTrace& tr = traces[oi];
            const double v = series == TraceSeries::Err
                                 ? tr.err[g]
                                 : (series == TraceSeries::Objective ? tr.objective[g]
                                                                     : tr.residual[g]);
            os << "," << fmt_g(v);
        }
        os << "\n";
    }
}

void emit_csv(const std::vector<TrialTrace>& traces, const std::string& path,
              TraceSeries series) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    emit_csv(traces, os, series);
    if (!os) throw IoError("write failed: " + path);
}

void emit_diagnose_csv(const TrackingDiagnostics& diag, std::ostream& os) {
    os << "samples,lhs,v,log10_L,log10_rhs,satisfied,reliable\n";
    for (std::size_t i = 0; i < diag.sample_index.size(); ++i) {
        os << diag.sample_index[i] << "," << fmt_g(diag.lhs[i]) << "," << fmt_g(diag.v[i]) << ","
           << fmt_g(diag.log10_l[i]) << "," << fmt_g(diag.log10_rhs[i]) << ","
           << static_cast<int>(diag.satisfied[i]) << "," << static_cast<int>(diag.reliable[i])
           << "\n";
    }
}

void emit_diagnose_csv(const TrackingDiagnostics& diag, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    emit_diagnose_csv(diag, os);
    if (!os) throw IoError("write failed: " + path);
}

void write_meta(const std::vector<std::pair<std::string, std::string>>& meta,
                const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    auto sorted = meta;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [k, v] : sorted) os << k << " = " << v << "\n";
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace ongraph
