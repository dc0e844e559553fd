#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sizesched/core.hpp"
#include "sizesched/engine.hpp"
#include "sizesched/metrics.hpp"
#include "sizesched/policies.hpp"
#include "sizesched/workload.hpp"

namespace sizesched {

enum class Axis { Shape, Sigma, Load, Timeshape, Njobs };

inline std::string_view to_string(Axis axis) {
    switch (axis) {
        case Axis::Shape: return "shape";
        case Axis::Sigma: return "sigma";
        case Axis::Load: return "load";
        case Axis::Timeshape: return "timeshape";
        case Axis::Njobs: return "njobs";
    }
    return "?";
}

inline void set_axis(GenParams& p, Axis axis, double value) {
    switch (axis) {
        case Axis::Shape: p.shape = value; break;
        case Axis::Sigma: p.sigma = value; break;
        case Axis::Load: p.load = value; break;
        case Axis::Timeshape: p.timeshape = value; break;
        case Axis::Njobs: p.njobs = static_cast<std::int64_t>(std::llround(value)); break;
    }
}

struct SweepAxis {
    Axis axis = Axis::Shape;
    std::vector<double> values;
};

struct ExperimentSpec {
    std::vector<std::string> policies;
    GenParams base;                 // values for every axis that is not swept
    std::vector<SweepAxis> axes;    // at most two
    int repetitions = 30;
    std::uint64_t base_seed = 1;
    std::string trace_path;         // when set, only a sigma axis is honored
    int cs_window = 10;
    bool keep_slowdowns = false;    // pool raw slowdowns into each result
};

struct ExperimentResult {
    std::string policy;
    GenParams params;               // seed field unused
    std::string trace;
    int repetitions = 0;
    double mst_mean = 0.0;
    double mst_std = 0.0;           // sample stddev over repetitions
    double mst_vs_ps = 0.0;         // mean of per-repetition paired ratios
    double mst_vs_srpt = 0.0;
    double slowdown_p50 = 0.0;
    double slowdown_p90 = 0.0;
    double slowdown_p99 = 0.0;
    std::vector<McsBin> mcs;
    std::vector<CdfPoint> cdf;
    std::vector<double> slowdowns;  // only with ExperimentSpec::keep_slowdowns

    friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

/// Per-job record handed to a raw-output sink.
struct RawRun {
    std::size_t cell = 0;
    int repetition = 0;
    std::string_view policy;
    const Workload* workload = nullptr;
    const std::vector<JobOutcome>* outcomes = nullptr;
};

using RawSink = std::function<void(const RawRun&)>;

/// Cooperative interruption: once set, run_experiment stops starting new
/// cells and returns the cells already finished.
inline std::atomic<bool>& stop_requested() {
    static std::atomic<bool> flag{false};
    return flag;
}

/// Worker count from SIZESCHED_WORKERS, else the number of cores.
inline unsigned worker_count() {
    if (const char* env = std::getenv("SIZESCHED_WORKERS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline void validate_spec(const ExperimentSpec& spec) {
    if (spec.policies.empty()) throw Error(ErrorKind::InvalidParameter, "no policies");
    for (const auto& p : spec.policies) (void)make_policy(p, spec.cs_window);
    if (spec.repetitions < 1) throw Error(ErrorKind::InvalidParameter, "repetitions must be >= 1");
    if (spec.axes.size() > 2) throw Error(ErrorKind::InvalidParameter, "at most two sweep axes");
    for (const auto& a : spec.axes) {
        if (a.values.empty()) throw Error(ErrorKind::InvalidParameter, "empty axis " + std::string(to_string(a.axis)));
        if (!spec.trace_path.empty() && a.axis != Axis::Sigma) {
            throw Error(ErrorKind::InvalidParameter, "trace experiments only sweep sigma");
        }
    }
    if (spec.axes.size() == 2 && spec.axes[0].axis == spec.axes[1].axis) {
        throw Error(ErrorKind::InvalidParameter, "duplicate sweep axis");
    }
}

/// Parameter points of the grid, first axis outermost.
inline std::vector<GenParams> grid_cells(const ExperimentSpec& spec) {
    std::vector<GenParams> cells{spec.base};
    for (const SweepAxis& a : spec.axes) {
        std::vector<GenParams> expanded;
        for (const GenParams& c : cells) {
            for (double v : a.values) {
                GenParams p = c;
                set_axis(p, a.axis, v);
                expanded.push_back(p);
            }
        }
        cells = std::move(expanded);
    }
    for (const GenParams& c : cells) {
        if (spec.trace_path.empty()) validate_params(c);
    }
    return cells;
}

namespace detail {

struct PolicyRep {
    double mst = 0.0;
    double vs_ps = 0.0;
    double vs_srpt = 0.0;
    std::vector<double> slowdowns;
};

struct RepData {
    std::vector<double> sizes;
    std::vector<PolicyRep> policies;        // spec.policies order
    std::optional<Workload> workload;       // kept only for the raw sink
    std::vector<std::vector<JobOutcome>> outcomes;
};

inline RepData run_repetition(const ExperimentSpec& spec, const GenParams& cell, std::size_t cell_index, int rep,
                              bool keep_outcomes) {
    const std::uint64_t seed = derive_seed(spec.base_seed, cell_index, static_cast<std::uint64_t>(rep));
    Workload workload;
    if (spec.trace_path.empty()) {
        GenParams p = cell;
        p.seed = seed;
        workload = generate(p);
    } else {
        workload = load_trace(spec.trace_path, cell.sigma, seed);
    }

    const auto simulate = [&](std::string_view name) {
        auto policy = make_policy(name, spec.cs_window);
        return run(workload, *policy);
    };
    const std::vector<JobOutcome> ps = simulate("ps");
    const std::vector<JobOutcome> srpt = simulate("srpt");
    const double ps_mst = mean_sojourn_time(ps);
    const double srpt_mst = mean_sojourn_time(srpt);

    RepData data;
    data.sizes.reserve(workload.jobs.size());
    for (const Job& j : workload.jobs) data.sizes.push_back(j.size);
    for (const std::string& name : spec.policies) {
        std::vector<JobOutcome> outcomes;
        if (name == "ps") {
            outcomes = ps;
        } else if (name == "srpt") {
            outcomes = srpt;
        } else {
            outcomes = simulate(name);
        }
        PolicyRep pr;
        pr.mst = mean_sojourn_time(outcomes);
        pr.vs_ps = pr.mst / ps_mst;
        pr.vs_srpt = pr.mst / srpt_mst;
        pr.slowdowns.reserve(outcomes.size());
        for (const JobOutcome& o : outcomes) pr.slowdowns.push_back(o.slowdown);
        data.policies.push_back(std::move(pr));
        if (keep_outcomes) data.outcomes.push_back(std::move(outcomes));
    }
    if (keep_outcomes) data.workload = std::move(workload);
    return data;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Runs every policy on the same workload for each (cell, repetition) and
/// aggregates per (cell, policy). Normalized ratios are paired within a
/// repetition and then averaged. Results are ordered by cell, then by the
/// policy order of the spec, independent of the worker count.
inline std::vector<ExperimentResult> run_experiment(const ExperimentSpec& spec, const RawSink& raw_sink = {},
                                                    unsigned workers = worker_count()) {
    validate_spec(spec);
    const std::vector<GenParams> cells = grid_cells(spec);
    const std::vector<double> grid = log_grid();
    std::vector<ExperimentResult> results;

    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (stop_requested().load()) break;
        std::vector<detail::RepData> reps(static_cast<std::size_t>(spec.repetitions));
        std::atomic<int> next_rep{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        const auto worker = [&] {
            for (int r = next_rep++; r < spec.repetitions; r = next_rep++) {
                try {
                    reps[static_cast<std::size_t>(r)] =
                        detail::run_repetition(spec, cells[c], c, r, static_cast<bool>(raw_sink));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next_rep = spec.repetitions;
                }
            }
        };
        const unsigned n_threads = std::min<unsigned>(workers, static_cast<unsigned>(spec.repetitions));
        if (n_threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        }
        if (error) std::rethrow_exception(error);

        for (std::size_t p = 0; p < spec.policies.size(); ++p) {
            ExperimentResult res;
            res.policy = spec.policies[p];
            res.params = cells[c];
            res.params.seed = 0;
            res.trace = spec.trace_path;
            res.repetitions = spec.repetitions;
            std::vector<double> msts, vs_ps, vs_srpt, slowdowns;
            std::vector<SizedSlowdown> sized;
            for (const detail::RepData& rep : reps) {
                const detail::PolicyRep& pr = rep.policies[p];
                msts.push_back(pr.mst);
                vs_ps.push_back(pr.vs_ps);
                vs_srpt.push_back(pr.vs_srpt);
                slowdowns.insert(slowdowns.end(), pr.slowdowns.begin(), pr.slowdowns.end());
                for (std::size_t j = 0; j < rep.sizes.size(); ++j) sized.push_back({rep.sizes[j], pr.slowdowns[j]});
            }
            if (!spec.trace_path.empty()) res.params.njobs = static_cast<std::int64_t>(reps.front().sizes.size());
            res.mst_mean = detail::mean(msts);
            res.mst_std = detail::sample_stddev(msts);
            res.mst_vs_ps = detail::mean(vs_ps);
            res.mst_vs_srpt = detail::mean(vs_srpt);
            res.slowdown_p50 = quantile(slowdowns, 0.50);
            res.slowdown_p90 = quantile(slowdowns, 0.90);
            res.slowdown_p99 = quantile(slowdowns, 0.99);
            res.cdf = slowdown_cdf(std::span<const double>(slowdowns), grid);
            if (sized.size() >= 20) res.mcs = mean_conditional_slowdown(std::move(sized), 20);
            if (spec.keep_slowdowns) res.slowdowns = std::move(slowdowns);
            results.push_back(std::move(res));
        }

        if (raw_sink) {
            for (int r = 0; r < spec.repetitions; ++r) {
                const detail::RepData& rep = reps[static_cast<std::size_t>(r)];
                for (std::size_t p = 0; p < spec.policies.size(); ++p) {
                    raw_sink({c, r, spec.policies[p], &*rep.workload, &rep.outcomes[p]});
                }
            }
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Presets

/// `n` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> v = log_grid(lo, hi, n);
    v.front() = lo;
    return v;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig1-heatmap", "fig2-shape", "fig3-noerror", "fig4-sigma", "fig5-slowdown",
        "fig6-mcs",     "fig7-trace", "ci-fig2",
    };
    return names;
}

inline ExperimentSpec preset(std::string_view name) {
    const std::vector<double> shapes = {0.125, 0.177, 0.25, 0.5, 1.0, 2.0, 4.0};
    const std::vector<double> sigmas = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
    const std::vector<std::string> error_fed = {"ps", "las", "srpte", "psbs", "spte", "cse", "mcsse"};

    ExperimentSpec spec;
    if (name == "fig1-heatmap") {
        spec.policies = {"cse", "mcsse", "psbs", "spte"};
        spec.axes = {{Axis::Shape, log_spaced(0.125, 4.0, 7)}, {Axis::Sigma, log_spaced(0.125, 4.0, 7)}};
    } else if (name == "fig2-shape") {
        spec.policies = {"srpt", "srpte", "psbs", "spte", "mcsse", "cse", "las", "ps"};
        spec.axes = {{Axis::Shape, shapes}};
    } else if (name == "fig3-noerror") {
        spec.policies = {"spt", "fsp"};
        spec.base.sigma = 0.0;
        spec.axes = {{Axis::Shape, shapes}};
    } else if (name == "fig4-sigma") {
        spec.policies = {"srpte", "psbs", "spte", "mcsse", "cse", "las", "ps"};
        spec.axes = {{Axis::Shape, {0.25, 0.177, 0.125}}, {Axis::Sigma, sigmas}};
    } else if (name == "fig5-slowdown" || name == "fig6-mcs") {
        spec.policies = error_fed;
    } else if (name == "fig7-trace") {
        spec.policies = {"srpte", "psbs", "spte", "mcsse", "cse", "las", "ps"};
        spec.axes = {{Axis::Sigma, sigmas}};
    } else if (name == "ci-fig2") {
        spec.policies = {"srpt", "srpte", "psbs", "spte"};
        spec.base.njobs = 2000;
        spec.repetitions = 10;
        spec.axes = {{Axis::Shape, {0.125, 0.25, 1.0, 4.0}}};
    } else {
        throw Error(ErrorKind::InvalidParameter, "unknown preset " + std::string(name));
    }
    return spec;
}

}  // namespace sizesched
