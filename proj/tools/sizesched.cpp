// Command-line front end: run experiment grids, list policies, check traces.

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sizesched/sizesched.hpp"

namespace {

using namespace sizesched;

void on_interrupt(int) { stop_requested().store(true); }

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const std::string& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const auto comma = item.find(',', start);
            const std::string part = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!part.empty()) out.push_back(part);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

/// Applies one command-line parameter: a single value sets the base, several
/// values replace (or add) a sweep axis.
void apply_values(ExperimentSpec& spec, Axis axis, const std::vector<double>& values) {
    if (values.empty()) return;
    std::erase_if(spec.axes, [&](const SweepAxis& a) { return a.axis == axis; });
    if (values.size() == 1) {
        set_axis(spec.base, axis, values.front());
    } else {
        spec.axes.push_back({axis, values});
    }
}

struct RunOptions {
    std::string preset_name;
    std::vector<std::string> policies;
    std::vector<double> shape, sigma, load, timeshape, njobs;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    std::string trace;
    std::string out;
    std::string format;
    std::string raw;
    int cs_window = 10;
};

int do_run(const RunOptions& opt) {
    ExperimentSpec spec;
    if (!opt.preset_name.empty()) spec = preset(opt.preset_name);
    if (!opt.policies.empty()) spec.policies = split_commas(opt.policies);
    if (!opt.trace.empty()) {
        spec.trace_path = opt.trace;
        std::erase_if(spec.axes, [](const SweepAxis& a) { return a.axis != Axis::Sigma; });
    }
    apply_values(spec, Axis::Shape, opt.shape);
    apply_values(spec, Axis::Sigma, opt.sigma);
    apply_values(spec, Axis::Load, opt.load);
    apply_values(spec, Axis::Timeshape, opt.timeshape);
    apply_values(spec, Axis::Njobs, opt.njobs);
    if (opt.reps) spec.repetitions = *opt.reps;
    if (opt.seed) spec.base_seed = *opt.seed;
    spec.cs_window = opt.cs_window;
    if (opt.preset_name == "fig7-trace" && spec.trace_path.empty()) {
        throw Error(ErrorKind::InvalidParameter, "preset fig7-trace needs --trace");
    }

    Format format = Format::Csv;
    if (!opt.format.empty()) {
        format = parse_format(opt.format);
    } else if (opt.out.size() >= 5 && opt.out.ends_with(".json")) {
        format = Format::Json;
    }

    std::ofstream raw_out;
    RawSink sink;
    if (!opt.raw.empty()) {
        raw_out.open(opt.raw);
        if (!raw_out) throw Error(ErrorKind::IoError, "cannot write " + opt.raw);
        raw_out << "# base_seed=" << spec.base_seed << '\n' << kRawHeader << '\n';
        sink = [&raw_out](const RawRun& run) { write_raw(run, raw_out); };
    }

    std::signal(SIGINT, on_interrupt);
    const std::vector<ExperimentResult> results = run_experiment(spec, sink);
    const bool interrupted = stop_requested().load();
    if (results.empty()) throw Error(ErrorKind::EmptyInput, "no cell finished");

    if (opt.out.empty() || opt.out == "-") {
        if (format == Format::Csv) {
            std::cout << "# base_seed=" << spec.base_seed << '\n';
            write_csv(results, std::cout);
        } else {
            write_json(results, spec.base_seed, std::cout);
        }
    } else {
        emit_results(results, format, opt.out, spec.base_seed);
    }
    if (interrupted) {
        std::cerr << "interrupted: wrote " << results.size() << " partial results\n";
        return 130;
    }
    return 0;
}

int do_validate_trace(const std::string& path, double sigma, std::uint64_t seed) {
    const Workload w = load_trace(path, sigma, seed);
    double work = 0.0;
    for (const Job& j : w.jobs) work += j.size;
    const double span = w.jobs.empty() ? 0.0 : w.jobs.back().arrival;
    std::cout << path << ": " << w.jobs.size() << " jobs, arrival span " << span << ", total work " << work;
    if (span > 0.0) std::cout << ", offered load " << work / span;
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preemptive single-server scheduling simulator with inexact job sizes"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment grid and write aggregated results");
    run_cmd->add_option("--preset", run_opt.preset_name, "Named experiment preset")
        ->check(CLI::IsMember(sizesched::preset_names()));
    run_cmd->add_option("--policy", run_opt.policies, "Policy names (repeatable or comma-separated)");
    run_cmd->add_option("--shape", run_opt.shape, "Weibull shape of job sizes; several values sweep");
    run_cmd->add_option("--sigma", run_opt.sigma, "Log-normal sigma of estimation error; several values sweep");
    run_cmd->add_option("--load", run_opt.load, "Offered load; several values sweep");
    run_cmd->add_option("--timeshape", run_opt.timeshape, "Weibull shape of inter-arrival gaps; several values sweep");
    run_cmd->add_option("--njobs", run_opt.njobs, "Jobs per workload; several values sweep");
    run_cmd->add_option("--reps", run_opt.reps, "Repetitions per grid cell");
    run_cmd->add_option("--seed", run_opt.seed, "Base seed");
    run_cmd->add_option("--trace", run_opt.trace, "Trace CSV replacing the synthetic generator");
    run_cmd->add_option("--out", run_opt.out, "Output file ('-' or omitted: stdout)");
    run_cmd->add_option("--format", run_opt.format, "csv or json (default: from --out extension, else csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    run_cmd->add_option("--raw", run_opt.raw, "Also dump per-job outcomes to this CSV file");
    run_cmd->add_option("--cs-window", run_opt.cs_window, "Comparison window r of CS/MCSS")->check(CLI::PositiveNumber);

    app.add_subcommand("list-policies", "Print the available policy names");

    std::string trace_path;
    double trace_sigma = 0.0;
    std::uint64_t trace_seed = 1;
    auto* validate_cmd = app.add_subcommand("validate-trace", "Parse and validate a trace CSV");
    validate_cmd->add_option("path", trace_path, "Trace CSV")->required();
    validate_cmd->add_option("--sigma", trace_sigma, "Sigma for synthesized estimates");
    validate_cmd->add_option("--seed", trace_seed, "Seed for synthesized estimates");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return do_run(run_opt);
        if (validate_cmd->parsed()) return do_validate_trace(trace_path, trace_sigma, trace_seed);
        for (std::string_view name : sizesched::policy_names()) {
            const char* info = sizesched::reads_estimates(name) ? "estimated sizes"
                               : (name == "ps" || name == "las") ? "size-oblivious"
                                                                 : "exact sizes";
            std::cout << name << '\t' << info << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
