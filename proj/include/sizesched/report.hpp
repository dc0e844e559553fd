#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sizesched/experiment.hpp"

namespace sizesched {

enum class Format { Csv, Json };

inline Format parse_format(std::string_view text) {
    if (text == "csv") return Format::Csv;
    if (text == "json") return Format::Json;
    throw Error(ErrorKind::InvalidParameter, "unknown format " + std::string(text));
}

inline constexpr std::string_view kCsvHeader =
    "policy,shape,sigma,load,timeshape,njobs,reps,mst_mean,mst_std,mst_vs_ps,mst_vs_srpt,"
    "slowdown_p50,slowdown_p90,slowdown_p99";

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
    char buf[32];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace detail

inline void write_csv(std::span<const ExperimentResult> results, std::ostream& out) {
    using detail::fmt_double;
    out << kCsvHeader << '\n';
    for (const ExperimentResult& r : results) {
        out << r.policy << ',' << fmt_double(r.params.shape) << ',' << fmt_double(r.params.sigma) << ','
            << fmt_double(r.params.load) << ',' << fmt_double(r.params.timeshape) << ',' << r.params.njobs << ','
            << r.repetitions << ',' << fmt_double(r.mst_mean) << ',' << fmt_double(r.mst_std) << ','
            << fmt_double(r.mst_vs_ps) << ',' << fmt_double(r.mst_vs_srpt) << ',' << fmt_double(r.slowdown_p50)
            << ',' << fmt_double(r.slowdown_p90) << ',' << fmt_double(r.slowdown_p99) << '\n';
    }
}

inline void to_json(nlohmann::json& j, const McsBin& b) {
    j = {{"mean_size", b.mean_size}, {"mean_slowdown", b.mean_slowdown}, {"count", b.count}};
}

inline void from_json(const nlohmann::json& j, McsBin& b) {
    j.at("mean_size").get_to(b.mean_size);
    j.at("mean_slowdown").get_to(b.mean_slowdown);
    j.at("count").get_to(b.count);
}

inline void to_json(nlohmann::json& j, const CdfPoint& p) {
    j = {{"threshold", p.threshold}, {"fraction", p.fraction}};
}

inline void from_json(const nlohmann::json& j, CdfPoint& p) {
    j.at("threshold").get_to(p.threshold);
    j.at("fraction").get_to(p.fraction);
}

inline void to_json(nlohmann::json& j, const ExperimentResult& r) {
    j = {
        {"policy", r.policy},
        {"shape", r.params.shape},
        {"sigma", r.params.sigma},
        {"load", r.params.load},
        {"timeshape", r.params.timeshape},
        {"njobs", r.params.njobs},
        {"trace", r.trace},
        {"reps", r.repetitions},
        {"mst_mean", r.mst_mean},
        {"mst_std", r.mst_std},
        {"mst_vs_ps", r.mst_vs_ps},
        {"mst_vs_srpt", r.mst_vs_srpt},
        {"slowdown_p50", r.slowdown_p50},
        {"slowdown_p90", r.slowdown_p90},
        {"slowdown_p99", r.slowdown_p99},
        {"mcs", r.mcs},
        {"cdf", r.cdf},
    };
    if (!r.slowdowns.empty()) j["slowdowns"] = r.slowdowns;
}

inline void from_json(const nlohmann::json& j, ExperimentResult& r) {
    j.at("policy").get_to(r.policy);
    j.at("shape").get_to(r.params.shape);
    j.at("sigma").get_to(r.params.sigma);
    j.at("load").get_to(r.params.load);
    j.at("timeshape").get_to(r.params.timeshape);
    j.at("njobs").get_to(r.params.njobs);
    r.params.seed = 0;
    r.trace = j.value("trace", std::string());
    j.at("reps").get_to(r.repetitions);
    j.at("mst_mean").get_to(r.mst_mean);
    j.at("mst_std").get_to(r.mst_std);
    j.at("mst_vs_ps").get_to(r.mst_vs_ps);
    j.at("mst_vs_srpt").get_to(r.mst_vs_srpt);
    j.at("slowdown_p50").get_to(r.slowdown_p50);
    j.at("slowdown_p90").get_to(r.slowdown_p90);
    j.at("slowdown_p99").get_to(r.slowdown_p99);
    j.at("mcs").get_to(r.mcs);
    j.at("cdf").get_to(r.cdf);
    r.slowdowns = j.value("slowdowns", std::vector<double>{});
}

inline nlohmann::json results_to_json(std::span<const ExperimentResult> results, std::uint64_t base_seed) {
    nlohmann::json doc;
    doc["base_seed"] = base_seed;
    doc["results"] = nlohmann::json::array();
    for (const ExperimentResult& r : results) doc["results"].push_back(r);
    return doc;
}

inline std::vector<ExperimentResult> results_from_json(const nlohmann::json& doc) {
    return doc.at("results").get<std::vector<ExperimentResult>>();
}

inline void write_json(std::span<const ExperimentResult> results, std::uint64_t base_seed, std::ostream& out) {
    out << results_to_json(results, base_seed).dump(2) << '\n';
}

/// Writes results to `path`; the seed is recorded in the JSON document and
/// as a leading comment line in CSV.
inline void emit_results(std::span<const ExperimentResult> results, Format format, const std::string& path,
                         std::uint64_t base_seed) {
    if (results.empty()) throw Error(ErrorKind::EmptyInput, "no results to emit");
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    if (format == Format::Csv) {
        out << "# base_seed=" << base_seed << '\n';
        write_csv(results, out);
    } else {
        write_json(results, base_seed, out);
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

inline constexpr std::string_view kRawHeader =
    "policy,cell,rep,job_id,arrival,size,estimate,completion,sojourn,slowdown";

/// One CSV line per job of a raw run.
inline void write_raw(const RawRun& run, std::ostream& out) {
    using detail::fmt_double;
    const auto& jobs = run.workload->jobs;
    const auto& outcomes = *run.outcomes;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        const JobOutcome& o = outcomes[i];
        out << run.policy << ',' << run.cell << ',' << run.repetition << ',' << j.id << ',' << fmt_double(j.arrival)
            << ',' << fmt_double(j.size) << ',' << fmt_double(j.estimate) << ',' << fmt_double(o.completion) << ','
            << fmt_double(o.sojourn) << ',' << fmt_double(o.slowdown) << '\n';
    }
}

}  // namespace sizesched
