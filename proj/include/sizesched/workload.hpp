#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sizesched/core.hpp"

namespace sizesched {

// ---------------------------------------------------------------------------
// Randomness

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for one (cell, repetition) of an experiment grid:
/// mix64(mix64(base ^ mix64(cell)) ^ repetition).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t repetition) {
    return mix64(mix64(base ^ mix64(cell)) ^ repetition);
}

/// Uniform draw in the open interval (0, 1) from the top 53 bits.
inline double uniform_open01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; one draw per call, portable across
/// standard libraries.
inline double standard_normal(std::mt19937_64& rng) {
    const double u1 = uniform_open01(rng);
    const double u2 = uniform_open01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Distributions

/// Inverse-CDF Weibull draw: scale * (-ln u)^(1/shape).
inline double sample_weibull(double shape, double scale, double u) {
    if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::DomainError, "uniform draw outside (0,1)");
    if (!(shape > 0.0) || !(scale > 0.0)) throw Error(ErrorKind::DomainError, "shape and scale must be positive");
    return scale * std::pow(-std::log(u), 1.0 / shape);
}

/// Weibull scale giving the requested mean.
inline double weibull_scale_for_mean(double shape, double mean) {
    return mean / std::tgamma(1.0 + 1.0 / shape);
}

/// Multiplicative log-normal estimation error with median 1.
inline double error_factor(double sigma, double z) {
    if (!(sigma >= 0.0)) throw Error(ErrorKind::DomainError, "sigma must be non-negative");
    return std::exp(sigma * z);
}

// ---------------------------------------------------------------------------
// Synthetic workloads

inline void validate_params(const GenParams& p) {
    if (!(p.shape > 0.0)) throw Error(ErrorKind::InvalidParameter, "shape must be > 0");
    if (!(p.timeshape > 0.0)) throw Error(ErrorKind::InvalidParameter, "timeshape must be > 0");
    if (!(p.sigma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma must be >= 0");
    if (!(p.load > 0.0 && p.load < 1.0)) throw Error(ErrorKind::InvalidParameter, "load must be in (0,1)");
    if (p.njobs < 1) throw Error(ErrorKind::InvalidParameter, "njobs must be >= 1");
}

/// Weibull sizes with mean 1, Weibull gaps with mean 1/load, log-normal
/// estimates. Gaps, sizes and errors come from three independent streams, so
/// changing sigma leaves arrivals and sizes untouched for a given seed.
inline Workload generate(const GenParams& params) {
    validate_params(params);
    const double size_scale = weibull_scale_for_mean(params.shape, 1.0);
    const double gap_scale = weibull_scale_for_mean(params.timeshape, 1.0 / params.load);

    std::mt19937_64 gaps(derive_seed(params.seed, 0, 0));
    std::mt19937_64 sizes(derive_seed(params.seed, 0, 1));
    std::mt19937_64 errors(derive_seed(params.seed, 0, 2));

    Workload w;
    w.provenance.params = params;
    w.provenance.seed = params.seed;
    w.jobs.reserve(static_cast<std::size_t>(params.njobs));
    double t = 0.0;
    for (std::int64_t i = 0; i < params.njobs; ++i) {
        t += sample_weibull(params.timeshape, gap_scale, uniform_open01(gaps));
        const double size = sample_weibull(params.shape, size_scale, uniform_open01(sizes));
        const double estimate = size * error_factor(params.sigma, standard_normal(errors));
        w.jobs.push_back({i, t, size, estimate});
    }
    return w;
}

// ---------------------------------------------------------------------------
// Traces

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) return false;
    if constexpr (std::is_floating_point_v<T>) return std::isfinite(out);
    return true;
}

}  // namespace detail

/// Parses trace CSV text. Records are `job_id,arrival,size[,estimate]`;
/// blank lines and '#' comments are skipped and a non-numeric first record
/// is taken as a header. Missing estimates are drawn as size * error_factor
/// with a generator seeded from `seed`. Arrivals are shifted so the earliest
/// is 0.
inline Workload parse_trace(std::istream& in, double sigma, std::uint64_t seed, const std::string& origin = "<stream>") {
    if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma must be >= 0");
    std::mt19937_64 errors(derive_seed(seed, 0, 2));

    Workload w;
    w.provenance.trace_path = origin;
    w.provenance.trace_sigma = sigma;
    w.provenance.seed = seed;

    std::string line;
    std::size_t line_no = 0;
    bool seen_record = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto fields = detail::split_fields(text);
        const auto fail = [&](const std::string& why) {
            return Error(ErrorKind::ParseError, origin + ":" + std::to_string(line_no) + ": " + why);
        };
        Job job;
        if (fields.size() != 3 && fields.size() != 4) {
            throw fail("expected 3 or 4 fields, got " + std::to_string(fields.size()));
        }
        if (!detail::parse_number(fields[0], job.id)) {
            if (!seen_record) {
                seen_record = true;  // header
                continue;
            }
            throw fail("bad job_id '" + std::string(fields[0]) + "'");
        }
        seen_record = true;
        if (!detail::parse_number(fields[1], job.arrival)) throw fail("bad arrival '" + std::string(fields[1]) + "'");
        if (!detail::parse_number(fields[2], job.size)) throw fail("bad size '" + std::string(fields[2]) + "'");
        if (!(job.size > 0.0)) throw Error(ErrorKind::NonPositiveSize, origin + ":" + std::to_string(line_no));
        if (fields.size() == 4) {
            if (!detail::parse_number(fields[3], job.estimate)) throw fail("bad estimate '" + std::string(fields[3]) + "'");
        } else {
            job.estimate = job.size * error_factor(sigma, standard_normal(errors));
        }
        w.jobs.push_back(job);
    }
    if (!w.jobs.empty()) {
        double first = w.jobs.front().arrival;
        for (const Job& j : w.jobs) first = std::min(first, j.arrival);
        for (Job& j : w.jobs) j.arrival -= first;
    }
    return validate_workload(std::move(w));
}

inline Workload load_trace(const std::string& path, double sigma, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open trace " + path);
    return parse_trace(in, sigma, seed, path);
}

}  // namespace sizesched
