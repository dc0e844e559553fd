#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sizesched/core.hpp"

namespace sizesched {

struct McsBin {
    double mean_size = 0.0;
    double mean_slowdown = 0.0;
    std::size_t count = 0;

    friend bool operator==(const McsBin&, const McsBin&) = default;
};

struct CdfPoint {
    double threshold = 0.0;
    double fraction = 0.0;

    friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

inline double mean_sojourn_time(std::span<const JobOutcome> outcomes) {
    if (outcomes.empty()) throw Error(ErrorKind::EmptyInput, "mean_sojourn_time");
    double sum = 0.0;
    for (const JobOutcome& o : outcomes) sum += o.sojourn;
    return sum / static_cast<double>(outcomes.size());
}

inline double normalized_mst(std::span<const JobOutcome> outcomes, std::span<const JobOutcome> baseline) {
    if (outcomes.empty() || baseline.empty()) throw Error(ErrorKind::EmptyInput, "normalized_mst");
    return mean_sojourn_time(outcomes) / mean_sojourn_time(baseline);
}

/// Empirical CDF of the slowdowns, evaluated at each threshold of the grid.
inline std::vector<CdfPoint> slowdown_cdf(std::span<const double> slowdowns, std::span<const double> grid) {
    if (slowdowns.empty()) throw Error(ErrorKind::EmptyInput, "slowdown_cdf");
    std::vector<double> sorted(slowdowns.begin(), slowdowns.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> cdf;
    cdf.reserve(grid.size());
    const double n = static_cast<double>(sorted.size());
    for (double t : grid) {
        const auto le = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        cdf.push_back({t, static_cast<double>(le) / n});
    }
    return cdf;
}

inline std::vector<CdfPoint> slowdown_cdf(std::span<const JobOutcome> outcomes, std::span<const double> grid) {
    std::vector<double> slowdowns;
    slowdowns.reserve(outcomes.size());
    for (const JobOutcome& o : outcomes) slowdowns.push_back(o.slowdown);
    return slowdown_cdf(slowdowns, grid);
}

/// `points` log-spaced thresholds from `lo` to `hi` inclusive.
inline std::vector<double> log_grid(double lo = 1.0, double hi = 100.0, std::size_t points = 200) {
    std::vector<double> grid(points);
    const double step = points > 1 ? std::log(hi / lo) / static_cast<double>(points - 1) : 0.0;
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
    if (points > 1) grid.back() = hi;
    return grid;
}

/// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "quantile");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Size/slowdown pair of one finished job, the input of mean_conditional_slowdown.
struct SizedSlowdown {
    double size = 0.0;
    double slowdown = 0.0;
};

/// Sorts by size and splits into `nbins` contiguous bins of equal count; the
/// first (n mod nbins) bins take one extra job.
inline std::vector<McsBin> mean_conditional_slowdown(std::vector<SizedSlowdown> jobs, std::size_t nbins = 20) {
    if (nbins == 0 || jobs.size() < nbins) throw Error(ErrorKind::TooFewJobs, "need at least one job per bin");
    std::stable_sort(jobs.begin(), jobs.end(),
                     [](const SizedSlowdown& a, const SizedSlowdown& b) { return a.size < b.size; });
    const std::size_t base = jobs.size() / nbins;
    const std::size_t extra = jobs.size() % nbins;
    std::vector<McsBin> bins;
    bins.reserve(nbins);
    std::size_t begin = 0;
    for (std::size_t b = 0; b < nbins; ++b) {
        const std::size_t count = base + (b < extra ? 1 : 0);
        double size_sum = 0.0, slow_sum = 0.0;
        for (std::size_t i = begin; i < begin + count; ++i) {
            size_sum += jobs[i].size;
            slow_sum += jobs[i].slowdown;
        }
        bins.push_back({size_sum / static_cast<double>(count), slow_sum / static_cast<double>(count), count});
        begin += count;
    }
    return bins;
}

/// Pairs outcomes with the sizes of the workload they came from (same order).
inline std::vector<SizedSlowdown> sized_slowdowns(std::span<const Job> jobs, std::span<const JobOutcome> outcomes) {
    std::vector<SizedSlowdown> out;
    out.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size() && i < outcomes.size(); ++i) {
        out.push_back({jobs[i].size, outcomes[i].slowdown});
    }
    return out;
}

}  // namespace sizesched
