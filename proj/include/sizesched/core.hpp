#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sizesched {

using JobId = std::int64_t;

/// Completion tolerance: a job whose remaining work is at most this much is done.
inline constexpr double kEpsilon = 1e-9;

enum class ErrorKind {
    NonPositiveSize,
    NonPositiveEstimate,
    NegativeArrival,
    DuplicateId,
    PolicyViolation,
    Stall,
    DomainError,
    ParseError,
    EmptyInput,
    TooFewJobs,
    InvalidParameter,
    UnknownPolicy,
    IoError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonPositiveSize: return "NonPositiveSize";
        case ErrorKind::NonPositiveEstimate: return "NonPositiveEstimate";
        case ErrorKind::NegativeArrival: return "NegativeArrival";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::PolicyViolation: return "PolicyViolation";
        case ErrorKind::Stall: return "Stall";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::TooFewJobs: return "TooFewJobs";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::UnknownPolicy: return "UnknownPolicy";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct Job {
    JobId id = 0;
    double arrival = 0.0;
    double size = 0.0;      // true work, server-seconds
    double estimate = 0.0;  // what error-fed policies see

    friend bool operator==(const Job&, const Job&) = default;
};

/// Arrival order with id tiebreak; used wherever deterministic order matters.
inline bool arrives_before(const Job& a, const Job& b) {
    return std::pair(a.arrival, a.id) < std::pair(b.arrival, b.id);
}

struct JobOutcome {
    JobId job_id = 0;
    double completion = 0.0;
    double sojourn = 0.0;
    double slowdown = 0.0;  // sojourn / true size

    friend bool operator==(const JobOutcome&, const JobOutcome&) = default;
};

inline JobOutcome make_outcome(const Job& job, double completion) {
    const double sojourn = completion - job.arrival;
    return {job.id, completion, sojourn, sojourn / job.size};
}

struct AllocationEntry {
    JobId job_id = 0;
    double rate = 0.0;
};

using Allocation = std::vector<AllocationEntry>;

struct GenParams {
    double shape = 0.25;
    double timeshape = 1.0;
    double sigma = 0.5;
    double load = 0.9;
    std::int64_t njobs = 10000;
    std::uint64_t seed = 0;

    friend bool operator==(const GenParams&, const GenParams&) = default;
};

/// Either the generator parameters or the trace a workload came from.
struct Provenance {
    std::optional<GenParams> params;
    std::string trace_path;
    double trace_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct Workload {
    std::vector<Job> jobs;
    Provenance provenance;
};

/// Checks every Job invariant and returns the workload sorted by (arrival, id).
inline Workload validate_workload(Workload w) {
    std::unordered_set<JobId> seen;
    seen.reserve(w.jobs.size());
    for (const Job& job : w.jobs) {
        const std::string tag = "job " + std::to_string(job.id);
        if (!(job.size > 0.0)) throw Error(ErrorKind::NonPositiveSize, tag);
        if (!(job.estimate > 0.0)) throw Error(ErrorKind::NonPositiveEstimate, tag);
        if (!(job.arrival >= 0.0)) throw Error(ErrorKind::NegativeArrival, tag);
        if (!seen.insert(job.id).second) throw Error(ErrorKind::DuplicateId, tag);
    }
    if (!std::is_sorted(w.jobs.begin(), w.jobs.end(), arrives_before)) {
        std::sort(w.jobs.begin(), w.jobs.end(), arrives_before);
    }
    return w;
}

}  // namespace sizesched
