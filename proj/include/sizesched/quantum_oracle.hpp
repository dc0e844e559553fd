#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "sizesched/core.hpp"
#include "sizesched/engine.hpp"

namespace sizesched {

/// Brute-force cross-check for run(): advances time in steps of at most
/// `delta`, re-querying the policy after every step and never consulting
/// next_internal_event. Steps are cut short only at arrivals and at the
/// completion of a served job, so no capacity is lost inside a step.
/// Rate changes driven by policy-internal events (LAS catch-up, late-set
/// changes) are therefore resolved to within one step.
inline std::vector<JobOutcome> run_quantum_oracle(const Workload& workload, Policy& policy, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidParameter, "quantum must be positive");
    constexpr double kInf = std::numeric_limits<double>::infinity();

    const std::vector<Job>& jobs = workload.jobs;
    std::vector<JobOutcome> outcomes(jobs.size());
    std::unordered_map<JobId, std::size_t> position;
    for (std::size_t i = 0; i < jobs.size(); ++i) position.emplace(jobs[i].id, i);

    SystemState state;
    std::size_t next = 0;
    while (next < jobs.size() || !state.empty()) {
        if (state.empty() && jobs[next].arrival > state.now()) {
            const double idle = jobs[next].arrival - state.now();
            state.set_now(jobs[next].arrival);
            policy.on_time_advanced(idle, state);
        }
        while (next < jobs.size() && jobs[next].arrival <= state.now()) {
            state.add(jobs[next]);
            policy.on_arrival(jobs[next], state);
            ++next;
        }

        const Allocation alloc = policy.allocate(state);
        double total = 0.0;
        for (const auto& e : alloc) {
            if (state.find(e.job_id) == nullptr || !(e.rate > 0.0)) {
                throw Error(ErrorKind::PolicyViolation, "bad allocation entry for job " + std::to_string(e.job_id));
            }
            total += e.rate;
        }
        if (total > 1.0 + 1e-6) throw Error(ErrorKind::PolicyViolation, "rates sum above 1");
        if (alloc.empty()) throw Error(ErrorKind::Stall, "jobs present, none served");

        double step = delta;
        if (next < jobs.size()) step = std::min(step, jobs[next].arrival - state.now());
        for (const auto& e : alloc) step = std::min(step, state.find(e.job_id)->remaining() / e.rate);
        step = std::max(step, 0.0);
        if (step == kInf) throw Error(ErrorKind::Stall, "unbounded step");

        for (const auto& e : alloc) state.serve(e.job_id, e.rate * step);
        state.set_now(state.now() + step);
        policy.on_time_advanced(step, state);

        std::vector<Job> finished;
        for (const auto& e : alloc) {
            const PresentJob* pj = state.find(e.job_id);
            if (pj->remaining() <= kEpsilon) finished.push_back(pj->job);
        }
        std::sort(finished.begin(), finished.end(), arrives_before);
        for (const Job& job : finished) {
            outcomes[position.at(job.id)] = make_outcome(job, state.now());
            policy.on_completion(job.id, state);
            state.remove(job.id);
        }
    }
    return outcomes;
}

}  // namespace sizesched
