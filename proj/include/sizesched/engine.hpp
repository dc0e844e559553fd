#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sizesched/core.hpp"

namespace sizesched {

struct PresentJob {
    Job job;
    double attained = 0.0;  // work served so far

    double remaining() const { return job.size - attained; }
};

/// Jobs that have arrived and not yet completed, plus the current time.
///
/// Storage order is unspecified (removal swaps with the last slot); policies
/// that need an order must impose it themselves.
class SystemState {
public:
    double now() const { return now_; }
    bool empty() const { return present_.empty(); }
    std::size_t size() const { return present_.size(); }
    std::span<const PresentJob> present() const { return present_; }

    const PresentJob* find(JobId id) const {
        auto it = slot_.find(id);
        return it == slot_.end() ? nullptr : &present_[it->second];
    }

    double attained(JobId id) const {
        const PresentJob* pj = find(id);
        if (pj == nullptr) {
            throw Error(ErrorKind::PolicyViolation, "job " + std::to_string(id) + " is not present");
        }
        return pj->attained;
    }

    // Mutators used by the simulation loops.

    void set_now(double t) { now_ = t; }

    void add(const Job& job) {
        slot_.emplace(job.id, present_.size());
        present_.push_back({job, 0.0});
    }

    void serve(JobId id, double work) { present_[slot_.at(id)].attained += work; }

    void remove(JobId id) {
        auto it = slot_.find(id);
        const std::size_t slot = it->second;
        slot_.erase(it);
        if (slot + 1 != present_.size()) {
            present_[slot] = present_.back();
            slot_[present_[slot].job.id] = slot;
        }
        present_.pop_back();
    }

private:
    double now_ = 0.0;
    std::vector<PresentJob> present_;
    std::unordered_map<JobId, std::size_t> slot_;
};

/// A preemptive single-server scheduling discipline.
///
/// The simulation loop calls the hooks in this order at every event:
/// on_time_advanced (after the state has been served for the elapsed time),
/// on_completion for each finished job (still present in the state while the
/// hook runs), then on_arrival for each new job (already present).
/// allocate must not change observable policy state.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string_view name() const = 0;
    virtual void on_arrival(const Job& job, const SystemState& state) = 0;
    virtual void on_completion(JobId id, const SystemState& state) = 0;
    virtual Allocation allocate(const SystemState& state) const = 0;

    /// Absolute time of the next policy-internal event, if any.
    virtual std::optional<double> next_internal_event(const SystemState&) const {
        return std::nullopt;
    }

    virtual void on_time_advanced(double /*dt*/, const SystemState& /*state*/) {}
};

namespace detail {

/// Validates an allocation against the state and returns the summed rate.
inline double check_allocation(const Allocation& alloc, const SystemState& state) {
    double total = 0.0;
    for (const auto& [id, rate] : alloc) {
        if (state.find(id) == nullptr) {
            throw Error(ErrorKind::PolicyViolation,
                        "allocation names absent job " + std::to_string(id));
        }
        if (!(rate > 0.0) || rate > 1.0 + kEpsilon) {
            throw Error(ErrorKind::PolicyViolation,
                        "rate " + std::to_string(rate) + " for job " + std::to_string(id));
        }
        total += rate;
    }
    const double slack = kEpsilon * static_cast<double>(alloc.size() + 1);
    if (total > 1.0 + slack) {
        throw Error(ErrorKind::PolicyViolation, "rates sum to " + std::to_string(total));
    }
    if (!state.empty()) {
        if (alloc.empty()) {
            throw Error(ErrorKind::Stall, std::to_string(state.size()) + " jobs present, none served");
        }
        if (total < 1.0 - slack) {
            throw Error(ErrorKind::PolicyViolation,
                        "allocation is not work-conserving (sum " + std::to_string(total) + ")");
        }
    }
    if (alloc.size() > 1) {
        std::unordered_set<JobId> ids;
        for (const auto& e : alloc) {
            if (!ids.insert(e.job_id).second) {
                throw Error(ErrorKind::PolicyViolation,
                            "job " + std::to_string(e.job_id) + " allocated twice");
            }
        }
    }
    return total;
}

}  // namespace detail

/// Fluid event-driven simulation.
///
/// Time jumps to the earliest of: next arrival, next completion under the
/// current rates, next policy-internal event. Completions at an instant are
/// processed before arrivals at the same instant. The workload must be valid
/// (see validate_workload); outcomes are returned in workload order.
inline std::vector<JobOutcome> run(const Workload& workload, Policy& policy) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr int kMaxIdleSteps = 16;

    const std::vector<Job>& jobs = workload.jobs;
    std::vector<JobOutcome> outcomes(jobs.size());
    std::unordered_map<JobId, std::size_t> position;
    position.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) position.emplace(jobs[i].id, i);

    SystemState state;
    std::size_t next = 0;
    int idle_steps = 0;
    std::vector<const PresentJob*> done;

    while (next < jobs.size() || !state.empty()) {
        const Allocation alloc = policy.allocate(state);
        detail::check_allocation(alloc, state);

        const double now = state.now();
        double t_next = next < jobs.size() ? jobs[next].arrival : kInf;
        for (const auto& [id, rate] : alloc) {
            t_next = std::min(t_next, now + state.find(id)->remaining() / rate);
        }
        if (auto t = policy.next_internal_event(state)) t_next = std::min(t_next, *t);
        if (t_next == kInf) {
            // Nothing left but policy bookkeeping.
            break;
        }
        const double dt = std::max(0.0, t_next - now);

        for (const auto& [id, rate] : alloc) state.serve(id, rate * dt);
        state.set_now(std::max(now, t_next));
        policy.on_time_advanced(dt, state);

        bool progressed = dt > 0.0;

        done.clear();
        for (const auto& e : alloc) {
            const PresentJob* pj = state.find(e.job_id);
            if (pj->remaining() <= kEpsilon) done.push_back(pj);
        }
        std::sort(done.begin(), done.end(),
                  [](const PresentJob* a, const PresentJob* b) { return arrives_before(a->job, b->job); });
        std::vector<JobId> done_ids;
        done_ids.reserve(done.size());
        for (const PresentJob* pj : done) done_ids.push_back(pj->job.id);
        for (JobId id : done_ids) {
            const Job& job = jobs[position.at(id)];
            outcomes[position.at(id)] = make_outcome(job, state.now());
            policy.on_completion(id, state);
            state.remove(id);
            progressed = true;
        }

        while (next < jobs.size() && jobs[next].arrival <= state.now()) {
            state.add(jobs[next]);
            policy.on_arrival(jobs[next], state);
            ++next;
            progressed = true;
        }

        idle_steps = progressed ? 0 : idle_steps + 1;
        if (idle_steps > kMaxIdleSteps) {
            throw Error(ErrorKind::Stall, "simulation makes no progress at t=" + std::to_string(state.now()));
        }
    }
    return outcomes;
}

}  // namespace sizesched
