#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sizesched/core.hpp"
#include "sizesched/engine.hpp"

namespace sizesched {

/// Which job-size field a size-based policy reads.
enum class SizeInfo { Exact, Estimated };

inline double size_key(const Job& job, SizeInfo info) {
    return info == SizeInfo::Exact ? job.size : job.estimate;
}

/// (key, arrival, id): the ordering shared by the size-based policies.
struct RankKey {
    double key = 0.0;
    double arrival = 0.0;
    JobId id = 0;

    friend auto operator<=>(const RankKey&, const RankKey&) = default;
};

// ---------------------------------------------------------------------------
// Size-oblivious policies

/// Processor sharing: every present job gets an equal share.
class ProcessorSharing final : public Policy {
public:
    std::string_view name() const override { return "ps"; }
    void on_arrival(const Job&, const SystemState&) override {}
    void on_completion(JobId, const SystemState&) override {}

    Allocation allocate(const SystemState& state) const override {
        Allocation alloc;
        if (state.empty()) return alloc;
        const double rate = 1.0 / static_cast<double>(state.size());
        alloc.reserve(state.size());
        for (const PresentJob& pj : state.present()) alloc.push_back({pj.job.id, rate});
        return alloc;
    }
};

/// Least attained service (foreground-background).
///
/// Jobs whose attained service is within kEpsilon of the minimum share the
/// server; the internal event is the instant that group catches up with the
/// next attained level.
class LeastAttainedService final : public Policy {
public:
    std::string_view name() const override { return "las"; }
    void on_arrival(const Job&, const SystemState&) override {}
    void on_completion(JobId, const SystemState&) override {}

    Allocation allocate(const SystemState& state) const override {
        Allocation alloc;
        if (state.empty()) return alloc;
        const double floor = min_attained(state);
        for (const PresentJob& pj : state.present()) {
            if (pj.attained <= floor + kEpsilon) alloc.push_back({pj.job.id, 0.0});
        }
        const double rate = 1.0 / static_cast<double>(alloc.size());
        for (auto& e : alloc) e.rate = rate;
        return alloc;
    }

    std::optional<double> next_internal_event(const SystemState& state) const override {
        if (state.empty()) return std::nullopt;
        const double floor = min_attained(state);
        std::size_t group = 0;
        std::optional<double> next_level;
        for (const PresentJob& pj : state.present()) {
            if (pj.attained <= floor + kEpsilon) {
                ++group;
            } else if (!next_level || pj.attained < *next_level) {
                next_level = pj.attained;
            }
        }
        if (!next_level) return std::nullopt;
        return state.now() + (*next_level - floor) * static_cast<double>(group);
    }

private:
    static double min_attained(const SystemState& state) {
        double floor = state.present().front().attained;
        for (const PresentJob& pj : state.present()) floor = std::min(floor, pj.attained);
        return floor;
    }
};

// ---------------------------------------------------------------------------
// Size-based policies

/// Shortest remaining processing time; remaining = key - attained.
///
/// With estimates the remaining value can go negative; such jobs keep the
/// highest priority and are never preempted.
///
/// Only the head of the queue is ever served, so every other job's stored
/// remaining value is exact. The head's stored value is refreshed whenever
/// it is compared against a new arrival.
class ShortestRemainingProcessingTime final : public Policy {
public:
    explicit ShortestRemainingProcessingTime(SizeInfo info) : info_(info) {}

    std::string_view name() const override { return info_ == SizeInfo::Exact ? "srpt" : "srpte"; }

    void on_arrival(const Job& job, const SystemState& state) override {
        if (!queue_.empty()) {
            const RankKey head = *queue_.begin();
            const RankKey refreshed{key_of_.at(head.id) - state.attained(head.id), head.arrival, head.id};
            queue_.erase(queue_.begin());
            queue_.insert(refreshed);
            entry_of_[head.id] = refreshed;
        }
        const double key = size_key(job, info_);
        const RankKey entry{key, job.arrival, job.id};
        key_of_.emplace(job.id, key);
        entry_of_.emplace(job.id, entry);
        queue_.insert(entry);
    }

    void on_completion(JobId id, const SystemState&) override {
        auto it = entry_of_.find(id);
        queue_.erase(it->second);
        entry_of_.erase(it);
        key_of_.erase(id);
    }

    Allocation allocate(const SystemState&) const override {
        if (queue_.empty()) return {};
        return {{queue_.begin()->id, 1.0}};
    }

private:
    SizeInfo info_;
    std::set<RankKey> queue_;
    std::unordered_map<JobId, double> key_of_;
    std::unordered_map<JobId, RankKey> entry_of_;
};

/// Shortest processing time: static priority on the (estimated) size.
/// Attained service is never consulted.
class ShortestProcessingTime final : public Policy {
public:
    explicit ShortestProcessingTime(SizeInfo info) : info_(info) {}

    std::string_view name() const override { return info_ == SizeInfo::Exact ? "spt" : "spte"; }

    void on_arrival(const Job& job, const SystemState&) override {
        queue_.insert({size_key(job, info_), job.arrival, job.id});
    }

    void on_completion(JobId id, const SystemState& state) override {
        const Job& job = state.find(id)->job;
        queue_.erase({size_key(job, info_), job.arrival, job.id});
    }

    Allocation allocate(const SystemState&) const override {
        if (queue_.empty()) return {};
        return {{queue_.begin()->id, 1.0}};
    }

private:
    SizeInfo info_;
    std::set<RankKey> queue_;
};

/// Reference processor-sharing system driven by (estimated) sizes.
///
/// Tracks virtual time, the per-job service each virtual job has received;
/// a job's virtual finish tag is its virtual arrival time plus its work.
/// Jobs leave when their tag is reached, regardless of real progress.
class VirtualPsSystem {
public:
    void add(const Job& job, double work) { jobs_.insert({vtime_ + work, job.arrival, job.id}); }

    bool empty() const { return jobs_.empty(); }
    std::size_t size() const { return jobs_.size(); }
    double virtual_time() const { return vtime_; }

    bool contains(const RankKey& tag) const { return jobs_.count(tag) != 0; }

    /// Work still owed to a job in the virtual system.
    double remaining(const RankKey& tag) const { return tag.key - vtime_; }

    /// Wall-clock time until the next virtual departure.
    std::optional<double> time_to_next_departure() const {
        if (jobs_.empty()) return std::nullopt;
        return std::max(0.0, jobs_.begin()->key - vtime_) * static_cast<double>(jobs_.size());
    }

    /// Advances wall-clock time by dt; appends departures in departure order.
    void advance(double dt, std::vector<RankKey>& departed) {
        depart(departed);
        while (dt > 0.0 && !jobs_.empty()) {
            const double k = static_cast<double>(jobs_.size());
            const double needed = (jobs_.begin()->key - vtime_) * k;
            if (needed <= dt) {
                vtime_ = jobs_.begin()->key;
                dt -= needed;
            } else {
                vtime_ += dt / k;
                dt = 0.0;
            }
            depart(departed);
        }
    }

private:
    void depart(std::vector<RankKey>& departed) {
        while (!jobs_.empty() && jobs_.begin()->key - vtime_ <= kEpsilon) {
            departed.push_back(*jobs_.begin());
            jobs_.erase(jobs_.begin());
        }
    }

    double vtime_ = 0.0;
    std::set<RankKey> jobs_;
};

/// PSBS in the single-class case; FSP when fed exact sizes.
///
/// Late jobs (gone from the virtual system but not finished in the real one)
/// share the server equally. With no late job, the present job that finishes
/// first in the virtual system is served alone.
class Psbs final : public Policy {
public:
    explicit Psbs(SizeInfo info) : info_(info) {}

    std::string_view name() const override { return info_ == SizeInfo::Exact ? "fsp" : "psbs"; }

    void on_arrival(const Job& job, const SystemState&) override {
        const double work = size_key(job, info_);
        const RankKey tag{virtual_.virtual_time() + work, job.arrival, job.id};
        virtual_.add(job, work);
        tag_of_.emplace(job.id, tag);
        waiting_.insert(tag);
    }

    void on_completion(JobId id, const SystemState&) override {
        auto it = tag_of_.find(id);
        if (waiting_.erase(it->second) == 0) late_.erase({it->second.arrival, id});
        tag_of_.erase(it);
    }

    Allocation allocate(const SystemState&) const override {
        Allocation alloc;
        if (!late_.empty()) {
            const double rate = 1.0 / static_cast<double>(late_.size());
            alloc.reserve(late_.size());
            for (const auto& [arrival, id] : late_) alloc.push_back({id, rate});
        } else if (!waiting_.empty()) {
            alloc.push_back({waiting_.begin()->id, 1.0});
        }
        return alloc;
    }

    std::optional<double> next_internal_event(const SystemState& state) const override {
        if (auto dt = virtual_.time_to_next_departure()) return state.now() + *dt;
        return std::nullopt;
    }

    void on_time_advanced(double dt, const SystemState&) override {
        departed_.clear();
        virtual_.advance(dt, departed_);
        for (const RankKey& tag : departed_) {
            if (waiting_.erase(tag) != 0) late_.insert({tag.arrival, tag.id});
        }
    }

    const VirtualPsSystem& virtual_system() const { return virtual_; }

private:
    SizeInfo info_;
    VirtualPsSystem virtual_;
    std::set<RankKey> waiting_;                   // real-present, still virtual
    std::set<std::pair<double, JobId>> late_;     // (arrival, id)
    std::unordered_map<JobId, RankKey> tag_of_;   // real-present jobs only
    std::vector<RankKey> departed_;
};

// ---------------------------------------------------------------------------
// Comparison splitting

/// Class of a new job: how many of the recent estimates are strictly smaller.
inline int cs_assign_class(std::span<const double> recent, double new_estimate) {
    return static_cast<int>(std::count_if(recent.begin(), recent.end(),
                                          [&](double e) { return e < new_estimate; }));
}

/// r+1 class queues plus the window of the last r submitted estimates.
/// Queues 0..r-1 are FIFO; queue r is FIFO (CS) or LIFO (MCSS).
class ClassQueues {
public:
    ClassQueues(int r, bool lifo_last) : r_(r), lifo_last_(lifo_last), queues_(static_cast<std::size_t>(r) + 1) {
        if (r < 1) throw Error(ErrorKind::InvalidParameter, "comparison window must be >= 1");
    }

    int window() const { return r_; }

    /// Assigns the job to a class, then slides the estimate window.
    int submit(JobId id, double estimate) {
        const std::vector<double> window(recent_.begin(), recent_.end());
        const int cls = cs_assign_class(window, estimate);
        recent_.push_back(estimate);
        if (static_cast<int>(recent_.size()) > r_) recent_.pop_front();
        queues_[static_cast<std::size_t>(cls)].push_back(id);
        class_of_.emplace(id, cls);
        return cls;
    }

    void remove(JobId id) {
        auto it = class_of_.find(id);
        auto& q = queues_[static_cast<std::size_t>(it->second)];
        q.erase(std::find(q.begin(), q.end(), id));
        class_of_.erase(it);
    }

    /// Job at the head of the smallest-index non-empty queue.
    std::optional<JobId> head() const {
        for (std::size_t c = 0; c < queues_.size(); ++c) {
            const auto& q = queues_[c];
            if (q.empty()) continue;
            const bool last = static_cast<int>(c) == r_;
            return (last && lifo_last_) ? q.back() : q.front();
        }
        return std::nullopt;
    }

    int class_of(JobId id) const { return class_of_.at(id); }

private:
    int r_;
    bool lifo_last_;
    std::deque<double> recent_;
    std::vector<std::deque<JobId>> queues_;
    std::unordered_map<JobId, int> class_of_;
};

/// CS (lifo_last = false) and MCSS (lifo_last = true).
class ComparisonSplitting final : public Policy {
public:
    ComparisonSplitting(SizeInfo info, bool lifo_last, int r = 10)
        : info_(info), lifo_last_(lifo_last), queues_(r, lifo_last) {}

    std::string_view name() const override {
        if (lifo_last_) return info_ == SizeInfo::Exact ? "mcss" : "mcsse";
        return info_ == SizeInfo::Exact ? "cs" : "cse";
    }

    void on_arrival(const Job& job, const SystemState&) override { queues_.submit(job.id, size_key(job, info_)); }
    void on_completion(JobId id, const SystemState&) override { queues_.remove(id); }

    Allocation allocate(const SystemState&) const override {
        if (auto id = queues_.head()) return {{*id, 1.0}};
        return {};
    }

    const ClassQueues& queues() const { return queues_; }

private:
    SizeInfo info_;
    bool lifo_last_;
    ClassQueues queues_;
};

// ---------------------------------------------------------------------------
// Selection by name

inline constexpr std::array<std::string_view, 12> kPolicyNames = {
    "ps", "las", "srpt", "srpte", "spt", "spte", "fsp", "psbs", "cs", "cse", "mcss", "mcsse",
};

inline std::span<const std::string_view> policy_names() { return kPolicyNames; }

/// True for the variants that read Job::estimate.
inline bool reads_estimates(std::string_view name) {
    return name == "srpte" || name == "spte" || name == "psbs" || name == "cse" || name == "mcsse";
}

inline std::unique_ptr<Policy> make_policy(std::string_view name, int cs_window = 10) {
    const SizeInfo info = reads_estimates(name) ? SizeInfo::Estimated : SizeInfo::Exact;
    if (name == "ps") return std::make_unique<ProcessorSharing>();
    if (name == "las") return std::make_unique<LeastAttainedService>();
    if (name == "srpt" || name == "srpte") return std::make_unique<ShortestRemainingProcessingTime>(info);
    if (name == "spt" || name == "spte") return std::make_unique<ShortestProcessingTime>(info);
    if (name == "fsp" || name == "psbs") return std::make_unique<Psbs>(info);
    if (name == "cs" || name == "cse") return std::make_unique<ComparisonSplitting>(info, false, cs_window);
    if (name == "mcss" || name == "mcsse") return std::make_unique<ComparisonSplitting>(info, true, cs_window);
    throw Error(ErrorKind::UnknownPolicy, std::string(name));
}

}  // namespace sizesched
