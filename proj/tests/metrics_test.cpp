#include <gtest/gtest.h>

#include "sizesched/metrics.hpp"
#include "test_util.hpp"

namespace sizesched {
namespace {

std::vector<JobOutcome> with_sojourns(std::initializer_list<double> sojourns) {
    std::vector<JobOutcome> out;
    JobId id = 0;
    for (double s : sojourns) out.push_back({id++, s, s, 1.0});
    return out;
}

TEST(Mst, ArithmeticMean) {
    EXPECT_DOUBLE_EQ(mean_sojourn_time(with_sojourns({2, 12})), 7.0);
    EXPECT_DOUBLE_EQ(mean_sojourn_time(with_sojourns({5})), 5.0);
    EXPECT_THROW(mean_sojourn_time(std::vector<JobOutcome>{}), Error);
}

TEST(Mst, FromEngineSrptPair) {
    const auto w = testing::workload({testing::job(0, 0, 10), testing::job(1, 1, 2)});
    EXPECT_NEAR(mean_sojourn_time(testing::simulate("srpt", w)), 7.0, 1e-9);
}

TEST(NormalizedMst, Ratios) {
    const auto a = with_sojourns({3, 9, 1});
    EXPECT_EQ(normalized_mst(a, a), 1.0);
    EXPECT_DOUBLE_EQ(normalized_mst(with_sojourns({14}), with_sojourns({7})), 2.0);
    const auto w = testing::workload({testing::job(0, 0, 10), testing::job(1, 5, 6)});
    EXPECT_NEAR(normalized_mst(testing::simulate("spt", w), testing::simulate("srpt", w)), 11.0 / 10.5, 1e-12);
    EXPECT_THROW(normalized_mst(a, std::vector<JobOutcome>{}), Error);
}

TEST(SlowdownCdf, Counting) {
    const std::vector<double> s{1, 1, 2, 4};
    const std::vector<double> grid{1, 2, 3};
    const auto cdf = slowdown_cdf(s, grid);
    ASSERT_EQ(cdf.size(), 3u);
    EXPECT_EQ(cdf[0], (CdfPoint{1, 0.5}));
    EXPECT_EQ(cdf[1], (CdfPoint{2, 0.75}));
    EXPECT_EQ(cdf[2], (CdfPoint{3, 0.75}));
}

TEST(SlowdownCdf, AllOnes) {
    const std::vector<double> s(10, 1.0);
    for (const auto& p : slowdown_cdf(s, log_grid())) EXPECT_EQ(p.fraction, 1.0);
    EXPECT_THROW(slowdown_cdf(std::vector<double>{}, log_grid()), Error);
}

TEST(SlowdownCdf, MonotoneAndStartsAboveOne) {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(0.5);
    std::vector<double> s(5000);
    for (auto& x : s) x = 1.0 + e(rng);
    const auto cdf = slowdown_cdf(s, log_grid());
    for (std::size_t i = 1; i < cdf.size(); ++i) EXPECT_GE(cdf[i].fraction, cdf[i - 1].fraction);
    const std::vector<double> below{std::nextafter(1.0, 0.0)};
    EXPECT_EQ(slowdown_cdf(s, below)[0].fraction, 0.0);
    const std::vector<double> above{1e9};
    EXPECT_EQ(slowdown_cdf(s, above)[0].fraction, 1.0);
}

TEST(LogGrid, Endpoints) {
    const auto g = log_grid();
    ASSERT_EQ(g.size(), 200u);
    EXPECT_EQ(g.front(), 1.0);
    EXPECT_EQ(g.back(), 100.0);
}

TEST(Quantile, Interpolates) {
    EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile({1, 2}, 0.5), 1.5);
    EXPECT_DOUBLE_EQ(quantile({4, 1}, 1.0), 4.0);
}

std::vector<SizedSlowdown> ramp(std::size_t n) {
    std::vector<SizedSlowdown> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back({static_cast<double>(n - i), 1.0 + static_cast<double>(i)});
    return v;
}

TEST(Mcs, EqualCountBins) {
    const auto bins = mean_conditional_slowdown(ramp(40), 20);
    ASSERT_EQ(bins.size(), 20u);
    for (const auto& b : bins) EXPECT_EQ(b.count, 2u);
    EXPECT_DOUBLE_EQ(bins[0].mean_size, 1.5);
    EXPECT_DOUBLE_EQ(bins[0].mean_slowdown, 39.5);  // the two smallest jobs came last
}

TEST(Mcs, RemainderGoesToFirstBins) {
    const auto bins = mean_conditional_slowdown(ramp(41), 20);
    EXPECT_EQ(bins[0].count, 3u);
    for (std::size_t i = 1; i < bins.size(); ++i) EXPECT_EQ(bins[i].count, 2u);
    EXPECT_THROW(mean_conditional_slowdown(ramp(19), 20), Error);
}

TEST(McsProperties, PartitionAndOrder) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> n(20, 3000);
    std::lognormal_distribution<double> size(0.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<SizedSlowdown> jobs(n(rng));
        for (auto& j : jobs) j = {size(rng), 1.0 + size(rng)};
        const auto bins = mean_conditional_slowdown(jobs, 20);
        std::size_t total = 0;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            EXPECT_GE(bins[i].count, 1u);
            total += bins[i].count;
            if (i > 0) {
                EXPECT_GE(bins[i].mean_size, bins[i - 1].mean_size);
            }
        }
        EXPECT_EQ(total, jobs.size());
    }
}

/// Processor sharing treats every size alike: per-bin mean slowdown stays flat.
TEST(Mcs, ProcessorSharingIsFlat) {
    std::vector<SizedSlowdown> pooled;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
        GenParams p;
        p.seed = derive_seed(99, 0, rep);
        const Workload w = generate(p);
        const auto out = testing::simulate("ps", w);
        const auto s = sized_slowdowns(w.jobs, out);
        pooled.insert(pooled.end(), s.begin(), s.end());
    }
    const auto bins = mean_conditional_slowdown(pooled, 20);
    double lo = bins[0].mean_slowdown, hi = lo, sum = 0.0;
    for (const auto& b : bins) {
        lo = std::min(lo, b.mean_slowdown);
        hi = std::max(hi, b.mean_slowdown);
        sum += b.mean_slowdown;
    }
    const double mean = sum / static_cast<double>(bins.size());
    EXPECT_LT(hi - lo, 0.25 * mean) << "lo " << lo << " hi " << hi << " mean " << mean;
}

}  // namespace
}  // namespace sizesched
