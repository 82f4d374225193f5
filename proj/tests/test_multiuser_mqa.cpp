#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mcqkd/multiuser_mqa.hpp"

using namespace mcqkd;

namespace {

MqaSetup two_slot_setup()
{
    MqaSetup s;
    s.ensemble = ChannelEnsemble::uniform(2, 2, 0.5, 0.25);
    s.users = 2;
    s.modulation_variance = 1.0;
    return s;
}

// three slots, two users, sub-vacuum private noise so the private capacities are non-trivial
MqaSetup fixture()
{
    MqaSetup s;
    s.ensemble = ChannelEnsemble::build(
        {SubChannel::from_gain(0.8, 0.1, 1.2), SubChannel::from_gain(0.6, 0.1, 1.2), SubChannel::from_gain(0.5, 0.1, 1.2)},
        1.0);
    s.users = 2;
    s.modulation_variance = 5.0;
    s.vacuum_noise = 0.3;
    return s;
}

} // namespace

TEST(SumCapacity, Example)
{
    auto s = two_slot_setup();
    std::vector<double> v{1.0, 1.0};
    EXPECT_NEAR(sum_capacity(s.ensemble, v, 1.0), 2 * std::log2(3.0), 1e-14);
    EXPECT_NEAR(sum_capacity(s.ensemble, v, 1.0), 3.1699, 1e-4);
    EXPECT_NEAR(sum_capacity(s.ensemble, v, 1.0, QuadratureConvention::real), std::log2(3.0), 1e-14);
}

TEST(SumCapacity, BudgetViolation)
{
    auto s = two_slot_setup();
    std::vector<double> v{1.0, 2.0};
    EXPECT_THROW(sum_capacity(s.ensemble, v, 1.0), parameter_error);
    std::vector<double> short_list{1.0};
    EXPECT_THROW(sum_capacity(s.ensemble, short_list, 1.0), parameter_error);
}

TEST(SumCapacity, EmptySelectionIsZero)
{
    auto e = ChannelEnsemble::build({SubChannel::from_gain(0.5, 0.25)}, 0.0);
    EXPECT_EQ(sum_capacity(e, std::vector<double>{}, 1.0), 0.0);
}

TEST(Allocation, UniformAndWaterfill)
{
    auto f = fixture();
    auto u = allocate_variances(f.ensemble, 5.0, Allocation::uniform);
    EXPECT_EQ(u, (std::vector<double>{5.0, 5.0, 5.0}));
    auto w = allocate_variances(f.ensemble, 5.0, Allocation::waterfill);
    double mean = 0;
    for (double x : w) mean += x / 3;
    EXPECT_NEAR(mean, 5.0, 1e-12);
    EXPECT_GE(sum_capacity(f.ensemble, w, 5.0), sum_capacity(f.ensemble, u, 5.0));
    // equal gains: water-filling is uniform
    auto e = ChannelEnsemble::uniform(4, 4, 0.5, 0.25);
    auto we = allocate_variances(e, 2.0, Allocation::waterfill);
    for (double x : we) EXPECT_NEAR(x, 2.0, 1e-12);
}

TEST(Allocation, WaterfillShutsWeakSlots)
{
    auto e = ChannelEnsemble::build({SubChannel::from_gain(0.9, 0.01), SubChannel::from_gain(0.01, 1.0)}, 1e9);
    auto w = allocate_variances(e, 0.05, Allocation::waterfill);
    EXPECT_EQ(w[1], 0.0);
    EXPECT_NEAR(w[0], 0.1, 1e-12);
}

TEST(Region, SymmetricAndCorners)
{
    auto c = capacity_region(fixture());
    EXPECT_EQ(c.symmetric_capacity, c.sum_capacity / 2);
    ASSERT_EQ(c.corner_points.size(), 2u);
    auto f = fixture();
    const double full = sum_capacity(f.ensemble, allocate_variances(f.ensemble, 5.0, Allocation::uniform), 5.0);
    EXPECT_EQ(c.corner_points[0], full);
    EXPECT_EQ(c.corner_points[1], full);
    auto corner = c.corner(0);
    EXPECT_EQ(corner.rates[1], 0.0);
    EXPECT_TRUE(c.contains(corner));
    EXPECT_THROW(symmetric_capacity(1.0, 0), parameter_error);
}

TEST(Region, SingleUserSymmetricIsSum)
{
    auto f = fixture();
    f.users = 1;
    auto c = capacity_region(f);
    EXPECT_EQ(c.symmetric_capacity, c.sum_capacity);
}

TEST(Region, PrivateRegionExamples)
{
    auto s = two_slot_setup();
    auto p = private_region(s, std::vector<double>{0.5, 0.5});
    EXPECT_NEAR(p.secret_sum_bound, 2 * std::log2(3.0) - 1.0, 1e-14);
    EXPECT_NEAR(p.secret_sum_bound, 2.1699, 1e-4);
    EXPECT_EQ(p.secret_symmetric_bound, p.secret_sum_bound / 2);
    // vacuum eve with unit vacuum noise: the private noise is infinite
    EXPECT_EQ(p.sum_capacity, 0.0);

    auto z = private_region(s, std::vector<double>{0.0, 0.0});
    auto c = capacity_region(s);
    EXPECT_EQ(z.corner_points, c.corner_points);
    EXPECT_EQ(z.secret_sum_bound, c.sum_capacity);
    EXPECT_THROW(private_region(s, std::vector<double>{0.1}), parameter_error);
}

TEST(Region, PrivateCornersFloorAtZero)
{
    auto s = two_slot_setup();
    auto p = private_region(s, std::vector<double>{10.0, 0.0});
    EXPECT_EQ(p.corner_points[0], 0.0);
}

TEST(Region, ConvexityUnderTimeSharing)
{
    auto c = capacity_region(fixture());
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        auto draw = [&] {
            RegionPoint p{{u(gen) * c.corner_points[0], 0}};
            p.rates[1] = u(gen) * std::min(c.corner_points[1], c.sum_capacity - p.rates[0]);
            return p;
        };
        RegionPoint a = draw(), b = draw();
        ASSERT_TRUE(c.contains(a));
        ASSERT_TRUE(c.contains(b));
        const double l = u(gen);
        RegionPoint m{{l * a.rates[0] + (1 - l) * b.rates[0], l * a.rates[1] + (1 - l) * b.rates[1]}};
        ASSERT_TRUE(c.contains(m));
    }
    EXPECT_FALSE(c.contains(RegionPoint{{c.sum_capacity, c.sum_capacity}}));
}

TEST(Region, MonotoneInBudget)
{
    auto f = fixture();
    auto small = capacity_region(f);
    f.modulation_variance = 6.0;
    auto big = capacity_region(f);
    EXPECT_GT(big.sum_capacity, small.sum_capacity);
    EXPECT_TRUE(big.contains(small.corner(0)));
}

TEST(Svd, GainExamples)
{
    EXPECT_NEAR(svd_gain(2.0, 0.1, 0.8, 0.5), 1.875 / 1.8, 1e-15);
    EXPECT_NEAR(svd_gain(2.0, 0.1, 0.8, 0.5), 1.04167, 1e-5);
    EXPECT_DOUBLE_EQ(svd_gain(2.0, 0.1, 0.5, 0.5), 1.0);
    EXPECT_THROW(svd_gain(0.1, 0.1, 0.8, 0.5), domain_error);
    EXPECT_THROW(svd_gain(2.0, 0.1, 0.4, 0.5), parameter_error);
}

TEST(Svd, TransformedEveGain)
{
    EXPECT_NEAR(svd_transformed_eve_gain(0.5, 1.875 / 1.8), 1 - 0.5 * 1.875 / 1.8, 1e-15);
    EXPECT_NEAR(svd_transformed_eve_gain(0.5, 1.875 / 1.8), 0.47917, 1e-5);
    EXPECT_EQ(svd_transformed_eve_gain(0.3, 1.0), 0.3);
    EXPECT_THROW(svd_transformed_eve_gain(0.5, 2.5), domain_error);
}

TEST(Svd, PrivateSumStrictlyIncreases)
{
    auto f = fixture();
    std::vector<double> eve{0.2, 0.3};
    auto same = svd_private_capacities(f, std::vector<double>{1, 1, 1}, eve);
    EXPECT_EQ(same.transformed.sum_capacity, same.baseline.sum_capacity);
    EXPECT_GT(same.baseline.sum_capacity, 0.0);
    auto boosted = svd_private_capacities(f, std::vector<double>{1.1, 1.0, 1.2}, eve);
    EXPECT_GT(boosted.transformed.sum_capacity, boosted.baseline.sum_capacity);
    EXPECT_TRUE(boosted.dominance_holds);
    EXPECT_THROW(svd_private_capacities(f, std::vector<double>{0.9, 1, 1}, eve), parameter_error);
    EXPECT_THROW(svd_private_capacities(f, std::vector<double>{1.3, 1, 1}, eve), domain_error);
}
