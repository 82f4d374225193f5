#include <gtest/gtest.h>

#include <cmath>

#include "mcqkd/keyrate_oneway.hpp"

using namespace mcqkd;

namespace {

double g_ref(double s)
{
    const double a = (s + 1) / 2, b = (s - 1) / 2;
    return a * std::log2(a) - (b > 0 ? b * std::log2(b) : 0.0);
}

constexpr auto hom = Measurement::homodyne;
constexpr auto het = Measurement::heterodyne;
constexpr auto rr = Reconciliation::reverse;
constexpr auto dr = Reconciliation::direct;

double rate(Measurement m, Reconciliation r, double t, double w)
{
    return keyrate_oneway(m, r, t, w, 100.0).rate;
}

} // namespace

TEST(OneWayRates, VacuumEve)
{
    EXPECT_NEAR(rate(hom, rr, 0.9, 1.0), 1.66096, 1e-5);
    EXPECT_NEAR(rate(hom, dr, 0.9, 1.0), 1.58496, 1e-5);
    EXPECT_NEAR(rate(het, rr, 0.9, 1.0), 3.32193, 1e-5);
    EXPECT_NEAR(rate(het, dr, 0.9, 1.0), 3.16993, 1e-5);
    EXPECT_NEAR(rate(hom, rr, 0.9, 1.0), 0.5 * std::log2(10.0), 1e-14);
    EXPECT_NEAR(rate(het, dr, 0.9, 1.0), std::log2(9.0), 1e-14);
}

TEST(OneWayRates, NoisyEve)
{
    EXPECT_NEAR(rate(hom, rr, 0.5, 1.2), 0.0793, 1e-4);
    const double t = 0.73, w = 2.4;
    const double sb = (1 - t) * w + t, se = (1 - t) + t * w;
    EXPECT_NEAR(rate(hom, rr, t, w), 0.5 * std::log2(w / ((1 - t) * sb)) - g_ref(w), 1e-12);
    EXPECT_NEAR(rate(hom, dr, t, w),
                0.5 * std::log2(t * se / ((1 - t) * sb)) + g_ref(std::sqrt(w * sb / se)) - g_ref(w), 1e-12);
    EXPECT_NEAR(rate(het, rr, t, w), std::log2(1 / (1 - t)) - g_ref(sb) - g_ref(w), 1e-12);
    EXPECT_NEAR(rate(het, dr, t, w), std::log2(t / (1 - t)) - g_ref(w), 1e-12);
}

TEST(OneWayRates, AlternateHetForm)
{
    auto r = keyrate_oneway(het, rr, 0.9, 1.0, 100.0, RrHetForm::alternate);
    EXPECT_NEAR(r.rate, std::log2(9.0), 1e-14);
}

TEST(OneWayRates, DecompositionIsExact)
{
    for (auto m : {hom, het})
        for (auto r : {rr, dr}) {
            auto k = keyrate_oneway(m, r, 0.77, 1.9, 50.0);
            EXPECT_EQ(k.rate, k.info_term - k.eve_term);
            EXPECT_EQ(k.t_bar, 0.77);
            EXPECT_EQ(k.w_bar, 1.9);
        }
}

TEST(OneWayRates, NegativeRatesAreReturnedRaw)
{
    auto k = keyrate_oneway(hom, dr, 0.3, 1.5, 100.0);
    EXPECT_LT(k.rate, 0.0);
    EXPECT_EQ(k.clamped(), 0.0);
}

TEST(OneWayRates, PositiveAtVacuumAboveHalf)
{
    for (double t = 0.51; t < 1.0; t += 0.01)
        for (auto m : {hom, het})
            for (auto r : {rr, dr})
                EXPECT_GT(rate(m, r, t, 1.0), 0.0) << t;
}

TEST(OneWayRates, StrictlyDecreasingInEveVariance)
{
    for (double t = 0.61; t < 0.99; t += 0.04)
        for (auto m : {hom, het})
            for (auto r : {rr, dr}) {
                double prev = rate(m, r, t, 1.0);
                for (double w = 1.01; w <= 10.0; w += 0.01) {
                    const double cur = rate(m, r, t, w);
                    ASSERT_LT(cur, prev) << t << " " << w;
                    prev = cur;
                }
            }
}

TEST(OneWayRates, IncreasingInAveragedGain)
{
    for (double w : {1.0, 1.5, 3.0})
        for (auto m : {hom, het})
            for (auto r : {rr, dr}) {
                double prev = rate(m, r, 0.55, w);
                for (double t = 0.56; t < 0.99; t += 0.01) {
                    const double cur = rate(m, r, t, w);
                    ASSERT_GT(cur, prev) << t << " " << w;
                    prev = cur;
                }
            }
}

TEST(OneWayRates, Preconditions)
{
    EXPECT_THROW(keyrate_oneway(hom, rr, 0.9, 1.0, 2.0), regime_error);
    EXPECT_THROW(keyrate_oneway(hom, rr, 1.0, 1.0, 100.0), parameter_error);
    EXPECT_THROW(keyrate_oneway(hom, rr, 0.0, 1.0, 100.0), parameter_error);
    EXPECT_THROW(keyrate_oneway(hom, rr, 0.5, 0.9, 100.0), parameter_error);
    auto warn = keyrate_oneway(hom, rr, 0.9, 1.0, 20.0);
    EXPECT_FALSE(warn.warnings.empty());
    auto quiet = keyrate_oneway(hom, rr, 0.9, 1.0, 200.0);
    EXPECT_TRUE(quiet.warnings.empty());
}

TEST(OneWaySpectra, Homodyne)
{
    auto s = spectra_oneway(hom, rr, 0.9, 1.2, 100.0);
    EXPECT_NEAR(s.at("B").values[0], 90.0, 1e-12);
    EXPECT_NEAR(s.at("B|A").values[0], std::sqrt(1.02 * 90.0), 1e-12);
    EXPECT_NEAR(s.at("E").values[0], 10.0, 1e-12);
    EXPECT_NEAR(s.at("E").values[1], 1.2, 1e-12);
    EXPECT_NEAR(s.at("E|B").values[0], 3.651, 1e-3);
    EXPECT_EQ(s.at("E|B").values[1], 1.0);
    EXPECT_EQ(s.at("AB").values, (std::vector<double>{100.0, 1.0, 1.0}));
    auto d = spectra_oneway(hom, dr, 0.9, 1.2, 100.0);
    EXPECT_NEAR(d.at("E|A").values[0], std::sqrt(1.18 * 0.1 * 100.0), 1e-12);
    EXPECT_NEAR(d.at("E|A").values[1], std::sqrt(1.02 * 1.2 / 1.18), 1e-12);
}

TEST(OneWaySpectra, Heterodyne)
{
    auto s = spectra_oneway(het, rr, 0.9, 1.2, 100.0);
    EXPECT_NEAR(s.at("B|A").values[0], 1.02, 1e-12);
    EXPECT_NEAR(s.at("E|B").values[0], (0.1 + 1.02) / 0.9, 1e-12);
    auto d = spectra_oneway(het, dr, 0.9, 1.2, 100.0);
    EXPECT_NEAR(d.at("E|A").values[0], 1.02, 1e-12);
    EXPECT_EQ(d.at("E|A").values[1], 1.0);
}

TEST(OneWaySpectra, FlooredToPhysical)
{
    for (double t = 0.05; t < 1.0; t += 0.05)
        for (double w = 1.0; w < 6.0; w += 0.5)
            for (auto m : {hom, het})
                for (auto r : {rr, dr})
                    for (auto& [label, sp] : spectra_oneway(m, r, t, w, 10.0))
                        for (double v : sp.values)
                            EXPECT_GE(v, 1.0) << label;
}

TEST(OneWayConfig, ResolvesFromEnsemble)
{
    ProtocolConfig c;
    c.ensemble = ChannelEnsemble::build({SubChannel::from_gain(0.95, 0.1, 1.0), SubChannel::from_gain(0.85, 0.1, 1.0)},
                                        10.0);
    c.single_carrier_variance = 100.0;
    auto r = keyrate_oneway(c);
    EXPECT_NEAR(r.t_bar, 0.9, 1e-15);
    EXPECT_NEAR(r.rate, 1.66096, 1e-5);
    c.t_bar = 0.5;
    c.w_bar = 1.2;
    EXPECT_NEAR(keyrate_oneway(c).rate, 0.0793, 1e-4);
}

TEST(PerQuadrature, SymmetricAtUnitSqueezing)
{
    auto st = homodyne_quadrature_stats(0.5, 1.5, 2.0, 1.0, 1.0, 4.0);
    auto k = keyrate_per_quadrature(st);
    EXPECT_DOUBLE_EQ(k.x, k.p);
    // the estimator variance cancels: S_x = -0.5 log2(g^2 (sX^2 + s)(sX^2 + 1/sw^2))
    EXPECT_NEAR(k.x, -0.5 * std::log2(0.25 * 2.5 * 2.0), 1e-9);
}

TEST(PerQuadrature, UncorrelatedEveLeavesMutualInformation)
{
    PerQuadratureStats st{3.0, 3.0, 1.0, 1.5, 3.0, 3.0};
    auto k = keyrate_per_quadrature(st);
    EXPECT_DOUBLE_EQ(k.x, 0.5 * std::log2(3.0));
    EXPECT_DOUBLE_EQ(k.p, 0.5 * std::log2(2.0));
    EXPECT_EQ(k.holevo_x, 0.0);
}

TEST(PerQuadrature, SqueezingBreaksSymmetry)
{
    auto st = homodyne_quadrature_stats(0.5, 1.5, 4.0, 2.0, 1.0, 4.0);
    auto k = keyrate_per_quadrature(st);
    EXPECT_GT(k.p, k.x);
}
