#include <gtest/gtest.h>

#include <cmath>

#include "mcqkd/keyrate_oneway.hpp"
#include "mcqkd/keyrate_twoway.hpp"

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

double rate2(Measurement m, Reconciliation r, double t, double w)
{
    return keyrate_twoway(m, r, t, w, 100.0).rate;
}

} // namespace

TEST(TwoWayCovariances, Coefficients)
{
    auto c = twoway_covariances(0.5, 2.0, 10.0);
    EXPECT_NEAR(c.xi, 4.0, 1e-12);
    EXPECT_NEAR(c.lambda_e, 4.0 + 5.0, 1e-12);
    EXPECT_NEAR(c.lambda_b, 5.0 + 0.75 * 2.0 + 5.0, 1e-12);
    EXPECT_NEAR(c.kappa, std::sqrt(1.5), 1e-12);
    EXPECT_NEAR(c.mu2, -std::sqrt(0.5) * (2.0 - 10.0) * 0.5, 1e-12);
    EXPECT_NEAR(c.theta2, -std::sqrt(0.5) * std::sqrt(1.5), 1e-12);
    auto v = twoway_covariances(0.3, 1.0, 10.0);
    EXPECT_NEAR(v.xi, 0.3 * 0.7 * 10.0 + 0.49 + 0.3, 1e-12);
}

TEST(TwoWayCovariances, MatricesArePsd)
{
    for (double t = 0.02; t < 1.0; t += 0.04)
        for (double w = 1.0; w <= 10.0; w += 0.5)
            for (double s : {1.0, 2.0, 10.0, 100.0}) {
                auto c = twoway_covariances(t, w, s);
                EXPECT_TRUE(is_psd(c.bob_matrix())) << t << " " << w << " " << s;
                EXPECT_TRUE(is_psd(c.eve_matrix())) << t << " " << w << " " << s;
            }
}

TEST(TwoWayCovariances, Symmetric)
{
    auto c = twoway_covariances(0.6, 2.5, 20.0);
    EXPECT_EQ(c.eve_matrix(), c.eve_matrix().transpose());
    EXPECT_EQ(c.bob_matrix(), c.bob_matrix().transpose());
    EXPECT_THROW(twoway_covariances(0.6, 2.5, 0.5), parameter_error);
}

TEST(TwoWayRates, VacuumEve)
{
    EXPECT_NEAR(rate2(hom, rr, 0.9, 1.0), 3.2539, 1e-4);
    EXPECT_NEAR(rate2(hom, dr, 0.9, 1.0), 3.2459, 1e-4);
    EXPECT_NEAR(rate2(het, dr, 0.9, 1.0), 6.4919, 1e-4);
    EXPECT_NEAR(rate2(hom, rr, 0.9, 1.0), 0.5 * std::log2(91.0), 1e-13);
    EXPECT_NEAR(rate2(hom, dr, 0.9, 1.0), 0.5 * std::log2(90.0), 1e-13);
}

TEST(TwoWayRates, HetDirectIsTwiceHomDirect)
{
    double worst = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double t = 0.55 + (0.99 - 0.55) * i / 19.0;
            const double w = 1.0 + 4.0 * j / 19.0;
            worst = std::max(worst, std::abs(rate2(het, dr, t, w) - 2 * rate2(hom, dr, t, w)));
        }
    EXPECT_LE(worst, 1e-12);
}

TEST(TwoWayRates, RrHetLiteralReading)
{
    const double t = 0.8, w = 1.6;
    const double se = (1 - t) + t * w;
    const double prod = (1 + w * (1 + t * t * t + (1 - t) * (1 + t * t) * w)) / (t * (1 + t));
    const double gi = std::cbrt(prod);
    const double expect = std::log2(std::pow(2.0, t) * (1 + t) / (se * (1 - t) * (1 + t * t + w - t * t * w)))
                          + 3 * g_ref(gi) - 2 * g_ref(w);
    EXPECT_NEAR(rate2(het, rr, t, w), expect, 1e-12);
}

TEST(TwoWayRates, RrHetLinearNumerator)
{
    const double t = 0.8, w = 1.6;
    ProtocolConfig c;
    c.direction = Direction::two_way;
    c.measurement = het;
    c.reconciliation = rr;
    c.t_bar = t;
    c.w_bar = w;
    c.twoway_rr_het_numerator = TwoWayRrHetNumerator::linear;
    auto lit = keyrate_twoway(het, rr, t, w, 100.0);
    auto lin = keyrate_twoway(c);
    EXPECT_NEAR(lit.rate - lin.rate, std::log2(std::pow(2.0, t) / t), 1e-12);
}

TEST(TwoWayRates, ExplicitGammaSplitMustMatchProduct)
{
    const double t = 0.8, w = 1.6;
    const double prod = (1 + w * (1 + t * t * t + (1 - t) * (1 + t * t) * w)) / (t * (1 + t));
    TwoWayOptions opt;
    opt.strict_splits = true;
    EXPECT_THROW(keyrate_twoway(het, rr, t, w, 100.0, opt), config_error);
    opt.gamma = std::array<double, 3>{1.0, 1.0, prod};
    auto a = keyrate_twoway(het, rr, t, w, 100.0, opt);
    EXPECT_NE(a.rate, keyrate_twoway(het, rr, t, w, 100.0).rate);
    opt.gamma = std::array<double, 3>{1.0, 1.0, 1.0};
    EXPECT_THROW(keyrate_twoway(het, rr, t, w, 100.0, opt), parameter_error);
}

TEST(TwoWayRates, SplitsDoNotAffectHomodyneRates)
{
    TwoWayOptions opt;
    opt.strict_splits = true;
    opt.wp = std::array<double, 2>{0.3, 0.9 / 0.3};
    opt.omega = std::array<double, 2>{0.01, 1.0};
    opt.pi = std::array<double, 2>{1.0, 0.0};
    const double t = 0.9, w = 1.0;
    // Pi product at these parameters
    opt.pi->at(1) = std::sqrt((1 / t) * std::pow(1 - t, 3) * (1 + t * t * t)) * w;
    auto a = keyrate_twoway(hom, rr, t, w, 100.0, opt);
    EXPECT_DOUBLE_EQ(a.rate, rate2(hom, rr, t, w));
    auto b = keyrate_twoway(hom, dr, t, w, 100.0, opt);
    EXPECT_DOUBLE_EQ(b.rate, rate2(hom, dr, t, w));
}

TEST(TwoWayRates, DominatesOneWayDirectHomodyne)
{
    for (double t = 0.51; t < 1.0; t += 0.01)
        EXPECT_GE(rate2(hom, dr, t, 1.0), keyrate_oneway(hom, dr, t, 1.0, 100.0).rate) << t;
}

TEST(TwoWayRates, DecompositionIsExact)
{
    for (auto m : {hom, het})
        for (auto r : {rr, dr}) {
            auto k = keyrate_twoway(m, r, 0.77, 1.9, 50.0);
            EXPECT_EQ(k.rate, k.info_term - k.eve_term);
        }
}

TEST(TwoWaySpectra, Values)
{
    auto s = twoway_spectra(hom, rr, 0.9, 1.0, 100.0);
    EXPECT_NEAR(s.at("B").values[0], std::sqrt(0.9) * 100.0, 1e-10);
    EXPECT_NEAR(s.at("B").values[0], s.at("B").values[1], 1e-12);
    EXPECT_NEAR(s.at("B|A").values[0], 0.8747 * 100.0, 1e-2);
    EXPECT_NEAR(s.at("E").values[0], 0.1 * 100.0, 1e-10);
    EXPECT_EQ(s.at("E").values[2], 1.0);
    auto h = twoway_spectra(het, dr, 0.9, 1.3, 100.0);
    EXPECT_NEAR(h.at("B|A").values[0], 0.19 * 100.0, 1e-10);
    EXPECT_NEAR(h.at("B|A").values[1], 1.3, 1e-12);
    EXPECT_NEAR(h.at("E|A").values[0], 0.19 * 100.0, 1e-10);
    EXPECT_EQ(h.at("E|A").values[2], 1.0);
    auto d = twoway_spectra(hom, dr, 0.9, 1.0, 100.0);
    EXPECT_NEAR(d.at("E|A").values[0], std::sqrt(1 + 2.7 + 0.81) * 0.1 * 100.0, 1e-10);
}

TEST(TwoWaySpectra, Gamma)
{
    EXPECT_NEAR(twoway_gamma(0.9), 0.8747, 1e-4);
    EXPECT_NEAR(twoway_ell(0.5), std::sqrt(2.75), 1e-15);
}
