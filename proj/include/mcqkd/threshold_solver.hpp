#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mcqkd/keyrate_oneway.hpp"
#include "mcqkd/keyrate_twoway.hpp"
#include "mcqkd/multiuser_mqa.hpp"

namespace mcqkd {

enum class ClosedFormVariant { rr_one_way_single, dr_one_way_single, rr_two_way_single, dr_two_way_single };
enum class ThresholdStatus { ok, no_positive_rate, unbounded };
enum class Method { closed_form, bisection, reference };
enum class ThresholdQuantity { excess_noise, eve_variance };

struct BisectionResult {
    double root;
    double lo;  // endpoint where f > 0
    double hi;  // endpoint where f <= 0
    bool converged;
    double residual;
};

inline constexpr int bisection_max_iterations = 200;
inline constexpr double bisection_x_tolerance = 1e-12;

// Plain bisection; f must be positive at one end and non-positive at the other.
template <class F>
BisectionResult bisect(F&& f, double a, double b)
{
    double fa = f(a), fb = f(b);
    if ((fa > 0) == (fb > 0)) throw parameter_error("bisection bracket has no sign change");
    if (!(fa > 0)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    bool converged = false;
    for (int i = 0; i < bisection_max_iterations; ++i) {
        if (std::abs(b - a) <= bisection_x_tolerance) {
            converged = true;
            break;
        }
        const double m = 0.5 * (a + b);
        if (m == a || m == b) {
            converged = true;
            break;
        }
        if (f(m) > 0)
            a = m;
        else
            b = m;
    }
    const double root = 0.5 * (a + b);
    return {root, a, b, converged, std::abs(f(root))};
}

// Left-hand side of the single-carrier DR threshold equation, equal to e^2 at the threshold:
// (1/(1+N)) ((sqrt(1+N)+1)/(sqrt(1+N)-1))^sqrt(1+N)
inline double dr_single_equation(double n)
{
    detail::require(n > 0 && std::isfinite(n), "excess noise must be positive");
    const double r = std::sqrt(1 + n);
    return std::pow((r + 1) / (r - 1), r) / (1 + n);
}

inline double tolerable_excess_noise_closed_form(ClosedFormVariant v)
{
    const double e2 = std::exp(2.0);
    switch (v) {
    case ClosedFormVariant::rr_one_way_single:
        return 0.5 * (std::sqrt(1 + 16 / e2) - 1);
    case ClosedFormVariant::dr_one_way_single:
        return bisect([&](double n) { return dr_single_equation(n) - e2; }, 0.1, 2.0).root;
    case ClosedFormVariant::rr_two_way_single:
        return 0.8;
    case ClosedFormVariant::dr_two_way_single:
        return 0.75;
    }
    return 0.0;
}

inline Method closed_form_method(ClosedFormVariant v)
{
    switch (v) {
    case ClosedFormVariant::rr_one_way_single: return Method::closed_form;
    case ClosedFormVariant::dr_one_way_single: return Method::bisection;
    default: return Method::reference;
    }
}

struct ThresholdResult {
    ThresholdQuantity quantity = ThresholdQuantity::eve_variance;
    ThresholdStatus status = ThresholdStatus::ok;
    Method method = Method::bisection;
    double value = 0.0;
    double residual = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    double t_bar = 0.0;
    std::optional<double> closed_form_bound;
    std::optional<double> c_rr;
    std::optional<double> c_dr;
    std::optional<double> ratio;  // measured multiplier against the single-carrier threshold
    std::optional<double> wp;     // e^2 - f(N) for one-way DR
    ProtocolConfig protocol;
};

inline double evaluate_rate(const ProtocolConfig& c, double t_bar, double w_bar)
{
    return keyrate(c, t_bar, w_bar).rate;
}

// W from the excess noise of an averaged channel with Eve gain 1 - T.
inline double eve_variance_from_excess_noise(double t_bar, double n) { return 1.0 + n * t_bar / (1.0 - t_bar); }

inline double rate_at_excess_noise(const ProtocolConfig& c, double t_bar, double n)
{
    detail::require(n >= 0, "excess noise must be non-negative");
    return evaluate_rate(c, t_bar, eve_variance_from_excess_noise(t_bar, n));
}

namespace detail {

inline constexpr double bracket_cap = 1e6;

// Zero crossing of a rate that is positive at x0, searched upward from the hint by doubling.
template <class F>
ThresholdResult solve_decreasing(F&& f, double x0, double hint)
{
    ThresholdResult r;
    const double f0 = f(x0);
    if (!(f0 > 0)) {
        r.status = ThresholdStatus::no_positive_rate;
        r.value = x0;
        r.bracket = {x0, x0};
        r.residual = std::abs(f0);
        return r;
    }
    double hi = hint > x0 ? hint : x0 + 1.0;
    while (f(hi) > 0) {
        if (hi >= bracket_cap) {
            r.status = ThresholdStatus::unbounded;
            r.value = std::numeric_limits<double>::infinity();
            r.bracket = {hi, std::numeric_limits<double>::infinity()};
            r.residual = std::numeric_limits<double>::quiet_NaN();
            return r;
        }
        hi = std::min(bracket_cap, x0 + 2.0 * (hi - x0));
    }
    const auto b = bisect(f, x0, hi);
    r.value = b.root;
    r.bracket = {b.lo, b.hi};
    r.residual = b.residual;
    return r;
}

} // namespace detail

// W_max per grid point, rows sorted by T_bar.
inline std::vector<ThresholdResult> max_eve_variance(const ProtocolConfig& c, std::span<const double> grid)
{
    std::vector<double> ts(grid.begin(), grid.end());
    std::sort(ts.begin(), ts.end());
    std::vector<ThresholdResult> out;
    for (double t : ts) {
        detail::require(t > 0 && t < 1, "grid values must lie strictly between 0 and 1");
        auto r = detail::solve_decreasing([&](double w) { return evaluate_rate(c, t, w); }, 1.0, 2.0);
        r.quantity = ThresholdQuantity::eve_variance;
        r.t_bar = t;
        r.protocol = c;
        out.push_back(r);
    }
    return out;
}

enum class RrBoundGrouping { literal, eve_gain };

// Excess noise where (g sigma_X^2 + g)(g sigma_X^2 + g / sigma_w0^2) = 1, sigma_X^2 = 1 + N.
// literal: g = T_bar. eve_gain: g = 1 - T_bar, the grouping produced by substituting the
// excess-noise expression. May be negative when no noise is tolerated.
inline double rr_coherent_bound(double t_bar, double single_carrier_variance, RrBoundGrouping grouping)
{
    detail::require(t_bar > 0 && t_bar < 1, "averaged gain must lie strictly between 0 and 1");
    detail::require(single_carrier_variance > 0, "modulation variance must be positive");
    const double g = grouping == RrBoundGrouping::literal ? t_bar : 1.0 - t_bar;
    const double a = g * g, b = g * g * (1 + 1 / single_carrier_variance), c = g * g / single_carrier_variance - 1;
    const double sx = (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
    return sx - 1.0;
}

// Tolerable excess noise by bisection on N with W = 1 + N T/(1-T). The bracket starts at the
// matching closed-form bound and doubles when the bound does not enclose the crossing.
inline ThresholdResult tolerable_excess_noise_multicarrier(const ProtocolConfig& c,
                                                           std::optional<double> single_gain = std::nullopt)
{
    const double t = c.t_bar ? *c.t_bar : c.ensemble.averaged_fourier_gain();
    detail::require(t > 0 && t < 1, "averaged gain must lie strictly between 0 and 1");
    const bool rr = c.reconciliation == Reconciliation::reverse;
    const double s0 = c.single_carrier_variance;

    auto solve = [&](double tt, std::optional<double>* bound) {
        std::optional<double> b;
        if (rr)
            b = rr_coherent_bound(tt, s0, RrBoundGrouping::literal);
        else
            b = 2.0 - 1.0 / tt;
        if (bound) *bound = b;
        return detail::solve_decreasing([&](double n) { return rate_at_excess_noise(c, tt, n); }, 0.0,
                                        *b > 0 ? *b : 1.0);
    };

    std::optional<double> bound;
    auto r = solve(t, &bound);
    r.quantity = ThresholdQuantity::excess_noise;
    r.t_bar = t;
    r.closed_form_bound = bound;
    r.protocol = c;

    if (r.status == ThresholdStatus::ok && !rr && c.direction == Direction::one_way && r.value > 0)
        r.wp = std::exp(2.0) - dr_single_equation(r.value);

    if (single_gain) {
        const double sg = *single_gain;
        detail::require(sg > 0 && sg < 1, "single-carrier gain must lie strictly between 0 and 1");
        if (rr) {
            const double sx = 1.0 + r.value;
            auto prod = [&](double g) { return (g * sx + g) * (g * sx + g / s0); };
            r.c_rr = prod(t) - prod(sg);
        } else {
            r.c_dr = 1.0 / sg - 1.0 / t;
        }
        const auto base = solve(sg, nullptr);
        if (r.status == ThresholdStatus::ok && base.status == ThresholdStatus::ok)
            r.ratio = r.value / base.value;
        else if (r.status == ThresholdStatus::ok && base.status == ThresholdStatus::no_positive_rate)
            r.ratio = std::numeric_limits<double>::infinity();
    }
    return r;
}

struct ExcessNoiseInputs {
    double w;
    double eve_gain;
};

// N_single / N_multi; +inf when only the multicarrier noise vanishes.
inline double improvement_ratio_kappa(ExcessNoiseInputs single, ExcessNoiseInputs multi)
{
    const double ns = excess_noise(single.w, single.eve_gain);
    const double nm = excess_noise(multi.w, multi.eve_gain);
    if (nm == 0.0) return ns == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return ns / nm;
}

struct SvdThresholdBoost {
    double n_amqd;
    double n_svd;
    double eve_gain_amqd;
    double eve_gain_svd;
};

// (1 - g_E) / ((W - 1) g_E) over the averaged Eve gain, before and after the SVD gains.
inline SvdThresholdBoost svd_threshold_boost(const ChannelEnsemble& e, std::span<const double> v)
{
    detail::require(v.size() == e.selected.size(), "one SVD gain per selected sub-channel is required");
    double ge = 0.0, gs = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        detail::require(v[i] >= 1.0, "SVD gains below 1 are not allowed");
        const double g = e.slots[e.selected[i]].eve_gain();
        ge += g;
        gs += svd_transformed_eve_gain(g, v[i]);
    }
    const double l = double(v.size());
    ge /= l;
    gs /= l;
    const double w = e.averaged_eve_variance();
    auto n = [&](double g) {
        const double den = (w - 1.0) * g;
        return den <= 0.0 ? std::numeric_limits<double>::infinity() : (1.0 - g) / den;
    };
    return {n(ge), n(gs), ge, gs};
}

} // namespace mcqkd
