#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "mcqkd/attack_model.hpp"
#include "mcqkd/protocol.hpp"

namespace mcqkd {

// Sub-carrier covariances after the two channel uses (forward and backward).
struct TwoWayCovariances {
    double t_bar;
    double w_bar;
    double modulation_variance;
    double lambda_b;
    double kappa;
    double mu;
    double theta;
    double mu2;     // mu''
    double theta2;  // theta''
    double xi;
    double lambda_e;
    double eve_variance;
    double eve_given_alice;

    // K(a, b) = diag(a, b)
    static Eigen::Matrix2d conditional(double a, double b) { return Eigen::Vector2d(a, b).asDiagonal(); }

    Eigen::Matrix2d bob_conditional() const { return conditional(0.0, modulation_variance); }
    Eigen::Matrix2d joint_conditional() const { return conditional(0.0, 0.0); }

    Eigen::Matrix4d bob_matrix() const
    {
        const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity(), z = pauli_z();
        const double c = t_bar * std::sqrt(modulation_variance * modulation_variance - 1.0);
        Eigen::Matrix4d k;
        k << modulation_variance * i2, c * z, c * z, lambda_b * i2;
        return k;
    }

    // Modes: Eve's first-use output, its EPR partner, her second-use output, its EPR partner.
    Eigen::Matrix<double, 8, 8> eve_matrix() const
    {
        const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity(), z = pauli_z(), o = Eigen::Matrix2d::Zero();
        Eigen::Matrix<double, 8, 8> k;
        k << eve_variance * i2, kappa * z, mu2 * i2, o,
             kappa * z, w_bar * i2, theta2 * z, o,
             mu2 * i2, theta2 * z, lambda_e * i2, kappa * z,
             o, o, kappa * z, w_bar * i2;
        return k;
    }
};

inline TwoWayCovariances twoway_covariances(double t_bar, double w_bar, double modulation_variance)
{
    detail::require(t_bar >= 0.0 && t_bar <= 1.0, "averaged gain must lie in [0, 1]");
    detail::require(w_bar >= 1.0 && std::isfinite(w_bar), "Eve variance must be at least 1");
    detail::require(modulation_variance >= 1.0 && std::isfinite(modulation_variance),
                    "modulation variance must be at least the vacuum level");
    const double t = t_bar, w = w_bar, s = modulation_variance;
    TwoWayCovariances c{};
    c.t_bar = t;
    c.w_bar = w;
    c.modulation_variance = s;
    c.lambda_b = t * s + (1 - t * t) * w + t * s;
    c.kappa = std::sqrt(t * (w * w - 1));
    c.mu = (w - s) * std::sqrt((1 - t) * t);
    c.theta = std::sqrt((1 - t) * (w * w - 1));
    c.mu2 = -std::sqrt(1 - t) * c.mu;
    c.theta2 = -std::sqrt(1 - t) * c.theta;
    c.xi = t * (1 - t) * s + (1 - t) * (1 - t) * w + t * w;
    c.lambda_e = c.xi + (1 - t) * s;
    c.eve_variance = (1 - t) * s + t * w;
    c.eve_given_alice = (1 - t) + t * w;
    if (!is_psd(c.bob_matrix()) || !is_psd(c.eve_matrix()))
        throw consistency_error("two-way covariance matrix is not positive semidefinite");
    return c;
}

inline double twoway_gamma(double t) { return std::sqrt(1 + t * t * (t * t + t - 2)); }
inline double twoway_ell(double t) { return std::sqrt(1 + 3 * t + t * t); }
inline double twoway_pi_product(double t, double w)
{
    return std::sqrt((1 / t) * std::pow(1 - t, 3) * (1 + t * t * t)) * w;
}
inline double twoway_gamma_product(double t, double w)
{
    return (1 + w * (1 + t * t * t + (1 - t) * (1 + t * t) * w)) / (t * (1 + t));
}

namespace detail {

template <std::size_t N>
std::array<double, N> resolve_split(const std::optional<std::array<double, N>>& given, double product, bool strict,
                                    const char* name)
{
    if (!given) {
        if (strict) throw config_error(std::string("strict mode needs an explicit ") + name + " split");
        std::array<double, N> a;
        a.fill(std::pow(product, 1.0 / double(N)));
        return a;
    }
    double p = 1.0;
    for (double v : *given) {
        require(v > 0 && std::isfinite(v), "split factors must be positive");
        p *= v;
    }
    if (std::abs(p - product) > 1e-9 * std::max(1.0, std::abs(product)))
        throw parameter_error(std::string(name) + " split does not multiply to the required product");
    return *given;
}

} // namespace detail

// Asymptotic two-way spectra keyed like the one-way ones. Factors that are fixed only through
// their product use the symmetric split unless explicit values are given.
inline std::map<std::string, SymplecticSpectrum> twoway_spectra(Measurement m, Reconciliation r, double t_bar,
                                                                double w_bar, double single_carrier_variance,
                                                                const TwoWayOptions& opt = {})
{
    detail::check_rate_inputs(t_bar, w_bar);
    const double t = t_bar, w = w_bar, s0 = single_carrier_variance;
    // only the Gamma split enters a rate, so strict mode applies to it alone
    const bool strict = opt.strict_splits;
    std::map<std::string, SymplecticSpectrum> out;

    const auto wp = detail::resolve_split(opt.wp, t, false, "wp");
    const auto om = detail::resolve_split(opt.omega, (1 - t) * (1 - t), false, "Omega");
    out["B"] = detail::floored({t * s0 / wp[1], t * s0 / wp[0]});
    out["E"] = detail::floored({(1 - t) * (1 - t) * s0 / om[0], (1 - t) * (1 - t) * s0 / om[1], w, w});

    if (m == Measurement::homodyne) {
        const double gm = twoway_gamma(t);
        out["B|A"] = detail::floored({gm * s0, std::sqrt(t * (1 - t * t)) * w * s0 / gm});
        if (r == Reconciliation::reverse) {
            const double prod = twoway_pi_product(t, w);
            const auto pi = detail::resolve_split(opt.pi, prod, false, "Pi");
            out["E|B"] = detail::floored({prod * s0 / pi[1], w, 1.0});
        } else {
            const double l = twoway_ell(t);
            out["E|A"] = detail::floored({l * (1 - t) * s0, std::sqrt(1 - t * t) * s0 * w / l, w, 1.0});
        }
    } else {
        out["B|A"] = detail::floored({(1 - t * t) * s0, w});
        if (r == Reconciliation::reverse) {
            const auto gm = detail::resolve_split(opt.gamma, twoway_gamma_product(t, w), strict, "Gamma");
            out["E|B"] = detail::floored({gm[0], gm[1], gm[2], (1 - t * t) * s0});
        } else {
            out["E|A"] = detail::floored({(1 - t * t) * s0, w, 1.0, 1.0});
        }
    }
    return out;
}

inline KeyRateResult keyrate_twoway(Measurement m, Reconciliation r, double t_bar, double w_bar,
                                    double single_carrier_variance, const TwoWayOptions& opt = {})
{
    detail::check_rate_inputs(t_bar, w_bar);
    KeyRateResult k;
    check_regime(single_carrier_variance, &k.warnings);
    k.t_bar = t_bar;
    k.w_bar = w_bar;
    const double t = t_bar, w = w_bar;
    const double gw = detail::g_checked(w, "E");

    if (m == Measurement::homodyne && r == Reconciliation::reverse) {
        k.info_term = 0.5 * std::log2((1 - t + t * t) / ((1 - t) * (1 - t)));
        k.eve_term = gw;
    } else if (m == Measurement::homodyne) {
        k.info_term = 0.5 * std::log2(t / ((1 - t) * (1 - t)));
        k.eve_term = gw;
    } else if (r == Reconciliation::direct) {
        k.info_term = std::log2(t / ((1 - t) * (1 - t)));
        k.eve_term = 2 * gw;
    } else {
        const double se = (1 - t) + t * w;
        const double num = (opt.numerator == TwoWayRrHetNumerator::literal ? std::pow(2.0, t) : t) * (1 + t);
        k.info_term = std::log2(num / (se * (1 - t) * (1 + t * t + w - t * t * w)));
        const auto gm = detail::resolve_split(opt.gamma, twoway_gamma_product(t, w), opt.strict_splits, "Gamma");
        double sum = 0.0;
        for (double g : gm) sum += detail::g_checked(g, "E|B");
        k.eve_term = 2 * gw - sum;
    }
    k.rate = k.info_term - k.eve_term;
    k.spectra = twoway_spectra(m, r, t_bar, w_bar, single_carrier_variance, opt);
    return k;
}

inline KeyRateResult keyrate_twoway(const ProtocolConfig& c)
{
    const auto a = resolve_averages(c);
    return keyrate_twoway(c.measurement, c.reconciliation, a.t_bar, a.w_bar, c.single_carrier_variance,
                          c.twoway_options());
}

// Dispatch on the configured direction.
inline KeyRateResult keyrate(const ProtocolConfig& c)
{
    return c.direction == Direction::one_way ? keyrate_oneway(c) : keyrate_twoway(c);
}

inline KeyRateResult keyrate(const ProtocolConfig& c, double t_bar, double w_bar)
{
    if (c.direction == Direction::one_way)
        return keyrate_oneway(c.measurement, c.reconciliation, t_bar, w_bar, c.single_carrier_variance, c.rr_het_form);
    return keyrate_twoway(c.measurement, c.reconciliation, t_bar, w_bar, c.single_carrier_variance,
                          c.twoway_options());
}

} // namespace mcqkd
