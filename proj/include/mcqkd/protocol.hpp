#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcqkd/channel_model.hpp"
#include "mcqkd/gaussian_core.hpp"

namespace mcqkd {

enum class Direction { one_way, two_way };
enum class Measurement { homodyne, heterodyne };
enum class Reconciliation { direct, reverse };

// Leading term of the one-way RR heterodyne rate: log2(1/(1-T)) or log2(T/(1-T)).
enum class RrHetForm { standard, alternate };

// Numerator of the two-way RR heterodyne log term: 2^T (1+T) as typeset, or T (1+T).
enum class TwoWayRrHetNumerator { literal, linear };

struct TwoWayOptions {
    TwoWayRrHetNumerator numerator = TwoWayRrHetNumerator::literal;
    // In strict mode a product-only factorization that a rate depends on (Gamma) must be given.
    bool strict_splits = false;
    std::optional<std::array<double, 2>> wp;     // wp1 * wp2 = T
    std::optional<std::array<double, 2>> omega;  // Omega2 * Omega4 = (1-T)^2
    std::optional<std::array<double, 2>> pi;     // Pi1 * Pi2
    std::optional<std::array<double, 3>> gamma;  // Gamma1 * Gamma2 * Gamma3
};

struct ProtocolConfig {
    Direction direction = Direction::one_way;
    Measurement measurement = Measurement::homodyne;
    Reconciliation reconciliation = Reconciliation::reverse;
    double single_carrier_variance = 100.0;  // sigma_w0^2
    double modulation_variance = 100.0;      // sigma_w^2 of the sub-carriers
    double squeezing = 1.0;
    double shot_noise = 1.0;                 // N0
    double beam_splitter = 0.5;              // |T_A|^2
    double vacuum_noise = 1.0;               // sigma_0^2
    ChannelEnsemble ensemble;
    std::optional<QuadratureConvention> quadrature_convention;
    // Direct values of the averaged parameters; when unset they come from the ensemble.
    std::optional<double> t_bar;
    std::optional<double> w_bar;
    RrHetForm rr_het_form = RrHetForm::standard;
    TwoWayRrHetNumerator twoway_rr_het_numerator = TwoWayRrHetNumerator::literal;
    bool strict_splits = false;
    std::optional<std::array<double, 3>> gamma_split;

    QuadratureConvention convention_or(QuadratureConvention fallback) const
    {
        return quadrature_convention.value_or(fallback);
    }

    TwoWayOptions twoway_options() const
    {
        TwoWayOptions o;
        o.numerator = twoway_rr_het_numerator;
        o.strict_splits = strict_splits;
        o.gamma = gamma_split;
        return o;
    }
};

struct ChannelAverages {
    double t_bar;
    double w_bar;
    double noise_variance;
};

inline ChannelAverages resolve_averages(const ProtocolConfig& c)
{
    ChannelAverages a{};
    a.t_bar = c.t_bar ? *c.t_bar : c.ensemble.averaged_fourier_gain();
    a.w_bar = c.w_bar ? *c.w_bar : c.ensemble.averaged_eve_variance();
    a.noise_variance = c.ensemble.selected.empty() ? 0.0 : c.ensemble.averaged_noise_variance();
    return a;
}

struct KeyRateResult {
    double rate = 0.0;
    double info_term = 0.0;
    double eve_term = 0.0;
    std::map<std::string, SymplecticSpectrum> spectra;
    double t_bar = 0.0;
    double w_bar = 0.0;
    std::vector<std::string> warnings;

    double clamped() const { return std::max(rate, 0.0); }
};

inline constexpr double regime_minimum = 10.0;
inline constexpr double regime_comfortable = 100.0;

// The asymptotic spectra assume a large single-carrier modulation variance.
inline void check_regime(double single_carrier_variance, std::vector<std::string>* warnings = nullptr)
{
    detail::require(std::isfinite(single_carrier_variance), "modulation variance must be finite");
    if (single_carrier_variance < regime_minimum)
        throw regime_error("single-carrier modulation variance " + std::to_string(single_carrier_variance) +
                           " is outside the large-modulation regime (needs >= 10)");
    if (warnings && single_carrier_variance < regime_comfortable)
        warnings->push_back("single-carrier modulation variance below 100: asymptotic spectra are approximate");
}

namespace detail {

inline void check_rate_inputs(double t_bar, double w_bar)
{
    require(t_bar > 0.0 && t_bar < 1.0, "averaged gain must lie strictly between 0 and 1");
    require(w_bar >= 1.0 && std::isfinite(w_bar), "Eve variance must be at least 1");
}

// g() with the argument checked as a physical eigenvalue
inline double g_checked(double s, const char* label)
{
    if (!(s >= 1.0 - 1e-9))
        throw consistency_error(std::string("unphysical eigenvalue in ") + label + ": " + std::to_string(s));
    return entropy_g(s);
}

inline SymplecticSpectrum floored(std::vector<double> v)
{
    for (auto& x : v) x = std::max(x, 1.0);
    return SymplecticSpectrum(std::move(v));
}

} // namespace detail

} // namespace mcqkd
