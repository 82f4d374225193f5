#pragma once

#include <cmath>
#include <map>
#include <string>

#include "mcqkd/attack_model.hpp"
#include "mcqkd/protocol.hpp"

namespace mcqkd {

// Asymptotic symplectic spectra of the one-way protocol, keyed by system:
// "B", "B|A", "E", "E|B" (reverse) or "E|A" (direct), and "AB".
// Entries below the vacuum level (an artefact of the large-modulation approximation) are floored at 1.
inline std::map<std::string, SymplecticSpectrum> spectra_oneway(Measurement m, Reconciliation r, double t_bar,
                                                                double w_bar, double single_carrier_variance)
{
    detail::check_rate_inputs(t_bar, w_bar);
    const double s0 = single_carrier_variance;
    const auto cv = conditional_variances_oneway(t_bar, w_bar);
    const double sb = cv.bob_given_alice, se = cv.eve_given_alice;

    std::map<std::string, SymplecticSpectrum> out;
    out["B"] = detail::floored({t_bar * s0});
    out["E"] = detail::floored({(1 - t_bar) * s0, w_bar});
    out["AB"] = detail::floored({s0, 1.0, 1.0});
    if (m == Measurement::homodyne) {
        out["B|A"] = detail::floored({std::sqrt(sb * t_bar * s0)});
        if (r == Reconciliation::reverse)
            out["E|B"] = detail::floored({std::sqrt((1 / t_bar) * (1 - t_bar) * s0 * w_bar), 1.0});
        else
            out["E|A"] = detail::floored({std::sqrt(se * (1 - t_bar) * s0), std::sqrt(sb * w_bar / se)});
    } else {
        out["B|A"] = detail::floored({sb});
        if (r == Reconciliation::reverse)
            out["E|B"] = detail::floored({(1 / t_bar) * (1 - t_bar + sb), 1.0});
        else
            out["E|A"] = detail::floored({sb, 1.0});
    }
    return out;
}

inline KeyRateResult keyrate_oneway(Measurement m, Reconciliation r, double t_bar, double w_bar,
                                    double single_carrier_variance, RrHetForm form = RrHetForm::standard)
{
    detail::check_rate_inputs(t_bar, w_bar);
    KeyRateResult k;
    check_regime(single_carrier_variance, &k.warnings);
    k.t_bar = t_bar;
    k.w_bar = w_bar;

    const auto cv = conditional_variances_oneway(t_bar, w_bar);
    const double sb = cv.bob_given_alice, se = cv.eve_given_alice;
    const double gw = detail::g_checked(w_bar, "E");

    if (m == Measurement::homodyne && r == Reconciliation::reverse) {
        k.info_term = 0.5 * std::log2(w_bar / ((1 - t_bar) * sb));
        k.eve_term = gw;
    } else if (m == Measurement::homodyne) {
        k.info_term = 0.5 * std::log2(t_bar * se / ((1 - t_bar) * sb));
        k.eve_term = gw - detail::g_checked(std::sqrt(w_bar * sb / se), "E|A");
    } else if (r == Reconciliation::reverse) {
        k.info_term = form == RrHetForm::standard ? std::log2(1 / (1 - t_bar)) : std::log2(t_bar / (1 - t_bar));
        k.eve_term = detail::g_checked(sb, "B|A") + gw;
    } else {
        k.info_term = std::log2(t_bar / (1 - t_bar));
        k.eve_term = gw;
    }
    k.rate = k.info_term - k.eve_term;
    k.spectra = spectra_oneway(m, r, t_bar, w_bar, single_carrier_variance);
    return k;
}

inline KeyRateResult keyrate_oneway(const ProtocolConfig& c)
{
    const auto a = resolve_averages(c);
    return keyrate_oneway(c.measurement, c.reconciliation, a.t_bar, a.w_bar, c.single_carrier_variance, c.rr_het_form);
}

// Per-quadrature statistics: estimator variance <e^2>, and the conditional variances
// that enter Bob's mutual information and Eve's Holevo term.
struct PerQuadratureStats {
    double estimator_variance_x;
    double estimator_variance_p;
    double bob_conditional_x;
    double bob_conditional_p;
    double eve_conditional_x;
    double eve_conditional_p;
};

struct QuadratureKeyRates {
    double x;
    double p;
    double info_x;
    double info_p;
    double holevo_x;
    double holevo_p;
};

inline QuadratureKeyRates keyrate_per_quadrature(const PerQuadratureStats& s)
{
    QuadratureKeyRates k{};
    k.info_x = holevo_from_conditionals(s.estimator_variance_x, s.bob_conditional_x);
    k.info_p = holevo_from_conditionals(s.estimator_variance_p, s.bob_conditional_p);
    k.holevo_x = holevo_from_conditionals(s.estimator_variance_x, s.eve_conditional_x);
    k.holevo_p = holevo_from_conditionals(s.estimator_variance_p, s.eve_conditional_p);
    k.x = k.info_x - k.holevo_x;
    k.p = k.info_p - k.holevo_p;
    return k;
}

inline PerQuadratureStats homodyne_quadrature_stats(double gain, double sigma_x2, double modulation_variance,
                                                    double squeezing, double n0, double estimator_variance)
{
    const auto h = hom_estimator_variances(gain, sigma_x2, modulation_variance, squeezing, n0);
    return {estimator_variance, estimator_variance, h.x, h.p, h.eve_x, h.eve_p};
}

} // namespace mcqkd
