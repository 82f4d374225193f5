#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "mcqkd/channel_model.hpp"

namespace mcqkd {

enum class Allocation { uniform, waterfill };

// K users sharing the selected sub-channels of one link.
struct MqaSetup {
    ChannelEnsemble ensemble;
    std::size_t users = 1;
    double modulation_variance = 1.0;  // per-slot budget: mean of the allocated variances
    Allocation allocation = Allocation::uniform;
    double vacuum_noise = 1.0;
    QuadratureConvention convention = QuadratureConvention::complex;
};

struct RegionPoint {
    std::vector<double> rates;
};

struct CapacityRegion {
    std::size_t users = 0;
    std::vector<double> corner_points;
    double sum_capacity = 0.0;
    double symmetric_capacity = 0.0;
    bool is_private = false;
    std::vector<double> eve_terms;
    // private regions only: C_sum minus the summed Eve terms, and its per-user share
    double secret_sum_bound = 0.0;
    double secret_symmetric_bound = 0.0;

    RegionPoint corner(std::size_t k) const
    {
        detail::require(k < users, "user index out of range");
        RegionPoint p{std::vector<double>(users, 0.0)};
        p.rates[k] = corner_points[k];
        return p;
    }

    bool contains(const RegionPoint& p, double tol = 1e-12) const
    {
        if (p.rates.size() != users) return false;
        double total = 0.0;
        for (std::size_t k = 0; k < users; ++k) {
            if (p.rates[k] < -tol || p.rates[k] > corner_points[k] + tol) return false;
            total += p.rates[k];
        }
        return total <= (is_private ? secret_sum_bound : sum_capacity) + tol;
    }
};

inline std::vector<double> allocate_variances(const ChannelEnsemble& e, double budget, Allocation mode)
{
    detail::require(budget > 0 && std::isfinite(budget), "variance budget must be positive");
    const std::size_t l = e.selected.size();
    if (mode == Allocation::uniform || l == 0) return std::vector<double>(l, budget);

    // water-filling over inverse SNR-per-unit-variance levels
    std::vector<double> floor(l);
    for (std::size_t i = 0; i < l; ++i) {
        const auto& s = e.slots[e.selected[i]];
        floor[i] = s.noise_variance / s.fourier_gain;
    }
    std::vector<std::size_t> order(l);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return floor[a] < floor[b]; });
    const double total = budget * double(l);
    double level = 0.0, acc = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
        acc += floor[order[k]];
        const double cand = (total + acc) / double(k + 1);
        if (k + 1 < l && cand > floor[order[k + 1]]) continue;
        level = cand;
        break;
    }
    std::vector<double> out(l);
    for (std::size_t i = 0; i < l; ++i) out[i] = std::max(0.0, level - floor[i]);
    return out;
}

// Sum over selected slots of log2(1 + sigma_wi^2 g_i / sigma_Ni^2).
inline double sum_capacity(const ChannelEnsemble& e, std::span<const double> variances, double budget,
                           QuadratureConvention conv = QuadratureConvention::complex)
{
    detail::require(variances.size() == e.selected.size(), "one variance per selected sub-channel is required");
    if (variances.empty()) return 0.0;
    double mean = 0.0, c = 0.0;
    for (double v : variances) {
        detail::require(v >= 0 && std::isfinite(v), "allocated variances must be non-negative");
        mean += v;
    }
    mean /= double(variances.size());
    if (std::abs(mean - budget) > 1e-9 * std::max(1.0, budget))
        throw parameter_error("allocated variances violate the modulation budget");
    for (std::size_t i = 0; i < variances.size(); ++i) {
        const auto& s = e.slots[e.selected[i]];
        c += std::log2(1.0 + variances[i] * s.fourier_gain / s.noise_variance);
    }
    return convention_factor(conv) * c;
}

inline double symmetric_capacity(double sum, std::size_t users)
{
    detail::require(users >= 1, "at least one user is required");
    return sum / double(users);
}

inline CapacityRegion capacity_region(const MqaSetup& s)
{
    detail::require(s.users >= 1, "at least one user is required");
    const auto vars = allocate_variances(s.ensemble, s.modulation_variance, s.allocation);
    CapacityRegion r;
    r.users = s.users;
    r.sum_capacity = sum_capacity(s.ensemble, vars, s.modulation_variance, s.convention);
    r.symmetric_capacity = symmetric_capacity(r.sum_capacity, s.users);
    // a corner hands the whole budget to one user, who then sees every selected slot
    r.corner_points.assign(s.users, r.sum_capacity);
    return r;
}

// Sum of per-slot private capacities, with sigma_X^2 = sigma_0^2 + excess noise of the slot.
inline double private_sum_capacity(const MqaSetup& s)
{
    const auto vars = allocate_variances(s.ensemble, s.modulation_variance, s.allocation);
    double p = 0.0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& sc = s.ensemble.slots[s.ensemble.selected[i]];
        if (vars[i] <= 0.0) continue;
        const double sx = s.vacuum_noise + excess_noise(sc.eve_variance, sc.eve_gain());
        p += private_capacity_subchannel(vars[i], sc.fourier_gain, sx, s.convention);
    }
    return p;
}

inline CapacityRegion private_region(const MqaSetup& s, std::span<const double> eve_terms)
{
    detail::require(eve_terms.size() == s.users, "one Eve term per user is required");
    const auto c = capacity_region(s);
    CapacityRegion r;
    r.users = s.users;
    r.is_private = true;
    r.eve_terms.assign(eve_terms.begin(), eve_terms.end());
    double eve_total = 0.0;
    for (std::size_t k = 0; k < s.users; ++k) {
        detail::require(eve_terms[k] >= 0 && std::isfinite(eve_terms[k]), "Eve terms must be non-negative");
        r.corner_points.push_back(std::max(0.0, c.corner_points[k] - eve_terms[k]));
        eve_total += eve_terms[k];
    }
    r.secret_sum_bound = std::max(0.0, c.sum_capacity - eve_total);
    r.secret_symmetric_bound = symmetric_capacity(r.secret_sum_bound, s.users);
    r.sum_capacity = private_sum_capacity(s);
    r.symmetric_capacity = symmetric_capacity(r.sum_capacity, s.users);
    return r;
}

// v = (nu_Eve - sigma_N^2 / lambda_max^2) / (nu_Eve - sigma_N^2 / |F(T)|^2_max)
inline double svd_gain(double nu_eve, double noise_variance, double lambda2_max, double gain_max)
{
    detail::require(gain_max > 0 && noise_variance > 0, "gain and noise must be positive");
    detail::require(lambda2_max >= gain_max, "largest singular value must dominate the largest gain");
    const double den = nu_eve - noise_variance / gain_max;
    if (den <= 0.0) throw domain_error("SVD gain denominator is not positive");
    return (nu_eve - noise_variance / lambda2_max) / den;
}

// 1 - v (1 - g_E), written so that v = 1 is exact; requires (1 - g_E) <= 1/v
inline double svd_transformed_eve_gain(double eve_gain, double v)
{
    detail::require(v > 0 && eve_gain >= 0 && eve_gain <= 1, "invalid SVD transform inputs");
    const double g = 1.0 - eve_gain;
    if (g * v > 1.0 + 1e-12) throw domain_error("SVD gain pushes the sub-channel gain above 1");
    return std::max(0.0, eve_gain - (v - 1.0) * g);
}

struct SvdComparison {
    CapacityRegion baseline;
    CapacityRegion transformed;
    bool dominance_holds;
};

// Setup with each selected gain scaled by its SVD gain v_i.
inline MqaSetup svd_transform(const MqaSetup& s, std::span<const double> v)
{
    detail::require(v.size() == s.ensemble.selected.size(), "one SVD gain per selected sub-channel is required");
    MqaSetup t = s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        detail::require(v[i] >= 1.0, "SVD gains below 1 are not allowed");
        auto& sc = t.ensemble.slots[t.ensemble.selected[i]];
        svd_transformed_eve_gain(sc.eve_gain(), v[i]);
        sc = SubChannel::from_gain(std::min(1.0, sc.fourier_gain * v[i]), sc.noise_variance, sc.eve_variance);
    }
    return t;
}

// Private region before and after the SVD gains. Eve's per-user terms are kept as given,
// which upper-bounds her reduced information after the transform.
inline SvdComparison svd_private_capacities(const MqaSetup& s, std::span<const double> v,
                                            std::span<const double> eve_terms)
{
    const auto t = svd_transform(s, v);
    SvdComparison c{private_region(s, eve_terms), private_region(t, eve_terms), false};
    c.dominance_holds = c.transformed.sum_capacity >= c.baseline.sum_capacity;
    return c;
}

} // namespace mcqkd
