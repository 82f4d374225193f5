#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mcqkd/attack_model.hpp"
#include "mcqkd/gaussian_core.hpp"

namespace mcqkd {

// real: one quadrature, factor 1/2 on log terms. complex: both quadratures, factor 1.
enum class QuadratureConvention { real, complex };

inline double convention_factor(QuadratureConvention c) { return c == QuadratureConvention::real ? 0.5 : 1.0; }

struct SubChannel {
    complex transmittance{0.0, 0.0};  // Fourier-domain F(T_i)
    double fourier_gain = 0.0;        // |F(T_i)|^2
    double noise_variance = 1.0;      // sigma_N^2 per quadrature
    double eve_variance = 1.0;        // W_i

    double eve_gain() const { return 1.0 - fourier_gain; }

    // Representative transmittance with Re T = Im T and |T|^2 = gain.
    static SubChannel from_gain(double gain, double noise_variance, double eve_variance = 1.0)
    {
        const double c = std::sqrt(std::max(gain, 0.0) / 2.0);
        SubChannel s{{c, c}, gain, noise_variance, eve_variance};
        s.validate();
        return s;
    }

    void validate() const
    {
        detail::require(fourier_gain >= 0.0 && fourier_gain <= 1.0, "sub-channel gain must lie in [0, 1]");
        detail::require(noise_variance > 0.0 && std::isfinite(noise_variance), "sub-channel noise must be positive");
        detail::require(eve_variance >= 1.0 && std::isfinite(eve_variance), "Eve variance must be at least 1");
    }
};

// Indices i with sigma_N^2 / |F(T_i)|^2 < nu_Eve, in input order.
inline std::vector<std::size_t> select_good_subchannels(std::span<const SubChannel> slots, double nu_eve)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        if (s.fourier_gain > 0.0 && s.noise_variance / s.fourier_gain < nu_eve) out.push_back(i);
    }
    return out;
}

struct ChannelEnsemble {
    std::vector<SubChannel> slots;
    std::vector<std::size_t> selected;
    double nu_eve = std::numeric_limits<double>::infinity();

    static ChannelEnsemble build(std::vector<SubChannel> slots, double nu_eve)
    {
        for (const auto& s : slots) s.validate();
        ChannelEnsemble e;
        e.selected = select_good_subchannels(slots, nu_eve);
        e.slots = std::move(slots);
        e.nu_eve = nu_eve;
        return e;
    }

    // n slots, the first l of which carry the given gain; the rest are dark.
    static ChannelEnsemble uniform(std::size_t n, std::size_t l, double gain, double noise_variance,
                                   double eve_variance = 1.0)
    {
        detail::require(l <= n && n >= 1, "need 1 <= n and l <= n");
        std::vector<SubChannel> slots;
        for (std::size_t i = 0; i < n; ++i)
            slots.push_back(SubChannel::from_gain(i < l ? gain : 0.0, noise_variance, eve_variance));
        return build(std::move(slots), std::numeric_limits<double>::infinity());
    }

    // Explicit selection, bypassing the nu_Eve rule (diagnostics, noise-only runs).
    static ChannelEnsemble with_selection(std::vector<SubChannel> slots, std::vector<std::size_t> selected)
    {
        for (const auto& s : slots) s.validate();
        for (auto i : selected) detail::require(i < slots.size(), "selected index out of range");
        ChannelEnsemble e;
        e.slots = std::move(slots);
        e.selected = std::move(selected);
        return e;
    }

    std::vector<SubChannel> used_slots() const
    {
        std::vector<SubChannel> out;
        for (auto i : selected) out.push_back(slots[i]);
        return out;
    }

    double averaged_fourier_gain() const { return mean_of([](const SubChannel& s) { return s.fourier_gain; }); }
    double averaged_eve_gain() const { return 1.0 - averaged_fourier_gain(); }
    double averaged_eve_variance() const { return mean_of([](const SubChannel& s) { return s.eve_variance; }); }
    double averaged_noise_variance() const { return mean_of([](const SubChannel& s) { return s.noise_variance; }); }

    // T_bar > |T|^2 of a single-carrier link
    bool multicarrier_dominates(double single_gain) const
    {
        return averaged_fourier_gain() > single_gain + 1e-12;
    }

private:
    template <class F>
    double mean_of(F f) const
    {
        if (selected.empty()) throw state_error("no sub-channel is selected");
        double acc = 0.0;
        for (auto i : selected) acc += f(slots[i]);
        return acc / double(selected.size());
    }
};

inline double averaged_fourier_gain(const ChannelEnsemble& e) { return e.averaged_fourier_gain(); }

// N = (W - 1) g_E / (1 - g_E)
inline double excess_noise(double w, double eve_gain)
{
    detail::require(w >= 1.0 && std::isfinite(w), "Eve variance must be at least 1");
    detail::require(eve_gain >= 0.0, "Eve gain must be non-negative");
    if (eve_gain >= 1.0) throw domain_error("Eve gain must be below 1");
    return (w - 1.0) * eve_gain / (1.0 - eve_gain);
}

namespace detail {

inline double private_ratio(double sigma_w2, double gain, double sigma_x2)
{
    require(sigma_w2 > 0 && gain >= 0 && gain <= 1 && sigma_x2 >= 0, "invalid private-capacity inputs");
    return (sigma_w2 * gain + sigma_x2) / (1.0 + sigma_x2 * sigma_w2 * gain);
}

} // namespace detail

// sigma_N*^2 = sigma_w^2 / (R - 1), so that R = 1 + SNR* with SNR* = sigma_w^2 / sigma_N*^2.
// Infinite when R <= 1 (no private capacity).
inline double private_noise_variance(double sigma_w2, double gain, double sigma_x2)
{
    const double r = detail::private_ratio(sigma_w2, gain, sigma_x2);
    if (r <= 1.0) return std::numeric_limits<double>::infinity();
    return sigma_w2 / (r - 1.0);
}

inline double private_capacity_subchannel(double sigma_w2, double gain, double sigma_x2,
                                          QuadratureConvention conv = QuadratureConvention::real)
{
    const double r = detail::private_ratio(sigma_w2, gain, sigma_x2);
    return r <= 1.0 ? 0.0 : convention_factor(conv) * std::log2(r);
}

// Per sub-channel inputs for the directional private capacity. Eve's information is given
// either through her estimator statistics (a = Alice's estimator e, b = Eve's quadrature E)
// or directly in bits.
struct DirectionalStats {
    double modulation_variance;
    double sigma_x2;
    double squeezing = 1.0;
    std::optional<QuadraturePairStats> eve;
    std::optional<double> eve_bits;
};

struct DirectionalCapacity {
    double bits;
    double raw;
    std::size_t argmax;
};

inline DirectionalCapacity private_capacity_directional(std::span<const DirectionalStats> stats)
{
    detail::require(!stats.empty(), "no sub-channel statistics given");
    DirectionalCapacity best{0.0, -std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        detail::require(s.modulation_variance > 0 && s.sigma_x2 >= 0 && s.squeezing > 0, "invalid estimator inputs");
        double eve;
        if (s.eve_bits)
            eve = *s.eve_bits;
        else if (s.eve)
            eve = holevo_from_conditionals(s.eve->var_a, std::max(conditional_variance(*s.eve), 1e-300));
        else
            throw parameter_error("sub-channel is missing Eve's estimator statistics");
        const double v =
            0.5 * std::log2((s.modulation_variance + s.sigma_x2) / (s.squeezing + s.sigma_x2)) - eve;
        if (v > best.raw) best = {std::max(v, 0.0), v, i};
    }
    return best;
}

} // namespace mcqkd
