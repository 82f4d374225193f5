#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcqkd/channel_model.hpp"
#include "mcqkd/gaussian_core.hpp"

namespace mcqkd {

struct SimulationConfig {
    ChannelEnsemble ensemble;
    double single_carrier_variance = 1.0;  // sigma_w0^2 per quadrature
    QuadratureConvention convention = QuadratureConvention::complex;
};

// Raw second moments of the (input, output) pair of a selected slot: sum |z|^2, sum |y|^2, sum y conj(z).
struct SlotMoments {
    std::size_t slot = 0;
    double zz = 0.0;
    double yy = 0.0;
    complex yz{0.0, 0.0};
    std::size_t count = 0;
};

struct SimulationReport {
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string rng;
    QuadratureConvention convention = QuadratureConvention::complex;
    // real quadrature ordering (x1, p1, x2, p2, ...) over all n slots
    Eigen::MatrixXd empirical_output_covariance;
    Eigen::MatrixXd analytic_output_covariance;
    double analytic_quadrature_variance = 0.0;
    double empirical_quadrature_variance = 0.0;
    double quadrature_variance_se = 0.0;
    double max_abs_deviation = 0.0;
    double max_decode_error = 0.0;
    double mean_subcarrier_energy = 0.0;
    double empirical_mutual_info_bits = 0.0;
    double analytic_mutual_info_bits = 0.0;
    double mutual_info_se = 0.0;
    std::vector<SlotMoments> moments;
};

struct MutualInformationEstimate {
    double bits;
    double standard_error;
};

// Gaussian plug-in estimate from the complex regression of each slot output on its input:
// log2(var(y) / var(y|z)) per slot (both quadratures), summed and scaled by the quadrature convention.
// A complex gain mixes x and p, so the quadratures are not regressed separately.
inline MutualInformationEstimate estimate_mutual_information(const std::vector<SlotMoments>& m,
                                                             QuadratureConvention conv)
{
    if (m.empty()) throw data_error("report holds no input/output samples");
    double bits = 0.0, var = 0.0;
    for (const auto& q : m) {
        if (q.count == 0 || !(q.zz > 0) || !(q.yy > 0)) throw data_error("degenerate sample variance");
        const double n = double(q.count);
        const double rho2 = std::min(1.0, std::norm(q.yz) / (q.zz * q.yy));
        bits += rho2 >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log2(1.0 - rho2);
        // delta method per quadrature plus the chi-square term that dominates near rho = 0
        var += (2.0 * rho2 / n + 1.0 / (n * n)) / (std::numbers::ln2 * std::numbers::ln2);
    }
    const double f = convention_factor(conv);
    return {f * bits, f * std::sqrt(var)};
}

inline double empirical_mutual_information(const SimulationReport& r)
{
    return estimate_mutual_information(r.moments, r.convention).bits;
}

// One AMQD block per trial: z -> d = F^-1(z) -> y_j = F(T_j) F(d)_j + F(Delta)_j on the selected
// slots, exact zeros elsewhere. The decoded single-carriers are z' = y.
inline SimulationReport simulate_block(const SimulationConfig& c, std::size_t trials, std::uint64_t seed)
{
    if (trials < 1000) throw parameter_error("at least 1000 trials are required");
    const auto& e = c.ensemble;
    detail::require(!e.slots.empty(), "ensemble has no slots");
    for (const auto& s : e.slots) s.validate();
    const double s0 = c.single_carrier_variance;
    detail::require(s0 > 0 && std::isfinite(s0), "single-carrier variance must be positive");

    const std::size_t n = e.slots.size(), l = e.selected.size();
    const Eigen::Index dim = Eigen::Index(2 * n);

    SimulationReport r;
    r.trials = trials;
    r.seed = seed;
    r.rng = CounterRng::name;
    r.convention = c.convention;
    r.empirical_output_covariance = Eigen::MatrixXd::Zero(dim, dim);
    r.analytic_output_covariance = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t j : e.selected) {
        const auto& s = e.slots[j];
        const double v = std::norm(s.transmittance) * s0 + s.noise_variance;
        r.analytic_output_covariance(2 * j, 2 * j) = v;
        r.analytic_output_covariance(2 * j + 1, 2 * j + 1) = v;
        r.analytic_mutual_info_bits += std::log2(1.0 + std::norm(s.transmittance) * s0 / s.noise_variance);
    }
    r.analytic_mutual_info_bits *= convention_factor(c.convention);
    if (l > 0) r.analytic_quadrature_variance = e.averaged_fourier_gain() * s0 + e.averaged_noise_variance();

    r.moments.resize(l);
    for (std::size_t k = 0; k < l; ++k) r.moments[k].slot = e.selected[k];

    Eigen::VectorXd q(dim);
    double qsum = 0.0, qsq = 0.0, energy = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        CounterRng rng(seed, t);
        const cvector z = sample_circular_symmetric(n, s0, rng);
        cvector d = unitary_ifft(z);
        for (const auto& v : d) energy += std::norm(v);
        unitary_fft_inplace(d);
        cvector delta = sample_circular_symmetric(n, 1.0, rng);
        unitary_fft_inplace(delta);

        q.setZero();
        double stat = 0.0;
        for (std::size_t k = 0; k < l; ++k) {
            const std::size_t j = e.selected[k];
            const auto& s = e.slots[j];
            const complex noise = std::sqrt(s.noise_variance) * delta[j];
            const complex y = s.transmittance * d[j] + noise;
            const complex direct = s.transmittance * z[j] + noise;
            r.max_decode_error = std::max(r.max_decode_error, std::abs(y - direct));
            q[Eigen::Index(2 * j)] = y.real();
            q[Eigen::Index(2 * j + 1)] = y.imag();
            stat += y.real() * y.real() + y.imag() * y.imag();
            auto& m = r.moments[k];
            m.zz += std::norm(z[j]);
            m.yy += std::norm(y);
            m.yz += y * std::conj(z[j]);
            ++m.count;
        }
        r.empirical_output_covariance.noalias() += q * q.transpose();
        if (l > 0) {
            stat /= double(2 * l);
            qsum += stat;
            qsq += stat * stat;
        }
    }

    const double nt = double(trials);
    r.empirical_output_covariance /= nt;
    r.max_abs_deviation = (r.empirical_output_covariance - r.analytic_output_covariance).cwiseAbs().maxCoeff();
    r.mean_subcarrier_energy = energy / nt;
    r.empirical_quadrature_variance = qsum / nt;
    r.quadrature_variance_se = std::sqrt(std::max(0.0, qsq / nt - (qsum / nt) * (qsum / nt)) / (nt - 1.0));
    if (l > 0) {
        const auto mi = estimate_mutual_information(r.moments, c.convention);
        r.empirical_mutual_info_bits = mi.bits;
        r.mutual_info_se = mi.standard_error;
    }
    return r;
}

enum class NoiseShape { white, correlated };

struct InvarianceCheck {
    bool pass;
    double max_abs_deviation;
    double max_z_score;
    double band_z;  // per-entry band in standard errors
};

namespace detail {

// z with two-sided normal tail probability p, by bisection on erfc
inline double two_sided_normal_quantile(double p)
{
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        if (std::erfc(m / std::numbers::sqrt2) > p)
            lo = m;
        else
            hi = m;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Draws Delta, applies the decode transform and compares the sample covariance of F(Delta) with
// sigma^2 I entry by entry. The band is Bonferroni-adjusted over the distinct entries so that the
// whole matrix has the false-alarm rate of a single 3-standard-error band. The correlated shape
// shares one component across all slots (negative control).
inline InvarianceCheck verify_fft_noise_invariance(std::size_t trials, std::uint64_t seed, double sigma2,
                                                   std::size_t n = 8, NoiseShape shape = NoiseShape::white)
{
    if (trials < 1000) throw parameter_error("at least 1000 trials are required");
    detail::require(n >= 1, "dimension must be at least 1");
    const Eigen::Index dim = Eigen::Index(2 * n);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd q(dim);
    for (std::size_t t = 0; t < trials; ++t) {
        CounterRng rng(seed, t);
        cvector delta = sample_circular_symmetric(n, sigma2, rng);
        if (shape == NoiseShape::correlated) {
            const auto common = sample_circular_symmetric(1, sigma2, rng)[0];
            for (auto& v : delta) v = (v + common) * std::sqrt(0.5);
        }
        unitary_fft_inplace(delta);
        for (std::size_t j = 0; j < n; ++j) {
            q[Eigen::Index(2 * j)] = delta[j].real();
            q[Eigen::Index(2 * j + 1)] = delta[j].imag();
        }
        acc.noalias() += q * q.transpose();
    }
    const double nt = double(trials);
    acc /= nt;
    const double entries = double(dim * (dim + 1) / 2);
    const double family_alpha = std::erfc(3.0 / std::numbers::sqrt2);
    InvarianceCheck out{true, 0.0, 0.0, detail::two_sided_normal_quantile(family_alpha / entries)};
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = i; j < dim; ++j) {
            const double expect = i == j ? sigma2 : 0.0;
            const double se = i == j ? sigma2 * std::sqrt(2.0 / nt) : sigma2 / std::sqrt(nt);
            const double dev = std::abs(acc(i, j) - expect);
            out.max_abs_deviation = std::max(out.max_abs_deviation, dev);
            const double zs = dev / se;
            out.max_z_score = std::max(out.max_z_score, zs);
            if (zs > out.band_z) out.pass = false;
        }
    return out;
}

} // namespace mcqkd
