#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mcqkd/gaussian_core.hpp"

namespace mcqkd {

// Second moments of a pair of zero-mean quadratures (a, b).
struct QuadraturePairStats {
    double var_a = 0.0;
    double var_b = 0.0;
    double cov_ab = 0.0;

    bool satisfies_cauchy_schwarz(double rel_tol = 1e-9) const
    {
        return cov_ab * cov_ab <= var_a * var_b * (1.0 + rel_tol);
    }
};

// Var(a | b) = <a^2> - <ab>^2 / <b^2>
inline double conditional_variance(const QuadraturePairStats& s)
{
    detail::require(s.var_b > 0 && std::isfinite(s.var_b), "conditioning variance must be positive");
    detail::require(s.var_a >= 0 && std::isfinite(s.var_a), "variance must be non-negative");
    if (!s.satisfies_cauchy_schwarz()) throw data_error("covariance exceeds the Cauchy-Schwarz bound");
    return std::max(0.0, s.var_a - s.cov_ab * s.cov_ab / s.var_b);
}

// Linear estimator coefficient <ab>/<b^2>.
inline double estimator_coefficient(const QuadraturePairStats& s)
{
    detail::require(s.var_b != 0.0 && std::isfinite(s.var_b), "estimator denominator is zero");
    return s.cov_ab / s.var_b;
}

struct ConditionalVariances {
    double bob_given_alice;
    double eve_given_alice;
};

namespace detail {

inline void check_cloner(double t_bar, double w_bar)
{
    require(t_bar >= 0.0 && t_bar <= 1.0, "averaged gain must lie in [0, 1]");
    require(w_bar >= 1.0 && std::isfinite(w_bar), "Eve variance must be at least 1");
}

} // namespace detail

// Entangling-cloner conditional variances in vacuum units.
inline ConditionalVariances conditional_variances_oneway(double t_bar, double w_bar)
{
    detail::check_cloner(t_bar, w_bar);
    return {(1.0 - t_bar) * w_bar + t_bar, (1.0 - t_bar) + t_bar * w_bar};
}

struct EveCovarianceOneWay {
    double t_bar;
    double w_bar;
    double modulation_variance;
    double kappa;
    double mu;
    double theta;
    double bob_variance;
    double eve_variance;
    double eve_given_alice;

    // Eve's two modes: the reflected mode and the kept EPR arm.
    Eigen::Matrix4d eve_matrix() const
    {
        const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity(), z = pauli_z();
        Eigen::Matrix4d k;
        k << eve_variance * i2, kappa * z, kappa * z, w_bar * i2;
        return k;
    }

    // Eve's two modes followed by Bob's mode.
    Eigen::Matrix<double, 6, 6> joint_matrix() const
    {
        const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity(), z = pauli_z();
        Eigen::Matrix<double, 6, 6> k;
        k.block<4, 4>(0, 0) = eve_matrix();
        k.block<2, 2>(0, 4) = mu * i2;
        k.block<2, 2>(2, 4) = theta * z;
        k.block<2, 2>(4, 0) = mu * i2;
        k.block<2, 2>(4, 2) = theta * z;
        k.block<2, 2>(4, 4) = bob_variance * i2;
        return k;
    }
};

inline EveCovarianceOneWay eve_covariance_oneway(double t_bar, double w_bar, double modulation_variance)
{
    detail::check_cloner(t_bar, w_bar);
    detail::require(modulation_variance >= 1.0, "modulation variance must be at least the vacuum level");
    EveCovarianceOneWay e{};
    e.t_bar = t_bar;
    e.w_bar = w_bar;
    e.modulation_variance = modulation_variance;
    e.kappa = std::sqrt(t_bar * (w_bar * w_bar - 1.0));
    e.mu = (w_bar - modulation_variance) * std::sqrt((1.0 - t_bar) * t_bar);
    e.theta = std::sqrt((1.0 - t_bar) * (w_bar * w_bar - 1.0));
    e.bob_variance = (1.0 - t_bar) * w_bar + t_bar * modulation_variance;
    e.eve_variance = (1.0 - t_bar) * modulation_variance + t_bar * w_bar;
    e.eve_given_alice = conditional_variances_oneway(t_bar, w_bar).eve_given_alice;
    if (!is_psd(e.joint_matrix())) throw consistency_error("entangling cloner covariance is not positive semidefinite");
    return e;
}

// 0.5 log2(V / V_cond); negative values are returned as-is.
inline double holevo_from_conditionals(double variance, double conditional)
{
    detail::require(variance > 0 && conditional > 0, "variances must be positive");
    return 0.5 * std::log2(variance / conditional);
}

struct HomodyneEstimatorVariances {
    double x;
    double p;
    double eve_x;
    double eve_p;
    double lower_bound;
};

// Estimation-error variances of a squeezed (s != 1) or coherent (s = 1) homodyne setup.
inline HomodyneEstimatorVariances hom_estimator_variances(double gain, double sigma_x2, double modulation_variance,
                                                          double squeezing, double n0 = 1.0)
{
    detail::require(gain > 0 && gain <= 1, "gain must lie in (0, 1]");
    detail::require(sigma_x2 >= 0, "noise variance must be non-negative");
    detail::require(modulation_variance > 0 && n0 > 0, "variances must be positive");
    detail::require(squeezing > 1.0 / modulation_variance && squeezing < modulation_variance,
                    "squeezing must lie strictly between 1/modulation and modulation variance");
    const double eve = n0 / (gain * (sigma_x2 + 1.0 / modulation_variance));
    return {gain * (sigma_x2 + squeezing) * n0, gain * (sigma_x2 + 1.0 / squeezing) * n0, eve, eve,
            gain * (sigma_x2 + 1.0 / modulation_variance) * n0};
}

struct HeterodyneEstimatorVariances {
    double x;
    double p;
    double v;
    double h;
};

// Heterodyne estimator variances; beam_splitter is Alice's internal |T_A|^2.
inline HeterodyneEstimatorVariances het_estimator_variances(double t_bar, double single_carrier_variance,
                                                            double noise_variance, double beam_splitter,
                                                            double n0 = 1.0)
{
    detail::require(beam_splitter > 0 && beam_splitter < 1, "beam splitter transmittance must lie in (0, 1)");
    detail::require(t_bar >= 0 && t_bar <= 1, "averaged gain must lie in [0, 1]");
    detail::require(single_carrier_variance > 0 && noise_variance >= 0 && n0 > 0, "variances must be positive");
    const double h = (1.0 - beam_splitter) / beam_splitter;
    const double v = t_bar * single_carrier_variance + noise_variance;
    const double x = (h * v + 1.0) / (v + h) * n0;
    return {x, n0 * n0 / x, v, h};
}

} // namespace mcqkd
