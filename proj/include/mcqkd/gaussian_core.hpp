#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcqkd/errors.hpp"

namespace mcqkd {

using complex = std::complex<double>;
using cvector = std::vector<complex>;

// Splittable SplitMix64 stream. Each (seed, stream) pair gets an independent sequence,
// so Monte Carlo trials can be drawn in any order with identical results.
class CounterRng {
public:
    using result_type = std::uint64_t;
    static constexpr const char* name = "splitmix64";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(mix(seed) + stream * gamma + gamma))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        state_ += gamma;
        return mix(state_);
    }

    // uniform on [0, 1)
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller; the second variate is cached
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ull;

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline cvector sample_circular_symmetric(std::size_t dim, double var_per_quadrature, CounterRng& rng)
{
    detail::require(dim >= 1, "sample dimension must be at least 1");
    detail::require(var_per_quadrature > 0 && std::isfinite(var_per_quadrature),
                    "quadrature variance must be positive");
    const double sd = std::sqrt(var_per_quadrature);
    cvector z(dim);
    for (auto& v : z) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = {sd * re, sd * im};
    }
    return z;
}

inline cvector sample_circular_symmetric(std::size_t dim, double var_per_quadrature, std::uint64_t seed)
{
    CounterRng rng(seed);
    return sample_circular_symmetric(dim, var_per_quadrature, rng);
}

namespace detail {

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// unnormalized DFT, sign = -1 forward, +1 inverse
inline void dft_inplace(cvector& a, int sign)
{
    const std::size_t n = a.size();
    if (n <= 1) return;
    std::vector<complex> tw(n);
    for (std::size_t k = 0; k < n; ++k) tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * double(k) / double(n));

    if (!is_pow2(n)) {
        cvector out(n, complex{0, 0});
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) out[k] += a[j] * tw[(j * k) % n];
        a.swap(out);
        return;
    }

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len)
            for (std::size_t k = 0; k < len / 2; ++k) {
                const complex u = a[i + k];
                const complex v = a[i + k + len / 2] * tw[k * step];
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
    }
}

inline void unitary_transform_inplace(cvector& a, int sign)
{
    if (a.empty()) throw parameter_error("cannot transform an empty vector");
    dft_inplace(a, sign);
    const double s = 1.0 / std::sqrt(double(a.size()));
    for (auto& v : a) v *= s;
}

} // namespace detail

// Unitary DFT (1/sqrt(n) both ways): the quadrature-level model of the CVQFT.
inline cvector unitary_fft(std::span<const complex> x)
{
    cvector a(x.begin(), x.end());
    detail::unitary_transform_inplace(a, -1);
    return a;
}

inline cvector unitary_ifft(std::span<const complex> x)
{
    cvector a(x.begin(), x.end());
    detail::unitary_transform_inplace(a, +1);
    return a;
}

inline void unitary_fft_inplace(cvector& a) { detail::unitary_transform_inplace(a, -1); }
inline void unitary_ifft_inplace(cvector& a) { detail::unitary_transform_inplace(a, +1); }

// g(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2), entropy of a thermal mode
inline double entropy_g(double s)
{
    if (!(s >= 1.0 - 1e-9)) throw domain_error("symplectic eigenvalue below 1: " + std::to_string(s));
    if (s <= 1.0) return 0.0;
    const double a = 0.5 * (s + 1.0);
    const double b = 0.5 * (s - 1.0);
    return a * std::log2(a) - b * std::log2(b);
}

struct SymplecticSpectrum {
    std::vector<double> values;

    SymplecticSpectrum() = default;
    SymplecticSpectrum(std::initializer_list<double> v) : values(v) {}
    explicit SymplecticSpectrum(std::vector<double> v) : values(std::move(v)) {}

    void validate() const
    {
        for (double v : values)
            if (!(v >= 1.0 - 1e-9)) throw domain_error("unphysical symplectic eigenvalue " + std::to_string(v));
    }
};

inline double spectrum_entropy(const SymplecticSpectrum& s)
{
    double h = 0.0;
    for (double v : s.values) h += entropy_g(v);
    return h;
}

inline double differential_entropy_gaussian(double variance)
{
    detail::require(variance > 0 && std::isfinite(variance), "variance must be positive");
    return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * variance);
}

inline double min_eigenvalue(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-9)
{
    if (m.rows() != m.cols()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
    return min_eigenvalue(m) >= -tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

// Quadrature ordering (x1, p1, x2, p2, ...).
inline Eigen::MatrixXd symplectic_form(Eigen::Index modes)
{
    Eigen::MatrixXd om = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
    for (Eigen::Index k = 0; k < modes; ++k) {
        om(2 * k, 2 * k + 1) = 1.0;
        om(2 * k + 1, 2 * k) = -1.0;
    }
    return om;
}

// Moduli of the eigenvalues of i*Omega*V, one per mode, ascending.
inline SymplecticSpectrum symplectic_eigenvalues(const Eigen::MatrixXd& v)
{
    if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0)
        throw parameter_error("covariance matrix must be square with even dimension");
    const Eigen::Index modes = v.rows() / 2;
    Eigen::EigenSolver<Eigen::MatrixXd> es(symplectic_form(modes) * v, false);
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < v.rows(); ++i) mags.push_back(std::abs(es.eigenvalues()[i]));
    std::sort(mags.begin(), mags.end());
    std::vector<double> out;
    for (std::size_t i = 0; i < mags.size(); i += 2) out.push_back(0.5 * (mags[i] + mags[i + 1]));
    return SymplecticSpectrum(std::move(out));
}

inline Eigen::Matrix2d pauli_z()
{
    Eigen::Matrix2d z;
    z << 1, 0, 0, -1;
    return z;
}

// Circularly symmetric complex Gaussian vector; covariance is E[(z-m)(z-m)^H],
// so a white vector with quadrature variance s has covariance 2s*I.
struct ComplexGaussianVector {
    Eigen::VectorXcd mean;
    Eigen::MatrixXcd covariance;

    static ComplexGaussianVector white(std::size_t n, double var_per_quadrature)
    {
        detail::require(n >= 1, "dimension must be at least 1");
        detail::require(var_per_quadrature >= 0, "variance must be non-negative");
        const auto d = Eigen::Index(n);
        return {Eigen::VectorXcd::Zero(d), 2.0 * var_per_quadrature * Eigen::MatrixXcd::Identity(d, d)};
    }

    std::size_t dimension() const { return std::size_t(mean.size()); }

    void validate() const
    {
        if (covariance.rows() != covariance.cols() || covariance.rows() != mean.size())
            throw data_error("covariance shape does not match the mean");
        const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
        if ((covariance - covariance.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw data_error("covariance is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(covariance, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale) throw data_error("covariance is not positive semidefinite");
    }

    cvector sample(CounterRng& rng) const
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(covariance);
        const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        Eigen::VectorXcd w(mean.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            w[i] = complex{re, im} * std::sqrt(0.5);
        }
        Eigen::VectorXcd z = mean + es.eigenvectors() * root.asDiagonal() * w;
        return cvector(z.data(), z.data() + z.size());
    }

    // natural log of pi^-n det(K)^-1 exp(-(z-m)^H K^-1 (z-m)); K must be positive definite
    double log_density(std::span<const complex> z) const
    {
        if (z.size() != dimension()) throw data_error("point dimension does not match the mean");
        Eigen::LLT<Eigen::MatrixXcd> llt(covariance);
        if (llt.info() != Eigen::Success) throw domain_error("density needs a positive definite covariance");
        Eigen::VectorXcd d(mean.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = z[std::size_t(i)] - mean[i];
        const Eigen::VectorXcd y = llt.matrixL().solve(d);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i).real());
        return -double(d.size()) * std::log(std::numbers::pi) - logdet - y.squaredNorm();
    }
};

} // namespace mcqkd
