#pragma once

// Band-limited 2π-periodic functions held by their Fourier coefficients.
//
// Conventions used throughout the library:
//   f(x)    = Σ_{|j|≤J} c_j e^{ijx},   c_j = (1/2π) ∫_0^{2π} f(t) e^{-ijt} dt
//   (f*g)(x) = ∫_0^{2π} f(x-t) g(t) dt, so (f*g)_j = 2π f_j g_j.
// A "transfer" T(j) is the multiplier a convolution applies to coefficient j,
// i.e. 2π times the kernel's coefficient.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/FFT>

#include "perfspline/error.hpp"

namespace perfspline {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2π).
inline double wrap_angle(double x) {
    double y = std::fmod(x, two_pi);
    if (y < 0.0) y += two_pi;
    if (y >= two_pi) y = 0.0;
    return y;
}

/// Uniform quadrature grid x_i = 2πi/N on one period.
class SpectralGrid {
public:
    explicit SpectralGrid(std::size_t n) : n_(n) {
        if (n < 2 || n % 2 != 0) {
            throw Error(ErrorCode::InvalidArgument, "grid size must be a positive even integer, got " + std::to_string(n));
        }
    }

    /// Smallest power-of-two grid with N >= 4J + 4.
    static SpectralGrid for_bandwidth(std::size_t bandwidth) {
        std::size_t n = 8;
        while (n < 4 * bandwidth + 4) n *= 2;
        return SpectralGrid(n);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double point(std::size_t i) const noexcept {
        return two_pi * static_cast<double>(i) / static_cast<double>(n_);
    }
    [[nodiscard]] double weight() const noexcept { return two_pi / static_cast<double>(n_); }

    friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

private:
    std::size_t n_;
};

namespace detail {

// Walks e^{ijx} for j = 0, 1, 2, ... by repeated rotation, re-anchoring
// periodically so the drift stays at round-off level for large J.
class PhaseWalker {
public:
    explicit PhaseWalker(double x) : x_(x), step_(std::polar(1.0, x)), current_(1.0, 0.0) {}

    [[nodiscard]] Complex value() const noexcept { return current_; }

    void advance() {
        ++j_;
        if (j_ % 64 == 0) {
            current_ = std::polar(1.0, std::fmod(static_cast<double>(j_) * x_, two_pi));
        } else {
            current_ *= step_;
        }
    }

private:
    double x_;
    Complex step_;
    Complex current_;
    long long j_ = 0;
};

} // namespace detail

/// Real 2π-periodic trigonometric polynomial of degree at most J.
///
/// Only the coefficients c_0..c_J are stored; c_{-j} = conj(c_j) is implied,
/// so Hermitian symmetry holds by construction and values are always real.
class PeriodicFunction {
public:
    PeriodicFunction() : coeffs_(1, Complex(0.0, 0.0)) {}

    /// Takes c_0..c_J. c_0 must be real up to round-off.
    explicit PeriodicFunction(std::vector<Complex> half_spectrum) : coeffs_(std::move(half_spectrum)) {
        if (coeffs_.empty()) coeffs_.emplace_back(0.0, 0.0);
        double l1 = 0.0;
        for (const auto& c : coeffs_) l1 += std::abs(c);
        if (std::abs(coeffs_[0].imag()) > 1e-10 * (1.0 + 2.0 * l1)) {
            throw Error(ErrorCode::InvalidArgument, "mean coefficient must be real for a real-valued function");
        }
        coeffs_[0] = Complex(coeffs_[0].real(), 0.0);
    }

    static PeriodicFunction constant(double value) { return PeriodicFunction({Complex(value, 0.0)}); }

    /// a·cos(jx) + b·sin(jx).
    static PeriodicFunction harmonic(std::size_t j, double a, double b) {
        std::vector<Complex> c(j + 1, Complex(0.0, 0.0));
        if (j == 0) {
            c[0] = Complex(a, 0.0);
        } else {
            c[j] = Complex(a / 2.0, -b / 2.0);
        }
        return PeriodicFunction(std::move(c));
    }

    /// Least-squares trigonometric fit of N equispaced samples (exact for degree < N/2).
    static PeriodicFunction from_samples(std::span<const double> samples) {
        const std::size_t n = samples.size();
        if (n < 2 || n % 2 != 0) {
            throw Error(ErrorCode::InvalidArgument, "sample count must be even and at least 2");
        }
        std::vector<Complex> in(samples.begin(), samples.end());
        std::vector<Complex> out;
        Eigen::FFT<double> fft;
        fft.fwd(out, in);
        std::vector<Complex> c(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) c[j] = out[j] / static_cast<double>(n);
        c[0] = Complex(c[0].real(), 0.0);
        return PeriodicFunction(std::move(c));
    }

    [[nodiscard]] std::size_t bandwidth() const noexcept { return coeffs_.size() - 1; }
    [[nodiscard]] std::span<const Complex> half_spectrum() const noexcept { return coeffs_; }

    /// c_j for any integer j (zero outside the band).
    [[nodiscard]] Complex coefficient(long long j) const noexcept {
        const auto a = static_cast<std::size_t>(j < 0 ? -j : j);
        if (a >= coeffs_.size()) return {0.0, 0.0};
        return j < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
    }

    [[nodiscard]] double mean() const noexcept { return coeffs_[0].real(); }

    [[nodiscard]] double evaluate(double x) const {
        const double xr = wrap_angle(x);
        detail::PhaseWalker phase(xr);
        double sum = 0.0;
        for (std::size_t j = 1; j < coeffs_.size(); ++j) {
            phase.advance();
            sum += (coeffs_[j] * phase.value()).real();
        }
        return coeffs_[0].real() + 2.0 * sum;
    }

    double operator()(double x) const { return evaluate(x); }

    /// Exact values at every grid point (aliasing folded in, so any N works).
    [[nodiscard]] std::vector<double> sample(const SpectralGrid& grid) const {
        const std::size_t n = grid.size();
        std::vector<Complex> folded(n, Complex(0.0, 0.0));
        folded[0] += coeffs_[0];
        for (std::size_t j = 1; j < coeffs_.size(); ++j) {
            folded[j % n] += coeffs_[j];
            folded[(n - j % n) % n] += std::conj(coeffs_[j]);
        }
        std::vector<Complex> out;
        Eigen::FFT<double> fft;
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        fft.inv(out, folded);
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = out[i].real();
        return values;
    }

    /// Coefficient j multiplied by (ij)^order.
    [[nodiscard]] PeriodicFunction derivative(unsigned order) const {
        std::vector<Complex> c(coeffs_);
        for (std::size_t j = 0; j < c.size(); ++j) {
            c[j] *= std::pow(Complex(0.0, static_cast<double>(j)), static_cast<int>(order));
        }
        if (order > 0) c[0] = Complex(0.0, 0.0);
        return PeriodicFunction(std::move(c));
    }

    /// Applies a transfer function T (with T(-j) = conj T(j)) to every coefficient.
    template <typename Transfer>
    [[nodiscard]] PeriodicFunction filtered(Transfer&& transfer) const {
        std::vector<Complex> c(coeffs_);
        for (std::size_t j = 0; j < c.size(); ++j) c[j] *= Complex(transfer(static_cast<long long>(j)));
        c[0] = Complex(c[0].real(), 0.0);
        return PeriodicFunction(std::move(c));
    }

    /// Keeps frequencies |j| <= bandwidth, zero-padding if needed.
    [[nodiscard]] PeriodicFunction truncated(std::size_t bandwidth) const {
        std::vector<Complex> c(bandwidth + 1, Complex(0.0, 0.0));
        std::copy_n(coeffs_.begin(), std::min(c.size(), coeffs_.size()), c.begin());
        return PeriodicFunction(std::move(c));
    }

    PeriodicFunction& operator+=(const PeriodicFunction& other) {
        if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), Complex(0.0, 0.0));
        for (std::size_t j = 0; j < other.coeffs_.size(); ++j) coeffs_[j] += other.coeffs_[j];
        return *this;
    }
    PeriodicFunction& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend PeriodicFunction operator+(PeriodicFunction a, const PeriodicFunction& b) { return a += b; }
    friend PeriodicFunction operator*(double s, PeriodicFunction f) { return f *= s; }
    friend PeriodicFunction operator-(PeriodicFunction a, const PeriodicFunction& b) { return a += (-1.0) * b; }

private:
    std::vector<Complex> coeffs_;
};

/// (f*g)(x) = ∫_0^{2π} f(x-t) g(t) dt.
inline PeriodicFunction convolve(const PeriodicFunction& f, const PeriodicFunction& g) {
    const std::size_t band = std::min(f.bandwidth(), g.bandwidth());
    std::vector<Complex> c(band + 1);
    for (std::size_t j = 0; j <= band; ++j) {
        const auto jj = static_cast<long long>(j);
        c[j] = two_pi * f.coefficient(jj) * g.coefficient(jj);
    }
    return PeriodicFunction(std::move(c));
}

/// ‖f‖∞: grid maximum refined by Brent search around every competitive sample.
inline double sup_norm(const PeriodicFunction& f, const SpectralGrid& grid) {
    const std::vector<double> v = f.sample(grid);
    const std::size_t n = v.size();
    double best = 0.0;
    for (double y : v) best = std::max(best, std::abs(y));
    if (best == 0.0 || f.bandwidth() == 0) return best;

    // refine the largest few local maxima of |f| on the grid
    std::vector<std::pair<double, std::size_t>> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(v[i]);
        if (a >= std::abs(v[(i + n - 1) % n]) && a >= std::abs(v[(i + 1) % n]) && a >= 0.9 * best) {
            peaks.emplace_back(a, i);
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    if (peaks.size() > 8) peaks.resize(8);
    const double h = grid.weight();
    auto negated_abs = [&f](double x) { return -std::abs(f.evaluate(x)); };
    for (const auto& peak : peaks) {
        const double x = grid.point(peak.second);
        const auto found = boost::math::tools::brent_find_minima(negated_abs, x - h, x + h, 40);
        best = std::max(best, -found.second);
    }
    return best;
}

/// Cyclic count of sign alternations in a sample sequence, skipping samples
/// with |v| < threshold.
inline std::size_t count_sample_sign_changes(std::span<const double> values, double threshold) {
    int first = 0;
    int previous = 0;
    std::size_t changes = 0;
    for (double y : values) {
        if (std::abs(y) < threshold || y == 0.0) continue;
        const int s = y > 0.0 ? 1 : -1;
        if (first == 0) {
            first = s;
        } else if (s != previous) {
            ++changes;
        }
        previous = s;
    }
    if (first == 0) throw Error(ErrorCode::AllZero, "every sample is below the zero tolerance");
    if (previous != first) ++changes;
    return changes;
}

/// ν(f): number of sign changes on one period. zero_tol is relative to ‖f‖∞.
inline std::size_t count_sign_changes(const PeriodicFunction& f, const SpectralGrid& grid, double zero_tol = 1e-9) {
    if (zero_tol < 0.0) throw Error(ErrorCode::InvalidArgument, "zero_tol must be non-negative");
    const std::vector<double> v = f.sample(grid);
    const double norm = sup_norm(f, grid);
    return count_sample_sign_changes(v, zero_tol * norm);
}

} // namespace perfspline
