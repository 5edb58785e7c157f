#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "perfspline/error.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline {

/// Periodic Bernoulli kernel B_r(t) = (1/2π) Σ_{j≠0} e^{ijt} / (ij)^r.
///
/// Convolving a mean-zero function with B_r gives its mean-zero r-fold
/// periodic antiderivative.
class BernoulliKernel {
public:
    static constexpr std::size_t default_bandwidth = 4096;

    explicit BernoulliKernel(int order, std::size_t bandwidth = default_bandwidth)
        : order_(order), bandwidth_(bandwidth) {
        if (order < 1) throw Error(ErrorCode::InvalidArgument, "Bernoulli kernel order must be positive");
        if (bandwidth < 1) throw Error(ErrorCode::InvalidArgument, "Bernoulli kernel bandwidth must be positive");
    }

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::size_t bandwidth() const noexcept { return bandwidth_; }

    /// (ij)^{-r}; zero at j = 0.
    [[nodiscard]] Complex transfer(long long j) const {
        if (j == 0) return {0.0, 0.0};
        return std::pow(Complex(0.0, static_cast<double>(j)), -order_);
    }

    /// Truncated series (1/π) Σ_{j=1..J} cos(jt − rπ/2) / j^r.
    [[nodiscard]] double evaluate(double t) const {
        const double tr = wrap_angle(t);
        if (order_ == 1 && (tr < 1e-8 || two_pi - tr < 1e-8)) {
            throw Error(ErrorCode::JumpPoint, "B_1 is discontinuous at multiples of 2π");
        }
        const double shift = order_ * pi / 2.0;
        // smallest terms first
        double sum = 0.0;
        for (std::size_t j = bandwidth_; j >= 1; --j) {
            const double jd = static_cast<double>(j);
            sum += std::cos(std::fmod(jd * tr, two_pi) - shift) / std::pow(jd, order_);
        }
        return sum / pi;
    }

    /// Exact B_1(t) = (π − t mod 2π) / 2π away from the jump.
    static double closed_form_order1(double t) {
        const double tr = wrap_angle(t);
        if (tr < 1e-8 || two_pi - tr < 1e-8) {
            throw Error(ErrorCode::JumpPoint, "B_1 is discontinuous at multiples of 2π");
        }
        return (pi - tr) / two_pi;
    }

    [[nodiscard]] PeriodicFunction to_function() const {
        std::vector<Complex> c(bandwidth_ + 1);
        for (std::size_t j = 0; j <= bandwidth_; ++j) c[j] = transfer(static_cast<long long>(j)) / two_pi;
        return PeriodicFunction(std::move(c));
    }

private:
    int order_;
    std::size_t bandwidth_;
};

/// Analytic smoothing kernel A_ε with transfer 1/cosh(εj); ε = 0 is the identity.
class SmoothingKernel {
public:
    explicit SmoothingKernel(double epsilon = 0.0) : epsilon_(epsilon) {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
            throw Error(ErrorCode::InvalidArgument, "smoothing parameter must be finite and non-negative");
        }
    }

    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }

    [[nodiscard]] double transfer(long long j) const {
        if (epsilon_ == 0.0 || j == 0) return 1.0;
        return 1.0 / std::cosh(epsilon_ * static_cast<double>(j));
    }

    /// A_ε ∗ f.
    [[nodiscard]] PeriodicFunction apply(const PeriodicFunction& f) const {
        return f.filtered([this](long long j) { return transfer(j); });
    }

private:
    double epsilon_;
};

enum class WeightKind { box, triangle, delta };

inline std::string_view to_string(WeightKind kind) {
    switch (kind) {
    case WeightKind::box: return "box";
    case WeightKind::triangle: return "triangle";
    case WeightKind::delta: return "delta";
    }
    return "box";
}

inline WeightKind weight_kind_from_string(std::string_view name) {
    if (name == "box") return WeightKind::box;
    if (name == "triangle") return WeightKind::triangle;
    if (name == "delta") return WeightKind::delta;
    throw Error(ErrorCode::ParseError, "unknown weight kind '" + std::string(name) + "'");
}

/// Even, non-negative, unit-mass weight φ supported on [−ε_k, ε_k].
/// The delta kind is the point-evaluation limit (ε_k = 0).
class WeightFunction {
public:
    static WeightFunction box(double half_width) { return {WeightKind::box, half_width}; }
    static WeightFunction triangle(double half_width) { return {WeightKind::triangle, half_width}; }
    static WeightFunction delta() { return {WeightKind::delta, 0.0}; }

    static WeightFunction make(WeightKind kind, double half_width) {
        return kind == WeightKind::delta ? delta() : WeightFunction(kind, half_width);
    }

    [[nodiscard]] WeightKind kind() const noexcept { return kind_; }
    [[nodiscard]] double half_width() const noexcept { return half_width_; }

    /// ∫ φ(x) e^{-ijx} dx; equals 1 at j = 0.
    [[nodiscard]] double transfer(long long j) const {
        if (j == 0 || kind_ == WeightKind::delta) return 1.0;
        const double u = static_cast<double>(j) * half_width_;
        switch (kind_) {
        case WeightKind::box: return std::sin(u) / u;
        case WeightKind::triangle: {
            const double s = std::sin(u / 2.0) / (u / 2.0);
            return s * s;
        }
        case WeightKind::delta: break;
        }
        return 1.0;
    }

    /// Density value; the delta kind has no pointwise density and returns 0.
    [[nodiscard]] double evaluate(double x) const {
        const double ax = std::abs(x);
        switch (kind_) {
        case WeightKind::box: return ax <= half_width_ ? 0.5 / half_width_ : 0.0;
        case WeightKind::triangle:
            return ax < half_width_ ? (half_width_ - ax) / (half_width_ * half_width_) : 0.0;
        case WeightKind::delta: return 0.0;
        }
        return 0.0;
    }

    friend bool operator==(const WeightFunction&, const WeightFunction&) = default;

private:
    WeightFunction(WeightKind kind, double half_width) : kind_(kind), half_width_(half_width) {
        if (kind != WeightKind::delta && !(half_width > 0.0 && half_width < pi)) {
            throw Error(ErrorCode::InvalidArgument, "box/triangle half-width must lie in (0, π)");
        }
    }

    WeightKind kind_;
    double half_width_;
};

} // namespace perfspline
