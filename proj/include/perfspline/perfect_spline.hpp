#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "perfspline/error.hpp"
#include "perfspline/kernels.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline {

/// Fourier coefficient σ̂(j) of the ±1 step function that equals
/// lead_sign·(−1)^i on (t_i, t_{i+1}), t_{2n} := t_0 + 2π.
inline Complex step_spectrum(std::span<const double> knots, int lead_sign, long long j) {
    const std::size_t count = knots.size();
    if (count == 0) return j == 0 ? Complex(lead_sign, 0.0) : Complex(0.0, 0.0);
    if (j == 0) {
        double signed_length = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double next = i + 1 < count ? knots[i + 1] : knots[0] + two_pi;
            signed_length += ((i % 2 == 0) ? 1.0 : -1.0) * (next - knots[i]);
        }
        return {lead_sign * signed_length / two_pi, 0.0};
    }
    Complex sum(0.0, 0.0);
    const double jd = static_cast<double>(j);
    for (std::size_t i = 0; i < count; ++i) {
        const Complex e = std::polar(1.0, -std::fmod(jd * knots[i], two_pi));
        sum += (i % 2 == 0) ? e : -e;
    }
    return static_cast<double>(lead_sign) / (pi * Complex(0.0, jd)) * sum;
}

/// σ̂(1..J) computed in one sweep; index 0 of the result holds σ̂(0).
inline std::vector<Complex> step_spectrum_table(std::span<const double> knots, int lead_sign, std::size_t bandwidth) {
    std::vector<Complex> sums(bandwidth + 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        detail::PhaseWalker phase(-wrap_angle(knots[i]));
        for (std::size_t j = 1; j <= bandwidth; ++j) {
            phase.advance();
            sums[j] += sign * phase.value();
        }
    }
    std::vector<Complex> out(bandwidth + 1);
    out[0] = step_spectrum(knots, lead_sign, 0);
    for (std::size_t j = 1; j <= bandwidth; ++j) {
        out[j] = static_cast<double>(lead_sign) / (pi * Complex(0.0, static_cast<double>(j))) * sums[j];
    }
    return out;
}

/// Signed length Σ (−1)^i (t_{i+1} − t_i); zero iff the step function has mean zero.
inline double alternating_length(std::span<const double> knots) {
    double total = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double next = i + 1 < knots.size() ? knots[i + 1] : knots[0] + two_pi;
        total += ((i % 2 == 0) ? 1.0 : -1.0) * (next - knots[i]);
    }
    return total;
}

/// 2π-periodic perfect spline of order r plus an offset:
///   s^{(r)}(t) = ξ·ε·(−1)^i on (t_i, t_{i+1}),   s = ξ·(σ ∗ B_r) + a.
///
/// Knots are kept sorted in [0, 2π) with ε the sign on the first interval.
/// The constant spline has ξ = 0 and no knots.
class PerfectSpline {
public:
    /// Knots may be any strictly increasing sequence spanning less than one
    /// period; they are wrapped into [0, 2π) and the lead sign re-anchored.
    PerfectSpline(int order, std::vector<double> knots, int lead_sign, double amplitude, double offset)
        : order_(order), lead_sign_(lead_sign), amplitude_(amplitude), offset_(offset) {
        if (order < 1) throw Error(ErrorCode::InvalidArgument, "spline order must be positive");
        if (lead_sign != 1 && lead_sign != -1) throw Error(ErrorCode::InvalidArgument, "lead sign must be +1 or -1");
        if (!std::isfinite(amplitude) || !std::isfinite(offset)) {
            throw Error(ErrorCode::InvalidArgument, "amplitude and offset must be finite");
        }
        if (knots.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "perfect spline needs an even knot count");
        if (amplitude == 0.0 && !knots.empty()) {
            throw Error(ErrorCode::InvalidArgument, "zero amplitude requires an empty knot list");
        }
        if (amplitude != 0.0 && knots.empty()) {
            throw Error(ErrorCode::InvalidArgument, "non-zero amplitude requires at least two knots");
        }
        if (!knots.empty()) {
            for (std::size_t i = 1; i < knots.size(); ++i) {
                if (!(knots[i] > knots[i - 1])) {
                    throw Error(ErrorCode::KnotOrderViolation, "knots must be strictly increasing");
                }
            }
            if (!(knots.back() - knots.front() < two_pi)) {
                throw Error(ErrorCode::KnotOrderViolation, "knots must span less than one period");
            }
            // rotate so the smallest wrapped knot comes first
            std::size_t first = 0;
            std::vector<double> wrapped(knots.size());
            for (std::size_t i = 0; i < knots.size(); ++i) {
                wrapped[i] = wrap_angle(knots[i]);
                if (wrapped[i] < wrapped[first]) first = i;
            }
            knots_.resize(knots.size());
            for (std::size_t i = 0; i < knots.size(); ++i) knots_[i] = wrapped[(first + i) % knots.size()];
            for (std::size_t i = 1; i < knots_.size(); ++i) {
                if (!(knots_[i] > knots_[i - 1])) {
                    throw Error(ErrorCode::KnotOrderViolation, "knots collapse after wrapping into [0, 2π)");
                }
            }
            if (first % 2 == 1) lead_sign_ = -lead_sign_;
        }
    }

    static PerfectSpline constant(int order, double value) { return {order, {}, 1, 0.0, value}; }

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
    [[nodiscard]] int lead_sign() const noexcept { return lead_sign_; }
    [[nodiscard]] double amplitude() const noexcept { return amplitude_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }
    [[nodiscard]] bool is_constant() const noexcept { return knots_.empty(); }

    /// ‖s^{(r)}‖∞, read off the step representation.
    [[nodiscard]] double highest_derivative_norm() const noexcept { return std::abs(amplitude_); }

    [[nodiscard]] double mean_zero_residual() const { return alternating_length(knots_); }

    /// s^{(r)}(x), right-continuous at the knots.
    [[nodiscard]] double highest_derivative(double x) const {
        if (knots_.empty()) return 0.0;
        double xr = wrap_angle(x);
        if (xr < knots_.front()) xr += two_pi;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), xr);
        const auto piece = static_cast<std::size_t>(it - knots_.begin()) - 1;
        return amplitude_ * lead_sign_ * ((piece % 2 == 0) ? 1.0 : -1.0);
    }

    /// ŝ(j) = ξ σ̂(j) (ij)^{−r} for j ≠ 0, ŝ(0) = a.
    [[nodiscard]] Complex spectrum(long long j) const {
        if (j == 0) return {offset_, 0.0};
        if (knots_.empty()) return {0.0, 0.0};
        return amplitude_ * step_spectrum(knots_, lead_sign_, j) *
               std::pow(Complex(0.0, static_cast<double>(j)), -order_);
    }

    /// Truncated Fourier series of s with bandwidth J.
    [[nodiscard]] PeriodicFunction to_function(std::size_t bandwidth) const {
        std::vector<Complex> c(bandwidth + 1, Complex(0.0, 0.0));
        c[0] = Complex(offset_, 0.0);
        if (!knots_.empty()) {
            const auto sigma = step_spectrum_table(knots_, lead_sign_, bandwidth);
            for (std::size_t j = 1; j <= bandwidth; ++j) {
                c[j] = amplitude_ * sigma[j] * std::pow(Complex(0.0, static_cast<double>(j)), -order_);
            }
        }
        return PeriodicFunction(std::move(c));
    }

    /// Spectral evaluation with bandwidth J.
    [[nodiscard]] double evaluate(double x, std::size_t bandwidth) const {
        if (knots_.empty()) return offset_;
        return to_function(bandwidth).evaluate(x);
    }

    /// ∫ φ(x − x_k) s(x) dx, spectrally with bandwidth J.
    [[nodiscard]] double weighted_mean(const WeightFunction& weight, double node, std::size_t bandwidth) const {
        if (knots_.empty()) return offset_;
        const auto sigma = step_spectrum_table(knots_, lead_sign_, bandwidth);
        detail::PhaseWalker phase(wrap_angle(node));
        double sum = 0.0;
        for (std::size_t j = 1; j <= bandwidth; ++j) {
            phase.advance();
            const auto jl = static_cast<long long>(j);
            const Complex kernel = std::pow(Complex(0.0, static_cast<double>(j)), -order_) * weight.transfer(jl);
            sum += (sigma[j] * kernel * phase.value()).real();
        }
        return offset_ + 2.0 * amplitude_ * sum;
    }

    /// Same function up to cyclic relabeling and the (ξ, ε) → (−ξ, −ε) symmetry.
    [[nodiscard]] bool approx_equal(const PerfectSpline& other, double tol) const {
        if (order_ != other.order_ || knots_.size() != other.knots_.size()) return false;
        if (std::abs(offset_ - other.offset_) > tol) return false;
        if (std::abs(amplitude_ * lead_sign_ - other.amplitude_ * other.lead_sign_) > tol) return false;
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (std::abs(knots_[i] - other.knots_[i]) > tol) return false;
        }
        return true;
    }

private:
    int order_;
    std::vector<double> knots_;
    int lead_sign_;
    double amplitude_;
    double offset_;
};

/// Exact piecewise-polynomial form of a perfect spline, obtained by
/// integrating the step r times with continuity and zero-mean constants.
/// Serves as an independent evaluator next to the spectral series.
class PiecewiseSpline {
public:
    explicit PiecewiseSpline(const PerfectSpline& s) : constant_(s.offset()) {
        if (s.is_constant()) return;
        const auto& t = s.knots();
        const std::size_t count = t.size();
        const int r = s.order();
        starts_ = t;
        lengths_.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            lengths_[i] = (i + 1 < count ? t[i + 1] : t[0] + two_pi) - t[i];
        }
        // pieces_[i][k] is the coefficient of (x − t_i)^k
        pieces_.assign(count, std::vector<double>(1, 0.0));
        for (std::size_t i = 0; i < count; ++i) {
            pieces_[i][0] = s.amplitude() * s.lead_sign() * ((i % 2 == 0) ? 1.0 : -1.0);
        }
        for (int level = 1; level <= r; ++level) {
            std::vector<std::vector<double>> next(count, std::vector<double>(static_cast<std::size_t>(level) + 1, 0.0));
            double start_value = 0.0;
            double integral = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                next[i][0] = start_value;
                for (std::size_t k = 0; k < pieces_[i].size(); ++k) {
                    next[i][k + 1] = pieces_[i][k] / static_cast<double>(k + 1);
                }
                start_value = horner(next[i], lengths_[i]);
                integral += integrate(next[i], lengths_[i]);
            }
            const double target = level == r ? s.offset() : 0.0;
            const double shift = target - integral / two_pi;
            for (auto& p : next) p[0] += shift;
            pieces_ = std::move(next);
        }
    }

    [[nodiscard]] double evaluate(double x) const {
        if (starts_.empty()) return constant_;
        double xr = wrap_angle(x);
        if (xr < starts_.front()) xr += two_pi;
        const auto it = std::upper_bound(starts_.begin(), starts_.end(), xr);
        const auto piece = static_cast<std::size_t>(it - starts_.begin()) - 1;
        return horner(pieces_[piece], xr - starts_[piece]);
    }

    double operator()(double x) const { return evaluate(x); }

    [[nodiscard]] std::size_t piece_count() const noexcept { return starts_.size(); }

private:
    static double horner(const std::vector<double>& c, double u) {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * u + *it;
        return v;
    }
    static double integrate(const std::vector<double>& c, double length) {
        double v = 0.0;
        double power = length;
        for (std::size_t k = 0; k < c.size(); ++k) {
            v += c[k] * power / static_cast<double>(k + 1);
            power *= length;
        }
        return v;
    }

    double constant_;
    std::vector<double> starts_;
    std::vector<double> lengths_;
    std::vector<std::vector<double>> pieces_;
};

} // namespace perfspline
