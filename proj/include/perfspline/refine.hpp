#pragma once

// Newton polishing of a perfect spline in its natural coordinates
// θ = (t_0..t_{2n−1}, ξ, a). Equations:
//   R_0 = Σ (−1)^i (t_{i+1} − t_i)                       (s^{(r−1)} periodic)
//   R_k = ∫ φ_k(x − x_k) s_θ(x) dx − C_k,  k = 1..2m+1    (mean interpolation)

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "perfspline/error.hpp"
#include "perfspline/extremal.hpp"
#include "perfspline/perfect_spline.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline {

/// Default truncation for refinement. A weighted mean of s converges like
/// J^{−r−1}, a point value (delta weight) only like J^{−r}.
inline std::size_t default_refine_bandwidth(int order, bool point_nodes = false) {
    return order == 1 || (order == 2 && point_nodes) ? 65536 : 4096;
}

inline bool has_point_nodes(const std::vector<Node>& nodes) {
    return std::any_of(nodes.begin(), nodes.end(), [](const Node& n) { return n.weight.kind() == WeightKind::delta; });
}

struct KnotState {
    std::vector<double> knots;
    int lead_sign = 1;
    double amplitude = 0.0;
    double offset = 0.0;

    static KnotState from_spline(const PerfectSpline& s) {
        return {s.knots(), s.lead_sign(), s.amplitude(), s.offset()};
    }

    [[nodiscard]] Eigen::Index unknowns() const noexcept { return static_cast<Eigen::Index>(knots.size() + 2); }
};

class KnotSystem {
public:
    KnotSystem(const MeanInterpolationProblem& p, std::size_t bandwidth)
        : order_(p.order), bandwidth_(bandwidth), targets_(p.targets) {
        if (p.targets.size() != p.nodes.size()) {
            throw Error(ErrorCode::InvalidArgument, "problem targets are missing");
        }
        // (ij)^{−r} = (−i)^r / j^r
        Complex rot(1.0, 0.0);
        for (int q = 0; q < order_; ++q) rot *= Complex(0.0, -1.0);
        kernels_.reserve(p.nodes.size());
        for (const auto& node : p.nodes) {
            std::vector<Complex> k(bandwidth_ + 1, Complex(0.0, 0.0));
            detail::PhaseWalker phase(wrap_angle(node.x));
            for (std::size_t j = 1; j <= bandwidth_; ++j) {
                phase.advance();
                const double jd = static_cast<double>(j);
                k[j] = rot * (node.weight.transfer(static_cast<long long>(j)) / std::pow(jd, order_)) * phase.value();
            }
            kernels_.push_back(std::move(k));
        }
    }

    [[nodiscard]] std::size_t bandwidth() const noexcept { return bandwidth_; }
    [[nodiscard]] Eigen::Index equations() const noexcept { return static_cast<Eigen::Index>(targets_.size() + 1); }

    [[nodiscard]] Eigen::VectorXd residuals(const KnotState& s) const {
        check_order(s.knots);
        Eigen::VectorXd r(equations());
        r[0] = alternating_length(s.knots);
        const auto sigma = sigma_table(s);
        for (std::size_t k = 0; k < kernels_.size(); ++k) {
            r[static_cast<Eigen::Index>(k + 1)] =
                s.offset + 2.0 * s.amplitude * pair_sum(sigma, kernels_[k]) - targets_[k];
        }
        return r;
    }

    /// Analytic Jacobian; columns are (t_0..t_{2n−1}, ξ, a).
    [[nodiscard]] Eigen::MatrixXd jacobian(const KnotState& s) const {
        check_order(s.knots);
        const std::size_t count = s.knots.size();
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(equations(), s.unknowns());
        for (std::size_t i = 0; i < count; ++i) {
            jac(0, static_cast<Eigen::Index>(i)) = -2.0 * ((i % 2 == 0) ? 1.0 : -1.0);
        }
        const auto sigma = sigma_table(s);
        // ∂σ̂(j)/∂t_i = −(ε/π)(−1)^i e^{−ijt_i}
        std::vector<std::vector<Complex>> dsigma(count, std::vector<Complex>(bandwidth_ + 1));
        for (std::size_t i = 0; i < count; ++i) {
            const double factor = -static_cast<double>(s.lead_sign) / pi * ((i % 2 == 0) ? 1.0 : -1.0);
            detail::PhaseWalker phase(-s.knots[i]);
            for (std::size_t j = 1; j <= bandwidth_; ++j) {
                phase.advance();
                dsigma[i][j] = factor * phase.value();
            }
        }
        for (std::size_t k = 0; k < kernels_.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(k + 1);
            for (std::size_t i = 0; i < count; ++i) {
                jac(row, static_cast<Eigen::Index>(i)) = 2.0 * s.amplitude * pair_sum(dsigma[i], kernels_[k]);
            }
            jac(row, static_cast<Eigen::Index>(count)) = 2.0 * pair_sum(sigma, kernels_[k]);
            jac(row, static_cast<Eigen::Index>(count + 1)) = 1.0;
        }
        return jac;
    }

private:
    static void check_order(const std::vector<double>& t) {
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (!(t[i] > t[i - 1])) throw Error(ErrorCode::KnotOrderViolation, "knots must be strictly increasing");
        }
        if (!t.empty() && !(t.back() - t.front() < two_pi)) {
            throw Error(ErrorCode::KnotOrderViolation, "knots must span less than one period");
        }
    }

    [[nodiscard]] std::vector<Complex> sigma_table(const KnotState& s) const {
        std::vector<Complex> sigma(bandwidth_ + 1, Complex(0.0, 0.0));
        if (s.knots.empty()) return sigma;
        for (std::size_t i = 0; i < s.knots.size(); ++i) {
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            detail::PhaseWalker phase(-s.knots[i]);
            for (std::size_t j = 1; j <= bandwidth_; ++j) {
                phase.advance();
                sigma[j] += sign * phase.value();
            }
        }
        for (std::size_t j = 1; j <= bandwidth_; ++j) {
            sigma[j] *= static_cast<double>(s.lead_sign) / (pi * Complex(0.0, static_cast<double>(j)));
        }
        return sigma;
    }

    // Re Σ_{j≥1} a_j b_j, smallest terms first
    [[nodiscard]] double pair_sum(const std::vector<Complex>& a, const std::vector<Complex>& b) const {
        double sum = 0.0;
        for (std::size_t j = bandwidth_; j >= 1; --j) sum += (a[j] * b[j]).real();
        return sum;
    }

    int order_;
    std::size_t bandwidth_;
    std::vector<double> targets_;
    std::vector<std::vector<Complex>> kernels_;
};

struct RefineOptions {
    double tol = 1e-11;
    int max_iterations = 50;
    double collision_gap = 1e-9;
    double least_squares_accept = 1e-8; ///< acceptance residual when fewer than 2m knots remain
    std::size_t bandwidth = 0;          ///< 0 selects default_refine_bandwidth
};

struct RefineResult {
    PerfectSpline spline;
    double residual = 0.0; ///< ‖R‖∞ at the returned state
    int iterations = 0;
    int collisions = 0; ///< knot pairs deleted on collision
    /// (‖R‖₂ before, ‖R‖₂ after) for every accepted step.
    std::vector<std::pair<double, double>> steps;
};

namespace detail {

inline double max_step_keeping_order(const std::vector<double>& t, const Eigen::VectorXd& step) {
    double cap = std::numeric_limits<double>::infinity();
    const std::size_t count = t.size();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t nxt = (i + 1) % count;
        const double gap = (nxt == 0 ? t[0] + two_pi : t[nxt]) - t[i];
        const double closing = step[static_cast<Eigen::Index>(nxt)] - step[static_cast<Eigen::Index>(i)];
        if (closing < 0.0) cap = std::min(cap, gap / -closing);
    }
    return cap;
}

inline bool delete_collided_pair(KnotState& s, double min_gap) {
    const std::size_t count = s.knots.size();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t nxt = (i + 1) % count;
        const double gap = (nxt == 0 ? s.knots[0] + two_pi : s.knots[nxt]) - s.knots[i];
        if (gap >= min_gap) continue;
        if (nxt == 0) {
            // wrap-around pair (last, first): the old second interval becomes the first
            s.knots.pop_back();
            s.knots.erase(s.knots.begin());
            s.lead_sign = -s.lead_sign;
        } else {
            s.knots.erase(s.knots.begin() + static_cast<std::ptrdiff_t>(i),
                          s.knots.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        }
        return true;
    }
    return false;
}

} // namespace detail

/// Damped Gauss–Newton from a candidate spline. Least-squares mode takes over
/// when fewer than 2m knots are present.
inline RefineResult gauss_newton(const PerfectSpline& start, const MeanInterpolationProblem& p,
                                 const RefineOptions& options = {}) {
    const std::size_t band = options.bandwidth == 0 ? default_refine_bandwidth(p.order, has_point_nodes(p.nodes)) : options.bandwidth;
    const KnotSystem system(p, band);
    KnotState state = KnotState::from_spline(start);
    int collisions = 0;
    std::vector<std::pair<double, double>> steps;
    while (state.knots.size() >= 2 && detail::delete_collided_pair(state, options.collision_gap)) ++collisions;

    auto finish = [&](double residual, int iterations) {
        if (state.knots.empty()) state.amplitude = 0.0;
        return RefineResult{PerfectSpline(p.order, state.knots, state.lead_sign, state.amplitude, state.offset),
                            residual, iterations, collisions, steps};
    };

    Eigen::VectorXd r = system.residuals(state);
    for (int iter = 1;; ++iter) {
        const double rinf = r.lpNorm<Eigen::Infinity>();
        const bool square = static_cast<int>(state.knots.size()) >= 2 * p.m;
        if (rinf <= options.tol) return finish(rinf, iter);
        if (iter > options.max_iterations) {
            if (!square && rinf <= options.least_squares_accept) return finish(rinf, iter);
            throw Error(ErrorCode::NoConvergence, "Gauss-Newton residual " + std::to_string(rinf) + " after " +
                                                      std::to_string(options.max_iterations) + " iterations");
        }

        const Eigen::MatrixXd jac = system.jacobian(state);
        const Eigen::VectorXd step = -jac.completeOrthogonalDecomposition().solve(r);
        const Eigen::Index count = static_cast<Eigen::Index>(state.knots.size());

        double alpha = 1.0;
        if (count > 0) {
            const double cap = detail::max_step_keeping_order(state.knots, step);
            if (cap <= 1.0) alpha = 0.5 * cap;
        }
        const double rnorm = r.norm();
        bool accepted = false;
        KnotState trial;
        Eigen::VectorXd trial_r;
        for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
            trial = state;
            for (Eigen::Index i = 0; i < count; ++i) trial.knots[static_cast<std::size_t>(i)] += alpha * step[i];
            trial.amplitude += alpha * step[count];
            trial.offset += alpha * step[count + 1];
            trial_r = system.residuals(trial);
            if (trial_r.norm() < rnorm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (rinf <= options.least_squares_accept) return finish(rinf, iter);
            throw Error(ErrorCode::StalledLineSearch,
                        "no step decreases the residual (‖R‖∞ = " + std::to_string(rinf) + ")");
        }
        steps.emplace_back(rnorm, trial_r.norm());
        state = std::move(trial);
        r = std::move(trial_r);
        if (state.knots.size() >= 2 && detail::delete_collided_pair(state, options.collision_gap)) {
            ++collisions;
            r = system.residuals(state);
        }
    }
}

} // namespace perfspline
