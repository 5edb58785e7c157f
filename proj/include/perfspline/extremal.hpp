#pragma once

// Discretized extremal problem
//
//     minimize  ∫ |c + Σ_k c_k ψ_k(x)| dx   subject to  Σ c_k C_k = 1,  Σ c_k = 0,
//     ψ_k = (A_ε ∗ B_r ∗ φ_k)(· − x_k),
//
// its Lagrange certificate, and the perfect spline read off the optimal sign
// pattern.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "perfspline/error.hpp"
#include "perfspline/kernels.hpp"
#include "perfspline/perfect_spline.hpp"
#include "perfspline/simplex.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline {

struct Node {
    double x;
    WeightFunction weight;
};

struct MeanInterpolationProblem {
    int order = 2;
    int m = 1;
    std::vector<Node> nodes;
    std::vector<double> targets;
    double smoothing = 1e-3;
    SpectralGrid grid{2048};
    std::size_t bandwidth = 4096;

    [[nodiscard]] std::size_t node_count() const noexcept { return nodes.size(); }

    /// Node layout, ordering, disjoint supports inside [0, 2π), target count.
    void validate() const {
        if (order < 1) throw Error(ErrorCode::InvalidArgument, "order r must be positive");
        if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be positive");
        const auto expected = static_cast<std::size_t>(2 * m + 1);
        if (nodes.size() != expected) {
            throw Error(ErrorCode::InvalidArgument,
                        "expected " + std::to_string(expected) + " nodes, got " + std::to_string(nodes.size()));
        }
        if (!targets.empty() && targets.size() != expected) {
            throw Error(ErrorCode::InvalidArgument, "target count does not match node count");
        }
        SmoothingKernel check(smoothing);
        (void)check;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double x = nodes[k].x;
            const double h = nodes[k].weight.half_width();
            if (!(x >= 0.0 && x < two_pi)) throw Error(ErrorCode::InvalidArgument, "nodes must lie in [0, 2π)");
            if (k > 0 && !(x > nodes[k - 1].x)) {
                throw Error(ErrorCode::InvalidArgument, "nodes must be strictly increasing");
            }
            if (h > 0.0 && (x - h < 0.0 || x + h >= two_pi)) {
                throw Error(ErrorCode::InvalidArgument, "weight support of node " + std::to_string(k) +
                                                            " leaves [0, 2π)");
            }
            if (k > 0) {
                const double prev_right = nodes[k - 1].x + nodes[k - 1].weight.half_width();
                const double left = x - h;
                const bool points = h == 0.0 && nodes[k - 1].weight.half_width() == 0.0;
                if (!(points || prev_right < left)) {
                    throw Error(ErrorCode::InvalidArgument, "weight supports of nodes " + std::to_string(k - 1) +
                                                                " and " + std::to_string(k) + " overlap");
                }
            }
        }
    }
};

/// C_k = ∫ φ_k(x − x_k) f(x) dx, evaluated exactly from the spectrum of f.
inline std::vector<double> compute_targets(const PeriodicFunction& f, const std::vector<Node>& nodes) {
    std::vector<double> targets;
    targets.reserve(nodes.size());
    const auto c = f.half_spectrum();
    for (const auto& node : nodes) {
        detail::PhaseWalker phase(wrap_angle(node.x));
        double sum = 0.0;
        for (std::size_t j = 1; j < c.size(); ++j) {
            phase.advance();
            sum += node.weight.transfer(static_cast<long long>(j)) * (c[j] * phase.value()).real();
        }
        targets.push_back(c[0].real() + 2.0 * sum);
    }
    return targets;
}

/// True when all targets agree within 1e-12, i.e. the norming and zero-sum
/// constraints cannot hold simultaneously.
inline bool targets_all_equal(const std::vector<double>& targets) {
    if (targets.empty()) return true;
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    return *hi - *lo <= 1e-12;
}

/// ψ_k with ψ̂_k(j) = sech(εj) (ij)^{−r} φ̂_k(j) e^{−ijx_k}.
inline std::vector<PeriodicFunction> assemble_basis(const MeanInterpolationProblem& p) {
    const SmoothingKernel smooth(p.smoothing);
    const BernoulliKernel bernoulli(p.order, p.bandwidth);
    std::vector<PeriodicFunction> basis;
    basis.reserve(p.nodes.size());
    for (const auto& node : p.nodes) {
        std::vector<Complex> c(p.bandwidth + 1, Complex(0.0, 0.0));
        detail::PhaseWalker phase(-wrap_angle(node.x));
        for (std::size_t j = 1; j <= p.bandwidth; ++j) {
            phase.advance();
            const auto jl = static_cast<long long>(j);
            // coefficient = transfer / 2π
            c[j] = smooth.transfer(jl) * bernoulli.transfer(jl) * node.weight.transfer(jl) * phase.value() / two_pi;
        }
        basis.emplace_back(std::move(c));
    }
    return basis;
}

struct L1Solution {
    double c = 0.0;
    std::vector<double> coeffs;
    PeriodicFunction g;
    double objective = 0.0;
    /// Values of g and of every ψ_k on the problem grid.
    std::vector<double> g_samples;
    Eigen::MatrixXd basis_samples;
    /// Bounded LP variables z_i ∈ [−1, 1]: equal to sgn g(x_i) wherever g(x_i) ≠ 0.
    std::vector<double> subgradient;
    int iterations = 0;
};

/// Solves the discretized extremal problem exactly.
///
/// The LP actually handed to the simplex is the dual of
/// min Σ_i |aᵢᵀy| s.t. Ey = e:
///     max ν₁  s.t.  Σ_i z_i a_i = Eᵀν,  −1 ≤ z_i ≤ 1,
/// which has only 2m+2 rows. Its simplex multipliers are the primal
/// optimizer y = (c, c_1..c_{2m+1}).
inline L1Solution solve_l1(const MeanInterpolationProblem& p, const std::vector<PeriodicFunction>& basis,
                           const lp::Options& options = {}) {
    const std::size_t count = p.nodes.size();
    if (basis.size() != count || p.targets.size() != count) {
        throw Error(ErrorCode::InvalidArgument, "basis/targets do not match the node count");
    }
    if (targets_all_equal(p.targets)) {
        throw Error(ErrorCode::InfeasibleTargets, "all targets are equal; constraints (norming, zero sum) are infeasible");
    }
    const std::size_t n = p.grid.size();
    const auto rows = static_cast<Eigen::Index>(count + 1);
    const auto ni = static_cast<Eigen::Index>(n);

    L1Solution sol;
    sol.basis_samples.resize(ni, rows);
    sol.basis_samples.col(0).setOnes();
    for (std::size_t k = 0; k < count; ++k) {
        const auto v = basis[k].sample(p.grid);
        sol.basis_samples.col(static_cast<Eigen::Index>(k + 1)) = Eigen::Map<const Eigen::VectorXd>(v.data(), ni);
    }

    lp::Problem dual;
    dual.a.resize(rows, ni + 2);
    dual.a.leftCols(ni) = sol.basis_samples.transpose();
    dual.a(0, ni) = 0.0;
    dual.a(0, ni + 1) = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto row = static_cast<Eigen::Index>(k + 1);
        dual.a(row, ni) = -p.targets[k];
        dual.a(row, ni + 1) = -1.0;
    }
    dual.b = Eigen::VectorXd::Zero(rows);
    dual.cost = Eigen::VectorXd::Zero(ni + 2);
    dual.cost[ni] = -1.0;
    const double inf = std::numeric_limits<double>::infinity();
    dual.lower = Eigen::VectorXd::Constant(ni + 2, -1.0);
    dual.upper = Eigen::VectorXd::Constant(ni + 2, 1.0);
    dual.lower.tail(2).setConstant(-inf);
    dual.upper.tail(2).setConstant(inf);

    const lp::Result res = lp::solve(dual, options);
    sol.iterations = res.iterations;
    if (res.status == lp::Status::iteration_limit) {
        throw Error(ErrorCode::DegenerateLP, "simplex hit the iteration cap");
    }
    if (res.status != lp::Status::optimal) {
        throw Error(ErrorCode::DegenerateLP, "simplex did not reach an optimal basis");
    }

    sol.subgradient.assign(res.x.data(), res.x.data() + ni);
    const Eigen::VectorXd& y = res.duals;
    sol.c = y[0];
    sol.coeffs.assign(y.data() + 1, y.data() + rows);

    double norming = -1.0;
    double zero_sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        norming += sol.coeffs[k] * p.targets[k];
        zero_sum += sol.coeffs[k];
    }
    if (std::abs(norming) > 1e-10 || std::abs(zero_sum) > 1e-10 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
        throw Error(ErrorCode::DegenerateLP, "optimal multipliers violate the equality constraints");
    }

    sol.g = PeriodicFunction::constant(sol.c);
    for (std::size_t k = 0; k < count; ++k) sol.g += sol.coeffs[k] * basis[k];

    const Eigen::VectorXd values = sol.basis_samples * y;
    sol.g_samples.assign(values.data(), values.data() + ni);
    sol.objective = p.grid.weight() * values.lpNorm<1>();
    return sol;
}

/// Multipliers (η, λ, μ) on the unit sphere.
struct LagrangeCertificate {
    double eta = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    /// Least-squares residual of the stationarity system, relative to max|I_k|.
    double stationarity_residual = 0.0;
    /// (2π/N) Σ sgn g(x_i), with subgradient values at the zeros of g.
    double mean_sign = 0.0;
};

/// Recovers (η, λ, μ) from the optimizer.
///
/// With η' = 1 the stationarity conditions read
///     (2π/N) Σ_i s_i              = 0,
///     (2π/N) Σ_i s_i ψ_k(x_i) + λ'C_k + μ' = 0,   k = 1..2m+1,
/// where s_i = sgn g(x_i) off the zero set of g. On the zero set s_i ∈ [−1, 1]
/// is taken from the bounded LP variables. (λ', μ') then solve the 2m+1
/// equations by least squares.
inline LagrangeCertificate recover_certificate(const L1Solution& sol, const MeanInterpolationProblem& p,
                                               double zero_tol = 1e-9) {
    const std::size_t count = p.nodes.size();
    const auto n = static_cast<Eigen::Index>(sol.g_samples.size());
    const double w = p.grid.weight();
    double gmax = 0.0;
    for (double v : sol.g_samples) gmax = std::max(gmax, std::abs(v));
    if (gmax == 0.0) throw Error(ErrorCode::AllZero, "optimal integrand vanishes on the grid");
    if (sol.subgradient.size() != sol.g_samples.size()) {
        throw Error(ErrorCode::InvalidArgument, "solution carries no subgradient values");
    }

    Eigen::VectorXd moments = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const double v = sol.g_samples[iu];
        double s = sol.subgradient[iu];
        if (std::abs(v) > zero_tol * gmax) s = v > 0.0 ? 1.0 : -1.0;
        if (std::abs(s) > 1.0 + 1e-9) {
            throw Error(ErrorCode::StationarityResidual,
                        "subgradient value " + std::to_string(s) + " outside [-1, 1] at a zero of g");
        }
        moments += w * s * sol.basis_samples.row(i).transpose();
    }

    const auto eqs = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd sys(eqs, 2);
    for (std::size_t k = 0; k < count; ++k) {
        sys(static_cast<Eigen::Index>(k), 0) = p.targets[k];
        sys(static_cast<Eigen::Index>(k), 1) = 1.0;
    }
    const Eigen::VectorXd rhs = -moments.tail(eqs);
    const Eigen::Vector2d unknown = sys.colPivHouseholderQr().solve(rhs);
    const double residual = (sys * unknown - rhs).lpNorm<Eigen::Infinity>();
    const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);

    LagrangeCertificate cert;
    cert.stationarity_residual = residual / scale;
    cert.mean_sign = moments[0];
    if (cert.stationarity_residual > 1e-6) {
        throw Error(ErrorCode::StationarityResidual,
                    "stationarity residual " + std::to_string(cert.stationarity_residual) + " exceeds 1e-6");
    }
    if (std::abs(cert.mean_sign) > 1e-6) {
        throw Error(ErrorCode::StationarityResidual,
                    "mean of the sign pattern " + std::to_string(cert.mean_sign) + " exceeds 1e-6");
    }
    const double norm = std::sqrt(1.0 + unknown[0] * unknown[0] + unknown[1] * unknown[1]);
    cert.eta = 1.0 / norm;
    cert.lambda = unknown[0] / norm;
    cert.mu = unknown[1] / norm;
    if (std::abs(cert.lambda) < 1e-8) throw Error(ErrorCode::NullMultiplier, "recovered λ vanishes");
    return cert;
}

/// Sign changes of g localized to |g| ≤ 1e-13‖g‖∞ (or to machine resolution).
/// The grid decides which alternations exist; at most max_knots are allowed.
inline std::vector<double> extract_knots(const PeriodicFunction& g, const SpectralGrid& grid, double zero_tol,
                                         std::size_t max_knots) {
    const std::vector<double> v = g.sample(grid);
    const std::size_t n = v.size();
    double gmax = 0.0;
    for (double y : v) gmax = std::max(gmax, std::abs(y));
    const double threshold = zero_tol * gmax;
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(v[i]) >= threshold && v[i] != 0.0) accepted.push_back(i);
    }
    if (accepted.empty()) throw Error(ErrorCode::AllZero, "every sample is below the zero tolerance");

    const double root_tol = 1e-13 * gmax;
    std::vector<double> knots;
    for (std::size_t q = 0; q < accepted.size(); ++q) {
        const std::size_t i0 = accepted[q];
        const std::size_t i1 = accepted[(q + 1) % accepted.size()];
        if ((v[i0] > 0.0) == (v[i1] > 0.0)) continue;
        const double a = grid.point(i0);
        double b = grid.point(i1);
        if (b <= a) b += two_pi;
        auto fn = [&g](double x) { return g.evaluate(x); };
        const double fa = v[i0];
        const double fb = v[i1];
        std::uintmax_t max_iter = 200;
        auto tol = [&fn, root_tol](double lo, double hi) {
            return std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo)) ||
                   std::abs(fn(0.5 * (lo + hi))) <= root_tol;
        };
        const auto bracket = boost::math::tools::toms748_solve(fn, a, b, fa, fb, tol, max_iter);
        const double lo = bracket.first;
        const double hi = bracket.second;
        const double root = std::abs(fn(lo)) <= std::abs(fn(hi)) ? lo : hi;
        const double mid = 0.5 * (lo + hi);
        double knot = wrap_angle(std::abs(fn(mid)) < std::abs(fn(root)) ? mid : root);
        if (two_pi - knot < 1e-12) knot = 0.0;
        knots.push_back(knot);
    }
    if (knots.size() > max_knots) {
        throw Error(ErrorCode::TooManySignChanges, std::to_string(knots.size()) + " sign changes exceed the limit of " +
                                                       std::to_string(max_knots));
    }
    std::sort(knots.begin(), knots.end());
    return knots;
}

struct SignPattern {
    std::vector<double> knots;
    int lead_sign = 1;
};

/// Knots of the step function carried by the LP subgradient values.
///
/// Sample i stands for the cell [x_i − h/2, x_i + h/2). Maximal runs of ±1
/// cells are separated by (possibly empty) runs of fractional cells; each
/// separation between runs of opposite sign becomes one knot, placed so that
/// the step keeps the integral of the fractional cells.
inline SignPattern knots_from_subgradient(const std::vector<double>& z, const SpectralGrid& grid,
                                          std::size_t max_knots) {
    const std::size_t n = z.size();
    if (n != grid.size()) throw Error(ErrorCode::InvalidArgument, "subgradient length does not match the grid");
    const double h = grid.weight();
    auto saturated = [&z](std::size_t i) { return std::abs(z[i]) >= 1.0 - 1e-9; };
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (saturated(i)) {
            first = i;
            break;
        }
    }
    if (first == n) throw Error(ErrorCode::AllZero, "no saturated subgradient value");

    SignPattern out;
    std::vector<std::pair<double, int>> knots; // (position, sign to the right)
    int sign = z[first] > 0.0 ? 1 : -1;
    std::size_t last = first;
    for (std::size_t step = 1; step <= n; ++step) {
        const std::size_t i = (first + step) % n;
        if (!saturated(i)) continue;
        const int next = z[i] > 0.0 ? 1 : -1;
        if (next != sign) {
            // fractional cells strictly between `last` and `i`
            double integral = 0.0;
            std::size_t gap = 0;
            for (std::size_t q = (last + 1) % n; q != i; q = (q + 1) % n) {
                integral += h * z[q];
                ++gap;
            }
            const double start = grid.point(last) + 0.5 * h;
            const double length = static_cast<double>(gap) * h;
            // sign on [start, k), next on [k, start + length)
            const double k = start + 0.5 * length + 0.5 * integral / sign;
            knots.emplace_back(wrap_angle(k), next);
            sign = next;
        }
        last = i;
    }
    if (knots.size() > max_knots) {
        throw Error(ErrorCode::TooManySignChanges, std::to_string(knots.size()) +
                                                       " sign changes of the subgradient exceed the limit of " +
                                                       std::to_string(max_knots));
    }
    std::sort(knots.begin(), knots.end());
    for (const auto& [x, right] : knots) out.knots.push_back(two_pi - x < 1e-12 ? 0.0 : x);
    if (!knots.empty()) out.lead_sign = knots.front().second;
    return out;
}

/// Candidate spline s = −((−1)^r η h + μ)/λ with h = σ ∗ B_r, σ the step with
/// the given knots and lead sign on (t_0, t_1).
///
/// Grid-level knots do not make σ exactly mean-zero; the signed length is
/// projected to zero by moving every knot by the same amount in the
/// alternating direction, which is allowed up to one grid cell per knot.
inline PerfectSpline build_candidate(const std::vector<double>& knots, int lead, const LagrangeCertificate& cert,
                                     const MeanInterpolationProblem& p) {
    const double xi = -((p.order % 2 == 0) ? 1.0 : -1.0) * cert.eta / cert.lambda;
    const double offset = -cert.mu / cert.lambda;
    if (knots.empty()) {
        throw Error(ErrorCode::MeanZeroViolation, "no sign change, so the sign pattern cannot have mean zero");
    }
    if (knots.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd number of sign changes");

    std::vector<double> t(knots);
    const double residual = alternating_length(t);
    const double count = static_cast<double>(t.size());
    const double shift = residual / (2.0 * count);
    if (std::abs(shift) > p.grid.weight()) {
        throw Error(ErrorCode::MeanZeroViolation,
                    "signed length " + std::to_string(residual) + " is beyond the knot localization accuracy");
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += ((i % 2 == 0) ? 1.0 : -1.0) * shift;
    if (std::abs(alternating_length(t)) > 1e-6) {
        throw Error(ErrorCode::MeanZeroViolation, "signed length could not be reduced below 1e-6");
    }
    return {p.order, std::move(t), lead, xi, offset};
}

/// As above with σ = sgn g.
inline PerfectSpline build_candidate(const std::vector<double>& knots, const LagrangeCertificate& cert,
                                     const PeriodicFunction& g, const MeanInterpolationProblem& p) {
    if (knots.size() < 2) return build_candidate(knots, 1, cert, p);
    const double mid = 0.5 * (knots[0] + knots[1]);
    return build_candidate(knots, g.evaluate(mid) >= 0.0 ? 1 : -1, cert, p);
}

} // namespace perfspline
