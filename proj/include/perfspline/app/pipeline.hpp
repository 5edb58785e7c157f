#pragma once

// End-to-end driver: targets → L1 solve → certificate → knots → refine → verify.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perfspline/app/config.hpp"
#include "perfspline/error.hpp"
#include "perfspline/extremal.hpp"
#include "perfspline/perfect_spline.hpp"
#include "perfspline/refine.hpp"
#include "perfspline/spectral.hpp"

namespace perfspline::app {

inline json spline_to_json(const PerfectSpline& s) {
    return json{{"r", s.order()},
                {"knots", s.knots()},
                {"lead_sign", s.lead_sign()},
                {"xi", s.amplitude()},
                {"offset", s.offset()}};
}

/// Rejects odd knot lists and anything the PerfectSpline constructor refuses.
inline PerfectSpline spline_from_json(const json& j) {
    try {
        const auto knots = j.at("knots").get<std::vector<double>>();
        if (knots.size() % 2 != 0) throw Error(ErrorCode::ParseError, "spline file has an odd knot count");
        return {j.at("r").get<int>(), knots, j.at("lead_sign").get<int>(), j.at("xi").get<double>(),
                j.at("offset").get<double>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        throw Error(ErrorCode::ParseError, e.what());
    }
}

struct SolveOptions {
    double zero_tol = 1e-9;
    RefineOptions refine;
    /// Smoothing levels tried, in order, after the problem's own ε fails;
    /// only levels above that ε are used.
    std::vector<double> smoothing_ladder{0.05, 0.1, 0.2, 0.4};
};

struct SolveOutcome {
    PerfectSpline spline = PerfectSpline::constant(1, 0.0);
    bool constant_shortcut = false;
    std::optional<LagrangeCertificate> certificate;
    std::vector<double> candidate_knots;
    double l1_objective = 0.0;
    int simplex_iterations = 0;
    int refine_iterations = 0;
    int collisions = 0;
    double refine_residual = 0.0;
    double smoothing_used = 0.0;
    /// One "ε: Code" entry per abandoned smoothing level.
    std::vector<std::string> retries;
};

namespace detail {

inline bool recoverable(ErrorCode code) {
    switch (code) {
    case ErrorCode::StationarityResidual:
    case ErrorCode::NullMultiplier:
    case ErrorCode::TooManySignChanges:
    case ErrorCode::MeanZeroViolation:
    case ErrorCode::KnotOrderViolation:
    case ErrorCode::NoConvergence:
    case ErrorCode::StalledLineSearch:
    case ErrorCode::DegenerateLP:
    case ErrorCode::AllZero:
        return true;
    default:
        return false;
    }
}

/// One pass of LP → certificate → candidate → refinement at the problem's ε.
inline void solve_at_smoothing(const MeanInterpolationProblem& p, const SolveOptions& options, SolveOutcome& out) {
    const auto basis = assemble_basis(p);
    const L1Solution sol = solve_l1(p, basis);
    out.l1_objective = sol.objective;
    out.simplex_iterations += sol.iterations;

    double gmax = 0.0;
    for (double v : sol.g_samples) gmax = std::max(gmax, std::abs(v));
    const std::size_t nu = count_sample_sign_changes(sol.g_samples, options.zero_tol * gmax);
    if (nu > static_cast<std::size_t>(2 * p.m)) {
        throw Error(ErrorCode::TooManySignChanges,
                    "optimal integrand changes sign " + std::to_string(nu) + " times on the grid");
    }

    const LagrangeCertificate cert = recover_certificate(sol, p, options.zero_tol);
    out.certificate = cert;
    const auto max_knots = static_cast<std::size_t>(2 * p.m);
    // Sign changes of g first; when g is numerically flat the LP sign sequence
    // still resolves the pattern.
    std::optional<PerfectSpline> candidate;
    try {
        candidate = build_candidate(extract_knots(sol.g, p.grid, options.zero_tol, max_knots), cert, sol.g, p);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MeanZeroViolation && e.code() != ErrorCode::TooManySignChanges) throw;
        const SignPattern pattern = knots_from_subgradient(sol.subgradient, p.grid, max_knots);
        candidate = build_candidate(pattern.knots, pattern.lead_sign, cert, p);
    }
    out.candidate_knots = candidate->knots();

    const RefineResult refined = gauss_newton(*candidate, p, options.refine);
    out.spline = refined.spline;
    out.refine_iterations = refined.iterations;
    out.collisions = refined.collisions;
    out.refine_residual = refined.residual;
    out.smoothing_used = p.smoothing;
}

} // namespace detail

/// Runs the construction for a problem whose targets are already filled in.
///
/// Refinement always solves the unsmoothed interpolation equations, so ε only
/// shapes the starting point. When ε is so small that the optimal integrand is
/// numerically flat between nodes, its sign pattern is unresolvable; the
/// construction is then repeated at the larger levels of the ladder.
inline SolveOutcome solve_problem(const MeanInterpolationProblem& p, const SolveOptions& options = {}) {
    p.validate();
    if (p.targets.size() != p.nodes.size()) throw Error(ErrorCode::InvalidArgument, "problem has no targets");
    SolveOutcome out;
    if (targets_all_equal(p.targets)) {
        out.spline = PerfectSpline::constant(p.order, p.targets.front());
        out.constant_shortcut = true;
        return out;
    }
    std::vector<double> levels{p.smoothing};
    for (double eps : options.smoothing_ladder) {
        if (eps > levels.back()) levels.push_back(eps);
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        MeanInterpolationProblem attempt = p;
        attempt.smoothing = levels[i];
        try {
            detail::solve_at_smoothing(attempt, options, out);
            return out;
        } catch (const Error& e) {
            if (!detail::recoverable(e.code()) || i + 1 == levels.size()) throw;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", levels[i]);
            out.retries.push_back(std::string(buf) + ": " + std::string(to_string(e.code())));
        }
    }
    return out;
}

/// Targets from f, then solve.
inline SolveOutcome solve_for(MeanInterpolationProblem p, const PeriodicFunction& f, const SolveOptions& options = {}) {
    p.targets = compute_targets(f, p.nodes);
    return solve_problem(p, options);
}

struct VerificationReport {
    std::vector<double> residuals;
    double max_residual = 0.0;
    double xi = 0.0;
    double f_derivative_norm = 0.0; ///< ‖f^{(r)}‖∞
    double extremal_margin = 0.0;   ///< ‖f^{(r)}‖∞ − |ξ|
    std::size_t knot_count = 0;
    std::size_t max_knots = 0;
    double mean_zero_residual = 0.0;
    std::optional<std::size_t> delta_sign_changes; ///< ν(s − f); absent when s ≡ f numerically
    bool residual_ok = false;
    bool mean_zero_ok = false;
    bool knot_count_ok = false;
    bool extremal_ok = false;
    bool pass = false;
    std::string diagnosis;
};

/// Recomputes every check from the spline and f alone.
inline VerificationReport verify(const PerfectSpline& s, const PeriodicFunction& f, const MeanInterpolationProblem& p,
                                 std::size_t bandwidth, const Tolerances& tol) {
    VerificationReport rep;
    const auto targets = compute_targets(f, p.nodes);
    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
        const double mean = s.weighted_mean(p.nodes[k].weight, p.nodes[k].x, bandwidth);
        rep.residuals.push_back(mean - targets[k]);
        rep.max_residual = std::max(rep.max_residual, std::abs(rep.residuals.back()));
    }
    rep.xi = s.amplitude();
    const PeriodicFunction fr = f.derivative(static_cast<unsigned>(p.order));
    rep.f_derivative_norm = sup_norm(fr, SpectralGrid::for_bandwidth(std::max<std::size_t>(fr.bandwidth(), 1)));
    rep.extremal_margin = rep.f_derivative_norm - s.highest_derivative_norm();
    rep.knot_count = s.knots().size();
    rep.max_knots = static_cast<std::size_t>(2 * p.m);
    rep.mean_zero_residual = s.mean_zero_residual();

    const PeriodicFunction delta = s.to_function(bandwidth) - f;
    try {
        rep.delta_sign_changes = count_sign_changes(delta, SpectralGrid::for_bandwidth(delta.bandwidth()), tol.zero);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::AllZero) throw;
    }

    rep.residual_ok = rep.max_residual <= tol.residual;
    rep.mean_zero_ok = std::abs(rep.mean_zero_residual) <= tol.mean_zero;
    rep.knot_count_ok = rep.knot_count <= rep.max_knots && rep.knot_count % 2 == 0;
    rep.extremal_ok = rep.extremal_margin >= -tol.extremal;
    rep.pass = rep.residual_ok && rep.mean_zero_ok && rep.knot_count_ok && rep.extremal_ok;

    if (!rep.extremal_ok) {
        const std::size_t needed = rep.max_knots + 1;
        if (!rep.delta_sign_changes || *rep.delta_sign_changes < needed) {
            rep.diagnosis = "|xi| exceeds the derivative norm of f and nu(s - f) < 2m + 1: "
                            "some node support has no sign change of s - f, so the interpolation conditions fail";
        } else {
            rep.diagnosis = "|xi| exceeds the derivative norm of f yet nu(s - f) >= 2m + 1: "
                            "this forces more than 2m sign changes of (s - f)^(r), so the knot data is inconsistent";
        }
    } else if (!rep.pass) {
        rep.diagnosis = !rep.residual_ok    ? "interpolation residual above tolerance"
                        : !rep.mean_zero_ok ? "knots violate the mean-zero condition"
                                            : "knot count exceeds 2m";
    }
    return rep;
}

inline json report_to_json(const VerificationReport& r) {
    json j{{"residuals", r.residuals},
           {"max_residual", r.max_residual},
           {"xi", r.xi},
           {"f_derivative_norm", r.f_derivative_norm},
           {"extremal_margin", r.extremal_margin},
           {"knot_count", r.knot_count},
           {"max_knots", r.max_knots},
           {"mean_zero_residual", r.mean_zero_residual},
           {"delta_sign_changes", nullptr},
           {"delta_sign_change_bound_holds", nullptr},
           {"checks",
            {{"residual", r.residual_ok},
             {"mean_zero", r.mean_zero_ok},
             {"knot_count", r.knot_count_ok},
             {"extremal", r.extremal_ok}}},
           {"pass", r.pass},
           {"diagnosis", r.diagnosis}};
    if (r.delta_sign_changes) {
        j["delta_sign_changes"] = *r.delta_sign_changes;
        j["delta_sign_change_bound_holds"] = *r.delta_sign_changes >= r.max_knots + 1;
    }
    return j;
}

/// Pretty JSON with full-precision doubles and a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct RunArtifacts {
    PerfectSpline spline = PerfectSpline::constant(1, 0.0);
    VerificationReport report;
    SolveOutcome outcome;
};

/// Full pipeline for one config (no file I/O).
inline RunArtifacts run_pipeline(const RunConfig& cfg) {
    MeanInterpolationProblem p = make_problem(cfg);
    const PeriodicFunction f = compile(cfg.function);
    SolveOptions options;
    options.zero_tol = cfg.tolerances.zero;
    options.refine.bandwidth = cfg.effective_refine_bandwidth();
    RunArtifacts out;
    out.outcome = solve_for(p, f, options);
    out.spline = out.outcome.spline;
    out.report = verify(out.spline, f, p, cfg.effective_refine_bandwidth(), cfg.tolerances);
    return out;
}

inline VerificationReport run_verify(const PerfectSpline& s, const RunConfig& cfg) {
    if (s.order() != cfg.order) {
        throw Error(ErrorCode::ParseError, "spline order does not match the config");
    }
    const MeanInterpolationProblem p = make_problem(cfg);
    return verify(s, compile(cfg.function), p, cfg.effective_refine_bandwidth(), cfg.tolerances);
}

inline json error_to_json(const Error& e) {
    return json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
}

} // namespace perfspline::app
