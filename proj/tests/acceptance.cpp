// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "perfspline/app/pipeline.hpp"
#include "perfspline/perfspline.hpp"
#include "test_support.hpp"

using namespace perfspline;
using namespace perfspline::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double derivative_norm(const PeriodicFunction& f, int r) {
    const PeriodicFunction d = f.derivative(static_cast<unsigned>(r));
    return sup_norm(d, SpectralGrid::for_bandwidth(std::max<std::size_t>(d.bandwidth(), 1)));
}

double max_abs_residual(const PerfectSpline& s, const MeanInterpolationProblem& p, std::size_t band) {
    double worst = 0.0;
    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
        worst = std::max(worst, std::abs(s.weighted_mean(p.nodes[k].weight, p.nodes[k].x, band) - p.targets[k]));
    }
    return worst;
}

// 1. canonical existence case
Outcome existence() {
    const auto start = std::chrono::steady_clock::now();
    MeanInterpolationProblem p = canonical_problem(2);
    const auto f = PeriodicFunction::harmonic(1, 0.0, 1.0);
    p.targets = compute_targets(f, p.nodes);
    const auto out = app::solve_problem(p);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double residual = max_abs_residual(out.spline, p, 4096);
    const double mean_zero = std::abs(out.spline.mean_zero_residual());
    const std::size_t knots = out.spline.knots().size();
    Outcome o;
    o.pass = knots <= 2 && residual <= 1e-8 && mean_zero <= 1e-10 && seconds <= 10.0;
    o.detail = fmt("knots=%zu residual=%.2e mean_zero=%.2e xi=%.10f runtime=%.2fs", knots, residual, mean_zero,
                   out.spline.amplitude(), seconds);
    return o;
}

// 2. extremal property over a random battery
Outcome extremal_battery() {
    std::mt19937 rng(20240517);
    std::uniform_int_distribution<int> pick_r(1, 3);
    std::uniform_int_distribution<int> pick_m(1, 2);
    std::uniform_int_distribution<int> pick_degree(1, 5);
    int solved = 0;
    int violations = 0;
    double worst_ratio = 0.0;
    std::map<std::string, int> failures;
    for (int trial = 0; trial < 50; ++trial) {
        MeanInterpolationProblem p;
        p.order = pick_r(rng);
        p.m = pick_m(rng);
        p.nodes = random_nodes(rng, p.m);
        const auto f = random_trig(rng, static_cast<std::size_t>(pick_degree(rng)));
        try {
            const auto out = app::solve_for(p, f);
            ++solved;
            const double bound = derivative_norm(f, p.order);
            const double xi = out.spline.highest_derivative_norm();
            worst_ratio = std::max(worst_ratio, xi / bound);
            if (xi > bound * (1.0 + 1e-4) || out.spline.knots().size() > static_cast<std::size_t>(2 * p.m)) {
                ++violations;
            }
        } catch (const Error& e) {
            ++failures[std::string(to_string(e.code()))];
        }
    }
    Outcome o;
    o.pass = violations == 0 && solved > 0;
    o.detail = fmt("solved=%d/50 violations=%d max |xi|/||f^(r)||=%.6f", solved, violations, worst_ratio);
    for (const auto& [code, n] : failures) o.detail += fmt(" %s=%d", code.c_str(), n);
    return o;
}

// 3. point interpolation with delta weights
Outcome point_interpolation() {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pick_degree(1, 4);
    double worst = 0.0;
    int trials = 0;
    std::string errors;
    for (int trial = 0; trial < 10; ++trial) {
        MeanInterpolationProblem p;
        p.order = 2;
        p.m = 2;
        p.nodes = random_nodes(rng, 2, WeightKind::delta);
        const auto f = random_trig(rng, static_cast<std::size_t>(pick_degree(rng)));
        try {
            const auto out = app::solve_for(p, f);
            const PiecewiseSpline exact(out.spline);
            for (const auto& node : p.nodes) worst = std::max(worst, std::abs(exact(node.x) - f(node.x)));
            ++trials;
        } catch (const Error& e) {
            errors += std::string(" ") + e.what();
        }
    }
    Outcome o;
    o.pass = trials == 10 && worst <= 1e-8;
    o.detail = fmt("cases=%d/10 max|s(x_k)-f(x_k)|=%.2e", trials, worst) + errors;
    return o;
}

// 4. a perfect spline fed back in cannot be beaten
Outcome self_bound() {
    std::mt19937 rng(99);
    int trials = 0;
    double worst_ratio = 0.0;
    std::string errors;
    for (int trial = 0; trial < 6; ++trial) {
        const int m = 1 + trial % 2;
        const auto knots = random_mean_zero_knots(rng, static_cast<std::size_t>(2 * m), 0.4);
        std::uniform_real_distribution<double> amp(0.5, 2.0);
        const PerfectSpline f0(2, knots, 1, amp(rng), 0.3);
        const PeriodicFunction f = f0.to_function(4096);
        MeanInterpolationProblem p;
        p.order = 2;
        p.m = m;
        p.nodes = random_nodes(rng, m);
        try {
            const auto out = app::solve_for(p, f);
            worst_ratio = std::max(worst_ratio, out.spline.highest_derivative_norm() / f0.highest_derivative_norm());
            ++trials;
        } catch (const Error& e) {
            errors += std::string(" ") + e.what();
        }
    }
    Outcome o;
    o.pass = trials == 6 && worst_ratio <= 1.0 + 1e-4;
    o.detail = fmt("cases=%d/6 max |xi|/|xi_f0|=%.8f", trials, worst_ratio) + errors;
    return o;
}

// 5. spectral evaluation vs exact piecewise form; LP vs brute-force scan
Outcome oracle_equivalence() {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(0.0, two_pi);
    double worst_eval = 0.0;
    for (int order = 2; order <= 4; ++order) {
        const auto knots = random_mean_zero_knots(rng, 4, 0.3);
        const PerfectSpline s(order, knots, -1, 1.7, -0.4);
        const PiecewiseSpline exact(s);
        const PeriodicFunction series = s.to_function(4096);
        for (int i = 0; i < 1000; ++i) {
            const double x = ux(rng);
            worst_eval = std::max(worst_eval, std::abs(series(x) - exact(x)));
        }
    }

    MeanInterpolationProblem p = canonical_problem(2);
    p.targets = compute_targets(PeriodicFunction::harmonic(1, 0.0, 1.0), p.nodes);
    const auto basis = assemble_basis(p);
    const auto sol = solve_l1(p, basis);
    const auto scan = brute_force_scan(p, sol, 200, 0.5);
    // symmetric layout: c = 0, c_k = (1, 0, −1)/(2 sin(0.1)/0.1)
    const double sb = std::sin(0.1) / 0.1;
    const double closed_form = std::max({std::abs(sol.c), std::abs(sol.coeffs[0] - 0.5 / sb), std::abs(sol.coeffs[1]),
                                         std::abs(sol.coeffs[2] + 0.5 / sb)});

    Outcome o;
    o.pass = worst_eval <= 1e-6 && scan.best_objective >= sol.objective - 1e-12 && scan.within_one_cell &&
             closed_form <= 1e-8;
    o.detail = fmt("eval max diff=%.2e; LP objective=%.10f scan min=%.10f argmin offset=(%.4f, %.4f) cell=%.4f; "
                   "|y - y_closed|=%.2e",
                   worst_eval, sol.objective, scan.best_objective, scan.offset_c, scan.offset_t, scan.cell,
                   closed_form);
    return o;
}

// 6. kernel closed forms
Outcome kernel_values() {
    const double b1 = BernoulliKernel(1, 1u << 22).evaluate(pi / 2);
    const double b2 = BernoulliKernel(2, 4096).evaluate(pi);
    const double a = SmoothingKernel(1.0).transfer(1);
    const double e1 = std::abs(b1 - 0.25);
    const double e2 = std::abs(b2 - pi / 12);
    const double e3 = std::abs(a - 2.0 / (std::exp(1.0) + std::exp(-1.0)));
    Outcome o;
    o.pass = e1 <= 1e-7 && e2 <= 1e-7 && e3 <= 1e-12;
    o.detail = fmt("|B_1(pi/2)-1/4|=%.2e |B_2(pi)-pi/12|=%.2e |A_1(1)-sech 1|=%.2e", e1, e2, e3);
    return o;
}

// 7. variation diminishing smoothing
Outcome variation_diminishing() {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> pick_degree(1, 6);
    const SpectralGrid grid(512);
    int failures = 0;
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const auto f = random_trig(rng, static_cast<std::size_t>(pick_degree(rng)));
        const std::size_t nu = count_sign_changes(f, grid);
        for (double eps : {0.01, 0.1, 0.5}) {
            const std::size_t smoothed = count_sign_changes(SmoothingKernel(eps).apply(f), grid);
            failures += smoothed > nu ? 1 : 0;
            ++checked;
        }
    }
    Outcome o;
    o.pass = failures == 0;
    o.detail = fmt("checked=%d failures=%d", checked, failures);
    return o;
}

// 8. analytic Jacobian vs central differences
double jacobian_error(const KnotSystem& sys, const KnotState& s) {
    const Eigen::MatrixXd analytic = sys.jacobian(s);
    Eigen::MatrixXd numeric(analytic.rows(), analytic.cols());
    const double h = 1e-6;
    const Eigen::Index count = static_cast<Eigen::Index>(s.knots.size());
    for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
        KnotState plus = s;
        KnotState minus = s;
        auto bump = [&](KnotState& st, double d) {
            if (c < count) st.knots[static_cast<std::size_t>(c)] += d;
            else if (c == count) st.amplitude += d;
            else st.offset += d;
        };
        bump(plus, h);
        bump(minus, -h);
        numeric.col(c) = (sys.residuals(plus) - sys.residuals(minus)) / (2.0 * h);
    }
    return (analytic - numeric).lpNorm<Eigen::Infinity>() / analytic.lpNorm<Eigen::Infinity>();
}

Outcome jacobian_validity() {
    std::mt19937 rng(3);
    std::vector<std::pair<std::string, MeanInterpolationProblem>> cases;
    {
        auto p = canonical_problem(2);
        p.targets = compute_targets(PeriodicFunction::harmonic(1, 0.0, 1.0), p.nodes);
        cases.emplace_back("canonical", p);
    }
    {
        MeanInterpolationProblem p;
        p.order = 2;
        p.m = 2;
        p.nodes = random_nodes(rng, 2, WeightKind::delta);
        p.targets = compute_targets(random_trig(rng, 4), p.nodes);
        cases.emplace_back("points", p);
    }
    {
        MeanInterpolationProblem p;
        p.order = 2;
        p.m = 2;
        p.nodes = random_nodes(rng, 2);
        const PerfectSpline f0(2, random_mean_zero_knots(rng, 4, 0.4), 1, 1.0, 0.0);
        p.targets = compute_targets(f0.to_function(4096), p.nodes);
        cases.emplace_back("self-bound", p);
    }
    double worst = 0.0;
    for (const auto& [name, p] : cases) {
        const KnotSystem sys(p, 4096);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            KnotState s;
            s.knots = random_points(rng, static_cast<std::size_t>(2 * p.m), 0.2);
            s.lead_sign = u(rng) > 0 ? 1 : -1;
            s.amplitude = 2.0 * u(rng);
            s.offset = u(rng);
            worst = std::max(worst, jacobian_error(sys, s));
        }
    }
    Outcome o;
    o.pass = worst <= 1e-6;
    o.detail = fmt("states=%zu max relative error=%.2e", cases.size() * 20, worst);
    return o;
}

// 9. constant data and equal targets
Outcome degenerate_handling() {
    bool ok = true;
    std::string detail;
    {
        MeanInterpolationProblem p = canonical_problem(2);
        const auto out = app::solve_for(p, PeriodicFunction::constant(2.5));
        ok = ok && out.constant_shortcut && out.simplex_iterations == 0 && out.spline.amplitude() == 0.0 &&
             out.spline.knots().empty() && out.spline.offset() == 2.5;
        detail += fmt("constant f: xi=%g offset=%g lp_iterations=%d", out.spline.amplitude(), out.spline.offset(),
                      out.simplex_iterations);
    }
    {
        // cos 3x takes the value 1 at 0, 2π/3, 4π/3
        MeanInterpolationProblem p;
        p.order = 3;
        p.m = 1;
        p.nodes = {{0.0, WeightFunction::delta()}, {two_pi / 3, WeightFunction::delta()},
                   {2 * two_pi / 3, WeightFunction::delta()}};
        try {
            const auto out = app::solve_for(p, PeriodicFunction::harmonic(3, 1.0, 0.0));
            ok = ok && out.constant_shortcut && out.spline.is_constant();
            detail += fmt("; equal targets: constant spline offset=%.12f", out.spline.offset());
        } catch (const std::exception& e) {
            ok = false;
            detail += std::string("; equal targets threw: ") + e.what();
        }
    }
    return {ok, detail};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 existence (canonical case)", existence},
        {"2 extremal property battery", extremal_battery},
        {"3 point interpolation", point_interpolation},
        {"4 self-bound", self_bound},
        {"5 oracle equivalence", oracle_equivalence},
        {"6 kernel closed forms", kernel_values},
        {"7 variation diminishing", variation_diminishing},
        {"8 jacobian validity", jacobian_validity},
        {"9 degenerate handling", degenerate_handling},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
