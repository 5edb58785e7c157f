#pragma once

// Dense bounded-variable revised simplex for
//
//     minimize  cᵀx   subject to  A x = b,  l ≤ x ≤ u,
//
// where bounds may be infinite (free variables sit at zero while nonbasic).
// Intended for problems with few rows and many columns; the basis is
// refactorized from scratch every iteration.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace perfspline::lp {

struct Problem {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd cost;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Options {
    int max_iterations = 50000;
    double optimality_tol = 1e-11;
    double pivot_tol = 1e-10;
    double feasibility_tol = 1e-9;
    int bland_after = 50; ///< switch to Bland's rule after this many consecutive degenerate pivots
};

struct Result {
    Status status = Status::iteration_limit;
    Eigen::VectorXd x;
    Eigen::VectorXd duals; ///< simplex multipliers π with Bᵀπ = c_B
    double objective = 0.0;
    int iterations = 0;
};

namespace detail {

enum class Place { lower, upper, free_zero, basic };

class Solver {
public:
    Solver(const Problem& p, const Options& opt) : opt_(opt), rows_(p.a.rows()), cols_(p.a.cols()) {
        const Eigen::Index total = cols_ + rows_;
        a_.resize(rows_, total);
        a_.leftCols(cols_) = p.a;
        a_.rightCols(rows_).setZero();
        lower_.resize(total);
        upper_.resize(total);
        lower_.head(cols_) = p.lower;
        upper_.head(cols_) = p.upper;
        x_.setZero(total);
        place_.assign(static_cast<std::size_t>(total), Place::lower);
        b_ = p.b;

        for (Eigen::Index j = 0; j < cols_; ++j) {
            if (std::isfinite(lower_[j])) {
                x_[j] = lower_[j];
                place_[j] = Place::lower;
            } else if (std::isfinite(upper_[j])) {
                x_[j] = upper_[j];
                place_[j] = Place::upper;
            } else {
                x_[j] = 0.0;
                place_[j] = Place::free_zero;
            }
        }
        const Eigen::VectorXd residual = b_ - p.a * x_.head(cols_);
        basis_.resize(static_cast<std::size_t>(rows_));
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const Eigen::Index art = cols_ + i;
            a_(i, art) = residual[i] >= 0.0 ? 1.0 : -1.0;
            lower_[art] = 0.0;
            upper_[art] = std::numeric_limits<double>::infinity();
            x_[art] = std::abs(residual[i]);
            place_[static_cast<std::size_t>(art)] = Place::basic;
            basis_[static_cast<std::size_t>(i)] = art;
        }
        cost_ = Eigen::VectorXd::Zero(total);
        original_cost_ = p.cost;
    }

    Result run() {
        Result result;
        // phase 1: drive the artificials to zero
        cost_.setZero();
        cost_.tail(rows_).setOnes();
        Status s = iterate(result.iterations);
        if (s != Status::optimal) {
            result.status = s == Status::unbounded ? Status::infeasible : s;
            return result;
        }
        const double infeasibility = x_.tail(rows_).sum();
        if (infeasibility > opt_.feasibility_tol * (1.0 + b_.lpNorm<Eigen::Infinity>())) {
            result.status = Status::infeasible;
            return result;
        }
        // phase 2: artificials pinned at zero
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const Eigen::Index art = cols_ + i;
            upper_[art] = 0.0;
            if (place_[static_cast<std::size_t>(art)] != Place::basic) {
                x_[art] = 0.0;
                place_[static_cast<std::size_t>(art)] = Place::lower;
            }
        }
        cost_.setZero();
        cost_.head(cols_) = original_cost_;
        s = iterate(result.iterations);
        result.status = s;
        result.x = x_.head(cols_);
        result.duals = duals_;
        result.objective = original_cost_.dot(result.x);
        return result;
    }

private:
    void factorize() {
        Eigen::MatrixXd basis_matrix(rows_, rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
        lu_.compute(basis_matrix);
        // basic values from the nonbasic ones
        Eigen::VectorXd rhs = b_;
        for (Eigen::Index j = 0; j < a_.cols(); ++j) {
            if (place_[static_cast<std::size_t>(j)] != Place::basic && x_[j] != 0.0) rhs -= a_.col(j) * x_[j];
        }
        const Eigen::VectorXd xb = lu_.solve(rhs);
        for (Eigen::Index i = 0; i < rows_; ++i) x_[basis_[static_cast<std::size_t>(i)]] = xb[i];
        Eigen::VectorXd cb(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) cb[i] = cost_[basis_[static_cast<std::size_t>(i)]];
        duals_ = lu_.transpose().solve(cb);
    }

    Status iterate(int& iterations) {
        int degenerate_run = 0;
        const double inf = std::numeric_limits<double>::infinity();
        while (true) {
            factorize();
            if (iterations >= opt_.max_iterations) return Status::iteration_limit;

            const Eigen::VectorXd reduced = cost_.transpose() - duals_.transpose() * a_;
            const double scale = 1.0 + cost_.lpNorm<Eigen::Infinity>();
            const bool bland = degenerate_run >= opt_.bland_after;
            Eigen::Index entering = -1;
            double best = 0.0;
            double direction = 0.0;
            for (Eigen::Index j = 0; j < a_.cols(); ++j) {
                const Place pl = place_[static_cast<std::size_t>(j)];
                if (pl == Place::basic || lower_[j] == upper_[j]) continue;
                const double d = reduced[j];
                double dir = 0.0;
                if (pl == Place::lower && d < -opt_.optimality_tol * scale) dir = 1.0;
                else if (pl == Place::upper && d > opt_.optimality_tol * scale) dir = -1.0;
                else if (pl == Place::free_zero && std::abs(d) > opt_.optimality_tol * scale) dir = d < 0.0 ? 1.0 : -1.0;
                if (dir == 0.0) continue;
                if (bland) {
                    entering = j;
                    direction = dir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    entering = j;
                    direction = dir;
                }
            }
            if (entering < 0) return Status::optimal;
            ++iterations;

            const Eigen::VectorXd alpha = lu_.solve(a_.col(entering));
            double step = upper_[entering] - lower_[entering]; // bound flip distance (may be inf)
            Eigen::Index leaving_row = -1;
            bool leaves_at_upper = false;
            double leaving_pivot = 0.0;
            for (Eigen::Index i = 0; i < rows_; ++i) {
                const double rate = -direction * alpha[i];
                if (std::abs(rate) <= opt_.pivot_tol) continue;
                const Eigen::Index bj = basis_[static_cast<std::size_t>(i)];
                double limit = inf;
                bool at_upper = false;
                if (rate < 0.0 && std::isfinite(lower_[bj])) {
                    limit = std::max(0.0, (x_[bj] - lower_[bj]) / -rate);
                } else if (rate > 0.0 && std::isfinite(upper_[bj])) {
                    limit = std::max(0.0, (upper_[bj] - x_[bj]) / rate);
                    at_upper = true;
                }
                if (limit < step - 1e-14 ||
                    (leaving_row >= 0 && std::abs(limit - step) <= 1e-14 && std::abs(rate) > leaving_pivot)) {
                    step = limit;
                    leaving_row = i;
                    leaves_at_upper = at_upper;
                    leaving_pivot = std::abs(rate);
                }
            }
            if (!std::isfinite(step)) return Status::unbounded;
            degenerate_run = step <= 1e-13 ? degenerate_run + 1 : 0;

            if (leaving_row < 0) {
                // entering variable runs to its opposite bound
                x_[entering] = direction > 0.0 ? upper_[entering] : lower_[entering];
                place_[static_cast<std::size_t>(entering)] = direction > 0.0 ? Place::upper : Place::lower;
                continue;
            }
            const Eigen::Index leaving = basis_[static_cast<std::size_t>(leaving_row)];
            x_[entering] += direction * step;
            x_[leaving] = leaves_at_upper ? upper_[leaving] : lower_[leaving];
            place_[static_cast<std::size_t>(leaving)] = leaves_at_upper ? Place::upper : Place::lower;
            place_[static_cast<std::size_t>(entering)] = Place::basic;
            basis_[static_cast<std::size_t>(leaving_row)] = entering;
        }
    }

    Options opt_;
    Eigen::Index rows_;
    Eigen::Index cols_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    Eigen::VectorXd x_;
    Eigen::VectorXd cost_;
    Eigen::VectorXd original_cost_;
    Eigen::VectorXd duals_;
    std::vector<Place> place_;
    std::vector<Eigen::Index> basis_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

} // namespace detail

inline Result solve(const Problem& problem, const Options& options = {}) {
    detail::Solver solver(problem, options);
    return solver.run();
}

} // namespace perfspline::lp
