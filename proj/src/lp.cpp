#include "hzreach/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hzreach {

void LpProblem::validate() const
{
    const Eigen::Index n = objective.size();
    const Eigen::Index m = eq_rhs.size();
    if (eq_matrix.rows() != m)
        throw DimensionError("LpProblem: eq_matrix rows must equal eq_rhs length");
    if (eq_matrix.cols() != n)
        throw DimensionError("LpProblem: eq_matrix columns must equal objective length");
    if (lower.size() != n || upper.size() != n)
        throw DimensionError("LpProblem: bound vectors must match objective length");
    for (Eigen::Index j = 0; j < n; ++j)
        if (lower(j) > upper(j))
            throw std::invalid_argument("LpProblem: lower bound exceeds upper bound for variable " +
                                        std::to_string(j));
}

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::node_limit: return "node-limit";
    case SolveStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

BoundedSimplex::BoundedSimplex(const LpProblem& problem, SimplexSettings settings) : settings_(settings)
{
    problem.validate();
    num_structural_ = problem.num_vars();
    rows_ = problem.num_rows();
    const Eigen::Index n = num_structural_;
    const Eigen::Index m = rows_;

    // Crash basis: per row, the singleton column with the largest entry.
    std::vector<Eigen::Index> crash(static_cast<std::size_t>(m), -1);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index row = -1;
        int count = 0;
        for (Eigen::Index i = 0; i < m && count < 2; ++i)
            if (problem.eq_matrix(i, j) != 0.0) {
                row = i;
                ++count;
            }
        if (count != 1)
            continue;
        auto& slot = crash[static_cast<std::size_t>(row)];
        if (slot < 0 || std::abs(problem.eq_matrix(row, j)) > std::abs(problem.eq_matrix(row, slot)))
            slot = j;
    }
    Eigen::Index artificials = 0;
    for (auto j : crash)
        if (j < 0)
            ++artificials;

    cols_ = n + artificials;
    original_ = Matrix::Zero(m, cols_);
    original_.leftCols(n) = problem.eq_matrix;
    rhs_ = problem.eq_rhs;
    cost_ = Vector::Zero(cols_);
    cost_.head(n) = problem.objective;
    lo_ = Vector::Zero(cols_);
    hi_ = Vector::Zero(cols_);
    lo_.head(n) = problem.lower;
    hi_.head(n) = problem.upper;

    basis_.assign(static_cast<std::size_t>(m), -1);
    row_of_.assign(static_cast<std::size_t>(cols_), -1);
    Eigen::Index next_art = n;
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index j = crash[static_cast<std::size_t>(i)];
        if (j < 0) {
            j = next_art++;
            original_(i, j) = 1.0;
        }
        basis_[static_cast<std::size_t>(i)] = j;
        row_of_[static_cast<std::size_t>(j)] = i;
    }

    // With an identity submatrix, B^-1 can be read off the tableau.
    unit_col_.assign(static_cast<std::size_t>(m), -1);
    Eigen::Index found = 0;
    for (Eigen::Index j = 0; j < cols_ && found < m; ++j) {
        Eigen::Index row = -1;
        int count = 0;
        for (Eigen::Index i = 0; i < m && count < 2; ++i)
            if (original_(i, j) != 0.0) {
                row = i;
                ++count;
            }
        if (count == 1 && original_(row, j) == 1.0 && unit_col_[static_cast<std::size_t>(row)] < 0) {
            unit_col_[static_cast<std::size_t>(row)] = j;
            ++found;
        }
    }
    if (found < m)
        unit_col_.clear();

    // B is diagonal for the crash basis.
    tableau_ = original_;
    beta_ = rhs_;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = original_(i, basis_[static_cast<std::size_t>(i)]);
        tableau_.row(i) /= d;
        beta_(i) /= d;
    }

    x_ = Vector::Zero(cols_);
    for (Eigen::Index j = 0; j < cols_; ++j) {
        if (std::isfinite(lo_(j)))
            x_(j) = lo_(j);
        else if (std::isfinite(hi_(j)))
            x_(j) = hi_(j);
    }
    recompute_basic_values();
}

void BoundedSimplex::recompute_basic_values()
{
    Vector xn = x_;
    for (auto j : basis_)
        xn(j) = 0.0;
    const Vector xb = beta_ - tableau_ * xn;
    for (Eigen::Index i = 0; i < rows_; ++i)
        x_(basis_[static_cast<std::size_t>(i)]) = xb(i);
}

void BoundedSimplex::refactor()
{
    pivots_since_refactor_ = 0;
    if (rows_ == 0)
        return;
    Matrix B(rows_, rows_);
    for (Eigen::Index i = 0; i < rows_; ++i)
        B.col(i) = original_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Matrix> lu(B);
    tableau_ = lu.solve(original_);
    beta_ = lu.solve(rhs_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
        const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
        tableau_.col(j).setZero();
        tableau_(i, j) = 1.0;
    }
    recompute_basic_values();
}

void BoundedSimplex::check_accuracy()
{
    pivots_since_refactor_ = 0;
    recompute_basic_values();
    const double scale = 1.0 + rhs_.lpNorm<Eigen::Infinity>();
    if (rows_ > 0 && (original_ * x_ - rhs_).lpNorm<Eigen::Infinity>() > 1e-9 * scale)
        refactor();
}

void BoundedSimplex::set_bounds(Eigen::Index var, double lower, double upper)
{
    if (var < 0 || var >= num_structural_)
        throw DimensionError("BoundedSimplex::set_bounds: variable index out of range");
    if (lower > upper)
        throw std::invalid_argument("BoundedSimplex::set_bounds: lower exceeds upper");
    lo_(var) = lower;
    hi_(var) = upper;
    if (row_of_[static_cast<std::size_t>(var)] >= 0)
        return;

    double v = std::clamp(x_(var), lower, upper);
    const bool at_bound = v == lower || v == upper;
    if (!at_bound && (std::isfinite(lower) || std::isfinite(upper))) {
        if (!std::isfinite(upper) || (std::isfinite(lower) && v - lower <= upper - v))
            v = lower;
        else
            v = upper;
    }
    const double delta = v - x_(var);
    if (delta != 0.0) {
        x_(var) = v;
        for (Eigen::Index i = 0; i < rows_; ++i)
            x_(basis_[static_cast<std::size_t>(i)]) -= tableau_(i, var) * delta;
    }
}

void BoundedSimplex::set_objective(const Vector& c)
{
    if (c.size() != num_structural_)
        throw DimensionError("BoundedSimplex::set_objective: length mismatch");
    cost_.head(num_structural_) = c;
}

void BoundedSimplex::set_rhs(const Vector& b)
{
    if (b.size() != rows_)
        throw DimensionError("BoundedSimplex::set_rhs: length mismatch");
    rhs_ = b;
    if (rows_ == 0)
        return;
    if (static_cast<Eigen::Index>(unit_col_.size()) == rows_) {
        beta_.setZero();
        for (Eigen::Index i = 0; i < rows_; ++i)
            beta_ += b(i) * tableau_.col(unit_col_[static_cast<std::size_t>(i)]);
        recompute_basic_values();
    } else {
        refactor();
    }
}

double BoundedSimplex::objective_value() const
{
    return cost_.dot(x_);
}

double BoundedSimplex::residual() const
{
    if (rows_ == 0)
        return 0.0;
    return (original_.leftCols(num_structural_) * x_.head(num_structural_) - rhs_).lpNorm<Eigen::Infinity>();
}

bool BoundedSimplex::basic_infeasible(Eigen::Index row, double& dir) const
{
    const Eigen::Index j = basis_[static_cast<std::size_t>(row)];
    const double tol = settings_.feasibility_tol;
    if (x_(j) < lo_(j) - tol) {
        dir = -1.0;
        return true;
    }
    if (x_(j) > hi_(j) + tol) {
        dir = 1.0;
        return true;
    }
    dir = 0.0;
    return false;
}

void BoundedSimplex::compute_reduced_costs(Phase phase, Vector& d) const
{
    // Only rows whose basic variable carries a cost contribute; typically there are few.
    if (phase == Phase::one)
        d.setZero(cols_);
    else
        d = cost_;
    for (Eigen::Index i = 0; i < rows_; ++i) {
        double w = 0.0;
        if (phase == Phase::one)
            basic_infeasible(i, w);
        else
            w = cost_(basis_[static_cast<std::size_t>(i)]);
        if (w != 0.0)
            d.noalias() -= w * tableau_.row(i).transpose();
    }
}

Eigen::Index BoundedSimplex::choose_entering(const Vector& d, bool bland, int& direction) const
{
    Eigen::Index best = -1;
    double best_score = 0.0;
    const double tol = settings_.optimality_tol;
    for (Eigen::Index j = 0; j < cols_; ++j) {
        if (row_of_[static_cast<std::size_t>(j)] >= 0 || lo_(j) == hi_(j))
            continue;
        const bool can_increase = x_(j) < hi_(j);
        const bool can_decrease = x_(j) > lo_(j);
        int dir = 0;
        if (d(j) < -tol && can_increase)
            dir = 1;
        else if (d(j) > tol && can_decrease)
            dir = -1;
        if (dir == 0)
            continue;
        if (bland) {
            direction = dir;
            return j;
        }
        if (std::abs(d(j)) > best_score) {
            best_score = std::abs(d(j));
            best = j;
            direction = dir;
        }
    }
    return best;
}

void BoundedSimplex::pivot(Eigen::Index row, Eigen::Index col)
{
    const double piv = tableau_(row, col);
    tableau_.row(row) /= piv;
    beta_(row) /= piv;

    Vector column = tableau_.col(col);
    column(row) = 0.0;
    const Eigen::RowVectorXd pivot_row = tableau_.row(row);
    for (Eigen::Index j = 0; j < cols_; ++j) {
        const double r = pivot_row(j);
        if (r != 0.0)
            tableau_.col(j) -= r * column;
    }
    beta_ -= beta_(row) * column;
    tableau_.col(col).setZero();
    tableau_(row, col) = 1.0;

    const Eigen::Index leaving = basis_[static_cast<std::size_t>(row)];
    row_of_[static_cast<std::size_t>(leaving)] = -1;
    basis_[static_cast<std::size_t>(row)] = col;
    row_of_[static_cast<std::size_t>(col)] = row;
    ++pivots_since_refactor_;
}

SolveStatus BoundedSimplex::iterate(Phase phase)
{
    const double ftol = settings_.feasibility_tol;
    const double ptol = settings_.ratio_tol;
    const std::size_t max_iter =
        static_cast<std::size_t>(settings_.iteration_factor) * static_cast<std::size_t>(rows_ + cols_ + 1);
    int degenerate = 0;
    bool bland = false;
    Vector d;

    for (std::size_t iter = 0;; ++iter) {
        if (iter > max_iter)
            return SolveStatus::numerical_failure;

        if (phase == Phase::one) {
            bool any = false;
            for (Eigen::Index i = 0; i < rows_ && !any; ++i) {
                double s;
                any = basic_infeasible(i, s);
            }
            if (!any)
                return SolveStatus::optimal;
        }

        if (pivots_since_refactor_ >= settings_.refactor_period)
            check_accuracy();

        compute_reduced_costs(phase, d);
        int dir = 0;
        const Eigen::Index q = choose_entering(d, bland, dir);
        if (q < 0)
            return phase == Phase::one ? SolveStatus::infeasible : SolveStatus::optimal;

        // Harris two-pass ratio test.
        double theta_max = kInf;
        const double range = hi_(q) - lo_(q);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double alpha = tableau_(i, q);
            if (std::abs(alpha) <= ptol)
                continue;
            const double rate = -dir * alpha;
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            const double v = x_(j);
            double limit = kInf;
            if (v < lo_(j) - ftol) {
                if (rate > 0)
                    limit = (lo_(j) - v + ftol) / rate;
            } else if (v > hi_(j) + ftol) {
                if (rate < 0)
                    limit = (v - hi_(j) + ftol) / -rate;
            } else if (rate > 0) {
                if (std::isfinite(hi_(j)))
                    limit = (hi_(j) - v + ftol) / rate;
            } else if (std::isfinite(lo_(j))) {
                limit = (v - lo_(j) + ftol) / -rate;
            }
            theta_max = std::min(theta_max, limit);
        }

        Eigen::Index leave_row = -1;
        double leave_theta = kInf;
        double leave_target = 0.0;
        double best_alpha = 0.0;
        if (std::isfinite(theta_max)) {
            for (Eigen::Index i = 0; i < rows_; ++i) {
                const double alpha = tableau_(i, q);
                if (std::abs(alpha) <= ptol)
                    continue;
                const double rate = -dir * alpha;
                const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
                const double v = x_(j);
                double dist = kInf, target = 0.0;
                if (v < lo_(j) - ftol) {
                    if (rate > 0) {
                        dist = lo_(j) - v;
                        target = lo_(j);
                    }
                } else if (v > hi_(j) + ftol) {
                    if (rate < 0) {
                        dist = v - hi_(j);
                        target = hi_(j);
                    }
                } else if (rate > 0) {
                    if (std::isfinite(hi_(j))) {
                        dist = hi_(j) - v;
                        target = hi_(j);
                    }
                } else if (std::isfinite(lo_(j))) {
                    dist = v - lo_(j);
                    target = lo_(j);
                }
                if (!std::isfinite(dist))
                    continue;
                const double ratio = std::max(dist, 0.0) / std::abs(rate);
                if (ratio > theta_max)
                    continue;
                const bool better = bland ? (leave_row < 0 || j < basis_[static_cast<std::size_t>(leave_row)])
                                          : std::abs(alpha) > best_alpha;
                if (better) {
                    best_alpha = std::abs(alpha);
                    leave_row = i;
                    leave_theta = ratio;
                    leave_target = target;
                }
            }
        }

        if (leave_row < 0 && !std::isfinite(range))
            return phase == Phase::one ? SolveStatus::numerical_failure : SolveStatus::unbounded;

        const bool flip = std::isfinite(range) && (leave_row < 0 || range <= leave_theta);
        const double theta = flip ? range : leave_theta;

        degenerate = theta <= 1e-12 ? degenerate + 1 : 0;
        bland = degenerate > settings_.degenerate_limit;

        if (theta != 0.0) {
            x_(q) += dir * theta;
            for (Eigen::Index i = 0; i < rows_; ++i)
                x_(basis_[static_cast<std::size_t>(i)]) -= dir * theta * tableau_(i, q);
        }
        ++iterations_;
        if (flip) {
            x_(q) = dir > 0 ? hi_(q) : lo_(q);
            continue;
        }
        const Eigen::Index leaving = basis_[static_cast<std::size_t>(leave_row)];
        pivot(leave_row, q);
        x_(leaving) = leave_target;
    }
}

SolveStatus BoundedSimplex::solve()
{
    for (int attempt = 0; attempt < 3; ++attempt) {
        SolveStatus s = iterate(Phase::one);
        if (s != SolveStatus::optimal)
            return s;
        s = iterate(Phase::two);
        if (s != SolveStatus::optimal)
            return s;

        // Accept only if the recomputed basic values are still feasible.
        if (attempt == 0)
            recompute_basic_values();
        else
            refactor();
        bool feasible = true;
        for (Eigen::Index i = 0; i < rows_ && feasible; ++i) {
            double dir;
            feasible = !basic_infeasible(i, dir);
        }
        if (feasible && residual() <= 1e-6 * (1.0 + rhs_.lpNorm<Eigen::Infinity>()))
            return SolveStatus::optimal;
    }
    return SolveStatus::numerical_failure;
}

SolveReport solve_lp(const LpProblem& problem, SimplexSettings settings)
{
    const auto start = std::chrono::steady_clock::now();
    BoundedSimplex simplex(problem, settings);
    SolveReport report;
    report.status = simplex.solve();
    report.nodes = 1;
    report.iterations = simplex.iterations();
    if (report.status == SolveStatus::optimal) {
        report.witness = simplex.primal();
        report.objective = simplex.objective_value();
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace hzreach
