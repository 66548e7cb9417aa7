#pragma once

#include "hzreach/hybrid_zonotope.hpp"

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace hzreach {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min c'x  s.t.  A x = b,  lower <= x <= upper  (bounds may be infinite).
struct LpProblem {
    Vector objective;
    Matrix eq_matrix;
    Vector eq_rhs;
    Vector lower;
    Vector upper;

    Eigen::Index num_vars() const { return objective.size(); }
    Eigen::Index num_rows() const { return eq_rhs.size(); }
    /// Throws DimensionError if the pieces do not fit together.
    void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, node_limit, numerical_failure };

std::string_view to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::numerical_failure;
    double objective = kInf;
    Vector witness;  // empty unless status == optimal
    std::size_t nodes = 0;
    std::size_t iterations = 0;
    double wall_seconds = 0.0;

    bool optimal() const { return status == SolveStatus::optimal; }
};

/// Raised when a solve cannot reach a decision (node limit or numerical trouble).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, SolveStatus status) : std::runtime_error(what), status_(status) {}
    SolveStatus status() const { return status_; }

private:
    SolveStatus status_;
};

struct SimplexSettings {
    double feasibility_tol = 1e-7;
    double ratio_tol = 1e-9;
    double optimality_tol = 1e-9;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int degenerate_limit = 50;
    /// Pivots between accuracy checks; the tableau is refactorized when the check fails.
    int refactor_period = 100;
    /// Hard cap on pivots per solve() call, as a multiple of (rows + columns).
    int iteration_factor = 50;
};

/**
 * Dense bounded-variable primal simplex.
 *
 * Keeps the tableau B^-1 [A | b] for the current basis. Any basis is a valid starting
 * point: phase 1 minimizes the sum of bound violations of basic variables, so bounds and
 * costs may be changed between solves and the next solve resumes from the last basis.
 * Rows that have no singleton column for the crash basis get an artificial column fixed
 * at zero.
 */
class BoundedSimplex {
public:
    explicit BoundedSimplex(const LpProblem& problem, SimplexSettings settings = {});

    SolveStatus solve();

    void set_bounds(Eigen::Index var, double lower, double upper);
    void set_objective(const Vector& c);
    /// Replace the equality right-hand side and recompute basic values for the current basis.
    void set_rhs(const Vector& b);

    double lower(Eigen::Index var) const { return lo_(var); }
    double upper(Eigen::Index var) const { return hi_(var); }

    /// Values of the structural variables.
    Vector primal() const { return x_.head(num_structural_); }
    double value(Eigen::Index var) const { return x_(var); }
    double objective_value() const;
    std::size_t iterations() const { return iterations_; }
    Eigen::Index num_structural() const { return num_structural_; }

    /// Max-norm residual of A x - b over the original structural columns.
    double residual() const;

private:
    enum class Phase { one, two };

    void refactor();
    void check_accuracy();
    void recompute_basic_values();
    bool basic_infeasible(Eigen::Index row, double& dir) const;
    void compute_reduced_costs(Phase phase, Vector& d) const;
    Eigen::Index choose_entering(const Vector& d, bool bland, int& direction) const;
    SolveStatus iterate(Phase phase);
    void pivot(Eigen::Index row, Eigen::Index col);

    SimplexSettings settings_;
    Eigen::Index num_structural_ = 0;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;

    Matrix original_;  // [A | artificial columns]
    Vector rhs_;
    Vector cost_;
    Vector lo_, hi_;

    Matrix tableau_;  // B^-1 original_
    Vector beta_;     // B^-1 rhs_
    Vector x_;
    std::vector<Eigen::Index> basis_;    // basic variable per row
    std::vector<Eigen::Index> row_of_;   // row of basic variable, -1 if nonbasic
    std::vector<Eigen::Index> unit_col_; // column equal to e_i for row i, if every row has one
    int pivots_since_refactor_ = 0;
    std::size_t iterations_ = 0;
};

/// One-shot solve of an LP.
SolveReport solve_lp(const LpProblem& problem, SimplexSettings settings = {});

}  // namespace hzreach
