#pragma once

#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/lp.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hzreach {

/// LP plus a set of variables restricted to {-1, 1}. In the relaxation those
/// variables carry bounds [-1, 1].
struct MilpProblem {
    LpProblem relaxation;
    std::vector<Eigen::Index> binary;

    void validate() const;
};

enum class SearchMode {
    optimize,        ///< best objective, best-bound pruning
    first_feasible,  ///< stop at the first integer-feasible node
};

enum class BranchRule {
    most_fractional,   ///< binary with |x| closest to 0, lowest index on ties
    first_fractional,  ///< lowest-index fractional binary
};

struct MilpSettings {
    std::size_t node_limit = 1'000'000;
    BranchRule branching = BranchRule::most_fractional;
    double integrality_tol = 1e-9;
    SearchMode mode = SearchMode::optimize;
    bool record_tree = false;
    SimplexSettings lp;
};

/// Defaults for pure feasibility searches (membership, pattern probes): stop at the first
/// integral node and dive on the first fractional binary.
inline MilpSettings feasibility_search_settings()
{
    MilpSettings s;
    s.mode = SearchMode::first_feasible;
    s.branching = BranchRule::first_fractional;
    return s;
}

/// One solved node of the search tree (bound is +inf for infeasible relaxations).
struct NodeRecord {
    std::size_t id = 0;
    std::size_t parent = 0;  // equals id for the root
    int depth = 0;
    double bound = kInf;
};

struct MilpReport : SolveReport {
    std::vector<NodeRecord> tree;
};

/// A feasible binary assignment found by exhaustive search, with an LP witness.
struct FeasibleAssignment {
    std::vector<signed char> binary;  // +-1 per binary variable, in MilpProblem::binary order
    Vector witness;
};

/**
 * Depth-first branch and bound over {-1,1} variables.
 *
 * Branches per MilpSettings::branching, explores the -1 child before the +1 child, and picks
 * the deepest open node with the best parent bound. All node relaxations share one simplex
 * tableau and resume from the previous basis.
 */
class MilpSolver {
public:
    MilpSolver(MilpProblem problem, MilpSettings settings = {});

    MilpReport solve();
    /// Search only below the partial assignment root (entries -1/+1 fixed, 0 free).
    MilpReport solve(const std::vector<signed char>& root);

    /// Every assignment of the binaries whose relaxation is feasible. Subtrees whose
    /// relaxation is infeasible are pruned. Throws SolverError past node_limit.
    std::vector<FeasibleAssignment> enumerate_feasible(std::size_t* nodes = nullptr);

    /// Replace the equality right-hand side; the basis is kept.
    void set_rhs(const Vector& rhs);
    void set_objective(const Vector& c);
    const MilpProblem& problem() const { return problem_; }
    MilpSettings& settings() { return settings_; }

private:
    void apply_fixings(const std::vector<signed char>& fix);
    std::ptrdiff_t choose_branch(const std::vector<signed char>& fix, double tol, bool& rounded) const;
    SolveStatus solve_node(const std::vector<signed char>& fix);

    MilpProblem problem_;
    MilpSettings settings_;
    BoundedSimplex lp_;
};

MilpReport solve_milp(const MilpProblem& problem, const MilpSettings& settings = {});

// ---------------------------------------------------------------------------------------
// Hybrid-zonotope programs. Witness vectors list xi_c first, then xi_b, then auxiliaries.

/// min ||xi_c||_inf  s.t.  Ac xi_c + Ab xi_b = b,  xi_b in {-1,1}^nb.
/// The set is nonempty iff the optimum is at most 1.
MilpReport solve_milp_min_infnorm(const HybridZonotope& Z, const MilpSettings& settings = {});

/// Split a witness into its factor point.
FactorPoint factor_witness(const HybridZonotope& Z, const Vector& witness);

struct EmptinessSettings {
    /// Optimum above 1 + strict_tol is treated as empty; ties count as nonempty.
    double strict_tol = 1e-9;
    MilpSettings milp;
};

/**
 * Emptiness decision. Searches for a factor point with ||xi_c||_inf <= 1 + strict_tol,
 * which holds exactly when the min-norm optimum is within the same threshold, and stops
 * at the first one found. Throws SolverError when the search is cut short.
 */
bool is_empty(const HybridZonotope& Z, const EmptinessSettings& settings = {});

/// Same decision, also returning a feasible factor point when nonempty.
std::optional<FactorPoint> find_feasible_factor(const HybridZonotope& Z, const EmptinessSettings& settings = {});

/// Binary generators (and their constraint columns) become continuous ones; n_b = 0.
HybridZonotope relax_to_lp(const HybridZonotope& Z);

struct VerifySettings {
    double strict_tol = 1e-9;
    /// Also solve the min-norm program for the exact optimum (slower: adds 2 n_g rows).
    bool compute_optimum = false;
    MilpSettings milp;
};

struct AvoidanceResult {
    bool safe = true;
    std::optional<double> optimum;      ///< min ||xi_c||_inf when computed (infinite if infeasible)
    std::optional<Vector> witness_state;  ///< a state in both sets when unsafe
    std::optional<FactorPoint> witness;   ///< factors of the stacked program when unsafe
    std::size_t nodes = 0;
    double wall_seconds = 0.0;
};

/**
 * Intersection test between a backward reachable set P_t and an initial set X0 through
 * the stacked program
 *
 *   [Ac_t 0; 0 Ac_0; Gc_t -Gc_0] xi_c + [Ab_t 0; 0 Ab_0; Gb_t -Gb_0] xi_b = [b_t; b_0; c_0 - c_t].
 *
 * safe is true iff the min-norm optimum exceeds 1 (+ strict_tol).
 */
AvoidanceResult verify_avoidance(const HybridZonotope& Pt, const HybridZonotope& X0,
                                 const VerifySettings& settings = {});

struct HorizonStep {
    int t = 0;
    AvoidanceResult result;
};

struct HorizonReport {
    std::vector<HorizonStep> steps;
    bool safe = true;
    std::optional<int> first_unsafe;
    double wall_seconds = 0.0;
};

/// verify_avoidance for t = 1..T over brs[0..T-1] = P_1..P_T.
HorizonReport verify_horizon(std::span<const HybridZonotope> brs, const HybridZonotope& X0,
                             const VerifySettings& settings = {});

/**
 * Repeated membership queries against one set. The MILP is assembled once; each query only
 * changes the right-hand side and resumes from the previous basis.
 */
class MembershipOracle {
public:
    explicit MembershipOracle(const HybridZonotope& Z, double tol = kMembershipTol,
                              MilpSettings settings = feasibility_search_settings());

    bool contains(const Vector& x);
    /// Factor point realizing x (within tol) if x is a member.
    std::optional<FactorPoint> witness(const Vector& x);
    /// As witness(x), but first searches below a partial binary assignment (0 = free) and
    /// falls back to the full search when that subtree holds no witness.
    std::optional<FactorPoint> witness(const Vector& x, const std::vector<signed char>& hint);
    std::size_t nodes() const { return nodes_; }

private:
    HybridZonotope set_;
    double tol_;
    IntervalBox enclosure_;
    MilpSolver solver_;
    std::size_t nodes_ = 0;
};

namespace detail {

/// Min-norm program over the constraint triple (Ac, Ab, b).
MilpProblem min_infnorm_problem(const SparseMatrix& Ac, const SparseMatrix& Ab, const Vector& b);
/// Feasibility program with ||xi_c||_inf <= bound.
MilpProblem bounded_feasibility_problem(const SparseMatrix& Ac, const SparseMatrix& Ab, const Vector& b, double bound);

}  // namespace detail

}  // namespace hzreach
