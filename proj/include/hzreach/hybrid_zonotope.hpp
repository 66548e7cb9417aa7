#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace hzreach {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Raised when matrix or vector shapes do not fit together.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Default absolute tolerance on equality residuals and factor bounds.
inline constexpr double kMembershipTol = 1e-6;

/// Factor-space point (xi_c, xi_b) of a hybrid zonotope.
struct FactorPoint {
    Vector xi_cont;
    Vector xi_bin;
};

/// Axis-aligned box, lower <= upper componentwise.
struct IntervalBox {
    Vector lower;
    Vector upper;

    Eigen::Index dim() const { return lower.size(); }
    bool contains(const Vector& x, double tol = 0.0) const;
    bool contains(const IntervalBox& other, double tol = 0.0) const;
};

/// Set complexity (continuous generators, binary generators, equality constraints).
struct Complexity {
    Eigen::Index n_g = 0;
    Eigen::Index n_b = 0;
    Eigen::Index n_c = 0;

    friend bool operator==(const Complexity&, const Complexity&) = default;
};

/**
 * Hybrid zonotope
 *
 *   Z = { Gc xi_c + Gb xi_b + c : ||xi_c||_inf <= 1, xi_b in {-1,1}^nb, Ac xi_c + Ab xi_b = b }.
 *
 * Values are immutable once constructed. Empty (zero-row or zero-column) blocks are
 * stored as such so that generator and constraint counts stay exact. Matrices are kept
 * sparse: graph sets of ReLU networks and their backward reachable sets are block
 * structured and mostly zero.
 */
class HybridZonotope {
public:
    HybridZonotope() = default;
    HybridZonotope(Vector center, SparseMatrix gen_cont, SparseMatrix gen_bin, SparseMatrix con_cont,
                   SparseMatrix con_bin, Vector con_rhs);

    /// Zonotope { G xi + c : ||xi||_inf <= 1 }.
    static HybridZonotope zonotope(const Vector& center, const Matrix& generators);
    /// Axis-aligned box [lower, upper].
    static HybridZonotope box(const Vector& lower, const Vector& upper);
    /// Singleton {p}.
    static HybridZonotope point(const Vector& p);
    /// A set of dimension n that is empty by construction (single infeasible constraint xi = 2).
    static HybridZonotope empty_set(Eigen::Index n);

    Eigen::Index dim() const { return center_.size(); }
    Eigen::Index n_cont() const { return gen_cont_.cols(); }
    Eigen::Index n_bin() const { return gen_bin_.cols(); }
    Eigen::Index n_cons() const { return con_cont_.rows(); }
    Complexity complexity() const { return {n_cont(), n_bin(), n_cons()}; }

    const Vector& center() const { return center_; }
    const SparseMatrix& gen_cont() const { return gen_cont_; }
    const SparseMatrix& gen_bin() const { return gen_bin_; }
    const SparseMatrix& con_cont() const { return con_cont_; }
    const SparseMatrix& con_bin() const { return con_bin_; }
    const Vector& con_rhs() const { return con_rhs_; }

    /// Exact structural equality of every matrix and vector.
    bool structurally_equal(const HybridZonotope& other) const;

private:
    Vector center_;
    SparseMatrix gen_cont_;
    SparseMatrix gen_bin_;
    SparseMatrix con_cont_;
    SparseMatrix con_bin_;
    Vector con_rhs_;
};

/// Validating constructor from dense blocks. Throws DimensionError naming the offending pair.
HybridZonotope make_hz(const Vector& center, const Matrix& gen_cont, const Matrix& gen_bin, const Matrix& con_cont,
                       const Matrix& con_bin, const Vector& con_rhs);

/// { R x : x in Z }.
HybridZonotope linear_map(const Matrix& R, const HybridZonotope& Z);
HybridZonotope linear_map(const SparseMatrix& R, const HybridZonotope& Z);

/// { x + t : x in Z }.
HybridZonotope translate(const HybridZonotope& Z, const Vector& t);

/// { x in Z1 : R x in Z2 }. Factors are ordered [Z1 factors, Z2 factors].
HybridZonotope generalized_intersection(const HybridZonotope& Z1, const Matrix& R, const HybridZonotope& Z2);
HybridZonotope generalized_intersection(const HybridZonotope& Z1, const SparseMatrix& R, const HybridZonotope& Z2);

/// Z1 x Z2 with block-diagonal generators and constraints.
HybridZonotope cartesian_product(const HybridZonotope& Z1, const HybridZonotope& Z2);

/// Z x ... x Z (k times). k must be positive.
HybridZonotope cartesian_power(const HybridZonotope& Z, int k);

/// Gc xi_c + Gb xi_b + c, after checking bounds and the equality residual against tol.
Vector realize(const HybridZonotope& Z, const FactorPoint& p, double tol = kMembershipTol);

/// Max-norm residual of the equality constraints at p.
double constraint_residual(const HybridZonotope& Z, const FactorPoint& p);

/// Conservative box enclosure ignoring the equality constraints.
IntervalBox interval_enclosure(const HybridZonotope& Z);

/// Point membership. Solves a feasibility MILP unless the enclosure already excludes x.
/// Throws SolverError (see optim.hpp) when the search cannot decide.
bool contains_point(const HybridZonotope& Z, const Vector& x, double tol = kMembershipTol);

namespace detail {

/// Assemble a rows x cols sparse matrix from blocks placed at (row, col) offsets.
struct Block {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    const SparseMatrix* mat = nullptr;
    double scale = 1.0;
};
SparseMatrix assemble(Eigen::Index rows, Eigen::Index cols, std::initializer_list<Block> blocks);

SparseMatrix to_sparse(const Matrix& m);
SparseMatrix identity(Eigen::Index n);
SparseMatrix select_rows(const SparseMatrix& m, Eigen::Index first, Eigen::Index count);
SparseMatrix permute_columns(const SparseMatrix& m, const std::vector<Eigen::Index>& order);

}  // namespace detail

}  // namespace hzreach
