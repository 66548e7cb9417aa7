#pragma once

#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/optim.hpp"

#include <Eigen/Core>

#include <vector>

namespace hzreach {

/// One feasible binary assignment and the constrained zonotope it induces (n_b = 0).
struct BinaryLeaf {
    std::vector<signed char> assignment;
    HybridZonotope set;
};

struct LeafSettings {
    /// Refuse sets with more binaries than this.
    std::size_t max_binaries = 25;
    MilpSettings milp;
};

/// Constrained zonotope < Gc, c + Gb xi_b, Ac, b - Ab xi_b > for a fixed xi_b.
HybridZonotope fix_binaries(const HybridZonotope& Z, const std::vector<signed char>& assignment);

/// Feasible leaves of Z, found depth-first with LP pruning (-1 branch first).
std::vector<BinaryLeaf> enumerate_leaves(const HybridZonotope& Z, const LeafSettings& settings = {});

using Point2 = Eigen::Vector2d;
/// Convex polygon, vertices counterclockwise. Points and segments have 1 and 2 vertices.
using Polygon = std::vector<Point2>;

struct PolygonSet {
    Matrix plane;  ///< 2 x n projection
    std::vector<Polygon> polygons;
    std::vector<std::vector<signed char>> leaf_assignments;
};

/// Counterclockwise convex hull without collinear points.
Polygon convex_hull(std::vector<Point2> points);

double polygon_area(const Polygon& polygon);

/**
 * Projection of a nonempty leaf onto `plane` by a support-function sweep. Arcs between
 * known support points are bisected until the new support point lies within
 * angular_tol * diameter of the chord.
 */
Polygon project_leaf_polygon(const BinaryLeaf& leaf, const Matrix& plane, double angular_tol = 1e-4);

/// Leaves of Z projected one by one; polygons are not merged.
PolygonSet hz_to_polygons(const HybridZonotope& Z, const Matrix& plane, double angular_tol = 1e-4,
                          const LeafSettings& settings = {});

/// The 2 x n matrix selecting coordinates i and j.
Matrix coordinate_plane(Eigen::Index n, Eigen::Index i = 0, Eigen::Index j = 1);

}  // namespace hzreach
