#include "hzreach/geom.hpp"

#include "hzreach/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hzreach {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

class SupportOracle {
public:
    SupportOracle(const HybridZonotope& leaf, const Matrix& plane)
        : leaf_(leaf), PG_(plane * Matrix(leaf.gen_cont())), pc_(plane * leaf.center()),
          lp_(leaf_problem(leaf, {}))
    {
    }

    Point2 support(const Point2& d)
    {
        if (leaf_.n_cont() == 0)
            return pc_;
        lp_.set_objective(-(PG_.transpose() * d));
        const SolveStatus st = lp_.solve();
        if (st != SolveStatus::optimal)
            throw SolverError("project_leaf_polygon: support LP failed (" + std::string(to_string(st)) + ")", st);
        const Vector xi = lp_.primal().cwiseMax(-1.0).cwiseMin(1.0);
        return PG_ * xi + pc_;
    }

private:
    const HybridZonotope& leaf_;
    Matrix PG_;
    Point2 pc_;
    BoundedSimplex lp_;
};

void refine(SupportOracle& oracle, const Point2& a, const Point2& b, double tol, int depth, std::vector<Point2>& out)
{
    const Point2 e = b - a;
    if (e.norm() <= tol || depth > 60)
        return;
    const Point2 normal(e.y(), -e.x());
    const Point2 p = oracle.support(normal);
    if (normal.dot(p - a) <= tol * normal.norm())
        return;
    out.push_back(p);
    refine(oracle, a, p, tol, depth + 1, out);
    refine(oracle, p, b, tol, depth + 1, out);
}

}  // namespace

HybridZonotope fix_binaries(const HybridZonotope& Z, const std::vector<signed char>& assignment)
{
    if (static_cast<Eigen::Index>(assignment.size()) != Z.n_bin())
        throw DimensionError("fix_binaries: assignment length differs from binary count");
    Vector xb(Z.n_bin());
    for (std::size_t k = 0; k < assignment.size(); ++k)
        xb(static_cast<Eigen::Index>(k)) = assignment[k];
    return {Z.center() + Z.gen_bin() * xb, Z.gen_cont(), SparseMatrix(Z.dim(), 0), Z.con_cont(),
            SparseMatrix(Z.n_cons(), 0), Z.con_rhs() - Z.con_bin() * xb};
}

std::vector<BinaryLeaf> enumerate_leaves(const HybridZonotope& Z, const LeafSettings& settings)
{
    if (static_cast<std::size_t>(Z.n_bin()) > settings.max_binaries)
        throw std::invalid_argument("enumerate_leaves: " + std::to_string(Z.n_bin()) + " binaries exceed the cap of " +
                                    std::to_string(settings.max_binaries) +
                                    "; use the emptiness search or verification instead");
    MilpSolver solver(detail::bounded_feasibility_problem(Z.con_cont(), Z.con_bin(), Z.con_rhs(), 1.0), settings.milp);
    std::vector<BinaryLeaf> out;
    for (FeasibleAssignment& a : solver.enumerate_feasible()) {
        HybridZonotope leaf = fix_binaries(Z, a.binary);
        out.push_back({std::move(a.binary), std::move(leaf)});
    }
    return out;
}

Polygon convex_hull(std::vector<Point2> p)
{
    std::sort(p.begin(), p.end(), [](const Point2& a, const Point2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3)
        return p;
    // Cross products are compared against a scale-aware threshold so that nearly collinear
    // support points from LP round-off do not survive as vertices.
    double scale = 0.0;
    for (const Point2& q : p)
        scale = std::max(scale, (q - p.front()).cwiseAbs().maxCoeff());
    const double eps = 1e-12 * scale * scale;

    Polygon h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= eps)
            --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= eps)
            --k;
        h[k++] = p[i - 1];
    }
    h.resize(k - 1);
    return h;
}

double polygon_area(const Polygon& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& u = poly[i];
        const Point2& w = poly[(i + 1) % poly.size()];
        a += u.x() * w.y() - w.x() * u.y();
    }
    return 0.5 * a;
}

Polygon project_leaf_polygon(const BinaryLeaf& leaf, const Matrix& plane, double angular_tol)
{
    if (plane.rows() != 2 || plane.cols() != leaf.set.dim())
        throw DimensionError("project_leaf_polygon: plane must be 2 x " + std::to_string(leaf.set.dim()));
    if (leaf.set.n_bin() != 0)
        throw std::invalid_argument("project_leaf_polygon: leaf still has binary generators");
    SupportOracle oracle(leaf.set, plane);

    const Point2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::vector<Point2> pts;
    for (const Point2& d : dirs)
        pts.push_back(oracle.support(d));
    const double diameter = std::max(pts[0].x() - pts[2].x(), pts[1].y() - pts[3].y());
    if (!(diameter > 0.0))
        return {pts[0]};
    const double tol = std::max(angular_tol * diameter, 1e-12);

    std::vector<Point2> all = pts;
    for (int i = 0; i < 4; ++i)
        refine(oracle, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>((i + 1) % 4)], tol, 0, all);
    return convex_hull(std::move(all));
}

PolygonSet hz_to_polygons(const HybridZonotope& Z, const Matrix& plane, double angular_tol,
                          const LeafSettings& settings)
{
    if (plane.rows() != 2 || plane.cols() != Z.dim())
        throw DimensionError("hz_to_polygons: plane must be 2 x " + std::to_string(Z.dim()));
    PolygonSet out;
    out.plane = plane;
    for (const BinaryLeaf& leaf : enumerate_leaves(Z, settings)) {
        out.polygons.push_back(project_leaf_polygon(leaf, plane, angular_tol));
        out.leaf_assignments.push_back(leaf.assignment);
    }
    return out;
}

Matrix coordinate_plane(Eigen::Index n, Eigen::Index i, Eigen::Index j)
{
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw std::invalid_argument("coordinate_plane: need two distinct coordinates below " + std::to_string(n));
    Matrix P = Matrix::Zero(2, n);
    P(0, i) = 1.0;
    P(1, j) = 1.0;
    return P;
}

}  // namespace hzreach
