#include "oracles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

namespace {

// Reduced row echelon form of [A | b]; returns false if the system is inconsistent.
bool reduce_rows(Matrix& A, Vector& b, double tol)
{
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < n && r < m; ++j) {
        Eigen::Index p;
        const double piv = A.col(j).segment(r, m - r).cwiseAbs().maxCoeff(&p);
        if (piv <= tol)
            continue;
        p += r;
        A.row(r).swap(A.row(p));
        std::swap(b(r), b(p));
        const double d = A(r, j);
        A.row(r) /= d;
        b(r) /= d;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == r)
                continue;
            const double f = A(i, j);
            if (f != 0.0) {
                A.row(i) -= f * A.row(r);
                b(i) -= f * b(r);
            }
        }
        ++r;
    }
    for (Eigen::Index i = r; i < m; ++i)
        if (std::abs(b(i)) > 1e-7)
            return false;
    A.conservativeResize(r, n);
    b.conservativeResize(r);
    return true;
}

// Calls f(x) for every basic solution of A x = b with nonbasic variables at a bound.
template <class F>
void for_each_vertex(const Matrix& A, const Vector& b, const Vector& lo, const Vector& hi, double tol, F&& f)
{
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    std::vector<int> pick(static_cast<std::size_t>(n), 0);
    std::fill(pick.end() - m, pick.end(), 1);
    do {
        std::vector<Eigen::Index> basic, nonbasic;
        for (Eigen::Index j = 0; j < n; ++j)
            (pick[static_cast<std::size_t>(j)] ? basic : nonbasic).push_back(j);
        Matrix B(m, m);
        for (Eigen::Index k = 0; k < m; ++k)
            B.col(k) = A.col(basic[static_cast<std::size_t>(k)]);
        Eigen::FullPivLU<Matrix> lu(B);
        if (m > 0 && lu.rank() < m)
            continue;
        const std::size_t nn = nonbasic.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << nn); ++mask) {
            Vector x = Vector::Zero(n);
            Vector rhs = b;
            for (std::size_t k = 0; k < nn; ++k) {
                const Eigen::Index j = nonbasic[k];
                x(j) = (mask >> k) & 1u ? hi(j) : lo(j);
                rhs -= A.col(j) * x(j);
            }
            if (m > 0) {
                const Vector xb = lu.solve(rhs);
                for (Eigen::Index k = 0; k < m; ++k)
                    x(basic[static_cast<std::size_t>(k)]) = xb(k);
            }
            bool ok = true;
            for (Eigen::Index j = 0; j < n && ok; ++j)
                ok = x(j) >= lo(j) - tol && x(j) <= hi(j) + tol;
            if (ok)
                f(x);
        }
    } while (std::next_permutation(pick.begin(), pick.end()));
}

Matrix dense(const hzreach::SparseMatrix& m)
{
    return Matrix(m);
}

}  // namespace

std::optional<double> lp_vertex_min(const hzreach::LpProblem& p, double tol)
{
    Matrix A = p.eq_matrix;
    Vector b = p.eq_rhs;
    if (!reduce_rows(A, b, 1e-12))
        return std::nullopt;
    std::optional<double> best;
    for_each_vertex(A, b, p.lower, p.upper, tol, [&](const Vector& x) {
        const double v = p.objective.dot(x);
        if (!best || v < *best)
            best = v;
    });
    return best;
}

bool box_feasible(const Matrix& A0, const Vector& b0, double bound, double tol)
{
    Matrix A = A0;
    Vector b = b0;
    if (!reduce_rows(A, b, 1e-12))
        return false;
    const Vector lo = Vector::Constant(A.cols(), -bound);
    const Vector hi = Vector::Constant(A.cols(), bound);
    bool found = false;
    for_each_vertex(A, b, lo, hi, tol, [&](const Vector&) { found = true; });
    return found;
}

std::vector<std::vector<signed char>> feasible_patterns(const HybridZonotope& Z, double tol)
{
    const Matrix Ac = dense(Z.con_cont());
    const Matrix Ab = dense(Z.con_bin());
    const Eigen::Index nb = Z.n_bin();
    std::vector<std::vector<signed char>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << nb); ++mask) {
        std::vector<signed char> s(static_cast<std::size_t>(nb));
        Vector xb(nb);
        // Bit k set means +1; iterate so that the pattern order is lexicographic with -1 first.
        for (Eigen::Index k = 0; k < nb; ++k) {
            const bool plus = (mask >> (nb - 1 - k)) & 1u;
            s[static_cast<std::size_t>(k)] = plus ? 1 : -1;
            xb(k) = plus ? 1.0 : -1.0;
        }
        if (box_feasible(Ac, Z.con_rhs() - Ab * xb, 1.0, tol))
            out.push_back(s);
    }
    return out;
}

bool empty_by_enumeration(const HybridZonotope& Z, double tol)
{
    return feasible_patterns(Z, tol).empty();
}

HybridZonotope random_hz(std::mt19937_64& rng, Eigen::Index n, Eigen::Index ng, Eigen::Index nb, Eigen::Index nc,
                         double reach)
{
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto gauss = [&](Eigen::Index r, Eigen::Index c) {
        Matrix M(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                M(i, j) = N(rng);
        return M;
    };
    const Matrix Gc = gauss(n, ng);
    const Matrix Gb = gauss(n, nb);
    const Matrix Ac = gauss(nc, ng);
    const Matrix Ab = gauss(nc, nb);
    Vector c(n);
    for (Eigen::Index i = 0; i < n; ++i)
        c(i) = N(rng);
    Vector xc(ng), xb(nb);
    for (Eigen::Index j = 0; j < ng; ++j)
        xc(j) = reach * U(rng);
    for (Eigen::Index j = 0; j < nb; ++j)
        xb(j) = U(rng) < 0 ? -1.0 : 1.0;
    const Vector b = Ac * xc + Ab * xb;
    return hzreach::make_hz(c, Gc, Gb, Ac, Ab, b);
}

hzreach::FeedforwardNetwork random_network(std::mt19937_64& rng, const std::vector<int>& widths)
{
    std::normal_distribution<double> N(0.0, 1.0);
    hzreach::FeedforwardNetwork net;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        Matrix W(widths[k + 1], widths[k]);
        Vector v(widths[k + 1]);
        const double s = 1.0 / std::sqrt(static_cast<double>(widths[k]));
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index j = 0; j < W.cols(); ++j)
                W(i, j) = s * N(rng);
            v(i) = 0.3 * N(rng);
        }
        net.weights.push_back(W);
        net.biases.push_back(v);
    }
    return net;
}

Vector uniform_in_box(std::mt19937_64& rng, const Vector& lower, const Vector& upper)
{
    Vector x(lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = std::uniform_real_distribution<double>(lower(i), upper(i))(rng);
    return x;
}

double hull_area(std::vector<Eigen::Vector2d> p)
{
    if (p.size() < 3)
        return 0.0;
    std::sort(p.begin(), p.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0)
            --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0)
            --k;
        h[k++] = p[i - 1];
    }
    h.resize(k - 1);
    double a = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& u = h[i];
        const auto& w = h[(i + 1) % h.size()];
        a += u.x() * w.y() - w.x() * u.y();
    }
    return 0.5 * std::abs(a);
}

double monte_carlo_zonotope_area(std::mt19937_64& rng, const Matrix& plane, const Matrix& G, std::size_t samples)
{
    const Matrix PG = plane * G;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Vector xi(G.cols());
        for (Eigen::Index j = 0; j < xi.size(); ++j) {
            const double u = U(rng);
            xi(j) = s % 2 == 0 ? (u < 0 ? -1.0 : 1.0) : u;
        }
        pts.emplace_back(PG * xi);
    }
    return hull_area(std::move(pts));
}

double zonotope_area_2d(const Matrix& G)
{
    double a = 0.0;
    for (Eigen::Index i = 0; i < G.cols(); ++i)
        for (Eigen::Index j = i + 1; j < G.cols(); ++j)
            a += std::abs(G(0, i) * G(1, j) - G(1, i) * G(0, j));
    return 4.0 * a;
}

}  // namespace oracle
