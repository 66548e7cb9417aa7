#include "hzreach/hybrid_zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace hzreach {

namespace {

[[noreturn]] void dimension_error(const std::string& what, Eigen::Index lhs, Eigen::Index rhs)
{
    std::ostringstream os;
    os << what << " (" << lhs << " vs " << rhs << ")";
    throw DimensionError(os.str());
}

void check(bool ok, const std::string& what, Eigen::Index lhs, Eigen::Index rhs)
{
    if (!ok)
        dimension_error(what, lhs, rhs);
}

}  // namespace

namespace detail {

SparseMatrix assemble(Eigen::Index rows, Eigen::Index cols, std::initializer_list<Block> blocks)
{
    std::vector<Eigen::Triplet<double>> triplets;
    std::size_t nnz = 0;
    for (const Block& blk : blocks)
        if (blk.mat)
            nnz += static_cast<std::size_t>(blk.mat->nonZeros());
    triplets.reserve(nnz);

    for (const Block& blk : blocks) {
        if (!blk.mat)
            continue;
        const SparseMatrix& m = *blk.mat;
        if (blk.row + m.rows() > rows || blk.col + m.cols() > cols)
            throw DimensionError("assemble: block exceeds target shape");
        for (Eigen::Index j = 0; j < m.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(m, j); it; ++it)
                triplets.emplace_back(blk.row + it.row(), blk.col + it.col(), blk.scale * it.value());
    }
    SparseMatrix out(rows, cols);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

SparseMatrix to_sparse(const Matrix& m)
{
    SparseMatrix s = m.sparseView(0.0, 0.0);
    s.makeCompressed();
    return s;
}

SparseMatrix identity(Eigen::Index n)
{
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

SparseMatrix select_rows(const SparseMatrix& m, Eigen::Index first, Eigen::Index count)
{
    if (first < 0 || count < 0 || first + count > m.rows())
        throw DimensionError("select_rows: row range out of bounds");
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it)
            if (it.row() >= first && it.row() < first + count)
                triplets.emplace_back(it.row() - first, it.col(), it.value());
    SparseMatrix out(count, m.cols());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

SparseMatrix permute_columns(const SparseMatrix& m, const std::vector<Eigen::Index>& order)
{
    if (static_cast<Eigen::Index>(order.size()) != m.cols())
        throw DimensionError("permute_columns: order length differs from column count");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(order.size()); ++j)
        for (SparseMatrix::InnerIterator it(m, order[static_cast<std::size_t>(j)]); it; ++it)
            triplets.emplace_back(it.row(), j, it.value());
    SparseMatrix out(m.rows(), m.cols());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

}  // namespace detail

bool IntervalBox::contains(const Vector& x, double tol) const
{
    if (x.size() != lower.size())
        dimension_error("IntervalBox::contains: point dimension", x.size(), lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < lower(i) - tol || x(i) > upper(i) + tol)
            return false;
    return true;
}

bool IntervalBox::contains(const IntervalBox& other, double tol) const
{
    if (other.dim() != dim())
        dimension_error("IntervalBox::contains: box dimension", other.dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (other.lower(i) < lower(i) - tol || other.upper(i) > upper(i) + tol)
            return false;
    return true;
}

HybridZonotope::HybridZonotope(Vector center, SparseMatrix gen_cont, SparseMatrix gen_bin, SparseMatrix con_cont,
                               SparseMatrix con_bin, Vector con_rhs)
    : center_(std::move(center)),
      gen_cont_(std::move(gen_cont)),
      gen_bin_(std::move(gen_bin)),
      con_cont_(std::move(con_cont)),
      con_bin_(std::move(con_bin)),
      con_rhs_(std::move(con_rhs))
{
    const Eigen::Index n = center_.size();
    check(gen_cont_.rows() == n, "HybridZonotope: gen_cont rows must equal center length", gen_cont_.rows(), n);
    check(gen_bin_.rows() == n, "HybridZonotope: gen_bin rows must equal center length", gen_bin_.rows(), n);
    check(con_cont_.rows() == con_rhs_.size(), "HybridZonotope: con_cont rows must equal con_rhs length",
          con_cont_.rows(), con_rhs_.size());
    check(con_bin_.rows() == con_rhs_.size(), "HybridZonotope: con_bin rows must equal con_rhs length",
          con_bin_.rows(), con_rhs_.size());
    check(con_cont_.cols() == gen_cont_.cols(), "HybridZonotope: con_cont columns must equal gen_cont columns",
          con_cont_.cols(), gen_cont_.cols());
    check(con_bin_.cols() == gen_bin_.cols(), "HybridZonotope: con_bin columns must equal gen_bin columns",
          con_bin_.cols(), gen_bin_.cols());
    gen_cont_.makeCompressed();
    gen_bin_.makeCompressed();
    con_cont_.makeCompressed();
    con_bin_.makeCompressed();
}

HybridZonotope HybridZonotope::zonotope(const Vector& center, const Matrix& generators)
{
    const Eigen::Index n = center.size();
    check(generators.rows() == n, "zonotope: generator rows must equal center length", generators.rows(), n);
    return {center, detail::to_sparse(generators), SparseMatrix(n, 0), SparseMatrix(0, generators.cols()),
            SparseMatrix(0, 0), Vector(0)};
}

HybridZonotope HybridZonotope::box(const Vector& lower, const Vector& upper)
{
    check(lower.size() == upper.size(), "box: lower and upper lengths differ", lower.size(), upper.size());
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("box: lower bound exceeds upper bound");
    const Vector c = 0.5 * (lower + upper);
    const Vector r = 0.5 * (upper - lower);
    return zonotope(c, r.asDiagonal().toDenseMatrix());
}

HybridZonotope HybridZonotope::point(const Vector& p)
{
    const Eigen::Index n = p.size();
    return {p, SparseMatrix(n, 0), SparseMatrix(n, 0), SparseMatrix(0, 0), SparseMatrix(0, 0), Vector(0)};
}

HybridZonotope HybridZonotope::empty_set(Eigen::Index n)
{
    SparseMatrix Ac(1, 1);
    Ac.insert(0, 0) = 1.0;
    Vector b(1);
    b(0) = 2.0;
    return {Vector::Zero(n), SparseMatrix(n, 1), SparseMatrix(n, 0), Ac, SparseMatrix(1, 0), b};
}

bool HybridZonotope::structurally_equal(const HybridZonotope& o) const
{
    auto same = [](const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && Matrix(a) == Matrix(b);
    };
    return center_ == o.center_ && con_rhs_ == o.con_rhs_ && same(gen_cont_, o.gen_cont_) &&
           same(gen_bin_, o.gen_bin_) && same(con_cont_, o.con_cont_) && same(con_bin_, o.con_bin_);
}

HybridZonotope make_hz(const Vector& center, const Matrix& gen_cont, const Matrix& gen_bin, const Matrix& con_cont,
                       const Matrix& con_bin, const Vector& con_rhs)
{
    return {center,
            detail::to_sparse(gen_cont),
            detail::to_sparse(gen_bin),
            detail::to_sparse(con_cont),
            detail::to_sparse(con_bin),
            con_rhs};
}

HybridZonotope linear_map(const SparseMatrix& R, const HybridZonotope& Z)
{
    check(R.cols() == Z.dim(), "linear_map: R columns must equal set dimension", R.cols(), Z.dim());
    SparseMatrix Gc = (R * Z.gen_cont()).pruned();
    SparseMatrix Gb = (R * Z.gen_bin()).pruned();
    Vector c = R * Z.center();
    return {std::move(c), std::move(Gc), std::move(Gb), Z.con_cont(), Z.con_bin(), Z.con_rhs()};
}

HybridZonotope linear_map(const Matrix& R, const HybridZonotope& Z)
{
    return linear_map(detail::to_sparse(R), Z);
}

HybridZonotope translate(const HybridZonotope& Z, const Vector& t)
{
    check(t.size() == Z.dim(), "translate: offset length must equal set dimension", t.size(), Z.dim());
    return {Z.center() + t, Z.gen_cont(), Z.gen_bin(), Z.con_cont(), Z.con_bin(), Z.con_rhs()};
}

HybridZonotope generalized_intersection(const HybridZonotope& Z1, const SparseMatrix& R, const HybridZonotope& Z2)
{
    check(R.cols() == Z1.dim(), "generalized_intersection: R columns must equal Z1 dimension", R.cols(), Z1.dim());
    check(R.rows() == Z2.dim(), "generalized_intersection: R rows must equal Z2 dimension", R.rows(), Z2.dim());

    const Eigen::Index n1 = Z1.dim();
    const Eigen::Index ng1 = Z1.n_cont(), ng2 = Z2.n_cont();
    const Eigen::Index nb1 = Z1.n_bin(), nb2 = Z2.n_bin();
    const Eigen::Index nc1 = Z1.n_cons(), nc2 = Z2.n_cons();
    const Eigen::Index m = R.rows();

    const SparseMatrix RGc = (R * Z1.gen_cont()).pruned();
    const SparseMatrix RGb = (R * Z1.gen_bin()).pruned();

    using detail::Block;
    SparseMatrix Gc = detail::assemble(n1, ng1 + ng2, {Block{0, 0, &Z1.gen_cont()}});
    SparseMatrix Gb = detail::assemble(n1, nb1 + nb2, {Block{0, 0, &Z1.gen_bin()}});
    SparseMatrix Ac = detail::assemble(nc1 + nc2 + m, ng1 + ng2,
                                       {Block{0, 0, &Z1.con_cont()}, Block{nc1, ng1, &Z2.con_cont()},
                                        Block{nc1 + nc2, 0, &RGc}, Block{nc1 + nc2, ng1, &Z2.gen_cont(), -1.0}});
    SparseMatrix Ab = detail::assemble(nc1 + nc2 + m, nb1 + nb2,
                                       {Block{0, 0, &Z1.con_bin()}, Block{nc1, nb1, &Z2.con_bin()},
                                        Block{nc1 + nc2, 0, &RGb}, Block{nc1 + nc2, nb1, &Z2.gen_bin(), -1.0}});
    Vector b(nc1 + nc2 + m);
    b << Z1.con_rhs(), Z2.con_rhs(), Z2.center() - R * Z1.center();

    return {Z1.center(), std::move(Gc), std::move(Gb), std::move(Ac), std::move(Ab), std::move(b)};
}

HybridZonotope generalized_intersection(const HybridZonotope& Z1, const Matrix& R, const HybridZonotope& Z2)
{
    return generalized_intersection(Z1, detail::to_sparse(R), Z2);
}

HybridZonotope cartesian_product(const HybridZonotope& Z1, const HybridZonotope& Z2)
{
    const Eigen::Index n1 = Z1.dim(), n2 = Z2.dim();
    const Eigen::Index ng1 = Z1.n_cont(), ng2 = Z2.n_cont();
    const Eigen::Index nb1 = Z1.n_bin(), nb2 = Z2.n_bin();
    const Eigen::Index nc1 = Z1.n_cons(), nc2 = Z2.n_cons();

    using detail::Block;
    SparseMatrix Gc = detail::assemble(n1 + n2, ng1 + ng2,
                                       {Block{0, 0, &Z1.gen_cont()}, Block{n1, ng1, &Z2.gen_cont()}});
    SparseMatrix Gb = detail::assemble(n1 + n2, nb1 + nb2,
                                       {Block{0, 0, &Z1.gen_bin()}, Block{n1, nb1, &Z2.gen_bin()}});
    SparseMatrix Ac = detail::assemble(nc1 + nc2, ng1 + ng2,
                                       {Block{0, 0, &Z1.con_cont()}, Block{nc1, ng1, &Z2.con_cont()}});
    SparseMatrix Ab = detail::assemble(nc1 + nc2, nb1 + nb2,
                                       {Block{0, 0, &Z1.con_bin()}, Block{nc1, nb1, &Z2.con_bin()}});
    Vector c(n1 + n2);
    c << Z1.center(), Z2.center();
    Vector b(nc1 + nc2);
    b << Z1.con_rhs(), Z2.con_rhs();
    return {std::move(c), std::move(Gc), std::move(Gb), std::move(Ac), std::move(Ab), std::move(b)};
}

HybridZonotope cartesian_power(const HybridZonotope& Z, int k)
{
    if (k < 1)
        throw std::invalid_argument("cartesian_power: k must be at least 1");
    HybridZonotope out = Z;
    for (int i = 1; i < k; ++i)
        out = cartesian_product(out, Z);
    return out;
}

double constraint_residual(const HybridZonotope& Z, const FactorPoint& p)
{
    check(p.xi_cont.size() == Z.n_cont(), "factor point: xi_cont length", p.xi_cont.size(), Z.n_cont());
    check(p.xi_bin.size() == Z.n_bin(), "factor point: xi_bin length", p.xi_bin.size(), Z.n_bin());
    if (Z.n_cons() == 0)
        return 0.0;
    const Vector r = Z.con_cont() * p.xi_cont + Z.con_bin() * p.xi_bin - Z.con_rhs();
    return r.lpNorm<Eigen::Infinity>();
}

Vector realize(const HybridZonotope& Z, const FactorPoint& p, double tol)
{
    const double residual = constraint_residual(Z, p);
    for (Eigen::Index i = 0; i < p.xi_cont.size(); ++i)
        if (std::abs(p.xi_cont(i)) > 1.0 + tol)
            throw std::domain_error("realize: continuous factor " + std::to_string(i) + " outside [-1,1]");
    for (Eigen::Index i = 0; i < p.xi_bin.size(); ++i)
        if (p.xi_bin(i) != 1.0 && p.xi_bin(i) != -1.0)
            throw std::domain_error("realize: binary factor " + std::to_string(i) + " is not +-1");
    if (residual > tol)
        throw std::domain_error("realize: factor point violates equality constraints (residual " +
                                std::to_string(residual) + ")");
    return Z.gen_cont() * p.xi_cont + Z.gen_bin() * p.xi_bin + Z.center();
}

IntervalBox interval_enclosure(const HybridZonotope& Z)
{
    Vector radius = Vector::Zero(Z.dim());
    for (const SparseMatrix* G : {&Z.gen_cont(), &Z.gen_bin()})
        for (Eigen::Index j = 0; j < G->outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(*G, j); it; ++it)
                radius(it.row()) += std::abs(it.value());
    return {Z.center() - radius, Z.center() + radius};
}

}  // namespace hzreach
