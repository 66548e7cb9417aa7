#include "hzreach/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace hzreach {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

LpProblem relaxation_with_bounds(const MilpProblem& p)
{
    LpProblem lp = p.relaxation;
    for (auto j : p.binary) {
        lp.lower(j) = -1.0;
        lp.upper(j) = 1.0;
    }
    return lp;
}

}  // namespace

void MilpProblem::validate() const
{
    relaxation.validate();
    for (auto j : binary)
        if (j < 0 || j >= relaxation.num_vars())
            throw DimensionError("MilpProblem: binary index " + std::to_string(j) + " out of range");
}

MilpSolver::MilpSolver(MilpProblem problem, MilpSettings settings)
    : problem_((problem.validate(), std::move(problem))),
      settings_(settings),
      lp_(relaxation_with_bounds(problem_), settings.lp)
{
}

void MilpSolver::set_rhs(const Vector& rhs)
{
    problem_.relaxation.eq_rhs = rhs;
    lp_.set_rhs(rhs);
}

void MilpSolver::set_objective(const Vector& c)
{
    problem_.relaxation.objective = c;
    lp_.set_objective(c);
}

void MilpSolver::apply_fixings(const std::vector<signed char>& fix)
{
    for (std::size_t k = 0; k < problem_.binary.size(); ++k) {
        const Eigen::Index j = problem_.binary[k];
        const double lo = fix[k] == 0 ? -1.0 : fix[k];
        const double hi = fix[k] == 0 ? 1.0 : fix[k];
        if (lp_.lower(j) != lo || lp_.upper(j) != hi)
            lp_.set_bounds(j, lo, hi);
    }
}

SolveStatus MilpSolver::solve_node(const std::vector<signed char>& fix)
{
    apply_fixings(fix);
    SolveStatus st = lp_.solve();
    if (st == SolveStatus::numerical_failure) {
        // Start over from a fresh crash basis.
        lp_ = BoundedSimplex(relaxation_with_bounds(problem_), settings_.lp);
        apply_fixings(fix);
        st = lp_.solve();
    }
    return st;
}

std::ptrdiff_t MilpSolver::choose_branch(const std::vector<signed char>& fix, double tol, bool& rounded) const
{
    std::ptrdiff_t branch = -1;
    double most = tol;
    rounded = false;
    for (std::size_t k = 0; k < fix.size(); ++k) {
        if (fix[k] != 0)
            continue;
        const double frac = 1.0 - std::abs(lp_.value(problem_.binary[k]));
        if (frac > tol) {
            if (settings_.branching == BranchRule::first_fractional)
                return static_cast<std::ptrdiff_t>(k);
            if (frac > most) {
                most = frac;
                branch = static_cast<std::ptrdiff_t>(k);
            }
        } else if (frac > 0.0) {
            rounded = true;
        }
    }
    return branch;
}

MilpReport MilpSolver::solve()
{
    return solve(std::vector<signed char>(problem_.binary.size(), 0));
}

MilpReport MilpSolver::solve(const std::vector<signed char>& root)
{
    const auto start = Clock::now();
    const std::size_t nb = problem_.binary.size();
    if (root.size() != nb)
        throw DimensionError("MilpSolver::solve: root assignment length differs from binary count");

    struct Node {
        std::vector<signed char> fix;
        double bound;
        int depth;
        std::size_t parent;
        std::size_t seq;
    };
    std::vector<Node> open;
    open.push_back(Node{root, -kInf, 0, 0, 0});
    std::size_t seq = 1;

    MilpReport report;
    double incumbent = kInf;
    Vector best;
    std::size_t iterations_before = lp_.iterations();

    auto push_children = [&](std::size_t k, const Node& node, double value, std::size_t id) {
        for (signed char v : {-1, 1}) {
            Node child{node.fix, value, node.depth + 1, id, seq++};
            child.fix[k] = v;
            open.push_back(std::move(child));
        }
    };
    auto nearest_fractional = [&](const std::vector<signed char>& fix, const Vector& x) {
        std::size_t pick = nb;
        double most = -1.0;
        for (std::size_t k = 0; k < nb; ++k) {
            const double frac = 1.0 - std::abs(x(problem_.binary[k]));
            if (fix[k] == 0 && frac > most) {
                most = frac;
                pick = k;
            }
        }
        return pick;
    };
    auto pruned_by_bound = [&](double bound) {
        return std::isfinite(incumbent) && bound >= incumbent - 1e-9 * (1.0 + std::abs(incumbent));
    };

    while (!open.empty()) {
        auto it = std::max_element(open.begin(), open.end(), [](const Node& a, const Node& b) {
            if (a.depth != b.depth)
                return a.depth < b.depth;
            if (a.bound != b.bound)
                return a.bound > b.bound;
            return a.seq > b.seq;
        });
        Node node = std::move(*it);
        open.erase(it);

        if (settings_.mode == SearchMode::optimize && pruned_by_bound(node.bound))
            continue;
        if (report.nodes >= settings_.node_limit) {
            report.status = SolveStatus::node_limit;
            report.iterations = lp_.iterations() - iterations_before;
            report.wall_seconds = seconds_since(start);
            return report;
        }

        const std::size_t id = report.nodes++;
        const SolveStatus st = solve_node(node.fix);
        const double value = st == SolveStatus::optimal ? lp_.objective_value() : kInf;
        if (settings_.record_tree)
            report.tree.push_back(NodeRecord{id, node.depth == 0 ? id : node.parent, node.depth, value});

        if (st == SolveStatus::infeasible)
            continue;
        if (st != SolveStatus::optimal) {
            report.status = st;
            report.iterations = lp_.iterations() - iterations_before;
            report.wall_seconds = seconds_since(start);
            return report;
        }
        if (settings_.mode == SearchMode::optimize && pruned_by_bound(value))
            continue;

        bool rounded = false;
        const std::ptrdiff_t branch = choose_branch(node.fix, settings_.integrality_tol, rounded);

        if (branch < 0) {
            Vector x = lp_.primal();
            double obj = value;
            if (rounded) {
                // Fix the nearly integral binaries exactly and re-solve for a clean witness.
                std::vector<signed char> exact = node.fix;
                for (std::size_t k = 0; k < nb; ++k)
                    if (exact[k] == 0)
                        exact[k] = lp_.value(problem_.binary[k]) >= 0.0 ? 1 : -1;
                if (solve_node(exact) != SolveStatus::optimal) {
                    // Rounding broke feasibility; split on the least integral binary instead.
                    push_children(nearest_fractional(node.fix, x), node, value, id);
                    continue;
                }
                x = lp_.primal();
                obj = lp_.objective_value();
            }
            for (auto j : problem_.binary)
                x(j) = x(j) >= 0.0 ? 1.0 : -1.0;
            if (obj < incumbent) {
                incumbent = obj;
                best = std::move(x);
            }
            if (settings_.mode == SearchMode::first_feasible)
                break;
            continue;
        }

        push_children(static_cast<std::size_t>(branch), node, value, id);
    }

    report.iterations = lp_.iterations() - iterations_before;
    report.wall_seconds = seconds_since(start);
    if (std::isfinite(incumbent) || best.size() > 0) {
        report.status = SolveStatus::optimal;
        report.objective = incumbent;
        report.witness = std::move(best);
    } else {
        report.status = SolveStatus::infeasible;
    }
    return report;
}

std::vector<FeasibleAssignment> MilpSolver::enumerate_feasible(std::size_t* nodes)
{
    const std::size_t nb = problem_.binary.size();
    std::vector<FeasibleAssignment> out;
    std::vector<std::vector<signed char>> stack;
    stack.emplace_back(nb, 0);
    std::size_t count = 0;

    while (!stack.empty()) {
        std::vector<signed char> fix = std::move(stack.back());
        stack.pop_back();
        if (count >= settings_.node_limit)
            throw SolverError("enumerate_feasible: node limit reached", SolveStatus::node_limit);
        ++count;
        const SolveStatus st = solve_node(fix);
        if (st == SolveStatus::infeasible)
            continue;
        if (st != SolveStatus::optimal)
            throw SolverError("enumerate_feasible: relaxation failed (" + std::string(to_string(st)) + ")", st);

        bool rounded = false;
        std::ptrdiff_t branch = choose_branch(fix, settings_.integrality_tol, rounded);
        if (branch < 0) {
            // Integral relaxation: keep splitting on the remaining free binaries.
            const auto free = std::find(fix.begin(), fix.end(), 0);
            if (free != fix.end())
                branch = free - fix.begin();
        }
        if (branch < 0) {
            Vector x = lp_.primal();
            for (auto j : problem_.binary)
                x(j) = x(j) >= 0.0 ? 1.0 : -1.0;
            out.push_back(FeasibleAssignment{std::move(fix), std::move(x)});
            continue;
        }
        const auto k = static_cast<std::size_t>(branch);
        // LIFO: push +1 first so that -1 is explored first.
        for (signed char v : {1, -1}) {
            std::vector<signed char> child = fix;
            child[k] = v;
            stack.push_back(std::move(child));
        }
    }
    if (nodes)
        *nodes = count;
    return out;
}

MilpReport solve_milp(const MilpProblem& problem, const MilpSettings& settings)
{
    MilpSolver solver(problem, settings);
    return solver.solve();
}

namespace detail {

MilpProblem min_infnorm_problem(const SparseMatrix& Ac, const SparseMatrix& Ab, const Vector& b)
{
    const Eigen::Index nc = Ac.rows(), ng = Ac.cols(), nb = Ab.cols();
    // Variables: xi_c (free), xi_b, t >= 0, s_plus >= 0, s_minus >= 0.
    const Eigen::Index t = ng + nb;
    const Eigen::Index n = ng + nb + 1 + 2 * ng;
    const Eigen::Index m = nc + 2 * ng;

    MilpProblem p;
    LpProblem& lp = p.relaxation;
    lp.objective = Vector::Zero(n);
    lp.objective(t) = 1.0;
    lp.eq_matrix = Matrix::Zero(m, n);
    lp.eq_matrix.block(0, 0, nc, ng) = Matrix(Ac);
    lp.eq_matrix.block(0, ng, nc, nb) = Matrix(Ab);
    for (Eigen::Index i = 0; i < ng; ++i) {
        // xi_i - t + s_plus_i = 0  and  -xi_i - t + s_minus_i = 0
        lp.eq_matrix(nc + i, i) = 1.0;
        lp.eq_matrix(nc + i, t) = -1.0;
        lp.eq_matrix(nc + i, t + 1 + i) = 1.0;
        lp.eq_matrix(nc + ng + i, i) = -1.0;
        lp.eq_matrix(nc + ng + i, t) = -1.0;
        lp.eq_matrix(nc + ng + i, t + 1 + ng + i) = 1.0;
    }
    lp.eq_rhs = Vector::Zero(m);
    lp.eq_rhs.head(nc) = b;
    lp.lower = Vector::Zero(n);
    lp.upper = Vector::Constant(n, kInf);
    lp.lower.head(ng).setConstant(-kInf);
    lp.lower.segment(ng, nb).setConstant(-1.0);
    lp.upper.segment(ng, nb).setConstant(1.0);
    for (Eigen::Index k = 0; k < nb; ++k)
        p.binary.push_back(ng + k);
    return p;
}

MilpProblem bounded_feasibility_problem(const SparseMatrix& Ac, const SparseMatrix& Ab, const Vector& b, double bound)
{
    const Eigen::Index nc = Ac.rows(), ng = Ac.cols(), nb = Ab.cols();
    MilpProblem p;
    LpProblem& lp = p.relaxation;
    lp.objective = Vector::Zero(ng + nb);
    lp.eq_matrix = Matrix::Zero(nc, ng + nb);
    lp.eq_matrix.leftCols(ng) = Matrix(Ac);
    lp.eq_matrix.rightCols(nb) = Matrix(Ab);
    lp.eq_rhs = b;
    lp.lower = Vector::Constant(ng + nb, -1.0);
    lp.upper = Vector::Constant(ng + nb, 1.0);
    lp.lower.head(ng).setConstant(-bound);
    lp.upper.head(ng).setConstant(bound);
    for (Eigen::Index k = 0; k < nb; ++k)
        p.binary.push_back(ng + k);
    return p;
}

}  // namespace detail

MilpReport solve_milp_min_infnorm(const HybridZonotope& Z, const MilpSettings& settings)
{
    MilpSettings s = settings;
    s.mode = SearchMode::optimize;
    return solve_milp(detail::min_infnorm_problem(Z.con_cont(), Z.con_bin(), Z.con_rhs()), s);
}

FactorPoint factor_witness(const HybridZonotope& Z, const Vector& witness)
{
    if (witness.size() < Z.n_cont() + Z.n_bin())
        throw DimensionError("factor_witness: witness shorter than the factor count");
    return {witness.head(Z.n_cont()), witness.segment(Z.n_cont(), Z.n_bin())};
}

namespace {

MilpReport search_bounded(const SparseMatrix& Ac, const SparseMatrix& Ab, const Vector& b, double strict_tol,
                          MilpSettings settings)
{
    settings.mode = SearchMode::first_feasible;
    MilpReport r = solve_milp(detail::bounded_feasibility_problem(Ac, Ab, b, 1.0 + strict_tol), settings);
    if (r.status != SolveStatus::optimal && r.status != SolveStatus::infeasible)
        throw SolverError("emptiness search did not finish (" + std::string(to_string(r.status)) + ")", r.status);
    return r;
}

}  // namespace

std::optional<FactorPoint> find_feasible_factor(const HybridZonotope& Z, const EmptinessSettings& settings)
{
    const MilpReport r = search_bounded(Z.con_cont(), Z.con_bin(), Z.con_rhs(), settings.strict_tol, settings.milp);
    if (r.status == SolveStatus::infeasible)
        return std::nullopt;
    FactorPoint p = factor_witness(Z, r.witness);
    p.xi_cont = p.xi_cont.cwiseMax(-1.0).cwiseMin(1.0);
    return p;
}

bool is_empty(const HybridZonotope& Z, const EmptinessSettings& settings)
{
    return !find_feasible_factor(Z, settings).has_value();
}

HybridZonotope relax_to_lp(const HybridZonotope& Z)
{
    using detail::Block;
    const Eigen::Index ng = Z.n_cont(), nb = Z.n_bin();
    SparseMatrix Gc = detail::assemble(Z.dim(), ng + nb, {Block{0, 0, &Z.gen_cont()}, Block{0, ng, &Z.gen_bin()}});
    SparseMatrix Ac =
        detail::assemble(Z.n_cons(), ng + nb, {Block{0, 0, &Z.con_cont()}, Block{0, ng, &Z.con_bin()}});
    return {Z.center(), std::move(Gc), SparseMatrix(Z.dim(), 0), std::move(Ac), SparseMatrix(Z.n_cons(), 0),
            Z.con_rhs()};
}

namespace {

struct StackedProgram {
    SparseMatrix Ac, Ab;
    Vector b;
};

StackedProgram avoidance_program(const HybridZonotope& Pt, const HybridZonotope& X0)
{
    if (Pt.dim() != X0.dim())
        throw DimensionError("verify_avoidance: P_t and X0 live in different dimensions");
    using detail::Block;
    const Eigen::Index n = Pt.dim();
    const Eigen::Index ngt = Pt.n_cont(), ng0 = X0.n_cont();
    const Eigen::Index nbt = Pt.n_bin(), nb0 = X0.n_bin();
    const Eigen::Index nct = Pt.n_cons(), nc0 = X0.n_cons();
    StackedProgram s;
    s.Ac = detail::assemble(nct + nc0 + n, ngt + ng0,
                            {Block{0, 0, &Pt.con_cont()}, Block{nct, ngt, &X0.con_cont()},
                             Block{nct + nc0, 0, &Pt.gen_cont()}, Block{nct + nc0, ngt, &X0.gen_cont(), -1.0}});
    s.Ab = detail::assemble(nct + nc0 + n, nbt + nb0,
                            {Block{0, 0, &Pt.con_bin()}, Block{nct, nbt, &X0.con_bin()},
                             Block{nct + nc0, 0, &Pt.gen_bin()}, Block{nct + nc0, nbt, &X0.gen_bin(), -1.0}});
    s.b.resize(nct + nc0 + n);
    s.b << Pt.con_rhs(), X0.con_rhs(), X0.center() - Pt.center();
    return s;
}

}  // namespace

AvoidanceResult verify_avoidance(const HybridZonotope& Pt, const HybridZonotope& X0, const VerifySettings& settings)
{
    const auto start = Clock::now();
    const StackedProgram prog = avoidance_program(Pt, X0);
    AvoidanceResult out;

    // Disjoint enclosures settle it without a solve.
    const IntervalBox ep = interval_enclosure(Pt), e0 = interval_enclosure(X0);
    bool disjoint = false;
    for (Eigen::Index i = 0; i < Pt.dim(); ++i)
        disjoint = disjoint || ep.upper(i) < e0.lower(i) || e0.upper(i) < ep.lower(i);

    if (settings.compute_optimum) {
        MilpSettings ms = settings.milp;
        ms.mode = SearchMode::optimize;
        const MilpReport r = solve_milp(detail::min_infnorm_problem(prog.Ac, prog.Ab, prog.b), ms);
        out.nodes += r.nodes;
        if (r.status == SolveStatus::infeasible)
            out.optimum = kInf;
        else if (r.status == SolveStatus::optimal)
            out.optimum = r.objective;
        else
            throw SolverError("verify_avoidance: min-norm program did not finish (" + std::string(to_string(r.status)) +
                                  ")",
                              r.status);
    }

    if (!disjoint) {
        const MilpReport r = search_bounded(prog.Ac, prog.Ab, prog.b, settings.strict_tol, settings.milp);
        out.nodes += r.nodes;
        if (r.status == SolveStatus::optimal) {
            out.safe = false;
            FactorPoint w{r.witness.head(prog.Ac.cols()), r.witness.segment(prog.Ac.cols(), prog.Ab.cols())};
            w.xi_cont = w.xi_cont.cwiseMax(-1.0).cwiseMin(1.0);
            const Vector xi_ct = w.xi_cont.head(Pt.n_cont());
            const Vector xi_bt = w.xi_bin.head(Pt.n_bin());
            out.witness_state = Vector(Pt.gen_cont() * xi_ct + Pt.gen_bin() * xi_bt + Pt.center());
            out.witness = std::move(w);
        }
    }
    out.wall_seconds = seconds_since(start);
    return out;
}

HorizonReport verify_horizon(std::span<const HybridZonotope> brs, const HybridZonotope& X0,
                             const VerifySettings& settings)
{
    const auto start = Clock::now();
    HorizonReport report;
    for (std::size_t k = 0; k < brs.size(); ++k) {
        HorizonStep step{static_cast<int>(k) + 1, verify_avoidance(brs[k], X0, settings)};
        if (!step.result.safe) {
            report.safe = false;
            if (!report.first_unsafe)
                report.first_unsafe = step.t;
        }
        report.steps.push_back(std::move(step));
    }
    report.wall_seconds = seconds_since(start);
    return report;
}

namespace {

MilpProblem membership_problem(const HybridZonotope& Z, double tol)
{
    const Eigen::Index n = Z.dim(), ng = Z.n_cont(), nb = Z.n_bin(), nc = Z.n_cons();
    // Variables: xi_c, xi_b, point slack (n), constraint slack (nc).
    const Eigen::Index nv = ng + nb + n + nc;
    MilpProblem p;
    LpProblem& lp = p.relaxation;
    lp.objective = Vector::Zero(nv);
    lp.eq_matrix = Matrix::Zero(n + nc, nv);
    lp.eq_matrix.block(0, 0, n, ng) = Matrix(Z.gen_cont());
    lp.eq_matrix.block(0, ng, n, nb) = Matrix(Z.gen_bin());
    lp.eq_matrix.block(n, 0, nc, ng) = Matrix(Z.con_cont());
    lp.eq_matrix.block(n, ng, nc, nb) = Matrix(Z.con_bin());
    lp.eq_matrix.block(0, ng + nb, n + nc, n + nc).setIdentity();
    lp.eq_rhs = Vector::Zero(n + nc);
    lp.eq_rhs.tail(nc) = Z.con_rhs();
    lp.lower = Vector::Constant(nv, -tol);
    lp.upper = Vector::Constant(nv, tol);
    lp.lower.head(ng).setConstant(-1.0 - tol);
    lp.upper.head(ng).setConstant(1.0 + tol);
    lp.lower.segment(ng, nb).setConstant(-1.0);
    lp.upper.segment(ng, nb).setConstant(1.0);
    for (Eigen::Index k = 0; k < nb; ++k)
        p.binary.push_back(ng + k);
    return p;
}

MilpSettings first_feasible(MilpSettings s)
{
    s.mode = SearchMode::first_feasible;
    return s;
}

}  // namespace

MembershipOracle::MembershipOracle(const HybridZonotope& Z, double tol, MilpSettings settings)
    : set_(Z), tol_(tol), enclosure_(interval_enclosure(Z)), solver_(membership_problem(Z, tol), first_feasible(settings))
{
}

std::optional<FactorPoint> MembershipOracle::witness(const Vector& x)
{
    return witness(x, std::vector<signed char>(static_cast<std::size_t>(set_.n_bin()), 0));
}

std::optional<FactorPoint> MembershipOracle::witness(const Vector& x, const std::vector<signed char>& hint)
{
    if (x.size() != set_.dim())
        throw DimensionError("contains_point: point dimension differs from set dimension");
    if (static_cast<Eigen::Index>(hint.size()) != set_.n_bin())
        throw DimensionError("MembershipOracle: hint length differs from binary count");
    if (!enclosure_.contains(x, tol_))
        return std::nullopt;
    Vector rhs(set_.dim() + set_.n_cons());
    rhs << x - set_.center(), set_.con_rhs();
    solver_.set_rhs(rhs);

    const bool hinted = std::any_of(hint.begin(), hint.end(), [](signed char v) { return v != 0; });
    MilpReport r = solver_.solve(hint);
    nodes_ += r.nodes;
    if (hinted && r.status == SolveStatus::infeasible) {
        r = solver_.solve();
        nodes_ += r.nodes;
    }
    if (r.status == SolveStatus::infeasible)
        return std::nullopt;
    if (r.status != SolveStatus::optimal)
        throw SolverError("contains_point: membership search did not finish (" + std::string(to_string(r.status)) +
                              ")",
                          r.status);
    return factor_witness(set_, r.witness);
}

bool MembershipOracle::contains(const Vector& x)
{
    return witness(x).has_value();
}

bool contains_point(const HybridZonotope& Z, const Vector& x, double tol)
{
    if (x.size() != Z.dim())
        throw DimensionError("contains_point: point dimension differs from set dimension");
    if (!interval_enclosure(Z).contains(x, tol))
        return false;
    MembershipOracle oracle(Z, tol);
    return oracle.contains(x);
}

}  // namespace hzreach
