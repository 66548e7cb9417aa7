#include "hzreach/sampling.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace hzreach {

namespace {

Vector pattern_vector(const std::vector<signed char>& pattern)
{
    Vector v(static_cast<Eigen::Index>(pattern.size()));
    for (std::size_t k = 0; k < pattern.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = pattern[k];
    return v;
}

}  // namespace

LpProblem leaf_problem(const HybridZonotope& Z, const std::vector<signed char>& pattern)
{
    if (static_cast<Eigen::Index>(pattern.size()) != Z.n_bin())
        throw DimensionError("leaf_problem: pattern length differs from binary count");
    LpProblem lp;
    lp.objective = Vector::Zero(Z.n_cont());
    lp.eq_matrix = Matrix(Z.con_cont());
    lp.eq_rhs = Z.con_rhs() - Z.con_bin() * pattern_vector(pattern);
    lp.lower = Vector::Constant(Z.n_cont(), -1.0);
    lp.upper = Vector::Constant(Z.n_cont(), 1.0);
    return lp;
}

FactorSampler::FactorSampler(const HybridZonotope& Z, std::uint64_t seed, SamplerSettings settings)
    : set_(Z), settings_(settings), rng_(seed)
{
    MilpProblem p = detail::bounded_feasibility_problem(Z.con_cont(), Z.con_bin(), Z.con_rhs(), 1.0);
    const std::size_t nb = static_cast<std::size_t>(Z.n_bin());
    if (nb <= settings_.enumerate_up_to) {
        MilpSolver solver(std::move(p), settings_.milp);
        for (FeasibleAssignment& a : solver.enumerate_feasible())
            patterns_.push_back(std::move(a.binary));
    } else {
        MilpSettings ms = settings_.milp;
        ms.mode = SearchMode::first_feasible;
        MilpSolver solver(p, ms);
        std::normal_distribution<double> N(0.0, 1.0);
        std::set<std::vector<signed char>> seen;
        for (std::size_t probe = 0; probe < settings_.pattern_probes; ++probe) {
            Vector c = Vector::Zero(p.relaxation.num_vars());
            for (Eigen::Index j = 0; j < c.size(); ++j)
                c(j) = N(rng_);
            solver.set_objective(c);
            const MilpReport r = solver.solve();
            if (r.status == SolveStatus::infeasible)
                break;
            if (!r.optimal())
                throw SolverError("FactorSampler: pattern search did not finish", r.status);
            std::vector<signed char> pat(nb);
            for (std::size_t k = 0; k < nb; ++k)
                pat[k] = r.witness(p.binary[k]) > 0.0 ? 1 : -1;
            if (seen.insert(pat).second)
                patterns_.push_back(std::move(pat));
        }
    }
    pools_.resize(patterns_.size());
}

FactorSampler::FactorSampler(const HybridZonotope& Z, const std::vector<std::vector<signed char>>& hints,
                             std::uint64_t seed, SamplerSettings settings)
    : set_(Z), settings_(settings), rng_(seed)
{
    MilpSettings ms = settings_.milp;
    ms.mode = SearchMode::first_feasible;
    MilpSolver solver(detail::bounded_feasibility_problem(Z.con_cont(), Z.con_bin(), Z.con_rhs(), 1.0), ms);
    const std::size_t nb = static_cast<std::size_t>(Z.n_bin());
    std::set<std::vector<signed char>> seen;
    for (const auto& hint : hints) {
        if (hint.size() != nb)
            throw DimensionError("FactorSampler: hint length differs from binary count");
        const MilpReport r = solver.solve(hint);
        if (r.status == SolveStatus::infeasible)
            continue;
        if (!r.optimal())
            throw SolverError("FactorSampler: hinted search did not finish", r.status);
        std::vector<signed char> pat(nb);
        for (std::size_t k = 0; k < nb; ++k)
            pat[k] = r.witness(solver.problem().binary[k]) > 0.0 ? 1 : -1;
        if (seen.insert(pat).second)
            patterns_.push_back(std::move(pat));
    }
    pools_.resize(patterns_.size());
}

const std::vector<Vector>& FactorSampler::vertices(std::size_t pattern)
{
    std::vector<Vector>& pool = pools_[pattern];
    if (!pool.empty())
        return pool;
    BoundedSimplex lp(leaf_problem(set_, patterns_[pattern]), settings_.milp.lp);
    std::normal_distribution<double> N(0.0, 1.0);
    for (std::size_t k = 0; k < settings_.vertices_per_pattern; ++k) {
        Vector c(set_.n_cont());
        for (Eigen::Index j = 0; j < c.size(); ++j)
            c(j) = N(rng_);
        lp.set_objective(c);
        const SolveStatus st = lp.solve();
        if (st != SolveStatus::optimal)
            throw SolverError("FactorSampler: leaf LP failed (" + std::string(to_string(st)) + ")", st);
        pool.push_back(lp.primal().cwiseMax(-1.0).cwiseMin(1.0));
    }
    return pool;
}

std::optional<FactorPoint> FactorSampler::sample()
{
    if (patterns_.empty())
        return std::nullopt;
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, patterns_.size() - 1)(rng_);
    const std::vector<Vector>& pool = vertices(pick);

    Vector xi = Vector::Zero(set_.n_cont());
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (U(rng_) < 0.1) {
        xi = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
    } else {
        std::exponential_distribution<double> E(1.0);
        double total = 0.0;
        for (const Vector& v : pool) {
            const double w = E(rng_);
            xi += w * v;
            total += w;
        }
        xi /= total;
    }
    return FactorPoint{std::move(xi), pattern_vector(patterns_[pick])};
}

}  // namespace hzreach
