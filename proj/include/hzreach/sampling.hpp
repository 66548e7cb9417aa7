#pragma once

#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/lp.hpp"
#include "hzreach/optim.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace hzreach {

struct SamplerSettings {
    /// Sets with at most this many binaries have all feasible patterns enumerated.
    std::size_t enumerate_up_to = 10;
    /// Otherwise, random-objective searches used to collect patterns.
    std::size_t pattern_probes = 24;
    /// LP vertices collected per pattern; samples are convex combinations of them.
    std::size_t vertices_per_pattern = 16;
    MilpSettings milp = feasibility_search_settings();
};

/**
 * Draws feasible factor points of a hybrid zonotope. Binary patterns are collected once
 * (exhaustively for small n_b, else by randomized searches); within a pattern, points are
 * random convex combinations of LP vertices of the leaf, so every sample satisfies the
 * constraints exactly up to LP round-off. Samples are not uniform.
 */
class FactorSampler {
public:
    FactorSampler(const HybridZonotope& Z, std::uint64_t seed, SamplerSettings settings = {});
    /// Patterns are completions of the given partial assignments (0 = free) instead; hints
    /// whose subtree is infeasible contribute nothing.
    FactorSampler(const HybridZonotope& Z, const std::vector<std::vector<signed char>>& hints, std::uint64_t seed,
                  SamplerSettings settings = {});

    bool empty() const { return patterns_.empty(); }
    const std::vector<std::vector<signed char>>& patterns() const { return patterns_; }

    /// nullopt when the set is empty.
    std::optional<FactorPoint> sample();

private:
    const std::vector<Vector>& vertices(std::size_t pattern);

    HybridZonotope set_;
    SamplerSettings settings_;
    std::mt19937_64 rng_;
    std::vector<std::vector<signed char>> patterns_;
    std::vector<std::vector<Vector>> pools_;
};

/// Leaf LP of a binary pattern: xi_c in [-1, 1], Ac xi_c = b - Ab xi_b, zero objective.
LpProblem leaf_problem(const HybridZonotope& Z, const std::vector<signed char>& pattern);

}  // namespace hzreach
