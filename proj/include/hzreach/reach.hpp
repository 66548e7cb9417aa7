#pragma once

#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/optim.hpp"
#include "hzreach/relu_graph.hpp"

#include <optional>
#include <vector>

namespace hzreach {

/// x+ = A x + B u.
struct LinearPlant {
    Matrix A;
    Matrix B;

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    /// [A B]
    Matrix stacked() const;
    void validate() const;
};

/// Plant in feedback with u = pi(x), restricted to the state set X.
class ClosedLoopSystem {
public:
    ClosedLoopSystem(LinearPlant plant, FeedforwardNetwork controller, HybridZonotope state_set);

    const LinearPlant& plant() const { return plant_; }
    const FeedforwardNetwork& controller() const { return controller_; }
    const HybridZonotope& state_set() const { return state_set_; }

    /// Copy carrying the controller graph over the state set, built with `scale`
    /// (automatic when absent).
    ClosedLoopSystem with_graph(std::optional<ActivationScale> scale = std::nullopt) const;
    const std::optional<NetworkGraph>& graph() const { return graph_; }

    /// x+ = A x + B pi(x).
    Vector step(const Vector& x) const;

private:
    LinearPlant plant_;
    FeedforwardNetwork controller_;
    HybridZonotope state_set_;
    std::optional<NetworkGraph> graph_;
};

/// Pre_pi(T) = { x : (x, pi(x)) in graph, [A B](x, pi(x)) in T }, assembled block-wise.
HybridZonotope one_step_brs(const HybridZonotope& graph, const LinearPlant& plant, const HybridZonotope& target);

struct BrsStep {
    int t = 0;
    Complexity complexity;
    Complexity expected;
    double wall_seconds = 0.0;
    bool pruned = false;  ///< replaced by the canonical empty set
};

struct BrsSequence {
    std::vector<HybridZonotope> sets;  ///< P_0 = target, P_1..P_T
    std::vector<BrsStep> steps;       ///< t = 1..T
    ActivationScale scale;
    Complexity graph_complexity;
    Eigen::Index hidden_neurons = 0;
    double graph_seconds = 0.0;
    double total_seconds = 0.0;
};

struct BrsSettings {
    std::optional<ActivationScale> scale;
    /// Stop growing once a set is empty and fill the remaining steps with the empty set.
    bool prune_empty = false;
    EmptinessSettings emptiness;
};

/// Closed-form complexity of P_t: t(n_g,x + 6N) + n_g,T and so on, constraints adding n per step.
Complexity expected_brs_complexity(const Complexity& state_set, const Complexity& target, Eigen::Index hidden_neurons,
                                   Eigen::Index state_dim, int t);

/**
 * P_1..P_T with P_1 = Pre(T) and P_t = Pre(P_{t-1}). Every unpruned step is checked
 * against the closed-form complexity; a mismatch throws std::logic_error.
 */
BrsSequence t_step_brs(const ClosedLoopSystem& system, const HybridZonotope& target, int horizon,
                       const BrsSettings& settings = {});

/// verify_avoidance over P_1..P_T of a sequence (P_0 is skipped).
/// Partial assignment of the binaries of P_t (as built by t_step_brs) along the closed-loop
/// trajectory from x: neuron binaries follow the activation pattern at x_0, ..., x_{t-1};
/// binaries owned by the state set or the target are left free (0).
std::vector<signed char> brs_binary_hint(const ClosedLoopSystem& system, const Vector& x, int t,
                                         Eigen::Index target_binaries);

HorizonReport verify_horizon(const BrsSequence& brs, const HybridZonotope& X0, const VerifySettings& settings = {});

}  // namespace hzreach
