#pragma once

#include "hzreach/hybrid_zonotope.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace hzreach {

/// Componentwise output limits lower < upper.
struct SaturationBounds {
    Vector lower;
    Vector upper;
};

/**
 * ReLU feedforward network. Layer k computes W[k] x + v[k]; every layer but the last is
 * followed by a componentwise ReLU. When `saturation` is set the output is clamped to it.
 */
struct FeedforwardNetwork {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::optional<SaturationBounds> saturation;

    int num_layers() const { return static_cast<int>(weights.size()); }
    Eigen::Index input_dim() const { return weights.front().cols(); }
    Eigen::Index output_dim() const { return weights.back().rows(); }
    /// Sum of hidden-layer widths of the stored layers.
    Eigen::Index hidden_neurons() const;

    /// Throws DimensionError on a broken layer chain.
    void validate() const;

    Vector evaluate(const Vector& x) const;
};

/// Scalars of the ReLU domain [-alpha, beta] shared by every hidden neuron.
struct ActivationScale {
    double alpha = 1.0;
    double beta = 1.0;
};

/// A pre-activation set is not inside [-alpha, beta].
class EnclosureError : public std::runtime_error {
public:
    EnclosureError(int layer, Eigen::Index coordinate, double excess);
    int layer() const { return layer_; }
    Eigen::Index coordinate() const { return coordinate_; }
    double excess() const { return excess_; }

private:
    int layer_;
    Eigen::Index coordinate_;
    double excess_;
};

/// Network with the clamp expressed as two extra ReLU layers. `net` must not be saturated.
FeedforwardNetwork saturate_network(const FeedforwardNetwork& net, const SaturationBounds& bounds);

/// The network whose plain ReLU evaluation equals net.evaluate (saturation folded in).
FeedforwardNetwork effective_network(const FeedforwardNetwork& net);

/// Interval bounds on every hidden pre-activation, layer by layer, for inputs in `input`.
std::vector<IntervalBox> preactivation_bounds(const FeedforwardNetwork& net, const IntervalBox& input);

/// alpha = beta = safety * (largest absolute hidden pre-activation bound over X's enclosure).
ActivationScale auto_activation_scale(const FeedforwardNetwork& net, const HybridZonotope& X, double safety = 2.0);

/// Graph { (z, max(z, 0)) : z in [-alpha, beta] } as a hybrid zonotope with 6 continuous
/// generators, 1 binary generator and 4 constraints.
HybridZonotope relu_graph_hz(double alpha, double beta);

/// Permutation taking (z1, x1, ..., zn, xn) to (z1, ..., zn, x1, ..., xn).
Matrix interleave_permutation(Eigen::Index n);

/**
 * Graph { (z, relu(z)) : z in domain }. The domain must lie in [-alpha, beta]^n; this is
 * checked against `domain_bounds` when given, else against the domain's interval enclosure.
 * Factors of the result are ordered [domain factors, activation factors].
 */
HybridZonotope activation_graph(const HybridZonotope& domain, double alpha, double beta,
                                const std::optional<IntervalBox>& domain_bounds = std::nullopt);

struct NetworkGraph {
    HybridZonotope graph;       ///< { (x, pi(x)) : x in X }
    HybridZonotope output_set;  ///< { pi(x) : x in X }
    ActivationScale scale;
    Eigen::Index hidden_neurons = 0;  ///< of the effective network
};

/// Exact graph and output set of `net` over X, built layer by layer. The first n_g,x
/// continuous and n_b,x binary factors of both results are X's own factors.
NetworkGraph fnn_graph(const FeedforwardNetwork& net, const HybridZonotope& X,
                       std::optional<ActivationScale> scale = std::nullopt);

/// Values of the neuron binaries of fnn_graph(net, .) realizing input x: +1 for a negative
/// pre-activation, -1 for a positive one, 0 when it is exactly zero (either branch works).
std::vector<signed char> activation_pattern(const FeedforwardNetwork& net, const Vector& x);

/// Complexity predicted for the graph: (n_g,x + 6N, n_b,x + N, n_c,x + 5N).
Complexity expected_graph_complexity(const Complexity& domain, Eigen::Index hidden_neurons);

}  // namespace hzreach
