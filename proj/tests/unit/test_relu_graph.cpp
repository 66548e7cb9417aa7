#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/optim.hpp"
#include "hzreach/relu_graph.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace hzreach;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

Vector stack(const Vector& a, const Vector& b)
{
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

FeedforwardNetwork scalar_identity()
{
    FeedforwardNetwork net;
    net.weights = {Matrix::Ones(1, 1)};
    net.biases = {Vector::Zero(1)};
    return net;
}

}  // namespace

TEST_CASE("single-neuron graph matrices")
{
    const double a = 3.0, b = 5.0;
    const HybridZonotope H = relu_graph_hz(a, b);
    Matrix Gc = Matrix::Zero(2, 6);
    Gc(0, 0) = a / 2;
    Gc(0, 1) = b / 2;
    Gc(1, 1) = b / 2;
    CHECK(Matrix(H.gen_cont()) == Gc);
    CHECK(Matrix(H.gen_bin()) == (Matrix(2, 1) << -(a + b) / 4, -b / 4).finished());
    CHECK(H.center() == vec({(b - a) / 4, b / 4}));
    Matrix Ac(4, 6);
    Ac << 1, 0, 1, 0, 0, 0, -1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
    CHECK(Matrix(H.con_cont()) == Ac);
    CHECK(Matrix(H.con_bin()) == vec({0.5, 0.5, -0.5, -0.5}));
    CHECK(H.con_rhs() == Vector::Constant(4, 0.5));
    CHECK(H.complexity() == Complexity{6, 1, 4});

    CHECK_THROWS_AS(relu_graph_hz(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(relu_graph_hz(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("single-neuron graph membership")
{
    const HybridZonotope H = relu_graph_hz(1.0, 1.0);
    CHECK(contains_point(H, vec({-0.7, 0.0})));
    CHECK(contains_point(H, vec({0.4, 0.4})));
    CHECK(contains_point(H, vec({0.0, 0.0})));
    CHECK_FALSE(contains_point(H, vec({0.4, 0.1})));
    CHECK_FALSE(contains_point(H, vec({-0.5, -0.5})));

    const HybridZonotope W = relu_graph_hz(2.0, 0.5);
    for (double z = -2.0; z <= 0.5; z += 0.125) {
        CAPTURE(z);
        CHECK(contains_point(W, vec({z, std::max(z, 0.0)})));
        CHECK_FALSE(contains_point(W, vec({z, std::max(z, 0.0) + 0.05})));
    }
    CHECK_FALSE(contains_point(W, vec({0.75, 0.75})));
    CHECK_FALSE(contains_point(W, vec({-2.25, 0.0})));
}

TEST_CASE("interleave permutation")
{
    for (Eigen::Index n : {1, 2, 5}) {
        const Matrix P = interleave_permutation(n);
        CHECK((P.rowwise().sum().array() == 1.0).all());
        CHECK((P.colwise().sum().array() == 1.0).all());
        CHECK((P * P.transpose()).isIdentity());
        Vector inter(2 * n), split(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            inter(2 * i) = 10.0 + i;  // z_i
            inter(2 * i + 1) = 20.0 + i;  // x_i
            split(i) = 10.0 + i;
            split(n + i) = 20.0 + i;
        }
        CHECK(P * inter == split);
    }
}

TEST_CASE("layer graph over a box")
{
    const HybridZonotope one = activation_graph(HybridZonotope::box(vec({-1.0}), vec({1.0})), 1.0, 1.0);
    const HybridZonotope H = relu_graph_hz(1.0, 1.0);
    for (double z = -1.0; z <= 1.0; z += 0.25)
        for (double x : {0.0, 0.3, z}) {
            const Vector p = vec({z, x});
            CHECK(contains_point(one, p) == contains_point(H, p));
        }

    const HybridZonotope two = activation_graph(HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0})), 1.0, 1.0);
    CHECK(two.dim() == 4);
    CHECK(contains_point(two, vec({-0.5, 0.7, 0.0, 0.7})));
    CHECK_FALSE(contains_point(two, vec({-0.5, 0.7, 0.1, 0.7})));

    std::mt19937_64 rng(4);
    const HybridZonotope Z = HybridZonotope::zonotope(vec({0.2, -0.1}), (Matrix(2, 3) << 0.5, 0.2, -0.3, 0.1, 0.6, 0.2).finished());
    const HybridZonotope G = activation_graph(Z, 2.0, 2.0);
    CHECK(G.complexity() == Complexity{3 + 12, 2, 10});
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Vector xi = vec({U(rng), U(rng), U(rng)});
        const Vector z = vec({0.2, -0.1}) + Matrix(Z.gen_cont()) * xi;
        CHECK(contains_point(G, stack(z, z.cwiseMax(0.0))));
        CHECK_FALSE(contains_point(G, stack(z, z.cwiseMax(0.0) + vec({0.0, 0.05}))));
    }
}

TEST_CASE("layer graph enclosure check")
{
    try {
        activation_graph(HybridZonotope::box(vec({-2.0}), vec({2.0})), 1.0, 1.0);
        FAIL("expected an enclosure error");
    } catch (const EnclosureError& e) {
        CHECK(e.coordinate() == 0);
        CHECK(e.excess() == doctest::Approx(1.0));
    }
    const IntervalBox tight{vec({-0.5}), vec({0.5})};
    CHECK_NOTHROW(activation_graph(HybridZonotope::box(vec({-0.5}), vec({0.5})), 1.0, 1.0, tight));
}

TEST_CASE("affine network graph")
{
    FeedforwardNetwork net;
    net.weights = {(Matrix(1, 2) << 2.0, -1.0).finished()};
    net.biases = {vec({0.5})};
    const HybridZonotope X = HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    const NetworkGraph g = fnn_graph(net, X);
    CHECK(g.hidden_neurons == 0);
    CHECK(g.graph.complexity() == X.complexity());
    std::mt19937_64 rng(6);
    for (int k = 0; k < 100; ++k) {
        const Vector x = oracle::uniform_in_box(rng, vec({-1.0, -1.0}), vec({1.0, 1.0}));
        CHECK(contains_point(g.graph, stack(x, net.evaluate(x))));
        CHECK_FALSE(contains_point(g.graph, stack(x, net.evaluate(x) + vec({0.05}))));
    }
}

TEST_CASE("hand-set 2-2-1 network graph")
{
    FeedforwardNetwork net;
    net.weights = {(Matrix(2, 2) << 1.0, 0.0, 0.5, -1.0).finished(), (Matrix(1, 2) << 1.0, -2.0).finished()};
    net.biases = {vec({0.0, 0.25}), vec({0.1})};
    const HybridZonotope X = HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    const NetworkGraph g = fnn_graph(net, X);
    CHECK(g.graph.complexity() == expected_graph_complexity(X.complexity(), 2));
    MembershipOracle graph(g.graph);
    MembershipOracle out(g.output_set);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 1000; ++k) {
        const Vector x = oracle::uniform_in_box(rng, vec({-1.0, -1.0}), vec({1.0, 1.0}));
        const Vector y = net.evaluate(x);
        CHECK(graph.contains(stack(x, y)));
        CHECK_FALSE(graph.contains(stack(x, y + vec({0.05}))));
        CHECK(out.contains(y));
    }
}

TEST_CASE("graph complexity counts")
{
    std::mt19937_64 rng(12);
    const FeedforwardNetwork net = oracle::random_network(rng, {2, 12, 1});
    const HybridZonotope X = HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    const NetworkGraph g = fnn_graph(net, X);
    CHECK(g.graph.complexity() == Complexity{74, 12, 60});
    CHECK(g.output_set.n_cont() == 74);

    // Non-box domain: the set's own generators, binaries and constraints carry over.
    const HybridZonotope D = oracle::random_hz(rng, 2, 4, 2, 1, 0.5);
    const FeedforwardNetwork deep = oracle::random_network(rng, {2, 3, 4, 2});
    const NetworkGraph h = fnn_graph(deep, D);
    CHECK(h.graph.complexity() == Complexity{4 + 42, 2 + 7, 1 + 35});
    CHECK(h.hidden_neurons == 7);
}

TEST_CASE("random network graphs are exact")
{
    std::mt19937_64 rng(31);
    for (int inst = 0; inst < 6; ++inst) {
        CAPTURE(inst);
        const int n = 1 + inst % 3;
        const FeedforwardNetwork net = oracle::random_network(rng, {n, 4 + inst % 3, 3, 1 + inst % 2});
        const Vector lo = Vector::Constant(n, -1.0), hi = Vector::Constant(n, 1.5);
        const NetworkGraph g = fnn_graph(net, HybridZonotope::box(lo, hi));
        MembershipOracle graph(g.graph);
        for (int k = 0; k < 50; ++k) {
            const Vector x = oracle::uniform_in_box(rng, lo, hi);
            const Vector y = net.evaluate(x);
            CHECK(graph.contains(stack(x, y)));
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                Vector bumped = y;
                bumped(i) += (k % 2 ? 1.0 : -1.0) * 1e-4;
                CHECK_FALSE(graph.contains(stack(x, bumped)));
            }
        }
    }
}

TEST_CASE("graph construction errors")
{
    std::mt19937_64 rng(2);
    const FeedforwardNetwork net = oracle::random_network(rng, {2, 3, 1});
    CHECK_THROWS_AS(fnn_graph(net, HybridZonotope::box(vec({-1.0}), vec({1.0}))), DimensionError);
    try {
        fnn_graph(net, HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0})), ActivationScale{1e-3, 1e-3});
        FAIL("expected an enclosure error");
    } catch (const EnclosureError& e) {
        CHECK(e.layer() == 1);
        CHECK(e.excess() > 0.0);
    }
}

TEST_CASE("automatic activation scale")
{
    FeedforwardNetwork net;
    net.weights = {(Matrix(2, 1) << 2.0, -3.0).finished(), Matrix::Ones(1, 2)};
    net.biases = {vec({1.0, 0.0}), vec({0.0})};
    // Pre-activations over [-1, 2]: 2x+1 in [-1, 5], -3x in [-6, 3].
    const ActivationScale s = auto_activation_scale(net, HybridZonotope::box(vec({-1.0}), vec({2.0})));
    CHECK(s.alpha == doctest::Approx(12.0));
    CHECK(s.beta == doctest::Approx(12.0));
    const auto bounds = preactivation_bounds(net, IntervalBox{vec({-1.0}), vec({2.0})});
    REQUIRE(bounds.size() == 1);
    CHECK(bounds[0].lower == vec({-1.0, -6.0}));
    CHECK(bounds[0].upper == vec({5.0, 3.0}));
}

TEST_CASE("saturation layers")
{
    const FeedforwardNetwork id = scalar_identity();
    const SaturationBounds unit{vec({-1.0}), vec({1.0})};
    const FeedforwardNetwork sat = saturate_network(id, unit);
    CHECK(sat.num_layers() == 3);
    CHECK(sat.hidden_neurons() == id.hidden_neurons() + 2);
    CHECK(sat.evaluate(vec({0.5}))(0) == doctest::Approx(0.5));
    CHECK(sat.evaluate(vec({3.0}))(0) == doctest::Approx(1.0));
    CHECK(sat.evaluate(vec({-7.0}))(0) == doctest::Approx(-1.0));

    // Layer values: negated last layer with u - v, then -I with u - l, then I with l.
    std::mt19937_64 rng(17);
    const FeedforwardNetwork net = oracle::random_network(rng, {2, 4, 2});
    const SaturationBounds b{vec({-0.5, -2.0}), vec({0.25, 1.0})};
    const FeedforwardNetwork s = saturate_network(net, b);
    REQUIRE(s.num_layers() == 4);
    CHECK(s.weights[0] == net.weights[0]);
    CHECK(s.weights[1] == -net.weights[1]);
    CHECK(s.biases[1] == b.upper - net.biases[1]);
    CHECK(s.weights[2] == -Matrix::Identity(2, 2));
    CHECK(s.biases[2] == b.upper - b.lower);
    CHECK(s.weights[3] == Matrix::Identity(2, 2));
    CHECK(s.biases[3] == b.lower);
    CHECK(s.hidden_neurons() == net.hidden_neurons() + 4);

    for (int k = 0; k < 1000; ++k) {
        const Vector x = oracle::uniform_in_box(rng, vec({-3.0, -3.0}), vec({3.0, 3.0}));
        const Vector clamp = net.evaluate(x).cwiseMax(b.lower).cwiseMin(b.upper);
        CHECK((s.evaluate(x) - clamp).cwiseAbs().maxCoeff() <= 1e-9);
    }

    CHECK_THROWS_AS(saturate_network(net, SaturationBounds{vec({0.0}), vec({1.0})}), DimensionError);
    CHECK_THROWS_AS(saturate_network(net, SaturationBounds{vec({0.0, 1.0}), vec({1.0, 0.0})}), std::invalid_argument);
}

TEST_CASE("saturated network graph holds exactly the clamped pairs")
{
    std::mt19937_64 rng(23);
    FeedforwardNetwork net = oracle::random_network(rng, {2, 5, 1});
    net.saturation = SaturationBounds{vec({-0.05}), vec({0.05})};
    const Vector lo = vec({-2.0, -2.0}), hi = vec({2.0, 2.0});
    const NetworkGraph g = fnn_graph(net, HybridZonotope::box(lo, hi));
    CHECK(g.hidden_neurons == 5 + 2);
    MembershipOracle graph(g.graph);
    int clamped = 0;
    for (int k = 0; k < 300; ++k) {
        const Vector x = oracle::uniform_in_box(rng, lo, hi);
        FeedforwardNetwork plain = net;
        plain.saturation.reset();
        const double raw = plain.evaluate(x)(0);
        const double y = std::clamp(raw, -0.05, 0.05);
        clamped += raw != y;
        CHECK(net.evaluate(x)(0) == y);
        CHECK(graph.contains(stack(x, vec({y}))));
        if (std::abs(raw - y) > 1e-4)
            CHECK_FALSE(graph.contains(stack(x, vec({raw}))));
        CHECK_FALSE(graph.contains(stack(x, vec({y + 0.01}))));
    }
    CHECK(clamped > 10);
}

TEST_CASE("activation pattern follows the pre-activation signs")
{
    FeedforwardNetwork net;
    net.weights = {(Matrix(3, 1) << 1.0, -1.0, 0.0).finished(), Matrix::Ones(1, 3)};
    net.biases = {vec({0.0, 0.5, 0.0}), vec({0.0})};
    CHECK(activation_pattern(net, vec({1.0})) == std::vector<signed char>{-1, 1, 0});
    CHECK(activation_pattern(net, vec({-1.0})) == std::vector<signed char>{1, -1, 0});
    net.saturation = SaturationBounds{vec({-1.0}), vec({1.0})};
    CHECK(activation_pattern(net, vec({1.0})).size() == 5);
}
