#include "hzreach/relu_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hzreach {

namespace {

std::vector<Eigen::Index> domain_first_order(Eigen::Index n_act, Eigen::Index n_dom)
{
    // Columns arrive as [activation, domain]; move the domain block to the front.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_act + n_dom));
    std::iota(order.begin(), order.begin() + n_dom, n_act);
    std::iota(order.begin() + n_dom, order.end(), Eigen::Index{0});
    return order;
}

void check_scale(double alpha, double beta)
{
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw std::invalid_argument("ReLU graph scale: alpha and beta must be positive and finite");
}

void check_box(const IntervalBox& box, double alpha, double beta, int layer)
{
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        const double below = -alpha - box.lower(i);
        const double above = box.upper(i) - beta;
        const double excess = std::max(below, above);
        if (excess > 0.0)
            throw EnclosureError(layer, i, excess);
    }
}

}  // namespace

Eigen::Index FeedforwardNetwork::hidden_neurons() const
{
    Eigen::Index n = 0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k)
        n += weights[k].rows();
    return n;
}

void FeedforwardNetwork::validate() const
{
    if (weights.empty())
        throw DimensionError("network: no layers");
    if (weights.size() != biases.size())
        throw DimensionError("network: " + std::to_string(weights.size()) + " weight matrices but " +
                             std::to_string(biases.size()) + " bias vectors");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k].rows() != biases[k].size())
            throw DimensionError("network: layer " + std::to_string(k + 1) + " weight rows differ from bias length");
        if (k > 0 && weights[k].cols() != weights[k - 1].rows())
            throw DimensionError("network: layer " + std::to_string(k + 1) + " input width differs from layer " +
                                 std::to_string(k) + " output width");
    }
    if (saturation) {
        if (saturation->lower.size() != output_dim() || saturation->upper.size() != output_dim())
            throw DimensionError("network: saturation bounds differ from output width");
        if (!(saturation->lower.array() < saturation->upper.array()).all())
            throw std::invalid_argument("network: saturation requires lower < upper");
    }
}

Vector FeedforwardNetwork::evaluate(const Vector& x) const
{
    if (x.size() != input_dim())
        throw DimensionError("network: input of size " + std::to_string(x.size()) + ", expected " +
                             std::to_string(input_dim()));
    Vector h = x;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k)
        h = (weights[k] * h + biases[k]).cwiseMax(0.0);
    Vector y = weights.back() * h + biases.back();
    if (saturation)
        y = y.cwiseMax(saturation->lower).cwiseMin(saturation->upper);
    return y;
}

EnclosureError::EnclosureError(int layer, Eigen::Index coordinate, double excess)
    : std::runtime_error("pre-activation bounds of layer " + std::to_string(layer) + ", coordinate " +
                         std::to_string(coordinate) + " exceed [-alpha, beta] by " + std::to_string(excess)),
      layer_(layer), coordinate_(coordinate), excess_(excess)
{
}

FeedforwardNetwork saturate_network(const FeedforwardNetwork& net, const SaturationBounds& bounds)
{
    FeedforwardNetwork plain = net;
    plain.saturation.reset();
    plain.validate();
    const Eigen::Index m = plain.output_dim();
    if (bounds.lower.size() != m || bounds.upper.size() != m)
        throw DimensionError("saturate_network: bounds differ from output width");
    if (!(bounds.lower.array() < bounds.upper.array()).all())
        throw std::invalid_argument("saturate_network: requires lower < upper");

    // clamp(y) = l + relu((u - l) - relu(u - y)); each relu becomes one layer.
    FeedforwardNetwork out;
    out.weights.assign(plain.weights.begin(), plain.weights.end() - 1);
    out.biases.assign(plain.biases.begin(), plain.biases.end() - 1);
    out.weights.push_back(-plain.weights.back());
    out.biases.push_back(bounds.upper - plain.biases.back());
    out.weights.push_back(-Matrix::Identity(m, m));
    out.biases.push_back(bounds.upper - bounds.lower);
    out.weights.push_back(Matrix::Identity(m, m));
    out.biases.push_back(bounds.lower);
    return out;
}

FeedforwardNetwork effective_network(const FeedforwardNetwork& net)
{
    net.validate();
    if (net.saturation)
        return saturate_network(net, *net.saturation);
    return net;
}

std::vector<IntervalBox> preactivation_bounds(const FeedforwardNetwork& net, const IntervalBox& input)
{
    net.validate();
    if (input.dim() != net.input_dim())
        throw DimensionError("preactivation_bounds: input box dimension differs from network input");
    std::vector<IntervalBox> out;
    Vector lo = input.lower;
    Vector hi = input.upper;
    for (std::size_t k = 0; k + 1 < net.weights.size(); ++k) {
        const Matrix& W = net.weights[k];
        const Matrix Wp = W.cwiseMax(0.0);
        const Matrix Wn = W.cwiseMin(0.0);
        Vector zl = Wp * lo + Wn * hi + net.biases[k];
        Vector zu = Wp * hi + Wn * lo + net.biases[k];
        out.push_back({zl, zu});
        lo = zl.cwiseMax(0.0);
        hi = zu.cwiseMax(0.0);
    }
    return out;
}

ActivationScale auto_activation_scale(const FeedforwardNetwork& net, const HybridZonotope& X, double safety)
{
    const FeedforwardNetwork eff = effective_network(net);
    double m = 0.0;
    for (const IntervalBox& box : preactivation_bounds(eff, interval_enclosure(X)))
        m = std::max({m, box.lower.cwiseAbs().maxCoeff(), box.upper.cwiseAbs().maxCoeff()});
    const double s = m > 0.0 ? safety * m : 1.0;
    return {s, s};
}

HybridZonotope relu_graph_hz(double alpha, double beta)
{
    check_scale(alpha, beta);
    Matrix Gc = Matrix::Zero(2, 6);
    Gc(0, 0) = alpha / 2.0;
    Gc(0, 1) = beta / 2.0;
    Gc(1, 1) = beta / 2.0;
    Matrix Gb(2, 1);
    Gb << -(alpha + beta) / 4.0, -beta / 4.0;
    Vector c(2);
    c << (beta - alpha) / 4.0, beta / 4.0;
    Matrix Ac(4, 6);
    Ac << 1, 0, 1, 0, 0, 0,
         -1, 0, 0, 1, 0, 0,
          0, 1, 0, 0, 1, 0,
          0, -1, 0, 0, 0, 1;
    Matrix Ab(4, 1);
    Ab << 0.5, 0.5, -0.5, -0.5;
    Vector b = Vector::Constant(4, 0.5);
    return make_hz(c, Gc, Gb, Ac, Ab, b);
}

Matrix interleave_permutation(Eigen::Index n)
{
    Matrix P = Matrix::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        P(i, 2 * i) = 1.0;
        P(n + i, 2 * i + 1) = 1.0;
    }
    return P;
}

HybridZonotope activation_graph(const HybridZonotope& domain, double alpha, double beta,
                                const std::optional<IntervalBox>& domain_bounds)
{
    check_scale(alpha, beta);
    const Eigen::Index n = domain.dim();
    if (n == 0)
        throw DimensionError("activation_graph: zero-dimensional domain");
    if (domain_bounds) {
        if (domain_bounds->dim() != n)
            throw DimensionError("activation_graph: bound box dimension differs from domain");
        check_box(*domain_bounds, alpha, beta, 0);
    } else {
        check_box(interval_enclosure(domain), alpha, beta, 0);
    }

    const HybridZonotope stacked = linear_map(detail::to_sparse(interleave_permutation(n)),
                                              cartesian_power(relu_graph_hz(alpha, beta), static_cast<int>(n)));
    SparseMatrix R(n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
        R.insert(i, i) = 1.0;
    const HybridZonotope G = generalized_intersection(stacked, R, domain);

    const auto cont = domain_first_order(6 * n, domain.n_cont());
    const auto bin = domain_first_order(n, domain.n_bin());
    return HybridZonotope(G.center(), detail::permute_columns(G.gen_cont(), cont),
                          detail::permute_columns(G.gen_bin(), bin), detail::permute_columns(G.con_cont(), cont),
                          detail::permute_columns(G.con_bin(), bin), G.con_rhs());
}

NetworkGraph fnn_graph(const FeedforwardNetwork& net, const HybridZonotope& X, std::optional<ActivationScale> scale)
{
    const FeedforwardNetwork eff = effective_network(net);
    if (X.dim() != eff.input_dim())
        throw DimensionError("fnn_graph: domain dimension " + std::to_string(X.dim()) + " differs from network input " +
                             std::to_string(eff.input_dim()));
    const ActivationScale s = scale ? *scale : auto_activation_scale(eff, X);
    check_scale(s.alpha, s.beta);

    const std::vector<IntervalBox> bounds = preactivation_bounds(eff, interval_enclosure(X));
    HybridZonotope Xk = X;
    for (std::size_t k = 0; k + 1 < eff.weights.size(); ++k) {
        const HybridZonotope Z = translate(linear_map(detail::to_sparse(eff.weights[k]), Xk), eff.biases[k]);
        check_box(bounds[k], s.alpha, s.beta, static_cast<int>(k) + 1);
        const HybridZonotope G = activation_graph(Z, s.alpha, s.beta, bounds[k]);
        const Eigen::Index nk = Z.dim();
        SparseMatrix take(nk, 2 * nk);
        for (Eigen::Index i = 0; i < nk; ++i)
            take.insert(i, nk + i) = 1.0;
        Xk = linear_map(take, G);
    }
    HybridZonotope out = translate(linear_map(detail::to_sparse(eff.weights.back()), Xk), eff.biases.back());

    // Stack (x, pi(x)): X's factors are the leading factors of the output set.
    const Eigen::Index nx = X.dim();
    const Eigen::Index ny = out.dim();
    const SparseMatrix Gc = detail::assemble(nx + ny, out.n_cont(),
                                             {{0, 0, &X.gen_cont(), 1.0}, {nx, 0, &out.gen_cont(), 1.0}});
    const SparseMatrix Gb = detail::assemble(nx + ny, out.n_bin(),
                                             {{0, 0, &X.gen_bin(), 1.0}, {nx, 0, &out.gen_bin(), 1.0}});
    Vector c(nx + ny);
    c << X.center(), out.center();
    HybridZonotope graph(c, Gc, Gb, out.con_cont(), out.con_bin(), out.con_rhs());
    return {std::move(graph), std::move(out), s, eff.hidden_neurons()};
}

std::vector<signed char> activation_pattern(const FeedforwardNetwork& net, const Vector& x)
{
    const FeedforwardNetwork eff = effective_network(net);
    if (x.size() != eff.input_dim())
        throw DimensionError("activation_pattern: input of size " + std::to_string(x.size()) + ", expected " +
                             std::to_string(eff.input_dim()));
    std::vector<signed char> out;
    Vector h = x;
    for (std::size_t k = 0; k + 1 < eff.weights.size(); ++k) {
        const Vector z = eff.weights[k] * h + eff.biases[k];
        for (Eigen::Index i = 0; i < z.size(); ++i)
            out.push_back(z(i) < 0.0 ? 1 : (z(i) > 0.0 ? -1 : 0));
        h = z.cwiseMax(0.0);
    }
    return out;
}

Complexity expected_graph_complexity(const Complexity& domain, Eigen::Index hidden_neurons)
{
    return {domain.n_g + 6 * hidden_neurons, domain.n_b + hidden_neurons, domain.n_c + 5 * hidden_neurons};
}

}  // namespace hzreach
