#include "hzreach/reach.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace hzreach {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string describe(const Complexity& c)
{
    return "(" + std::to_string(c.n_g) + ", " + std::to_string(c.n_b) + ", " + std::to_string(c.n_c) + ")";
}

}  // namespace

Matrix LinearPlant::stacked() const
{
    Matrix D(A.rows(), A.cols() + B.cols());
    D << A, B;
    return D;
}

void LinearPlant::validate() const
{
    if (A.rows() != A.cols())
        throw DimensionError("plant: A must be square");
    if (B.rows() != A.rows())
        throw DimensionError("plant: B has " + std::to_string(B.rows()) + " rows, A has " + std::to_string(A.rows()));
}

ClosedLoopSystem::ClosedLoopSystem(LinearPlant plant, FeedforwardNetwork controller, HybridZonotope state_set)
    : plant_(std::move(plant)), controller_(std::move(controller)), state_set_(std::move(state_set))
{
    plant_.validate();
    controller_.validate();
    if (controller_.input_dim() != plant_.state_dim())
        throw DimensionError("closed loop: controller input width differs from state dimension");
    if (controller_.output_dim() != plant_.input_dim())
        throw DimensionError("closed loop: controller output width differs from plant input dimension");
    if (state_set_.dim() != plant_.state_dim())
        throw DimensionError("closed loop: state set dimension differs from state dimension");
}

ClosedLoopSystem ClosedLoopSystem::with_graph(std::optional<ActivationScale> scale) const
{
    ClosedLoopSystem out = *this;
    out.graph_ = fnn_graph(controller_, state_set_, scale);
    return out;
}

Vector ClosedLoopSystem::step(const Vector& x) const
{
    return plant_.A * x + plant_.B * controller_.evaluate(x);
}

HybridZonotope one_step_brs(const HybridZonotope& graph, const LinearPlant& plant, const HybridZonotope& target)
{
    plant.validate();
    const Eigen::Index n = plant.state_dim();
    if (graph.dim() != n + plant.input_dim())
        throw DimensionError("one_step_brs: graph dimension " + std::to_string(graph.dim()) + ", expected " +
                             std::to_string(n + plant.input_dim()));
    if (target.dim() != n)
        throw DimensionError("one_step_brs: target dimension differs from state dimension");

    const SparseMatrix D = detail::to_sparse(plant.stacked());
    const SparseMatrix DGc = D * graph.gen_cont();
    const SparseMatrix DGb = D * graph.gen_bin();
    const SparseMatrix Gc_x = detail::select_rows(graph.gen_cont(), 0, n);
    const SparseMatrix Gb_x = detail::select_rows(graph.gen_bin(), 0, n);

    const Eigen::Index ng = graph.n_cont() + target.n_cont();
    const Eigen::Index nb = graph.n_bin() + target.n_bin();
    const Eigen::Index nc = graph.n_cons() + target.n_cons() + n;
    const Eigen::Index r1 = graph.n_cons();
    const Eigen::Index r2 = r1 + target.n_cons();

    SparseMatrix Gc = detail::assemble(n, ng, {{0, 0, &Gc_x, 1.0}});
    SparseMatrix Gb = detail::assemble(n, nb, {{0, 0, &Gb_x, 1.0}});
    SparseMatrix Ac = detail::assemble(nc, ng, {{0, 0, &graph.con_cont(), 1.0},
                                                {r1, graph.n_cont(), &target.con_cont(), 1.0},
                                                {r2, 0, &DGc, 1.0},
                                                {r2, graph.n_cont(), &target.gen_cont(), -1.0}});
    SparseMatrix Ab = detail::assemble(nc, nb, {{0, 0, &graph.con_bin(), 1.0},
                                                {r1, graph.n_bin(), &target.con_bin(), 1.0},
                                                {r2, 0, &DGb, 1.0},
                                                {r2, graph.n_bin(), &target.gen_bin(), -1.0}});
    Vector b(nc);
    b << graph.con_rhs(), target.con_rhs(), target.center() - D * graph.center();
    return HybridZonotope(graph.center().head(n), std::move(Gc), std::move(Gb), std::move(Ac), std::move(Ab),
                          std::move(b));
}

Complexity expected_brs_complexity(const Complexity& state_set, const Complexity& target, Eigen::Index hidden_neurons,
                                   Eigen::Index state_dim, int t)
{
    return {t * (state_set.n_g + 6 * hidden_neurons) + target.n_g, t * (state_set.n_b + hidden_neurons) + target.n_b,
            t * (state_set.n_c + 5 * hidden_neurons + state_dim) + target.n_c};
}

BrsSequence t_step_brs(const ClosedLoopSystem& system, const HybridZonotope& target, int horizon,
                       const BrsSettings& settings)
{
    if (horizon < 1)
        throw std::invalid_argument("t_step_brs: horizon must be at least 1");
    if (target.dim() != system.plant().state_dim())
        throw DimensionError("t_step_brs: target dimension differs from state dimension");

    const auto start = std::chrono::steady_clock::now();
    BrsSequence out;
    ClosedLoopSystem cl = system;
    if (!cl.graph() || (settings.scale && (settings.scale->alpha != cl.graph()->scale.alpha ||
                                           settings.scale->beta != cl.graph()->scale.beta)))
        cl = system.with_graph(settings.scale);
    out.graph_seconds = seconds_since(start);
    const NetworkGraph& g = *cl.graph();
    out.scale = g.scale;
    out.graph_complexity = g.graph.complexity();
    out.hidden_neurons = g.hidden_neurons;

    const Complexity cx = system.state_set().complexity();
    const Complexity expected_graph = expected_graph_complexity(cx, g.hidden_neurons);
    if (!(out.graph_complexity == expected_graph))
        throw std::logic_error("graph complexity " + describe(out.graph_complexity) + " differs from expected " +
                               describe(expected_graph));

    const Eigen::Index n = system.plant().state_dim();
    out.sets.push_back(target);
    bool empty_reached = false;
    for (int t = 1; t <= horizon; ++t) {
        const auto step_start = std::chrono::steady_clock::now();
        BrsStep rec;
        rec.t = t;
        rec.expected = expected_brs_complexity(cx, target.complexity(), g.hidden_neurons, n, t);
        if (empty_reached) {
            out.sets.push_back(HybridZonotope::empty_set(n));
            rec.pruned = true;
        } else {
            HybridZonotope next = one_step_brs(g.graph, system.plant(), out.sets.back());
            out.sets.push_back(std::move(next));
            if (!(out.sets.back().complexity() == rec.expected))
                throw std::logic_error("step " + std::to_string(t) + " complexity " +
                                       describe(out.sets.back().complexity()) + " differs from expected " +
                                       describe(rec.expected));
            if (settings.prune_empty && is_empty(out.sets.back(), settings.emptiness))
                empty_reached = true;
        }
        rec.complexity = out.sets.back().complexity();
        rec.wall_seconds = seconds_since(step_start);
        out.steps.push_back(rec);
    }
    out.total_seconds = seconds_since(start);
    return out;
}

std::vector<signed char> brs_binary_hint(const ClosedLoopSystem& system, const Vector& x, int t,
                                         Eigen::Index target_binaries)
{
    if (t < 0)
        throw std::invalid_argument("brs_binary_hint: negative step");
    // P_t's binaries are [graph binaries at x_0, ..., graph binaries at x_{t-1}, target binaries],
    // and the graph's binaries are [state set binaries, neuron binaries].
    const auto own = static_cast<std::size_t>(system.state_set().n_bin());
    std::vector<signed char> hint;
    Vector xk = x;
    for (int k = 0; k < t; ++k) {
        hint.insert(hint.end(), own, 0);
        const std::vector<signed char> pattern = activation_pattern(system.controller(), xk);
        hint.insert(hint.end(), pattern.begin(), pattern.end());
        xk = system.step(xk);
    }
    hint.insert(hint.end(), static_cast<std::size_t>(target_binaries), 0);
    return hint;
}

HorizonReport verify_horizon(const BrsSequence& brs, const HybridZonotope& X0, const VerifySettings& settings)
{
    if (brs.sets.empty())
        return {};
    return verify_horizon(std::span<const HybridZonotope>(brs.sets).subspan(1), X0, settings);
}

}  // namespace hzreach
