// hzreach: backward reachability and safety verification of ReLU feedback systems.
//
// Exit codes: 0 ok / safe, 1 usage or I/O error, 2 activation enclosure violated,
// 3 unsafe, 4 solver or sampling limit reached.

#include "hzreach/geom.hpp"
#include "hzreach/io.hpp"
#include "hzreach/optim.hpp"
#include "hzreach/reach.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

using namespace hzreach;
namespace fs = std::filesystem;
using io::json;

namespace {

enum Exit : int { ok = 0, io_error = 1, enclosure = 2, unsafe = 3, solver_limit = 4 };

/// Rejection sampling gave up.
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    fs::path scenario;
    fs::path out = ".";
    bool relax = false;
    bool prune_empty = false;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_membership;
    std::optional<double> tol_strict;
    std::optional<std::size_t> node_limit;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario = true)
{
    auto* s = cmd->add_option("--scenario", c.scenario, "Scenario JSON file");
    if (needs_scenario)
        s->required();
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
    cmd->add_flag("--relax", c.relax, "Screen with the LP relaxation before exact checks");
    cmd->add_flag("--prune-empty", c.prune_empty, "Stop growing the sequence once a set is empty");
    cmd->add_option("--seed", c.seed, "Random seed (default: scenario seed, else 0)");
    cmd->add_option("--tol-membership", c.tol_membership, "Membership tolerance");
    cmd->add_option("--tol-strict", c.tol_strict, "Strict margin of emptiness and safety decisions");
    cmd->add_option("--node-limit", c.node_limit, "Branch-and-bound node limit");
}

io::Scenario load(const Common& c)
{
    io::Scenario s = io::load_scenario(c.scenario);
    s.relax = s.relax || c.relax;
    s.prune_empty = s.prune_empty || c.prune_empty;
    if (c.seed)
        s.seed = *c.seed;
    if (c.tol_membership)
        s.membership_tol = *c.tol_membership;
    if (c.tol_strict)
        s.strict_tol = *c.tol_strict;
    if (c.node_limit)
        s.node_limit = *c.node_limit;
    s.validate();
    return s;
}

MilpSettings milp_settings(const io::Scenario& s, MilpSettings base = {})
{
    base.node_limit = s.node_limit;
    return base;
}

std::string format(const char* fmt, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BrsSequence compute_brs(const io::Scenario& s)
{
    BrsSettings settings;
    settings.scale = s.scale;
    settings.prune_empty = s.prune_empty;
    settings.emptiness.strict_tol = s.strict_tol;
    settings.emptiness.milp = milp_settings(s);
    if (s.horizon == 0) {
        BrsSequence brs;
        brs.sets.push_back(s.target);
        return brs;
    }
    return t_step_brs(s.system(), s.target, s.horizon, settings);
}

/// x_0 .. x_t from x.
std::vector<Vector> simulate(const ClosedLoopSystem& sys, const Vector& x, int t)
{
    std::vector<Vector> traj{x};
    for (int k = 0; k < t; ++k)
        traj.push_back(sys.step(traj.back()));
    return traj;
}

json states_json(const std::vector<Vector>& traj)
{
    json out = json::array();
    for (const Vector& x : traj)
        out.push_back(io::vector_to_json(x));
    return out;
}

int cmd_graph(const Common& c)
{
    const io::Scenario s = load(c);
    const auto t0 = std::chrono::steady_clock::now();
    const ClosedLoopSystem sys = s.system().with_graph(s.scale);
    const double secs = seconds_since(t0);
    const NetworkGraph& g = *sys.graph();
    const Complexity got = g.graph.complexity();
    const Complexity want = expected_graph_complexity(s.state_set.complexity(), g.hidden_neurons);
    io::write_file(c.out / "graph.json", io::to_json(g.graph));

    std::cout << format("graph of %ld hidden neurons, alpha = %g, beta = %g, %.3f s\n", long(g.hidden_neurons),
                        g.scale.alpha, g.scale.beta, secs);
    std::cout << format("%-6s %10s %10s  %s\n", "", "computed", "expected", "status");
    bool all = true;
    auto row = [&](const char* name, Eigen::Index a, Eigen::Index b) {
        all = all && a == b;
        std::cout << format("%-6s %10ld %10ld  %s\n", name, long(a), long(b), a == b ? "PASS" : "FAIL");
    };
    row("n_g", got.n_g, want.n_g);
    row("n_b", got.n_b, want.n_b);
    row("n_c", got.n_c, want.n_c);
    std::cout << "wrote " << (c.out / "graph.json").string() << '\n';
    return all ? ok : io_error;
}

void print_brs_table(const BrsSequence& brs)
{
    std::cout << format("graph: %ld hidden neurons, alpha = %g, beta = %g, %.3f s\n", long(brs.hidden_neurons),
                        brs.scale.alpha, brs.scale.beta, brs.graph_seconds);
    std::cout << format("%4s %8s %8s %8s  %-7s %-7s %10s\n", "t", "n_g", "n_b", "n_c", "counts", "pruned", "seconds");
    for (const BrsStep& st : brs.steps)
        std::cout << format("%4d %8ld %8ld %8ld  %-7s %-7s %10.4f\n", st.t, long(st.complexity.n_g),
                            long(st.complexity.n_b), long(st.complexity.n_c),
                            st.pruned ? "-" : (st.complexity == st.expected ? "PASS" : "FAIL"), st.pruned ? "yes" : "no",
                            st.wall_seconds);
    std::cout << format("total %.3f s\n", brs.total_seconds);
}

int cmd_brs(const Common& c)
{
    const io::Scenario s = load(c);
    const BrsSequence brs = compute_brs(s);
    io::write_file(c.out / "brs.json", io::to_json(brs));
    print_brs_table(brs);
    std::cout << "wrote " << (c.out / "brs.json").string() << '\n';
    return ok;
}

struct Confirmation {
    std::vector<Vector> trajectory;
    bool confirmed = false;
};

/// Forward simulation of an unsafe witness: x_t must lie in the target, x_0..x_{t-1} in X.
Confirmation confirm(const io::Scenario& s, const ClosedLoopSystem& sys, const Vector& x, int t)
{
    Confirmation out{simulate(sys, x, t)};
    out.confirmed = contains_point(s.target, out.trajectory.back(), s.membership_tol);
    for (int k = 0; k < t && out.confirmed; ++k)
        out.confirmed = contains_point(s.state_set, out.trajectory[std::size_t(k)], s.membership_tol);
    return out;
}

int cmd_verify(const Common& c, bool optima)
{
    const io::Scenario s = load(c);
    if (!s.initial_set)
        throw io::FormatError("verify needs an initial_set in the scenario");
    const BrsSequence brs = compute_brs(s);
    const HybridZonotope& X0 = *s.initial_set;

    VerifySettings vs;
    vs.strict_tol = s.strict_tol;
    vs.compute_optimum = optima;
    vs.milp = milp_settings(s);

    const auto t0 = std::chrono::steady_clock::now();
    HorizonReport report;
    std::optional<HorizonReport> relaxed;
    if (s.relax) {
        // A relaxed "safe" is final; relaxed "unsafe" steps are rechecked exactly.
        std::vector<HybridZonotope> sets;
        for (std::size_t t = 1; t < brs.sets.size(); ++t)
            sets.push_back(relax_to_lp(brs.sets[t]));
        relaxed = verify_horizon(sets, relax_to_lp(X0), vs);
        report = *relaxed;
        report.safe = true;
        report.first_unsafe.reset();
        for (HorizonStep& st : report.steps) {
            if (st.result.safe)
                continue;
            st.result = verify_avoidance(brs.sets[std::size_t(st.t)], X0, vs);
            if (!st.result.safe && !report.first_unsafe)
                report.first_unsafe = st.t;
            report.safe = report.safe && st.result.safe;
        }
    } else {
        report = verify_horizon(brs, X0, vs);
    }
    report.wall_seconds = seconds_since(t0);

    const ClosedLoopSystem sys = s.system();
    json steps = json::array();
    std::cout << format("%4s %-7s %-7s %12s %8s %10s  %s\n", "t", "relaxed", "verdict", "optimum", "nodes", "seconds",
                        "witness");
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const HorizonStep& st = report.steps[i];
        json j = io::to_json(st.result);
        j["t"] = st.t;
        if (relaxed)
            j["relaxed_safe"] = relaxed->steps[i].result.safe;
        std::string witness = "-";
        if (!st.result.safe && st.result.witness_state) {
            const Confirmation conf = confirm(s, sys, *st.result.witness_state, st.t);
            j["witness_trajectory"] = states_json(conf.trajectory);
            j["confirmed"] = conf.confirmed;
            witness = conf.confirmed ? "enters target (confirmed)" : "NOT confirmed by simulation";
        }
        const std::string opt = st.result.optimum ? format("%12.6g", *st.result.optimum) : format("%12s", "-");
        const char* lp = !relaxed ? "-" : (relaxed->steps[i].result.safe ? "safe" : "unsafe");
        std::cout << format("%4d %-7s %-7s %s %8zu %10.4f  %s\n", st.t, lp, st.result.safe ? "safe" : "UNSAFE", opt.c_str(),
                            st.result.nodes, st.result.wall_seconds, witness.c_str());
        steps.push_back(std::move(j));
    }
    json out{{"safe", report.safe},
             {"first_unsafe", report.first_unsafe ? json(*report.first_unsafe) : json(nullptr)},
             {"relaxed", s.relax},
             {"brs_seconds", brs.total_seconds},
             {"verify_seconds", report.wall_seconds},
             {"steps", std::move(steps)}};
    io::write_file(c.out / "verify.json", out);
    std::cout << format("%s (BRS %.3f s, verification %.3f s)\n", report.safe ? "SAFE" : "UNSAFE", brs.total_seconds,
                        report.wall_seconds);
    return report.safe ? ok : unsafe;
}

Matrix parse_plane(const std::string& text, Eigen::Index n)
{
    std::stringstream ss(text);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
        throw io::FormatError("--plane expects two coordinate indices, as in 0,1");
    const long i = std::stol(a), j = std::stol(b);
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw io::FormatError("--plane indices out of range for dimension " + std::to_string(n));
    return coordinate_plane(n, i, j);
}

struct ProjectOptions {
    fs::path input;
    std::string plane = "0,1";
    std::optional<int> step;
    std::size_t max_binaries = 25;
    double angular_tol = 1e-4;
};

int cmd_project(const Common& c, const ProjectOptions& p)
{
    const json in = io::read_file(p.input);
    LeafSettings leaf;
    leaf.max_binaries = p.max_binaries;
    if (c.node_limit)
        leaf.milp.node_limit = *c.node_limit;
    auto project = [&](const HybridZonotope& Z, const fs::path& file) {
        const PolygonSet ps = hz_to_polygons(Z, parse_plane(p.plane, Z.dim()), p.angular_tol, leaf);
        io::write_file(file, io::to_json(ps));
        std::cout << format("%zu polygons -> %s\n", ps.polygons.size(), file.string().c_str());
    };
    const bool sequence = in.is_array() || (in.is_object() && in.contains("sets"));
    if (!sequence) {
        project(io::hz_from_json(in), c.out / "polygons.json");
        return ok;
    }
    const BrsSequence brs = io::brs_from_json(in);
    for (std::size_t t = 0; t < brs.sets.size(); ++t)
        if (!p.step || *p.step == int(t))
            project(brs.sets[t], c.out / ("polygons_t" + std::to_string(t) + ".json"));
    if (p.step && (*p.step < 0 || std::size_t(*p.step) >= brs.sets.size()))
        throw io::FormatError("--step out of range");
    return ok;
}

struct SimulateOptions {
    std::size_t samples = 100;
    std::size_t max_attempts = 10000;
    bool check = false;
};

int cmd_simulate(const Common& c, const SimulateOptions& o)
{
    const io::Scenario s = load(c);
    if (!s.initial_set)
        throw io::FormatError("simulate needs an initial_set in the scenario");
    const ClosedLoopSystem sys = s.system();
    const IntervalBox box = interval_enclosure(*s.initial_set);
    MembershipOracle in_x0(*s.initial_set, s.membership_tol, milp_settings(s, feasibility_search_settings()));
    MembershipOracle in_x(s.state_set, s.membership_tol, milp_settings(s, feasibility_search_settings()));
    MembershipOracle in_target(s.target, s.membership_tol, milp_settings(s, feasibility_search_settings()));
    std::mt19937_64 rng(s.seed);

    std::optional<BrsSequence> brs;
    std::vector<std::optional<MembershipOracle>> brs_oracles;
    if (o.check && s.horizon > 0) {
        brs = compute_brs(s);
        brs_oracles.resize(brs->sets.size());
    }

    json trajectories = json::array();
    std::size_t entering = 0, checked = 0, failures = 0;
    for (std::size_t k = 0; k < o.samples; ++k) {
        Vector x0(box.dim());
        std::size_t attempt = 0;
        for (;; ++attempt) {
            if (attempt == o.max_attempts)
                throw SamplingError("rejection sampling found no initial state in " + std::to_string(o.max_attempts) +
                                  " attempts");
            for (Eigen::Index i = 0; i < x0.size(); ++i)
                x0(i) = std::uniform_real_distribution<double>(box.lower(i), box.upper(i))(rng);
            if (in_x0.contains(x0))
                break;
        }
        const std::vector<Vector> traj = simulate(sys, x0, s.horizon);
        // Steps t at which x_t is in the target while x_0..x_{t-1} stayed in X.
        json hits = json::array();
        for (int t = 1; t <= s.horizon; ++t) {
            if (!in_x.contains(traj[std::size_t(t - 1)]))
                break;
            if (!in_target.contains(traj[std::size_t(t)]))
                continue;
            hits.push_back(t);
            if (!brs)
                continue;
            auto& oracle = brs_oracles[std::size_t(t)];
            if (!oracle)
                oracle.emplace(brs->sets[std::size_t(t)], s.membership_tol, milp_settings(s, feasibility_search_settings()));
            ++checked;
            if (!oracle->witness(x0, brs_binary_hint(sys, x0, t, s.target.n_bin())))
                ++failures;
        }
        entering += !hits.empty();
        trajectories.push_back({{"states", states_json(traj)}, {"target_steps", std::move(hits)}});
    }
    json out{{"seed", s.seed},
             {"horizon", s.horizon},
             {"samples", o.samples},
             {"entering", entering},
             {"trajectories", std::move(trajectories)}};
    if (brs)
        out["membership_check"] = {{"checked", checked}, {"failures", failures}};
    io::write_file(c.out / "trajectories.json", out);
    std::cout << format("%zu trajectories, %zu enter the target\n", o.samples, entering);
    if (brs)
        std::cout << format("membership check: %zu of %zu tagged states are in their P_t\n", checked - failures,
                            checked);
    std::cout << "wrote " << (c.out / "trajectories.json").string() << '\n';
    return failures == 0 ? ok : io_error;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Backward reachable sets and safety verification of ReLU feedback systems"};
    app.require_subcommand(1);

    Common graph_c, brs_c, verify_c, project_c, simulate_c;
    auto* graph = app.add_subcommand("graph", "Graph set of the controller over X, with a complexity table");
    add_common(graph, graph_c);
    auto* brs = app.add_subcommand("brs", "Backward reachable sets P_1..P_T of the target");
    add_common(brs, brs_c);
    auto* verify = app.add_subcommand("verify", "Check that no P_t meets the initial set");
    add_common(verify, verify_c);
    bool optima = false;
    verify->add_flag("--optima", optima, "Also report the min-norm optimum of each step (slow)");
    auto* project = app.add_subcommand("project", "Polygons of a set or of every set of a BRS file");
    add_common(project, project_c, false);
    ProjectOptions popt;
    project->add_option("--input", popt.input, "Hybrid zonotope or BRS JSON file")->required();
    project->add_option("--plane", popt.plane, "Coordinate indices i,j")->capture_default_str();
    project->add_option("--step", popt.step, "Only this step of a BRS file");
    project->add_option("--max-binaries", popt.max_binaries, "Refuse sets with more binaries")->capture_default_str();
    project->add_option("--angular-tol", popt.angular_tol, "Support sweep tolerance")->capture_default_str();
    auto* sim = app.add_subcommand("simulate", "Trajectories from uniformly sampled initial states");
    add_common(sim, simulate_c);
    SimulateOptions sopt;
    sim->add_option("--samples", sopt.samples, "Number of trajectories")->capture_default_str();
    sim->add_option("--max-attempts", sopt.max_attempts, "Rejection-sampling attempts per sample")
        ->capture_default_str();
    sim->add_flag("--check", sopt.check, "Check target-entering initial states against P_t");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return io_error;
    }

    try {
        if (*graph)
            return cmd_graph(graph_c);
        if (*brs)
            return cmd_brs(brs_c);
        if (*verify)
            return cmd_verify(verify_c, optima);
        if (*project)
            return cmd_project(project_c, popt);
        return cmd_simulate(simulate_c, sopt);
    } catch (const EnclosureError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return enclosure;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return solver_limit;
    } catch (const SamplingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return solver_limit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io_error;
    }
}
