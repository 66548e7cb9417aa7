#include "hzreach/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace hzreach::io {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw FormatError(what);
}

double number(const json& v, const std::string& what)
{
    require(v.is_number(), what + ": expected a number");
    return v.get<double>();
}

bool is_triplet(const json& j)
{
    return j.is_object() && j.contains("entries");
}

std::vector<Eigen::Triplet<double>> triplets_from_json(const json& j, Eigen::Index& rows, Eigen::Index& cols)
{
    std::vector<Eigen::Triplet<double>> out;
    if (is_triplet(j)) {
        require(j.contains("rows") && j.contains("cols"), "sparse matrix needs rows and cols");
        const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
        require(r >= 0 && c >= 0, "sparse matrix: negative shape");
        require(rows < 0 || rows == r, "sparse matrix: expected " + std::to_string(rows) + " rows");
        require(cols < 0 || cols == c, "sparse matrix: expected " + std::to_string(cols) + " columns");
        rows = r;
        cols = c;
        for (const json& e : j.at("entries")) {
            require(e.is_array() && e.size() == 3, "sparse entry must be [row, col, value]");
            const auto i = e[0].get<Eigen::Index>(), k = e[1].get<Eigen::Index>();
            require(i >= 0 && i < r && k >= 0 && k < c, "sparse entry out of range");
            out.emplace_back(i, k, number(e[2], "sparse entry"));
        }
        return out;
    }
    require(j.is_array(), "matrix must be a list of rows");
    const auto r = static_cast<Eigen::Index>(j.size());
    if (r == 0) {
        // An empty list fixes nothing but the absence of data.
        require(rows <= 0 || cols == 0, "matrix: missing rows");
        rows = std::max<Eigen::Index>(rows, 0);
        cols = std::max<Eigen::Index>(cols, 0);
        return out;
    }
    require(rows < 0 || rows == r, "matrix: expected " + std::to_string(rows) + " rows, got " + std::to_string(r));
    rows = r;
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        require(row.is_array(), "matrix row must be a list");
        const auto c = static_cast<Eigen::Index>(row.size());
        if (cols < 0)
            cols = c;
        require(c == cols, "matrix row " + std::to_string(i) + " has " + std::to_string(c) + " entries, expected " +
                               std::to_string(cols));
        for (Eigen::Index k = 0; k < c; ++k) {
            const double v = number(row[static_cast<std::size_t>(k)], "matrix entry");
            if (v != 0.0)
                out.emplace_back(i, k, v);
        }
    }
    return out;
}

Vector optional_vector(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return Vector(0);
    return vector_from_json(j.at(key));
}

SparseMatrix optional_sparse(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols)
{
    if (!j.contains(key) || j.at(key).is_null() || (j.at(key).is_array() && j.at(key).empty()))
        return SparseMatrix(rows, cols);
    return sparse_from_json(j.at(key), rows, cols);
}

Eigen::Index column_count(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return 0;
    const json& m = j.at(key);
    if (is_triplet(m))
        return m.at("cols").get<Eigen::Index>();
    require(m.is_array(), std::string(key) + " must be a list of rows");
    if (m.empty())
        return 0;
    require(m[0].is_array(), std::string(key) + " rows must be lists");
    return static_cast<Eigen::Index>(m[0].size());
}

}  // namespace

json matrix_to_json(const SparseMatrix& m)
{
    if (m.rows() * m.cols() > kDenseLimit) {
        json entries = json::array();
        for (Eigen::Index k = 0; k < m.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(m, k); it; ++it)
                entries.push_back(json::array({it.row(), it.col(), it.value()}));
        return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
    }
    return matrix_to_json(Matrix(m));
}

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols)
{
    const auto trips = triplets_from_json(j, rows, cols);
    Matrix m = Matrix::Zero(rows, cols);
    for (const auto& t : trips)
        m(t.row(), t.col()) += t.value();
    return m;
}

SparseMatrix sparse_from_json(const json& j, Eigen::Index rows, Eigen::Index cols)
{
    const auto trips = triplets_from_json(j, rows, cols);
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Vector vector_from_json(const json& j)
{
    require(j.is_array(), "vector must be a list");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = number(j[i], "vector entry");
    return v;
}

json to_json(const HybridZonotope& Z)
{
    return {
        {"center", vector_to_json(Z.center())},
        {"Gc", matrix_to_json(Z.gen_cont())},
        {"Gb", matrix_to_json(Z.gen_bin())},
        {"Ac", matrix_to_json(Z.con_cont())},
        {"Ab", matrix_to_json(Z.con_bin())},
        {"b", vector_to_json(Z.con_rhs())},
    };
}

HybridZonotope hz_from_json(const json& j)
{
    require(j.is_object(), "hybrid zonotope must be an object");
    require(j.contains("center"), "hybrid zonotope needs a center");
    const Vector c = vector_from_json(j.at("center"));
    const Vector b = optional_vector(j, "b");
    const Eigen::Index n = c.size(), nc = b.size();
    const Eigen::Index ng = std::max(column_count(j, "Gc"), column_count(j, "Ac"));
    const Eigen::Index nb = std::max(column_count(j, "Gb"), column_count(j, "Ab"));
    try {
        return HybridZonotope(c, optional_sparse(j, "Gc", n, ng), optional_sparse(j, "Gb", n, nb),
                              optional_sparse(j, "Ac", nc, ng), optional_sparse(j, "Ab", nc, nb), b);
    } catch (const DimensionError& e) {
        throw FormatError(std::string("hybrid zonotope: ") + e.what());
    }
}

HybridZonotope set_from_json(const json& j, const std::filesystem::path& base)
{
    require(j.is_object(), "set must be an object");
    if (j.contains("box")) {
        const json& box = j.at("box");
        const Vector lo = vector_from_json(box.at("lower")), hi = vector_from_json(box.at("upper"));
        require(lo.size() == hi.size(), "box bounds differ in length");
        require((lo.array() <= hi.array()).all(), "box lower bound exceeds upper bound");
        return HybridZonotope::box(lo, hi);
    }
    if (j.contains("point"))
        return HybridZonotope::point(vector_from_json(j.at("point")));
    if (j.contains("file"))
        return hz_from_json(read_file(base / j.at("file").get<std::string>()));
    return hz_from_json(j);
}

json to_json(const FeedforwardNetwork& net)
{
    json out{{"weights", json::array()}, {"biases", json::array()}};
    for (const Matrix& W : net.weights)
        out["weights"].push_back(matrix_to_json(W));
    for (const Vector& v : net.biases)
        out["biases"].push_back(vector_to_json(v));
    if (net.saturation)
        out["saturation"] = {{"lower", vector_to_json(net.saturation->lower)},
                             {"upper", vector_to_json(net.saturation->upper)}};
    return out;
}

FeedforwardNetwork network_from_json(const json& j)
{
    require(j.is_object() && j.contains("weights") && j.contains("biases"), "network needs weights and biases");
    FeedforwardNetwork net;
    for (const json& W : j.at("weights"))
        net.weights.push_back(matrix_from_json(W));
    for (const json& v : j.at("biases"))
        net.biases.push_back(vector_from_json(v));
    if (j.contains("saturation") && !j.at("saturation").is_null()) {
        const json& s = j.at("saturation");
        net.saturation = SaturationBounds{vector_from_json(s.at("lower")), vector_from_json(s.at("upper"))};
    }
    require(!net.weights.empty(), "network has no layers");
    try {
        net.validate();
    } catch (const DimensionError& e) {
        throw FormatError(std::string("network: ") + e.what());
    }
    return net;
}

json to_json(const Complexity& c)
{
    return {{"n_g", c.n_g}, {"n_b", c.n_b}, {"n_c", c.n_c}};
}

namespace {

Complexity complexity_from_json(const json& j)
{
    return {j.at("n_g").get<Eigen::Index>(), j.at("n_b").get<Eigen::Index>(), j.at("n_c").get<Eigen::Index>()};
}

}  // namespace

json to_json(const BrsSequence& brs)
{
    json sets = json::array();
    for (std::size_t t = 0; t < brs.sets.size(); ++t) {
        json entry{{"t", t}, {"complexity", to_json(brs.sets[t].complexity())}, {"set", to_json(brs.sets[t])}};
        if (t > 0 && t - 1 < brs.steps.size()) {
            const BrsStep& s = brs.steps[t - 1];
            entry["expected"] = to_json(s.expected);
            entry["wall_seconds"] = s.wall_seconds;
            entry["pruned"] = s.pruned;
        }
        sets.push_back(std::move(entry));
    }
    return {
        {"scale", {{"alpha", brs.scale.alpha}, {"beta", brs.scale.beta}}},
        {"graph_complexity", to_json(brs.graph_complexity)},
        {"hidden_neurons", brs.hidden_neurons},
        {"graph_seconds", brs.graph_seconds},
        {"total_seconds", brs.total_seconds},
        {"sets", std::move(sets)},
    };
}

BrsSequence brs_from_json(const json& j)
{
    BrsSequence brs;
    const json* sets = &j;
    if (j.is_object()) {
        require(j.contains("sets"), "BRS file needs sets");
        sets = &j.at("sets");
        if (j.contains("scale"))
            brs.scale = {j.at("scale").at("alpha").get<double>(), j.at("scale").at("beta").get<double>()};
        if (j.contains("graph_complexity"))
            brs.graph_complexity = complexity_from_json(j.at("graph_complexity"));
        brs.hidden_neurons = j.value("hidden_neurons", Eigen::Index{0});
        brs.graph_seconds = j.value("graph_seconds", 0.0);
        brs.total_seconds = j.value("total_seconds", 0.0);
    }
    require(sets->is_array(), "BRS sets must be a list");
    for (const json& entry : *sets) {
        const bool wrapped = entry.contains("set");
        brs.sets.push_back(hz_from_json(wrapped ? entry.at("set") : entry));
        if (brs.sets.size() == 1)
            continue;
        BrsStep s;
        s.t = static_cast<int>(brs.sets.size()) - 1;
        s.complexity = brs.sets.back().complexity();
        if (wrapped) {
            if (entry.contains("expected"))
                s.expected = complexity_from_json(entry.at("expected"));
            s.wall_seconds = entry.value("wall_seconds", 0.0);
            s.pruned = entry.value("pruned", false);
        }
        brs.steps.push_back(s);
    }
    return brs;
}

json to_json(const PolygonSet& ps)
{
    json polygons = json::array();
    for (const Polygon& p : ps.polygons) {
        json poly = json::array();
        for (const Point2& v : p)
            poly.push_back(json::array({v.x(), v.y()}));
        polygons.push_back(std::move(poly));
    }
    json leaves = json::array();
    for (const auto& a : ps.leaf_assignments) {
        json row = json::array();
        for (signed char s : a)
            row.push_back(static_cast<int>(s));
        leaves.push_back(std::move(row));
    }
    return {{"plane", matrix_to_json(ps.plane)}, {"polygons", std::move(polygons)}, {"leaf_assignments", std::move(leaves)}};
}

json to_json(const AvoidanceResult& r)
{
    json out{{"safe", r.safe}, {"nodes", r.nodes}, {"wall_seconds", r.wall_seconds}};
    if (r.optimum)
        out["optimum"] = std::isfinite(*r.optimum) ? json(*r.optimum) : json("inf");
    if (r.witness_state)
        out["witness_state"] = vector_to_json(*r.witness_state);
    return out;
}

json read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const json& j)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::ios_base::failure("cannot write " + path.string());
    out << j.dump(1) << '\n';
    if (!out)
        throw std::ios_base::failure("failed writing " + path.string());
}

void Scenario::validate() const
{
    const Eigen::Index n = plant.state_dim();
    auto check = [&](const HybridZonotope& Z, const char* name) {
        require(Z.dim() == n, std::string(name) + " has dimension " + std::to_string(Z.dim()) + ", plant has " +
                                  std::to_string(n));
    };
    try {
        plant.validate();
        controller.validate();
    } catch (const DimensionError& e) {
        throw FormatError(e.what());
    }
    require(controller.input_dim() == n, "controller input dimension differs from the state dimension");
    require(controller.output_dim() == plant.input_dim(), "controller output dimension differs from the plant input");
    check(state_set, "state_set");
    check(target, "target");
    if (initial_set)
        check(*initial_set, "initial_set");
    require(horizon >= 0, "horizon must be nonnegative");
    require(membership_tol > 0 && strict_tol >= 0, "tolerances must be positive");
    if (scale)
        require(scale->alpha > 0 && scale->beta > 0, "scale must be positive");
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base)
{
    require(j.is_object(), "scenario must be an object");
    Scenario s;
    try {
        const json& plant = j.at("plant");
        s.plant.A = matrix_from_json(plant.at("A"));
        s.plant.B = matrix_from_json(plant.at("B"), s.plant.A.rows());
        const json& ctrl = j.at("controller");
        if (ctrl.is_string()) {
            s.controller_path = base / ctrl.get<std::string>();
            s.controller = network_from_json(read_file(s.controller_path));
        } else {
            s.controller = network_from_json(ctrl);
        }
        s.state_set = set_from_json(j.at("state_set"), base);
        s.target = set_from_json(j.at("target"), base);
        if (j.contains("initial_set") && !j.at("initial_set").is_null())
            s.initial_set = set_from_json(j.at("initial_set"), base);
        s.horizon = j.value("horizon", 1);
        if (j.contains("scale") && !j.at("scale").is_null())
            s.scale = ActivationScale{j.at("scale").at("alpha").get<double>(), j.at("scale").at("beta").get<double>()};
        if (j.contains("tolerances")) {
            const json& tol = j.at("tolerances");
            s.membership_tol = tol.value("membership", s.membership_tol);
            s.strict_tol = tol.value("strict", s.strict_tol);
        }
        s.node_limit = j.value("node_limit", s.node_limit);
        s.prune_empty = j.value("prune_empty", false);
        s.relax = j.value("relax", false);
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw FormatError(std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    Scenario s = scenario_from_json(read_file(path), path.parent_path());
    s.source = path;
    return s;
}

}  // namespace hzreach::io
