#include "hzreach/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace hzreach;
using io::json;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / ("hzreach_io_" + name))
    {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

HybridZonotope through_text(const HybridZonotope& Z)
{
    return io::hz_from_json(json::parse(io::to_json(Z).dump()));
}

}  // namespace

TEST_CASE("hybrid zonotopes survive a text round trip exactly")
{
    std::mt19937_64 rng(3);
    for (int inst = 0; inst < 10; ++inst) {
        const HybridZonotope Z = oracle::random_hz(rng, 1 + inst % 3, inst % 4, inst % 3, inst % 3, 0.7);
        CHECK(through_text(Z).structurally_equal(Z));
    }
    const HybridZonotope tricky = HybridZonotope::point(vec({0.1 + 0.2, 1.0 / 3.0, -1e-300}));
    CHECK(through_text(tricky).structurally_equal(tricky));
    CHECK(through_text(HybridZonotope::empty_set(2)).structurally_equal(HybridZonotope::empty_set(2)));
}

TEST_CASE("keys and block shapes")
{
    const json j = io::to_json(relu_graph_hz(1.0, 2.0));
    for (const char* key : {"center", "Gc", "Gb", "Ac", "Ab", "b"})
        CHECK(j.contains(key));
    CHECK(j["Gc"].size() == 2);
    CHECK(j["Gc"][0].size() == 6);
    CHECK(j["Ab"].size() == 4);
    CHECK(j["Ab"][0].size() == 1);
}

TEST_CASE("absent or empty keys mean zero rows or columns")
{
    const HybridZonotope p = io::hz_from_json(json::parse(R"({"center": [1, 2]})"));
    CHECK(p.structurally_equal(HybridZonotope::point(vec({1.0, 2.0}))));
    const HybridZonotope seg = io::hz_from_json(json::parse(R"({"center": [0], "Gc": [[2]], "Ac": [], "b": []})"));
    CHECK(seg.complexity() == Complexity{1, 0, 0});
    const HybridZonotope bin = io::hz_from_json(json::parse(R"({"center": [0], "Gb": [[1]]})"));
    CHECK(bin.complexity() == Complexity{0, 1, 0});
}

TEST_CASE("large blocks use the triplet form")
{
    const HybridZonotope big = HybridZonotope::box(Vector::Constant(80, -1.0), Vector::Constant(80, 1.0));
    const json j = io::to_json(big);
    REQUIRE(j["Gc"].is_object());
    CHECK(j["Gc"]["entries"].size() == 80);
    CHECK(through_text(big).structurally_equal(big));
    const json dense = io::matrix_to_json(Matrix::Identity(3, 3));
    CHECK(io::matrix_from_json(json{{"rows", 3}, {"cols", 3}, {"entries", {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}}}}) ==
          io::matrix_from_json(dense));
}

TEST_CASE("malformed sets are rejected")
{
    CHECK_THROWS_AS(io::hz_from_json(json::parse(R"({"Gc": [[1]]})")), io::FormatError);
    CHECK_THROWS_AS(io::hz_from_json(json::parse(R"({"center": [0, 0], "Gc": [[1, 2], [3]]})")), io::FormatError);
    CHECK_THROWS_AS(io::hz_from_json(json::parse(R"({"center": [0, 0], "Gc": [[1]]})")), io::FormatError);
    CHECK_THROWS_AS(io::hz_from_json(json::parse(R"({"center": [0], "Gc": [[1]], "Ac": [[1, 1]], "b": [0]})")),
                    io::FormatError);
    CHECK_THROWS_AS(io::hz_from_json(json::parse(R"({"center": ["a"]})")), io::FormatError);
    CHECK_THROWS_AS(io::set_from_json(json::parse(R"({"box": {"lower": [1], "upper": [0]}})")), io::FormatError);
}

TEST_CASE("set shorthands")
{
    const HybridZonotope box = io::set_from_json(json::parse(R"({"box": {"lower": [-1, 0], "upper": [1, 2]}})"));
    CHECK(box.structurally_equal(HybridZonotope::box(vec({-1.0, 0.0}), vec({1.0, 2.0}))));
    const HybridZonotope pt = io::set_from_json(json::parse(R"({"point": [3]})"));
    CHECK(pt.structurally_equal(HybridZonotope::point(vec({3.0}))));

    TempDir dir("sets");
    io::write_file(dir.path / "g.json", io::to_json(relu_graph_hz(1.0, 1.0)));
    const HybridZonotope g = io::set_from_json(json{{"file", "g.json"}}, dir.path);
    CHECK(g.structurally_equal(relu_graph_hz(1.0, 1.0)));
}

TEST_CASE("networks round trip with and without saturation")
{
    std::mt19937_64 rng(5);
    FeedforwardNetwork net = oracle::random_network(rng, {2, 4, 3, 1});
    FeedforwardNetwork back = io::network_from_json(json::parse(io::to_json(net).dump()));
    CHECK_FALSE(back.saturation);
    const Vector x = vec({0.3, -0.7});
    CHECK(back.evaluate(x) == net.evaluate(x));

    net.saturation = SaturationBounds{vec({-0.1}), vec({0.1})};
    back = io::network_from_json(io::to_json(net));
    REQUIRE(back.saturation);
    CHECK(back.saturation->lower == net.saturation->lower);
    CHECK(back.evaluate(x) == net.evaluate(x));

    CHECK_THROWS_AS(io::network_from_json(json::parse(R"({"weights": [[[1, 2]]], "biases": [[0, 0]]})")),
                    io::FormatError);
    CHECK_THROWS_AS(io::network_from_json(json::parse(R"({"weights": []})")), io::FormatError);
}

TEST_CASE("backward reachable sequences round trip")
{
    std::mt19937_64 rng(9);
    const FeedforwardNetwork net = oracle::random_network(rng, {2, 3, 1});
    const HybridZonotope X = HybridZonotope::box(vec({-2.0, -2.0}), vec({2.0, 2.0}));
    const HybridZonotope T = HybridZonotope::box(vec({-1.0, -1.0}), vec({1.0, 1.0}));
    const LinearPlant plant{(Matrix(2, 2) << 1, 0.1, 0, 1).finished(), (Matrix(2, 1) << 0, 0.1).finished()};
    const BrsSequence brs = t_step_brs(ClosedLoopSystem(plant, net, X), T, 3);

    TempDir dir("brs");
    io::write_file(dir.path / "brs.json", io::to_json(brs));
    const json j = io::read_file(dir.path / "brs.json");
    REQUIRE(j["sets"].size() == 4);
    CHECK(j["sets"][2]["complexity"]["n_b"] == brs.sets[2].n_bin());
    CHECK(j["sets"][2].contains("wall_seconds"));

    const BrsSequence back = io::brs_from_json(j);
    REQUIRE(back.sets.size() == brs.sets.size());
    for (std::size_t t = 0; t < brs.sets.size(); ++t)
        CHECK(back.sets[t].structurally_equal(brs.sets[t]));
    REQUIRE(back.steps.size() == 3);
    CHECK(back.steps[2].expected == brs.steps[2].expected);
    CHECK(back.scale.alpha == brs.scale.alpha);

    // A bare array of sets is accepted too.
    json bare = json::array();
    for (const HybridZonotope& Z : brs.sets)
        bare.push_back(io::to_json(Z));
    CHECK(io::brs_from_json(bare).sets.size() == 4);
}

TEST_CASE("polygon set layout")
{
    const PolygonSet ps = hz_to_polygons(relu_graph_hz(1.0, 2.0), Matrix::Identity(2, 2));
    const json j = io::to_json(ps);
    CHECK(j["plane"] == json::parse("[[1.0, 0.0], [0.0, 1.0]]"));
    REQUIRE(j["polygons"].size() == 2);
    CHECK(j["polygons"][0].size() == 2);
    CHECK(j["polygons"][0][0].size() == 2);
    CHECK(j["leaf_assignments"] == json::parse("[[-1], [1]]"));
}

TEST_CASE("scenarios")
{
    TempDir dir("scenario");
    std::mt19937_64 rng(2);
    io::write_file(dir.path / "nets" / "ctrl.json", io::to_json(oracle::random_network(rng, {2, 3, 1})));
    json sc = json::parse(R"({
        "plant": {"A": [[1, 0.1], [0, 1]], "B": [[0], [0.1]]},
        "controller": "nets/ctrl.json",
        "state_set": {"box": {"lower": [-2, -2], "upper": [2, 2]}},
        "target": {"box": {"lower": [-1, -1], "upper": [1, 1]}},
        "initial_set": {"point": [0.5, 0.5]},
        "horizon": 4,
        "scale": {"alpha": 5, "beta": 6},
        "tolerances": {"membership": 1e-7, "strict": 1e-8},
        "prune_empty": true
    })");
    io::write_file(dir.path / "s.json", sc);
    const io::Scenario s = io::load_scenario(dir.path / "s.json");
    CHECK(s.horizon == 4);
    CHECK(s.controller.hidden_neurons() == 3);
    REQUIRE(s.scale);
    CHECK(s.scale->beta == 6.0);
    CHECK(s.membership_tol == 1e-7);
    CHECK(s.strict_tol == 1e-8);
    CHECK(s.prune_empty);
    CHECK_FALSE(s.relax);
    CHECK(s.seed == 0);
    REQUIRE(s.initial_set);
    CHECK(s.system().state_set().dim() == 2);

    json bad = sc;
    bad["target"] = json::parse(R"({"box": {"lower": [-1], "upper": [1]}})");
    CHECK_THROWS_AS(io::scenario_from_json(bad, dir.path), io::FormatError);
    bad = sc;
    bad["controller"] = "missing.json";
    CHECK_THROWS_AS(io::scenario_from_json(bad, dir.path), std::ios_base::failure);
    bad = sc;
    bad.erase("plant");
    CHECK_THROWS_AS(io::scenario_from_json(bad, dir.path), io::FormatError);
    {
        std::ofstream(dir.path / "broken.json") << "{ not json";
    }
    CHECK_THROWS_AS(io::load_scenario(dir.path / "broken.json"), io::FormatError);
}
