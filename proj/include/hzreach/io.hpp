#pragma once

#include "hzreach/geom.hpp"
#include "hzreach/hybrid_zonotope.hpp"
#include "hzreach/optim.hpp"
#include "hzreach/reach.hpp"
#include "hzreach/relu_graph.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace hzreach::io {

using json = nlohmann::json;

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Matrices are written as lists of rows. A matrix may instead be given as
// {"rows": r, "cols": c, "entries": [[i, j, v], ...]}; the writer uses that form once a
// dense block would exceed `kDenseLimit` entries.
inline constexpr Eigen::Index kDenseLimit = 4096;

json matrix_to_json(const SparseMatrix& m);
json matrix_to_json(const Matrix& m);
json vector_to_json(const Vector& v);
/// rows/cols are the expected shape; -1 accepts whatever the value holds.
Matrix matrix_from_json(const json& j, Eigen::Index rows = -1, Eigen::Index cols = -1);
SparseMatrix sparse_from_json(const json& j, Eigen::Index rows, Eigen::Index cols);
Vector vector_from_json(const json& j);

/// Keys center, Gc, Gb, Ac, Ab, b; missing or empty blocks have zero columns/rows.
json to_json(const HybridZonotope& Z);
HybridZonotope hz_from_json(const json& j);

/// A set given inline as a hybrid zonotope, as {"box": {"lower", "upper"}}, as
/// {"point": [...]}, or as {"file": path} relative to `base`.
HybridZonotope set_from_json(const json& j, const std::filesystem::path& base = {});

json to_json(const FeedforwardNetwork& net);
FeedforwardNetwork network_from_json(const json& j);

json to_json(const Complexity& c);
json to_json(const BrsSequence& brs);
BrsSequence brs_from_json(const json& j);

json to_json(const PolygonSet& ps);
json to_json(const AvoidanceResult& r);

json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const json& j);

struct Scenario {
    std::filesystem::path source;  ///< file the scenario was read from
    LinearPlant plant;
    FeedforwardNetwork controller;
    std::filesystem::path controller_path;
    HybridZonotope state_set;
    HybridZonotope target;
    std::optional<HybridZonotope> initial_set;
    int horizon = 1;
    std::optional<ActivationScale> scale;
    double membership_tol = kMembershipTol;
    double strict_tol = 1e-9;
    std::size_t node_limit = 1'000'000;
    bool prune_empty = false;
    bool relax = false;
    std::uint64_t seed = 0;

    ClosedLoopSystem system() const { return {plant, controller, state_set}; }
    /// Throws FormatError when set dimensions disagree.
    void validate() const;
};

/**
 * Scenario file keys: plant {A, B}, controller (network path relative to the scenario file,
 * or an inline network), state_set, target, initial_set (optional), horizon, scale
 * {alpha, beta} (optional), tolerances {membership, strict}, node_limit, prune_empty, relax,
 * seed.
 */
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const json& j, const std::filesystem::path& base = {});

}  // namespace hzreach::io
