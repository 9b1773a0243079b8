#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace laakso {

using PointId = std::int64_t;
using EdgeId = std::int64_t;

/// Construction parameters of the recursive instance.
struct Params {
    double p = 4.0;    ///< norm exponent, must exceed 2
    double eps = 0.0625;  ///< gadget width in [0, 1/8); zero is a degenerate test mode
    int k = 0;         ///< recursion depth

    /// Throws PreconditionError unless p > 2, 0 <= eps < 1/8 and k >= 0.
    void validate() const;

    bool operator==(const Params&) const = default;
};

struct Point {
    PointId id = 0;
    std::vector<double> coords;  ///< dense, length k + 1
    int birth_level = 0;

    bool operator==(const Point&) const = default;
};

/// Which of the six child slots an edge occupies. Root is the single level 0 edge.
enum class EdgeRole : std::uint8_t { kRoot, kAS, kSU, kSV, kUT, kVT, kTB };

std::string_view role_name(EdgeRole role);
/// Inverse of role_name; returns nullopt for unknown strings.
std::optional<EdgeRole> role_from_name(std::string_view name);

struct Edge {
    EdgeId id = 0;
    PointId a = 0;
    PointId b = 0;
    int level = 0;
    std::optional<EdgeId> parent;
    EdgeRole role = EdgeRole::kRoot;

    bool operator==(const Edge&) const = default;
};

struct Diagonal {
    PointId u = 0;
    PointId v = 0;
    int level = 0;
    EdgeId parent = 0;

    bool operator==(const Diagonal&) const = default;
};

/// The four points spawned from a level (i-1) edge {a, b}.
struct ChildPoints {
    std::vector<double> s, t, u, v;
};

/// s = 3a/4 + b/4, t = a/4 + 3b/4, u/v = (a+b)/2 +- eps*|a-b|_p*e_level.
///
/// `a` and `b` must have equal length, be distinct, and vanish at index
/// `level` and above. `level` must lie in [1, params.k] and index a
/// coordinate of the inputs.
ChildPoints child_points(std::span<const double> a, std::span<const double> b, int level,
                         const Params& params);

/// Closed-form point count and per-level edge counts of A_k.
struct Counts {
    std::int64_t n = 0;
    std::vector<std::int64_t> edges_per_level;  ///< 6^0 .. 6^k
};

Counts closed_form_counts(int k);

/// Default upper bound on the number of points build_instance will materialize.
inline constexpr std::int64_t kDefaultMaxPoints = 2'000'000;

/// Immutable recursive point set A_k(eps) with leveled edges and diagonals.
///
/// Edges of one level are stored contiguously and in generation order, so the
/// six children of an edge occupy consecutive ids (in role order a-s .. t-b).
class Instance {
public:
    /// Assembles an instance from already-built parts, checking every
    /// structural invariant. Throws SchemaError on inconsistency.
    static Instance from_parts(Params params, std::vector<Point> points, std::vector<Edge> edges,
                               std::vector<Diagonal> diagonals);

    const Params& params() const noexcept { return params_; }
    std::size_t n() const noexcept { return points_.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(params_.k) + 1; }
    int k() const noexcept { return params_.k; }

    const std::vector<Point>& points() const noexcept { return points_; }
    const Point& point(PointId id) const { return points_.at(static_cast<std::size_t>(id)); }
    std::span<const double> coords(PointId id) const { return point(id).coords; }

    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId id) const { return edges_.at(static_cast<std::size_t>(id)); }
    std::span<const Edge> edges_at_level(int level) const;
    const Edge& root() const { return edges_.front(); }

    /// Children of `id` in role order, empty for level-k edges.
    std::span<const Edge> children(EdgeId id) const;

    const std::vector<Diagonal>& diagonals() const noexcept { return diagonals_; }
    std::span<const Diagonal> diagonals_at_level(int level) const;
    /// Diagonal spawned by an internal edge.
    const Diagonal& diagonal_of(EdgeId parent) const;

    /// True when eps == 0 and u/v pairs carry identical coordinates.
    bool degenerate() const noexcept { return params_.eps == 0.0; }

    /// l_p length of an edge in source space.
    double edge_length(EdgeId id) const;

    bool operator==(const Instance&) const = default;

private:
    friend Instance build_instance(const Params&, std::int64_t);

    Instance() = default;
    void index_levels();

    Params params_;
    std::vector<Point> points_;
    std::vector<Edge> edges_;
    std::vector<Diagonal> diagonals_;
    std::vector<std::size_t> edge_level_start_;      // size k + 2
    std::vector<std::size_t> diagonal_level_start_;  // size k + 2, level 0 empty
    std::vector<std::int64_t> first_child_;          // per edge, -1 for leaves
};

/// Builds A_k(eps). Throws CapacityError if the closed-form point count
/// exceeds `max_points`.
Instance build_instance(const Params& params, std::int64_t max_points = kDefaultMaxPoints);

/// Ids of every point introduced strictly inside the subtree of edge `id`.
std::vector<PointId> descendant_points(const Instance& inst, EdgeId id);

}  // namespace laakso
