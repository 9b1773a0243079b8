#include "laakso/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "laakso/errors.hpp"
#include "laakso/metric.hpp"

namespace laakso {

namespace {

constexpr std::array<EdgeRole, 6> kChildRoles{EdgeRole::kAS, EdgeRole::kSU, EdgeRole::kSV,
                                              EdgeRole::kUT, EdgeRole::kVT, EdgeRole::kTB};

std::int64_t checked_pow6(int exponent) {
    std::int64_t value = 1;
    for (int i = 0; i < exponent; ++i) {
        if (value > std::numeric_limits<std::int64_t>::max() / 6) {
            throw CapacityError("6^" + std::to_string(exponent) + " overflows a 64-bit count");
        }
        value *= 6;
    }
    return value;
}

}  // namespace

void Params::validate() const {
    if (!(p > 2.0) || !std::isfinite(p)) {
        throw PreconditionError("p must be a finite real greater than 2, got " + std::to_string(p));
    }
    if (!(eps >= 0.0) || !(eps < 0.125)) {
        throw PreconditionError("eps must lie in [0, 1/8), got " + std::to_string(eps));
    }
    if (k < 0) {
        throw PreconditionError("k must be non-negative, got " + std::to_string(k));
    }
}

std::string_view role_name(EdgeRole role) {
    switch (role) {
        case EdgeRole::kRoot: return "root";
        case EdgeRole::kAS: return "a-s";
        case EdgeRole::kSU: return "s-u";
        case EdgeRole::kSV: return "s-v";
        case EdgeRole::kUT: return "u-t";
        case EdgeRole::kVT: return "v-t";
        case EdgeRole::kTB: return "t-b";
    }
    return "root";
}

std::optional<EdgeRole> role_from_name(std::string_view name) {
    for (EdgeRole role : {EdgeRole::kRoot, EdgeRole::kAS, EdgeRole::kSU, EdgeRole::kSV,
                          EdgeRole::kUT, EdgeRole::kVT, EdgeRole::kTB}) {
        if (role_name(role) == name) return role;
    }
    return std::nullopt;
}

ChildPoints child_points(std::span<const double> a, std::span<const double> b, int level,
                         const Params& params) {
    if (a.size() != b.size()) {
        throw PreconditionError("child_points: endpoint dimensions differ");
    }
    if (level < 1 || level > params.k || static_cast<std::size_t>(level) >= a.size()) {
        throw PreconditionError("child_points: level " + std::to_string(level) +
                                " out of range [1, " + std::to_string(params.k) + "]");
    }
    for (std::size_t j = static_cast<std::size_t>(level); j < a.size(); ++j) {
        if (a[j] != 0.0 || b[j] != 0.0) {
            throw PreconditionError("child_points: endpoints use coordinate " + std::to_string(j) +
                                    " at or above level " + std::to_string(level));
        }
    }
    const double length = lp_dist(a, b, params.p);
    if (length == 0.0) {
        throw PreconditionError("child_points: zero-length edge");
    }

    ChildPoints out;
    const std::size_t dim = a.size();
    out.s.resize(dim);
    out.t.resize(dim);
    out.u.resize(dim);
    out.v.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        out.s[j] = 0.75 * a[j] + 0.25 * b[j];
        out.t[j] = 0.25 * a[j] + 0.75 * b[j];
        const double mid = 0.5 * a[j] + 0.5 * b[j];
        out.u[j] = mid;
        out.v[j] = mid;
    }
    const double offset = params.eps * length;
    out.u[static_cast<std::size_t>(level)] = offset;
    out.v[static_cast<std::size_t>(level)] = -offset;
    return out;
}

Counts closed_form_counts(int k) {
    if (k < 0) throw PreconditionError("closed_form_counts: k must be non-negative");
    Counts counts;
    const std::int64_t top = checked_pow6(k);
    if (top > (std::numeric_limits<std::int64_t>::max() - 2) / 4) {
        throw CapacityError("closed_form_counts: point count overflows for k=" + std::to_string(k));
    }
    counts.n = 2 + 4 * (top - 1) / 5;
    counts.edges_per_level.reserve(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) counts.edges_per_level.push_back(checked_pow6(i));
    return counts;
}

std::span<const Edge> Instance::edges_at_level(int level) const {
    if (level < 0 || level > params_.k) return {};
    const auto lo = edge_level_start_[static_cast<std::size_t>(level)];
    const auto hi = edge_level_start_[static_cast<std::size_t>(level) + 1];
    return std::span<const Edge>(edges_).subspan(lo, hi - lo);
}

std::span<const Diagonal> Instance::diagonals_at_level(int level) const {
    if (level < 1 || level > params_.k) return {};
    const auto lo = diagonal_level_start_[static_cast<std::size_t>(level)];
    const auto hi = diagonal_level_start_[static_cast<std::size_t>(level) + 1];
    return std::span<const Diagonal>(diagonals_).subspan(lo, hi - lo);
}

std::span<const Edge> Instance::children(EdgeId id) const {
    const auto first = first_child_.at(static_cast<std::size_t>(id));
    if (first < 0) return {};
    return std::span<const Edge>(edges_).subspan(static_cast<std::size_t>(first), 6);
}

const Diagonal& Instance::diagonal_of(EdgeId parent) const {
    const Edge& e = edge(parent);
    if (e.level >= params_.k) {
        throw PreconditionError("edge " + std::to_string(parent) + " is a leaf and has no diagonal");
    }
    // Diagonals of level i+1 are generated in the same order as level i edges.
    const auto offset = static_cast<std::size_t>(parent) - edge_level_start_[static_cast<std::size_t>(e.level)];
    return diagonals_[diagonal_level_start_[static_cast<std::size_t>(e.level) + 1] + offset];
}

double Instance::edge_length(EdgeId id) const {
    const Edge& e = edge(id);
    return lp_dist(coords(e.a), coords(e.b), params_.p);
}

void Instance::index_levels() {
    const auto levels = static_cast<std::size_t>(params_.k) + 1;
    edge_level_start_.assign(levels + 1, edges_.size());
    diagonal_level_start_.assign(levels + 1, diagonals_.size());
    for (std::size_t i = edges_.size(); i-- > 0;) {
        edge_level_start_[static_cast<std::size_t>(edges_[i].level)] = i;
    }
    for (std::size_t l = levels; l-- > 0;) {
        edge_level_start_[l] = std::min(edge_level_start_[l], edge_level_start_[l + 1]);
    }
    for (std::size_t i = diagonals_.size(); i-- > 0;) {
        diagonal_level_start_[static_cast<std::size_t>(diagonals_[i].level)] = i;
    }
    for (std::size_t l = levels; l-- > 0;) {
        diagonal_level_start_[l] = std::min(diagonal_level_start_[l], diagonal_level_start_[l + 1]);
    }
    first_child_.assign(edges_.size(), -1);
    for (std::size_t i = edges_.size(); i-- > 0;) {
        if (edges_[i].parent) first_child_[static_cast<std::size_t>(*edges_[i].parent)] = static_cast<std::int64_t>(i);
    }
}

Instance Instance::from_parts(Params params, std::vector<Point> points, std::vector<Edge> edges,
                              std::vector<Diagonal> diagonals) {
    try {
        params.validate();
    } catch (const PreconditionError& e) {
        throw SchemaError(std::string("params: ") + e.what());
    }
    const Counts counts = closed_form_counts(params.k);
    const std::size_t dim = static_cast<std::size_t>(params.k) + 1;
    if (points.size() != static_cast<std::size_t>(counts.n)) {
        throw SchemaError("point count " + std::to_string(points.size()) + " != " + std::to_string(counts.n));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& pt = points[i];
        if (pt.id != static_cast<PointId>(i)) throw SchemaError("point ids must be 0..n-1 in order");
        if (pt.coords.size() != dim) throw SchemaError("point " + std::to_string(i) + " has wrong dimension");
        if (pt.birth_level < 0 || pt.birth_level > params.k) throw SchemaError("point birth level out of range");
        for (std::size_t j = static_cast<std::size_t>(pt.birth_level) + 1; j < dim; ++j) {
            if (pt.coords[j] != 0.0) throw SchemaError("point " + std::to_string(i) + " uses a coordinate above its birth level");
        }
    }

    std::int64_t expected_edges = 0;
    for (auto c : counts.edges_per_level) expected_edges += c;
    if (edges.size() != static_cast<std::size_t>(expected_edges)) {
        throw SchemaError("edge count mismatch");
    }
    std::vector<int> child_count(edges.size(), 0);
    int prev_level = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (e.id != static_cast<EdgeId>(i)) throw SchemaError("edge ids must be 0..m-1 in order");
        if (e.a < 0 || e.b < 0 || e.a >= counts.n || e.b >= counts.n) throw SchemaError("edge endpoint out of range");
        if (e.level < prev_level || e.level > params.k) throw SchemaError("edges must be grouped by level");
        prev_level = e.level;
        if (i == 0) {
            if (e.level != 0 || e.parent || e.role != EdgeRole::kRoot) throw SchemaError("edge 0 must be the root");
            continue;
        }
        if (!e.parent || *e.parent < 0 || static_cast<std::size_t>(*e.parent) >= i) {
            throw SchemaError("edge " + std::to_string(i) + " has an invalid parent");
        }
        const Edge& parent = edges[static_cast<std::size_t>(*e.parent)];
        if (parent.level != e.level - 1) throw SchemaError("parent level must be one less than child level");
        const int slot = child_count[static_cast<std::size_t>(*e.parent)]++;
        if (slot >= 6 || e.role != kChildRoles[static_cast<std::size_t>(slot)]) {
            throw SchemaError("edge " + std::to_string(i) + " has an unexpected role");
        }
        if (slot > 0 && edges[i - 1].parent != e.parent) throw SchemaError("sibling edges must be contiguous");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const bool leaf = edges[i].level == params.k;
        if ((leaf && child_count[i] != 0) || (!leaf && child_count[i] != 6)) {
            throw SchemaError("edge " + std::to_string(i) + " must have " + (leaf ? "0" : "6") + " children");
        }
    }

    if (diagonals.size() != static_cast<std::size_t>((counts.n - 2) / 4)) {
        throw SchemaError("diagonal count mismatch");
    }
    for (const Diagonal& dg : diagonals) {
        if (dg.parent < 0 || static_cast<std::size_t>(dg.parent) >= edges.size()) throw SchemaError("diagonal parent out of range");
        if (edges[static_cast<std::size_t>(dg.parent)].level != dg.level - 1) throw SchemaError("diagonal level mismatch");
        if (dg.u < 0 || dg.v < 0 || dg.u >= counts.n || dg.v >= counts.n) throw SchemaError("diagonal endpoint out of range");
    }

    Instance inst;
    inst.params_ = params;
    inst.points_ = std::move(points);
    inst.edges_ = std::move(edges);
    inst.diagonals_ = std::move(diagonals);
    inst.index_levels();
    for (std::size_t i = 0; i < inst.diagonals_.size(); ++i) {
        const Diagonal& dg = inst.diagonals_[i];
        if (&inst.diagonal_of(dg.parent) != &dg) throw SchemaError("diagonals must follow parent edge order");
    }

    // Geometry: the root spans e_0 .. -e_0 and every gadget is wired and placed
    // exactly as the construction would place it.
    const Edge& root = inst.root();
    if (inst.coords(root.a)[0] != 1.0 || inst.coords(root.b)[0] != -1.0) throw SchemaError("root edge must span e_0 and -e_0");
    for (const Edge& e : inst.edges_) {
        const auto kids = inst.children(e.id);
        if (kids.empty()) continue;
        const PointId s = kids[0].b, u = kids[1].b, v = kids[2].b, t = kids[5].a;
        const bool wired = kids[0].a == e.a && kids[1].a == s && kids[2].a == s && kids[3].a == u && kids[3].b == t &&
                           kids[4].a == v && kids[4].b == t && kids[5].b == e.b;
        const Diagonal& dg = inst.diagonal_of(e.id);
        if (!wired || dg.u != u || dg.v != v) throw SchemaError("gadget of edge " + std::to_string(e.id) + " is miswired");
        const ChildPoints c = child_points(inst.coords(e.a), inst.coords(e.b), e.level + 1, params);
        if (inst.point(s).coords != c.s || inst.point(t).coords != c.t || inst.point(u).coords != c.u ||
            inst.point(v).coords != c.v) {
            throw SchemaError("gadget points of edge " + std::to_string(e.id) + " do not match the construction");
        }
    }
    return inst;
}

Instance build_instance(const Params& params, std::int64_t max_points) {
    params.validate();
    const Counts counts = closed_form_counts(params.k);
    if (counts.n > max_points) {
        throw CapacityError("k=" + std::to_string(params.k) + " needs " + std::to_string(counts.n) +
                            " points, budget is " + std::to_string(max_points));
    }
    const std::size_t dim = static_cast<std::size_t>(params.k) + 1;

    Instance inst;
    inst.params_ = params;
    inst.points_.reserve(static_cast<std::size_t>(counts.n));
    std::size_t total_edges = 0;
    for (auto c : counts.edges_per_level) total_edges += static_cast<std::size_t>(c);
    inst.edges_.reserve(total_edges);
    inst.diagonals_.reserve(static_cast<std::size_t>((counts.n - 2) / 4));

    auto add_point = [&](std::vector<double> coords, int level) {
        const auto id = static_cast<PointId>(inst.points_.size());
        inst.points_.push_back(Point{id, std::move(coords), level});
        return id;
    };
    auto add_edge = [&](PointId a, PointId b, int level, std::optional<EdgeId> parent, EdgeRole role) {
        const auto id = static_cast<EdgeId>(inst.edges_.size());
        inst.edges_.push_back(Edge{id, a, b, level, parent, role});
    };

    std::vector<double> e0(dim, 0.0);
    e0[0] = 1.0;
    std::vector<double> minus_e0(dim, 0.0);
    minus_e0[0] = -1.0;
    const PointId root_a = add_point(std::move(e0), 0);
    const PointId root_b = add_point(std::move(minus_e0), 0);
    add_edge(root_a, root_b, 0, std::nullopt, EdgeRole::kRoot);

    std::size_t level_begin = 0;
    for (int level = 1; level <= params.k; ++level) {
        const std::size_t level_end = inst.edges_.size();
        for (std::size_t ei = level_begin; ei < level_end; ++ei) {
            // Copy: push_back below may reallocate edges_.
            const Edge parent = inst.edges_[ei];
            ChildPoints cp = child_points(inst.points_[static_cast<std::size_t>(parent.a)].coords,
                                          inst.points_[static_cast<std::size_t>(parent.b)].coords, level, params);
            const PointId s = add_point(std::move(cp.s), level);
            const PointId t = add_point(std::move(cp.t), level);
            const PointId u = add_point(std::move(cp.u), level);
            const PointId v = add_point(std::move(cp.v), level);
            add_edge(parent.a, s, level, parent.id, EdgeRole::kAS);
            add_edge(s, u, level, parent.id, EdgeRole::kSU);
            add_edge(s, v, level, parent.id, EdgeRole::kSV);
            add_edge(u, t, level, parent.id, EdgeRole::kUT);
            add_edge(v, t, level, parent.id, EdgeRole::kVT);
            add_edge(t, parent.b, level, parent.id, EdgeRole::kTB);
            inst.diagonals_.push_back(Diagonal{u, v, level, parent.id});
        }
        level_begin = level_end;
    }
    inst.index_levels();
    return inst;
}

std::vector<PointId> descendant_points(const Instance& inst, EdgeId id) {
    std::vector<PointId> out;
    std::vector<EdgeId> frontier{id};
    while (!frontier.empty()) {
        std::vector<EdgeId> next;
        for (EdgeId e : frontier) {
            const auto kids = inst.children(e);
            if (kids.empty()) continue;
            // s = end of a-s, t = start of t-b, u/v from the diagonal.
            const Diagonal& dg = inst.diagonal_of(e);
            out.push_back(kids[0].b);
            out.push_back(kids[5].a);
            out.push_back(dg.u);
            out.push_back(dg.v);
            for (const Edge& c : kids) next.push_back(c.id);
        }
        frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace laakso
