#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "laakso/errors.hpp"
#include "laakso/instance.hpp"
#include "oracles.hpp"

using namespace laakso;

TEST_SUITE("instance") {

TEST_CASE("child points of the root gadget") {
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{-1.0, 0.0};
    const ChildPoints c = child_points(a, b, 1, Params{4.0, 1.0 / 16, 1});
    CHECK(c.s == std::vector<double>{0.5, 0.0});
    CHECK(c.t == std::vector<double>{-0.5, 0.0});
    CHECK(c.u == std::vector<double>{0.0, 0.125});
    CHECK(c.v == std::vector<double>{0.0, -0.125});
}

TEST_CASE("eps = 0 collapses the apexes onto the midpoint") {
    const std::vector<double> a{0.3, 0.2, 0.0};
    const std::vector<double> b{-0.1, 0.7, 0.0};
    const ChildPoints c = child_points(a, b, 2, Params{3.0, 0.0, 2});
    CHECK(c.u == c.v);
    CHECK(c.u[0] == doctest::Approx(0.1));
    CHECK(c.u[1] == doctest::Approx(0.45));
    CHECK(c.u[2] == 0.0);
}

TEST_CASE("child points reject bad levels and endpoints") {
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{-1.0, 0.0};
    const Params params{4.0, 1.0 / 16, 1};
    CHECK_THROWS_AS(child_points(a, b, 0, params), PreconditionError);
    CHECK_THROWS_AS(child_points(a, b, 2, params), PreconditionError);
    CHECK_THROWS_AS(child_points(a, a, 1, params), PreconditionError);
}

TEST_CASE("params validation") {
    CHECK_THROWS_AS(Params({2.0, 0.01, 1}).validate(), PreconditionError);
    CHECK_THROWS_AS(Params({4.0, 0.125, 1}).validate(), PreconditionError);
    CHECK_THROWS_AS(Params({4.0, -0.01, 1}).validate(), PreconditionError);
    CHECK_THROWS_AS(Params({4.0, 0.01, -1}).validate(), PreconditionError);
    CHECK_NOTHROW(Params({4.0, 0.0, 0}).validate());
}

TEST_CASE("closed form counts agree with the recurrence") {
    CHECK(closed_form_counts(0).n == 2);
    CHECK(closed_form_counts(1).n == 6);
    CHECK(closed_form_counts(3).n == 174);
    for (int k = 0; k <= 12; ++k) {
        const Counts c = closed_form_counts(k);
        CHECK(c.n == oracle::point_count(k));
        REQUIRE(c.edges_per_level.size() == static_cast<std::size_t>(k + 1));
        for (int i = 0; i <= k; ++i) CHECK(c.edges_per_level[i] == oracle::ipow6(i));
    }
    CHECK_THROWS(closed_form_counts(-1));
    CHECK_THROWS(closed_form_counts(40));
}

TEST_CASE("small instances") {
    const Instance a0 = build_instance({4.0, 1.0 / 16, 0});
    CHECK(a0.n() == 2);
    CHECK(a0.edges().size() == 1);
    CHECK(a0.diagonals().empty());
    CHECK(a0.edge_length(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a0.coords(0)[0] == 1.0);
    CHECK(a0.coords(1)[0] == -1.0);

    const Instance a1 = build_instance({4.0, 1.0 / 16, 1});
    CHECK(a1.n() == 6);
    CHECK(a1.edges_at_level(1).size() == 6);
    CHECK(a1.diagonals().size() == 1);
}

TEST_CASE("level structure, lengths and diagonals") {
    for (double p : {3.0, 4.0, 8.0}) {
        for (double eps : {1.0 / 64, 1.0 / 16, 1.0 / 9}) {
            const Instance inst = build_instance({p, eps, 4});
            CAPTURE(p);
            CAPTURE(eps);
            CHECK(static_cast<std::int64_t>(inst.n()) == oracle::point_count(4));
            const double side = std::pow(1.0 + std::pow(4.0 * eps, p), 1.0 / p) / 4.0;
            for (int level = 0; level <= 4; ++level) {
                CHECK(static_cast<std::int64_t>(inst.edges_at_level(level).size()) == oracle::ipow6(level));
                if (level > 0) {
                    CHECK(static_cast<std::int64_t>(inst.diagonals_at_level(level).size()) ==
                          oracle::ipow6(level - 1));
                }
            }
            for (const Edge& e : inst.edges()) {
                const double len = oracle::lp(inst.coords(e.a), inst.coords(e.b), p);
                if (!e.parent) {
                    CHECK(e.level == 0);
                    continue;
                }
                const Edge& parent = inst.edge(*e.parent);
                CHECK(parent.level == e.level - 1);
                const double r = oracle::lp(inst.coords(parent.a), inst.coords(parent.b), p);
                const bool straight = e.role == EdgeRole::kAS || e.role == EdgeRole::kTB;
                const double expected = straight ? r / 4.0 : r * side;
                CHECK(oracle::rel_diff(len, expected) <= 1e-12);
            }
            for (const Diagonal& dg : inst.diagonals()) {
                const Edge& parent = inst.edge(dg.parent);
                const double r = oracle::lp(inst.coords(parent.a), inst.coords(parent.b), p);
                const double len = oracle::lp(inst.coords(dg.u), inst.coords(dg.v), p);
                CHECK(oracle::rel_diff(len, 2.0 * eps * r) <= 1e-12);
                CHECK(&inst.diagonal_of(dg.parent) != nullptr);
            }
            const double lo = 2.0 * std::pow(4.0, -4);
            const double hi = 2.0 * std::pow(side, 4);
            for (const Edge& e : inst.edges_at_level(4)) {
                const double len = inst.edge_length(e.id);
                CHECK(len >= lo * (1 - 1e-12));
                CHECK(len <= hi * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("each internal edge has six children, one per role") {
    const Instance inst = build_instance({4.0, 1.0 / 16, 3});
    for (const Edge& e : inst.edges()) {
        const auto kids = inst.children(e.id);
        if (e.level == inst.k()) {
            CHECK(kids.empty());
            continue;
        }
        REQUIRE(kids.size() == 6);
        std::set<EdgeRole> roles;
        for (const Edge& c : kids) {
            CHECK(c.parent == e.id);
            roles.insert(c.role);
        }
        CHECK(roles.size() == 6);
        CHECK(roles.count(EdgeRole::kRoot) == 0);
        CHECK(kids.front().a == e.a);
        CHECK(kids.back().b == e.b);
    }
}

TEST_CASE("birth level bounds the coordinate support") {
    for (int k = 0; k <= 6; ++k) {
        const Instance inst = build_instance({4.0, 1.0 / 16, k});
        for (const Point& pt : inst.points()) {
            CHECK(pt.coords.size() == static_cast<std::size_t>(k + 1));
            for (std::size_t j = static_cast<std::size_t>(pt.birth_level) + 1; j < pt.coords.size(); ++j) {
                if (pt.coords[j] != 0.0) FAIL("point " << pt.id << " uses coordinate " << j);
            }
        }
    }
}

TEST_CASE("eps = 0 keeps every point on the root segment") {
    const Instance inst = build_instance({4.0, 0.0, 3});
    CHECK(inst.degenerate());
    CHECK(inst.n() == 174);
    for (const Point& pt : inst.points()) {
        CHECK(std::fabs(pt.coords[0]) <= 1.0);
        for (std::size_t j = 1; j < pt.coords.size(); ++j) CHECK(pt.coords[j] == 0.0);
    }
}

TEST_CASE("build is deterministic") {
    const Params params{8.0, 1.0 / 16, 4};
    CHECK(build_instance(params) == build_instance(params));
}

TEST_CASE("capacity budget") {
    CHECK_THROWS_AS(build_instance({4.0, 1.0 / 16, 5}, 1000), CapacityError);
    CHECK(build_instance({4.0, 1.0 / 16, 3}, 174).n() == 174);
}

TEST_CASE("descendant points") {
    const Instance inst = build_instance({4.0, 1.0 / 16, 2});
    // Endpoints are excluded: only points born strictly inside the subtree.
    const auto all = descendant_points(inst, inst.root().id);
    CHECK(all.size() == inst.n() - 2);
    CHECK(std::is_sorted(all.begin(), all.end()));
    const Edge& leaf = inst.edges_at_level(2).front();
    CHECK(descendant_points(inst, leaf.id).empty());
    const Edge& mid = inst.edges_at_level(1).front();
    CHECK(descendant_points(inst, mid.id).size() == 4);
}

TEST_CASE("role names round trip") {
    for (EdgeRole r : {EdgeRole::kRoot, EdgeRole::kAS, EdgeRole::kSU, EdgeRole::kSV, EdgeRole::kUT,
                       EdgeRole::kVT, EdgeRole::kTB}) {
        CHECK(role_from_name(role_name(r)) == r);
    }
    CHECK_FALSE(role_from_name("x-y").has_value());
}

}  // TEST_SUITE
