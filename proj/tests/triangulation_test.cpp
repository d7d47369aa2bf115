#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "crflab/triangulation.hpp"

using namespace crflab;

namespace {

// Lattice BFS from v_{0,0} using the six unit steps; independent of hex_distance.
std::size_t lattice_ball_size(int radius) {
    const int steps[6][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}};
    std::map<std::pair<int, int>, int> dist{{{0, 0}, 0}};
    std::vector<std::pair<int, int>> frontier{{0, 0}};
    for (int d = 1; d <= radius; ++d) {
        std::vector<std::pair<int, int>> next;
        for (auto [m, n] : frontier)
            for (auto& s : steps) {
                std::pair<int, int> p{m + s[0], n + s[1]};
                if (dist.emplace(p, d).second) next.push_back(p);
            }
        frontier = std::move(next);
    }
    return dist.size();
}

// Layer sizes of the order-d tessellation from counts of boundary vertices
// of degree 3 (fan) and 4 (shared): a' = (d-5)a + (d-6)b, b' = a + b.
std::size_t tessellation_ball_size(int d, int radius) {
    std::size_t total = 1, a = d, b = 0;
    total += a + b;
    for (int layer = 2; layer <= radius; ++layer) {
        std::size_t na = (d - 5) * a + (d - 6) * b, nb = a + b;
        a = na;
        b = nb;
        total += a + b;
    }
    return total;
}

// Bellman-Ford style relaxation over the raw edge list.
std::vector<VertexId> brute_ball(const Triangulation& t, VertexId v, int n) {
    std::vector<int> dist(t.vertex_count(), 1 << 29);
    dist[v] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (auto [a, b] : t.edges()) {
            if (dist[a] + 1 < dist[b]) dist[b] = dist[a] + 1, changed = true;
            if (dist[b] + 1 < dist[a]) dist[a] = dist[b] + 1, changed = true;
        }
    }
    std::vector<VertexId> out;
    for (VertexId w = 0; w < t.vertex_count(); ++w)
        if (dist[w] <= n) out.push_back(w);
    return out;
}

} // namespace

TEST(Hexagonal, RadiusOneIsOneStar) {
    auto t = build_hexagonal(1);
    EXPECT_EQ(t.vertex_count(), 7u);
    EXPECT_EQ(t.edge_count(), 12u);
    EXPECT_EQ(t.face_count(), 6u);
    EXPECT_EQ(t.degree(t.root()), 6u);
}

TEST(Hexagonal, VertexCountsMatchLatticeEnumeration) {
    for (int r = 1; r <= 6; ++r) EXPECT_EQ(build_hexagonal(r).vertex_count(), lattice_ball_size(r)) << r;
    EXPECT_EQ(build_hexagonal(2).vertex_count(), 19u);
    EXPECT_EQ(build_hexagonal(3).vertex_count(), 37u);
    EXPECT_EQ(build_hexagonal(4).vertex_count(), 61u);
}

TEST(Hexagonal, InnerVerticesHaveDegreeSix) {
    auto t = build_hexagonal(5);
    for (VertexId v = 0; v < t.vertex_count(); ++v) {
        if (t.depth(v) < 5) {
            EXPECT_EQ(t.degree(v), 6u);
        }
    }
    EXPECT_THROW(build_hexagonal(0), InputError);
}

TEST(ConstantDegree, StarAndLayers) {
    auto t = build_constant_degree(7, 1);
    EXPECT_EQ(t.vertex_count(), 8u);
    EXPECT_EQ(t.face_count(), 7u);
    EXPECT_EQ(t.degree(t.root()), 7u);
    for (int d : {7, 8, 9})
        for (int r = 1; r <= 4; ++r) EXPECT_EQ(build_constant_degree(d, r).vertex_count(), tessellation_ball_size(d, r));
    EXPECT_EQ(build_constant_degree(7, 2).vertex_count(), 29u);
}

TEST(ConstantDegree, InnerVerticesHaveDegreeD) {
    for (int d : {7, 8}) {
        auto t = build_constant_degree(d, 4);
        for (VertexId v = 0; v < t.vertex_count(); ++v)
            if (t.depth(v) < 4) {
                EXPECT_EQ(t.degree(v), static_cast<std::size_t>(d));
                EXPECT_TRUE(t.has_closed_star(v));
            }
    }
}

TEST(ConstantDegree, RejectsSmallDegree) {
    for (int d : {3, 5, 6}) EXPECT_THROW(build_constant_degree(d, 2), InputError);
}

TEST(Truncate, HexagonalSmallRadii) {
    auto t = std::make_shared<const Triangulation>(build_hexagonal(4));
    auto t1 = truncate(t, 1);
    ASSERT_EQ(t1.interior.size(), 1u);
    EXPECT_EQ(t1.interior[0], t->root());
    EXPECT_EQ(t1.boundary.size(), 6u);

    // Brute force: vertices whose every parent face has all vertices at depth <= 2.
    auto t2 = truncate(t, 2);
    std::vector<VertexId> expected;
    for (VertexId v = 0; v < t->vertex_count(); ++v) {
        bool all_in = t->has_closed_star(v);
        for (const Face& f : t->faces())
            if (std::find(f.begin(), f.end(), v) != f.end())
                for (VertexId w : f) all_in = all_in && t->depth(w) <= 2;
        if (all_in) expected.push_back(v);
    }
    EXPECT_EQ(t2.interior, expected);
    EXPECT_EQ(t2.interior, ball(*t, t->root(), 1));
}

TEST(Truncate, NestingEulerAndExhaustion) {
    for (auto tri : {build_hexagonal(5), build_constant_degree(7, 4), build_constant_degree(9, 3)}) {
        auto t = std::make_shared<const Triangulation>(std::move(tri));
        std::set<std::uint32_t> prev;
        for (int n = 1; n <= t->radius(); ++n) {
            auto tr = truncate(t, n);
            std::set<std::uint32_t> cur(tr.faces.begin(), tr.faces.end());
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            const long euler = static_cast<long>(tr.vertices.size()) - static_cast<long>(truncation_edge_count(tr)) +
                               static_cast<long>(tr.faces.size());
            EXPECT_EQ(euler, 1) << "n=" << n;
            std::size_t max_interior_degree = 0;
            for (VertexId v : tr.interior) max_interior_degree = std::max(max_interior_degree, t->degree(v));
            EXPECT_EQ(max_interior_degree, static_cast<std::size_t>(t->family_degree()));
            prev = std::move(cur);
        }
        EXPECT_EQ(prev.size(), t->face_count());
        EXPECT_THROW(truncate(t, t->radius() + 1), InputError);
        EXPECT_THROW(truncate(t, 0), InputError);
    }
}

TEST(Ball, MatchesBruteForce) {
    auto t = build_constant_degree(7, 4);
    EXPECT_EQ(ball(t, t.root(), 0), std::vector<VertexId>{t.root()});
    for (int n = 0; n <= 4; ++n) EXPECT_EQ(ball(t, t.root(), n), brute_ball(t, t.root(), n));
    EXPECT_EQ(ball(t, 5, 2), brute_ball(t, 5, 2));
    auto h = build_hexagonal(3);
    EXPECT_EQ(ball(h, h.root(), 1).size(), 7u);
    EXPECT_THROW(ball(h, 1000, 1), InputError);
}

TEST(FileFormat, RoundTripPreservesAdjacency) {
    auto t = build_hexagonal(3);
    std::stringstream ss;
    write_triangulation(t, ss);
    auto back = read_triangulation(ss);
    ASSERT_EQ(back.vertex_count(), t.vertex_count());
    EXPECT_EQ(back.root(), t.root());
    EXPECT_EQ(back.edges(), t.edges());
    for (VertexId v = 0; v < t.vertex_count(); ++v)
        EXPECT_TRUE(std::ranges::equal(back.neighbors(v), t.neighbors(v)));
}

TEST(FileFormat, IntersectionAnglesSurvive) {
    std::istringstream in("tri v=4 root=0\nf 0 1 2\nf 0 2 3\nphi 0 2 0.5\n");
    auto t = read_triangulation(in);
    EXPECT_DOUBLE_EQ(t.phi()[*t.edge_index(2, 0)], 0.5);
    std::stringstream out;
    write_triangulation(t, out);
    auto back = read_triangulation(out);
    EXPECT_EQ(back.phi(), t.phi());
}

TEST(FileFormat, OrientationIsRepairedConsistently) {
    auto t = build_constant_degree(7, 2);
    std::mt19937 rng(3);
    std::stringstream ss;
    ss << "tri v=" << t.vertex_count() << " root=0\n";
    for (Face f : t.faces()) {
        if (rng() & 1) std::swap(f[0], f[1]);
        ss << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    auto back = read_triangulation(ss);
    std::map<std::pair<VertexId, VertexId>, int> directed;
    for (const Face& f : back.faces())
        for (int k = 0; k < 3; ++k) EXPECT_EQ(++directed[std::make_pair(f[k], f[(k + 1) % 3])], 1);
}

TEST(FileFormat, RejectsMalformedInput) {
    auto parse = [](const char* text) {
        std::istringstream in(text);
        return read_triangulation(in);
    };
    EXPECT_THROW(parse("tri v=4 root=0\nf 0 1 2 3\n"), InputError);
    EXPECT_THROW(parse("tri v=3 root=0\nf 0 1 2\nphi 0 7 0.1\n"), InputError);
    EXPECT_THROW(parse("tri v=3 root=0\nf 0 1 5\n"), InputError);
    EXPECT_THROW(parse("f 0 1 2\n"), InputError);
    EXPECT_THROW(parse("tri v=4 root=0\nf 0 1 2\n"), InputError);  // vertex 3 unused
    EXPECT_THROW(parse("tri v=5 root=0\nf 0 1 2\nf 0 1 3\nf 0 1 4\n"), InputError);
    EXPECT_THROW(parse("tri v=3 root=0\nf 0 1 2\nphi 0 1 2.0\n"), InputError);
    EXPECT_THROW(load("/nonexistent/file.tri"), InputError);
}
