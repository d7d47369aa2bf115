#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "crflab/vel.hpp"
#include "crflab/vel_oracle.hpp"

using namespace crflab;
using namespace crflab::vel;

namespace {

Graph path_graph(int n) {
    Graph g;
    g.adjacency.resize(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) g.add_edge(static_cast<VertexId>(i), static_cast<VertexId>(i + 1));
    return g;
}

// Two paths of n edges from vertex 0 to vertices 1 and 2, disjoint apart
// from the shared source.
Graph parallel_paths(int n) {
    Graph g;
    g.adjacency.resize(static_cast<std::size_t>(3 + 2 * (n - 1)));
    VertexId next = 3;
    for (VertexId end : {1u, 2u}) {
        VertexId prev = 0;
        for (int k = 1; k < n; ++k) {
            g.add_edge(prev, next);
            prev = next++;
        }
        g.add_edge(prev, end);
    }
    return g;
}

std::vector<VertexId> sphere(const Triangulation& t, int n) {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < t.vertex_count(); ++v)
        if (t.depth(v) == n) out.push_back(v);
    return out;
}

// Layer-constant weights m = c_k on depth k with c_k proportional to 1/|L_k|
// are admissible, so VEL >= sum_k 1/|L_k|.
double layer_bound(const Triangulation& t, int n) {
    std::vector<std::size_t> layer(static_cast<std::size_t>(n + 1), 0);
    for (VertexId v = 0; v < t.vertex_count(); ++v)
        if (t.depth(v) <= n) ++layer[static_cast<std::size_t>(t.depth(v))];
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += 1.0 / static_cast<double>(layer[static_cast<std::size_t>(k)]);
    return s;
}

void expect_certified(const Graph& g, const std::vector<VertexId>& a, const std::vector<VertexId>& b,
                      const VelEstimate& e, const VelConfig& cfg) {
    EXPECT_TRUE(e.converged);
    EXPECT_LE(e.gap, cfg.tol);
    EXPECT_NEAR(e.vel * e.norm_sq, 1.0, 1e-15);
    for (double x : e.m) EXPECT_GE(x, 0.0);
    for (const auto& p : e.certificate_paths) {
        ASSERT_GE(p.size(), 2u);
        EXPECT_NE(std::find(a.begin(), a.end(), p.front()), a.end());
        EXPECT_NE(std::find(b.begin(), b.end(), p.back()), b.end());
        for (std::size_t i = 1; i < p.size(); ++i) {
            const auto& nb = g.adjacency[p[i - 1]];
            EXPECT_NE(std::find(nb.begin(), nb.end(), p[i]), nb.end());
        }
        EXPECT_GE(path_weight(e.m, p), 1.0 - e.gap - 1e-12);
    }
    // Tightness: no uniform down-scaling of m stays admissible.
    std::vector<double> scaled = e.m;
    for (double& x : scaled) x *= 1.0 - 1e-6;
    double lightest = std::numeric_limits<double>::infinity();
    for (const auto& p : e.certificate_paths) lightest = std::min(lightest, path_weight(scaled, p));
    EXPECT_LT(lightest, 1.0 - cfg.tol);
}

} // namespace

TEST(Vel, PathGraphClosedForm) {
    const VelConfig cfg;
    for (int n = 1; n <= 6; ++n) {
        const Graph g = path_graph(n);
        const std::vector<VertexId> a{0}, b{static_cast<VertexId>(n)};
        const VelEstimate e = vel_between(g, a, b, cfg);
        EXPECT_NEAR(e.vel, n, 1e-9 * n);
        EXPECT_EQ(e.m[0], 0.0);
        for (int i = 1; i <= n; ++i) EXPECT_NEAR(e.m[i], 1.0 / n, 1e-12);
        expect_certified(g, a, b, e, cfg);
        EXPECT_NEAR(exhaustive_vel(g, a, b).vel, n, 1e-12 * n);
    }
}

TEST(Vel, TwoParallelPaths) {
    const VelConfig cfg;
    for (int n = 1; n <= 5; ++n) {
        const Graph g = parallel_paths(n);
        const VelEstimate e = vel_between(g, {0}, {1, 2}, cfg);
        const ExhaustiveVel ref = exhaustive_vel(g, {0}, {1, 2});
        EXPECT_NEAR(e.vel, n / 2.0, 1e-9);
        EXPECT_NEAR(ref.vel, n / 2.0, 1e-12);
        EXPECT_EQ(ref.constraints, 2u);
        EXPECT_EQ(e.certificate_paths.size(), 2u);
        expect_certified(g, {0}, {1, 2}, e, cfg);
    }
}

TEST(Vel, AdjacentSetsHaveVelAtMostOne) {
    for (const SmallGraph& sg : connected_graphs(6)) {
        const Graph g = sg.to_graph();
        if (g.adjacency[0].empty()) continue;
        const VertexId b = g.adjacency[0].front();
        EXPECT_LE(vel_between(g, {0}, {b}).vel, 1.0 + 1e-12);
    }
}

TEST(Vel, RejectsBadSets) {
    const Graph g = path_graph(3);
    EXPECT_THROW(vel_between(g, {}, {3}), InputError);
    EXPECT_THROW(vel_between(g, {0}, {}), InputError);
    EXPECT_THROW(vel_between(g, {0, 1}, {1, 3}), InputError);
    EXPECT_THROW(vel_between(g, {0}, {9}), InputError);
    Graph split = make_graph(4, {{0, 1}, {2, 3}});
    EXPECT_THROW(vel_between(split, {0}, {3}), InputError);
    EXPECT_FALSE(connected(split));
    EXPECT_TRUE(connected(g));
}

TEST(Vel, IterationGuardReportsGap) {
    const Triangulation t = build_hexagonal(6);
    VelConfig cfg;
    cfg.max_iterations = 1;
    cfg.paths_per_round = 1;
    const VelEstimate e = vel_between(skeleton(t, 6), {0}, sphere(t, 6), cfg);
    EXPECT_FALSE(e.converged);
    EXPECT_GT(e.gap, 0.0);
    EXPECT_EQ(e.iterations, 1u);
}

TEST(GraphSuite, CountsOfGraphsUpToIsomorphism) {
    const std::vector<std::size_t> all{1, 2, 4, 11, 34, 156, 1044, 12346};
    const std::vector<std::size_t> conn{1, 1, 2, 6, 21, 112, 853, 11117};
    for (int n = 1; n <= 8; ++n) {
        const auto graphs = all_graphs(n);
        EXPECT_EQ(graphs.size(), all[n - 1]) << n;
        std::size_t c = 0;
        for (const auto& g : graphs) c += connected(g.to_graph());
        EXPECT_EQ(c, conn[n - 1]) << n;
        EXPECT_EQ(connected_graphs(n).size(), conn[n - 1]);
    }
}

TEST(GraphSuite, IsomorphicRelabelingsShareOneRepresentative) {
    std::mt19937_64 rng(2);
    const auto graphs = all_graphs(6);
    for (int s = 0; s < 50; ++s) {
        const SmallGraph& g = graphs[rng() % graphs.size()];
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const SmallGraph h = detail::relabel(g, perm);
        EXPECT_EQ(detail::canonical(h).first, detail::canonical(g).first);
    }
}

TEST(VelOracle, CuttingPlanesMatchExhaustiveQpOnAllSmallGraphs) {
    const SuiteReport rep = vel_oracle_suite(8, 1e-6);
    EXPECT_EQ(rep.graphs, 1u + 2u + 6u + 21u + 112u + 853u + 11117u);
    EXPECT_EQ(rep.failures, 0u);
    EXPECT_LE(rep.worst_relative, 1e-6);
    EXPECT_LE(rep.worst_kkt, 1e-9);
}

TEST(VelOracle, CertificatesOnRandomSmallGraphs) {
    std::mt19937_64 rng(17);
    const VelConfig cfg;
    const auto graphs = connected_graphs(7);
    for (int s = 0; s < 100; ++s) {
        const Graph g = graphs[rng() % graphs.size()].to_graph();
        const auto b = farthest_layer(g, 0);
        expect_certified(g, {0}, b, vel_between(g, {0}, b, cfg), cfg);
    }
}

TEST(VelTrend, HexagonalHarmonicGrowth) {
    const Triangulation t = build_hexagonal(16);
    const TrendReport rep = classify(t, {0}, {4, 8, 12, 16});
    ASSERT_EQ(rep.entries.size(), 4u);
    EXPECT_TRUE(rep.monotone);
    for (std::size_t k = 0; k < 4; ++k) {
        const int n = rep.entries[k].radius;
        double harmonic = 0.0;
        for (int j = 1; j <= n; ++j) harmonic += 1.0 / j;
        EXPECT_NEAR(rep.entries[k].estimate.vel, harmonic / 6.0, 1e-9);
        EXPECT_EQ(rep.entries[k].sphere_size, 6u * n);
        EXPECT_TRUE(rep.entries[k].estimate.converged);
        if (k > 0) {
            EXPECT_GT(rep.entries[k].estimate.vel, rep.entries[k - 1].estimate.vel);
        }
    }
    EXPECT_EQ(rep.label, Trend::parabolic_leaning);
}

TEST(VelTrend, DegreeSevenPlateaus) {
    const Triangulation t = build_constant_degree(7, 6);
    const TrendReport rep = classify(t, {0}, {3, 4, 5, 6});
    EXPECT_TRUE(rep.monotone);
    for (const auto& e : rep.entries) {
        EXPECT_GE(e.estimate.vel, layer_bound(t, e.radius) * (1 - 1e-9));
        EXPECT_TRUE(e.estimate.converged);
    }
    EXPECT_LE(std::abs(rep.last_relative_change), 0.05);
    EXPECT_EQ(rep.label, Trend::hyperbolic_leaning);
}

TEST(VelTrend, MonotoneInRadiusOnSmallBalls) {
    for (const Triangulation& t : {build_hexagonal(7), build_constant_degree(8, 4)}) {
        std::vector<int> radii;
        for (int n = 1; n <= t.radius(); ++n) radii.push_back(n);
        const TrendReport rep = classify(t, {0}, radii);
        EXPECT_TRUE(rep.monotone);
        for (std::size_t k = 1; k < rep.entries.size(); ++k)
            EXPECT_GE(rep.entries[k].estimate.vel, rep.entries[k - 1].estimate.vel * (1 - 1e-9));
    }
}

TEST(VelTrend, RejectsBadRadii) {
    const Triangulation t = build_hexagonal(4);
    EXPECT_THROW(classify(t, {0}, {}), InputError);
    EXPECT_THROW(classify(t, {0}, {3, 2}), InputError);
    EXPECT_THROW(classify(t, {0}, {5}), InputError);
    EXPECT_THROW(classify(t, {7}, {1, 2}), InputError);
}
