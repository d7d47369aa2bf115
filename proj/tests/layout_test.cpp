#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <iostream>
#include <numbers>
#include <sstream>

#include "crflab/flow.hpp"
#include "crflab/layout.hpp"

using namespace crflab;

namespace {

std::shared_ptr<const Triangulation> shared(Triangulation t) { return std::make_shared<const Triangulation>(std::move(t)); }

boost::property_tree::ptree parse_svg(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    boost::property_tree::read_xml(in, tree);
    return tree;
}

std::size_t count_children(const boost::property_tree::ptree& node, const std::string& name) {
    std::size_t n = 0;
    for (const auto& [key, child] : node) {
        if (key == name) ++n;
        n += count_children(child, name);
    }
    return n;
}

} // namespace

TEST(Layout, ModelDistance) {
    EXPECT_DOUBLE_EQ(model_distance(Geometry::euclidean, {0, 0}, {3, 4}), 5.0);
    const double d = 1.3;
    EXPECT_NEAR(model_distance(Geometry::hyperbolic, {0, 0}, {std::tanh(d / 2), 0}), d, 1e-14);
    // Invariance under a disk automorphism.
    const Point a(0.3, -0.2), p(0.1, 0.5), q(-0.4, 0.2);
    auto T = [&](Point z) { return (z - a) / (1.0 - std::conj(a) * z); };
    EXPECT_NEAR(model_distance(Geometry::hyperbolic, T(p), T(q)), model_distance(Geometry::hyperbolic, p, q), 1e-13);
}

TEST(Layout, PlaceThirdRealizesSides) {
    for (Geometry g : {Geometry::euclidean, Geometry::hyperbolic}) {
        const Triple r{0.4, 0.3, 0.5}, phi{0.2, 0.7, 0.0};
        const FaceAngles fa = triangle_angles(g, r, phi);
        const Point a(0.1, 0.05), b = place_third(g, a, Point(0.5, 0.3), 0.0, fa.lengths[2]);
        const Point c = place_third(g, a, b, fa.angles[0], fa.lengths[1]);
        EXPECT_NEAR(model_distance(g, a, b), fa.lengths[2], 1e-13);
        EXPECT_NEAR(model_distance(g, a, c), fa.lengths[1], 1e-13);
        EXPECT_NEAR(model_distance(g, b, c), fa.lengths[0], 1e-12);
        // Counterclockwise: c lies to the left of a -> b.
        EXPECT_GT(std::imag(std::conj(b - a) * (c - a)), 0.0);
    }
}

TEST(Layout, HexagonOfSixFaces) {
    const Triangulation t = build_hexagonal(1);
    auto ts = shared(t);
    const Truncation tr = truncate(ts, 1);
    const Embedding e = embed(tr, constant_metric(*ts, Geometry::euclidean, 0.0));
    EXPECT_EQ(e.vertices.size(), 7u);
    EXPECT_EQ(e.faces.size(), 6u);
    EXPECT_EQ(e.centers[ts->root()], Point(0.0, 0.0));
    for (const Edge& ed : e.edges) EXPECT_NEAR(std::abs(e.centers[ed.first] - e.centers[ed.second]), 2.0, 1e-14);
    EXPECT_LT(e.holonomy_residual, 1e-14);
}

TEST(Layout, HexagonalLatticeIsTangent) {
    auto t = shared(build_hexagonal(4));
    const Truncation tr = truncate(t, 4);
    const PackingMetric m = constant_metric(*t, Geometry::euclidean, 0.0);
    const Embedding e = embed(tr, m);
    EXPECT_EQ(e.vertices.size(), 61u);
    EXPECT_EQ(e.faces.size(), tr.faces.size());
    EXPECT_LT(e.holonomy_residual, 1e-9);
    const LayoutFidelity fid = fidelity(e, *t, m);
    EXPECT_LT(fid.max_length_error, 1e-9);
    EXPECT_LT(fid.max_tangency_error, 1e-9);
    // Circles only touch: no two centers closer than 2.
    for (std::size_t i = 0; i < e.vertices.size(); ++i)
        for (std::size_t j = i + 1; j < e.vertices.size(); ++j)
            EXPECT_GT(std::abs(e.centers[e.vertices[i]] - e.centers[e.vertices[j]]), 2.0 - 1e-9);
    // The outermost ring sits at distance 2 * 4 along the six lattice directions.
    double far = 0.0;
    for (VertexId v : e.vertices) far = std::max(far, std::abs(e.centers[v]));
    EXPECT_NEAR(far, 8.0, 1e-9);
}

TEST(Layout, DegreeSevenFlowLimitClosesUp) {
    auto t = shared(build_constant_degree(7, 4));
    FlowProblem p;
    p.truncation = truncate(t, 4);
    p.metric0 = constant_metric(*t, Geometry::hyperbolic, -3.0);
    p.t_max = 60.0;
    p.tolerance = 1e-9;
    const Trajectory traj = solve_finite(p);
    ASSERT_EQ(traj.status, FlowStatus::converged);
    const PackingMetric m = metric_at(p, traj, traj.final_sample());
    const Embedding e = embed(p.truncation, m);
    EXPECT_EQ(e.vertices.size(), p.truncation.vertices.size());
    EXPECT_LT(e.holonomy_residual, 1e-6);
    const LayoutFidelity fid = fidelity(e, *t, m);
    const double slack = std::max(1e-9, e.holonomy_residual);
    EXPECT_LE(fid.max_length_error, slack) << e.holonomy_residual;
    EXPECT_LE(fid.max_tangency_error, slack) << e.holonomy_residual;
    for (VertexId v : e.vertices) {
        EXPECT_LT(std::abs(e.centers[v]), 1.0);
        EXPECT_LT(std::abs(e.render_centers[v]) + e.render_radii[v], 1.0);
        EXPECT_GT(e.render_radii[v], 0.0);
    }
    // Adjacent circles touch and all other pairs are disjoint.
    std::size_t touching = 0;
    for (std::size_t i = 0; i < e.vertices.size(); ++i)
        for (std::size_t j = i + 1; j < e.vertices.size(); ++j) {
            const VertexId a = e.vertices[i], b = e.vertices[j];
            const double gap = std::abs(e.render_centers[a] - e.render_centers[b]) - e.render_radii[a] - e.render_radii[b];
            if (std::binary_search(e.edges.begin(), e.edges.end(), make_edge(a, b))) {
                EXPECT_NEAR(gap, 0.0, 1e-7);
                ++touching;
            } else {
                EXPECT_GT(gap, 1e-3);
            }
        }
    EXPECT_EQ(touching, truncation_edge_count(p.truncation));
    // Before the flow the interior angle sums are off, so the layout cannot close.
    const Embedding start = embed(p.truncation, p.metric0);
    EXPECT_GT(start.holonomy_residual, 1e-3);
}

TEST(Layout, HyperbolicRenderCircleMatchesMetricCircle) {
    auto t = shared(build_constant_degree(7, 2));
    const Truncation tr = truncate(t, 2);
    const PackingMetric m = constant_metric(*t, Geometry::hyperbolic, -1.0);
    const Embedding e = embed(tr, m);
    for (VertexId v : e.vertices) {
        // Sample the Euclidean render circle; each point lies at hyperbolic distance r from the center.
        for (int k = 0; k < 8; ++k) {
            const Point z = e.render_centers[v] + std::polar(e.render_radii[v], k * std::numbers::pi / 4);
            EXPECT_NEAR(model_distance(Geometry::hyperbolic, z, e.centers[v]), e.radii[v], 1e-10);
        }
    }
}

TEST(Layout, SvgIsWellFormed) {
    auto t = shared(build_constant_degree(7, 3));
    const Truncation tr = truncate(t, 3);
    const Embedding e = embed(tr, constant_metric(*t, Geometry::hyperbolic, -2.0));
    std::ostringstream full, bare;
    write_svg(e, full, {true, true, 200.0});
    write_svg(e, bare, {false, false, 200.0});
    const auto a = parse_svg(full.str());
    const auto b = parse_svg(bare.str());
    EXPECT_EQ(a.get<std::string>("svg.<xmlattr>.version"), "1.1");
    EXPECT_EQ(count_children(a, "circle"), e.vertices.size() + 1);
    EXPECT_EQ(count_children(a, "line"), e.edges.size());
    EXPECT_EQ(count_children(b, "circle"), 1u);
    EXPECT_EQ(count_children(b, "line"), 0u);
}

TEST(Layout, EuclideanSvgHasNoBoundaryCircle) {
    auto t = shared(build_hexagonal(2));
    const Embedding e = embed(truncate(t, 2), constant_metric(*t, Geometry::euclidean, 0.0));
    std::ostringstream out;
    write_svg(e, out);
    EXPECT_EQ(count_children(parse_svg(out.str()), "circle"), 19u);
}

TEST(Layout, Errors) {
    Truncation empty;
    auto t = shared(build_hexagonal(2));
    EXPECT_THROW(embed(empty, constant_metric(*t, Geometry::euclidean, 0.0)), InputError);
    PackingMetric bad = constant_metric(*t, Geometry::euclidean, 0.0);
    bad.u.pop_back();
    EXPECT_THROW(embed(truncate(t, 2), bad), InputError);
    EXPECT_THROW(write_svg(Embedding{}, std::cout), InputError);
    const Embedding e = embed(truncate(t, 2), constant_metric(*t, Geometry::euclidean, 0.0));
    EXPECT_THROW(write_svg(e, "/nonexistent-dir/x.svg"), InputError);
}
