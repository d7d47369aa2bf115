#pragma once

// Realizes a packing metric on a truncation as circles in the plane or in
// the Poincare disk by walking faces outward from a root face, and renders
// the result as SVG.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "crflab/common.hpp"
#include "crflab/geometry.hpp"
#include "crflab/triangulation.hpp"

namespace crflab {

using Point = std::complex<double>;

struct Embedding {
    Geometry geometry = Geometry::euclidean;
    std::vector<VertexId> vertices;        // placed vertices, sorted
    std::vector<Point> centers;            // by vertex id; NaN where unplaced
    std::vector<double> radii;             // metric radii by vertex id
    std::vector<Point> render_centers;     // Euclidean circle in the drawing plane
    std::vector<double> render_radii;
    std::vector<Edge> edges;               // edges of the placed faces
    std::vector<std::uint32_t> faces;      // placed faces
    double holonomy_residual = 0.0;        // worst disagreement over faces
    std::uint32_t worst_face = 0;
};

namespace detail {

// Orientation-preserving isometry z -> e^{i rot} (z - a) / (1 - conj(a) z)
// of the disk (Euclidean: z -> e^{i rot} (z - a)).
struct Frame {
    Geometry g;
    Point a;
    Point rot;  // unit complex

    Point to_local(Point z) const {
        if (g == Geometry::euclidean) return rot * (z - a);
        return rot * (z - a) / (1.0 - std::conj(a) * z);
    }
    Point to_global(Point w) const {
        const Point z = w / rot;
        if (g == Geometry::euclidean) return z + a;
        return (z + a) / (1.0 + std::conj(a) * z);
    }
};

// Frame that sends a to 0 and b onto the positive real axis.
inline Frame frame_at(Geometry g, Point a, Point b) {
    Frame f{g, a, Point(1.0, 0.0)};
    const Point local = f.to_local(b);
    const double n = std::abs(local);
    if (n > 0.0) f.rot = std::conj(local) / n;
    return f;
}

// Point at model distance d from the origin in direction angle.
inline Point polar_point(Geometry g, double d, double angle) {
    const double rho = g == Geometry::euclidean ? d : std::tanh(0.5 * d);
    return std::polar(rho, angle);
}

} // namespace detail

/// Model distance: Euclidean, or hyperbolic in the Poincare disk.
inline double model_distance(Geometry g, Point p, Point q) {
    if (g == Geometry::euclidean) return std::abs(p - q);
    const double s = std::abs(p - q) / std::abs(1.0 - std::conj(p) * q);
    return 2.0 * std::atanh(std::min(s, 1.0));
}

/// Position of c for the face (a, b, c) listed counterclockwise, given a, b,
/// the angle at a and the length |ac|.
inline Point place_third(Geometry g, Point a, Point b, double angle_a, double length_ac) {
    const detail::Frame f = detail::frame_at(g, a, b);
    return f.to_global(detail::polar_point(g, length_ac, angle_a));
}

namespace detail {

inline void set_render_circle(Embedding& e, VertexId v) {
    const Point p = e.centers[v];
    const double r = e.radii[v];
    if (e.geometry == Geometry::euclidean) {
        e.render_centers[v] = p;
        e.render_radii[v] = r;
        return;
    }
    // Points at hyperbolic distance d - r and d + r along the ray through p.
    const double s = std::abs(p);
    const double d = 2.0 * std::atanh(s);
    const Point dir = s > 0.0 ? p / s : Point(1.0, 0.0);
    const double near = std::tanh(0.5 * (d - r)), far = std::tanh(0.5 * (d + r));
    e.render_centers[v] = 0.5 * (near + far) * dir;
    e.render_radii[v] = 0.5 * (far - near);
}

} // namespace detail

/// Lays out the faces of the truncation breadth-first from a face at the
/// root. Every face is then checked by re-predicting each vertex from the
/// other two; the worst discrepancy is the holonomy residual.
inline Embedding embed(const Truncation& tr, const PackingMetric& m) {
    if (!tr.parent || tr.faces.empty()) throw InputError("layout needs a nonempty truncation");
    const Triangulation& t = *tr.parent;
    validate_metric(t, m);
    const std::size_t nv = t.vertex_count();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    Embedding e;
    e.geometry = m.geometry;
    e.centers.assign(nv, Point(nan, nan));
    e.radii.assign(nv, nan);
    e.render_centers.assign(nv, Point(nan, nan));
    e.render_radii.assign(nv, nan);
    std::vector<char> placed(nv, 0);

    std::map<Edge, std::vector<std::uint32_t>> edge_faces;
    for (std::uint32_t f : tr.faces) {
        const Face& face = t.faces()[f];
        for (int a = 0; a < 3; ++a) edge_faces[make_edge(face[a], face[(a + 1) % 3])].push_back(f);
    }
    std::vector<FaceAngles> angles(t.face_count());
    for (std::uint32_t f : tr.faces) {
        Triple r, phi;
        face_data(t, m, f, r, phi);
        try {
            angles[f] = triangle_angles(m.geometry, r, phi);
        } catch (const DegenerateTriangle& ex) {
            throw NumericalFailure("layout: face " + std::to_string(f) + " cannot be realized (" + ex.what() + ")");
        }
    }

    std::uint32_t first = tr.faces.front();
    for (std::uint32_t f : tr.faces) {
        const Face& face = t.faces()[f];
        if (std::find(face.begin(), face.end(), t.root()) != face.end()) {
            first = f;
            break;
        }
    }
    {
        const Face& face = t.faces()[first];
        const FaceAngles& fa = angles[first];
        // Root face: vertex 0 at the origin, vertex 1 on the positive axis.
        e.centers[face[0]] = Point(0.0, 0.0);
        e.centers[face[1]] = detail::polar_point(m.geometry, fa.lengths[2], 0.0);
        e.centers[face[2]] = detail::polar_point(m.geometry, fa.lengths[1], fa.angles[0]);
        for (VertexId v : face) placed[v] = 1;
    }

    std::vector<char> done(t.face_count(), 0);
    std::queue<std::uint32_t> queue;
    queue.push(first);
    done[first] = 1;
    while (!queue.empty()) {
        const std::uint32_t f = queue.front();
        queue.pop();
        e.faces.push_back(f);
        const Face& face = t.faces()[f];
        for (int a = 0; a < 3; ++a) {
            for (std::uint32_t g : edge_faces[make_edge(face[a], face[(a + 1) % 3])]) {
                if (done[g]) continue;
                const Face& gf = t.faces()[g];
                int k = 0;
                while (k < 3 && placed[gf[k]]) ++k;
                if (k < 3) {
                    // Rotate so the unplaced vertex is last: (p, q, w) counterclockwise.
                    const VertexId p = gf[(k + 1) % 3], q = gf[(k + 2) % 3], w = gf[k];
                    const int ip = (k + 1) % 3;
                    const FaceAngles& fa = angles[g];
                    const double angle_p = fa.angles[ip];
                    const double length_pw = fa.lengths[(ip + 1) % 3];
                    e.centers[w] = place_third(m.geometry, e.centers[p], e.centers[q], angle_p, length_pw);
                    if (m.geometry == Geometry::hyperbolic && !(std::abs(e.centers[w]) < 1.0))
                        throw NumericalFailure("layout: vertex " + std::to_string(w) + " left the unit disk");
                    placed[w] = 1;
                }
                done[g] = 1;
                queue.push(g);
            }
        }
    }

    for (std::uint32_t f : e.faces) {
        const Face& face = t.faces()[f];
        const FaceAngles& fa = angles[f];
        for (int k = 0; k < 3; ++k) {
            const int ip = (k + 1) % 3;
            const Point predicted = place_third(m.geometry, e.centers[face[ip]], e.centers[face[(k + 2) % 3]],
                                                fa.angles[ip], fa.lengths[(ip + 1) % 3]);
            const double gap = model_distance(m.geometry, predicted, e.centers[face[k]]);
            if (gap > e.holonomy_residual) e.holonomy_residual = gap, e.worst_face = f;
        }
        for (int a = 0; a < 3; ++a) e.edges.push_back(make_edge(face[a], face[(a + 1) % 3]));
    }
    std::sort(e.edges.begin(), e.edges.end());
    e.edges.erase(std::unique(e.edges.begin(), e.edges.end()), e.edges.end());
    for (VertexId v = 0; v < nv; ++v)
        if (placed[v]) {
            e.vertices.push_back(v);
            e.radii[v] = m.radius(v);
            detail::set_render_circle(e, v);
        }
    return e;
}

struct LayoutFidelity {
    double max_length_error = 0.0;   // |model distance - l_ij| over placed edges
    double max_tangency_error = 0.0; // |model distance - (r_i + r_j)| over edges with phi = 0
};

inline LayoutFidelity fidelity(const Embedding& e, const Triangulation& t, const PackingMetric& m) {
    LayoutFidelity out;
    for (const Edge& ed : e.edges) {
        const double phi = m.phi[*t.edge_index(ed.first, ed.second)];
        const double d = model_distance(e.geometry, e.centers[ed.first], e.centers[ed.second]);
        const double ri = e.radii[ed.first], rj = e.radii[ed.second];
        out.max_length_error = std::max(out.max_length_error, std::abs(d - edge_length(e.geometry, ri, rj, phi)));
        if (phi == 0.0) out.max_tangency_error = std::max(out.max_tangency_error, std::abs(d - (ri + rj)));
    }
    return out;
}

struct SvgOptions {
    bool show_edges = false;
    bool show_circles = true;
    double scale = 100.0;  // drawing units per model unit
};

/// SVG 1.1 document: one circle per placed vertex, optional edge segments,
/// and the unit circle in hyperbolic mode. The view box has a 5% margin.
inline void write_svg(const Embedding& e, std::ostream& out, const SvgOptions& opt = {}) {
    if (e.vertices.empty()) throw InputError("cannot render an empty embedding");
    if (!(opt.scale > 0.0)) throw InputError("SVG scale must be positive");
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    auto grow = [&](Point c, double r) {
        x0 = std::min(x0, c.real() - r), x1 = std::max(x1, c.real() + r);
        y0 = std::min(y0, c.imag() - r), y1 = std::max(y1, c.imag() + r);
    };
    if (e.geometry == Geometry::hyperbolic) grow(Point(0.0, 0.0), 1.0);
    for (VertexId v : e.vertices) grow(e.render_centers[v], opt.show_circles ? e.render_radii[v] : 0.0);
    const double s = opt.scale;
    const double margin = 0.05 * std::max(x1 - x0, y1 - y0);
    x0 -= margin, y0 -= margin, x1 += margin, y1 += margin;
    // SVG's y axis points down; flip so the drawing keeps its orientation.
    auto X = [&](double x) { return s * x; };
    auto Y = [&](double y) { return -s * y; };
    const auto old = out.precision(10);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << X(x0) << ' ' << Y(y1) << ' '
        << s * (x1 - x0) << ' ' << s * (y1 - y0) << "\">\n";
    const double stroke = 0.002 * s * std::max(x1 - x0, y1 - y0);
    if (e.geometry == Geometry::hyperbolic)
        out << "  <circle cx=\"0\" cy=\"0\" r=\"" << s << "\" fill=\"none\" stroke=\"black\" stroke-width=\""
            << stroke << "\"/>\n";
    if (opt.show_circles) {
        out << "  <g fill=\"none\" stroke=\"steelblue\" stroke-width=\"" << stroke << "\">\n";
        for (VertexId v : e.vertices)
            out << "    <circle cx=\"" << X(e.render_centers[v].real()) << "\" cy=\"" << Y(e.render_centers[v].imag())
                << "\" r=\"" << s * e.render_radii[v] << "\"/>\n";
        out << "  </g>\n";
    }
    if (opt.show_edges) {
        out << "  <g stroke=\"gray\" stroke-width=\"" << stroke << "\">\n";
        for (const Edge& ed : e.edges) {
            const Point p = e.render_centers[ed.first], q = e.render_centers[ed.second];
            out << "    <line x1=\"" << X(p.real()) << "\" y1=\"" << Y(p.imag()) << "\" x2=\"" << X(q.real())
                << "\" y2=\"" << Y(q.imag()) << "\"/>\n";
        }
        out << "  </g>\n";
    }
    out << "</svg>\n";
    out.precision(old);
}

inline void write_svg(const Embedding& e, const std::string& path, const SvgOptions& opt = {}) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    write_svg(e, out, opt);
    if (!out) throw InputError("failed writing '" + path + "'");
}

} // namespace crflab
