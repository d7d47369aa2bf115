#pragma once

// Background-geometry kernel for circle-packing metrics: conformal factors,
// edge lengths, inner angles, discrete curvature and their derivatives.
//
// Conventions: for a triangle with vertices (0, 1, 2), side index a is the
// side opposite vertex a, so lengths[0] = l_12, lengths[1] = l_02,
// lengths[2] = l_01, and phi[a] is the intersection angle on that side.

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crflab/common.hpp"
#include "crflab/triangulation.hpp"

namespace crflab {

enum class Geometry { euclidean, hyperbolic };

inline const char* to_string(Geometry g) { return g == Geometry::euclidean ? "euclidean" : "hyperbolic"; }

inline Geometry geometry_from_string(const std::string& s) {
    if (s == "euclidean" || s == "euclid" || s == "E") return Geometry::euclidean;
    if (s == "hyperbolic" || s == "hyper" || s == "H") return Geometry::hyperbolic;
    throw InputError("unknown geometry '" + s + "'");
}

using Triple = std::array<double, 3>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

inline constexpr double kCosineSlack = 1e-12;
// Above this length, hyperbolic quantities are evaluated in log domain.
inline constexpr double kLogDomainLength = 350.0;

// ---------------------------------------------------------------------------
// Conformal factors

inline double factor_from_radius(Geometry g, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("radius must be positive and finite");
    if (g == Geometry::euclidean) return std::log(r);
    // ln tanh(r/2) = ln(1 - e^{-r}) - ln(1 + e^{-r})
    const double x = std::exp(-r);
    return (r > 1.0 ? std::log1p(-x) : std::log(-std::expm1(-r))) - std::log1p(x);
}

inline double radius_from_factor(Geometry g, double u) {
    if (!std::isfinite(u)) throw InputError("conformal factor must be finite");
    if (g == Geometry::euclidean) return std::exp(u);
    if (!(u < 0.0)) throw InputError("hyperbolic conformal factor must be negative");
    const double x = std::exp(u);
    if (x < 0.5) return 2.0 * std::atanh(x);
    // 2 artanh(e^u) = ln((1 + e^u) / (1 - e^u))
    return std::log1p(x) - std::log(-std::expm1(u));
}

/// dr/du: r (Euclidean) or sinh r (hyperbolic).
inline double radius_derivative(Geometry g, double r) { return g == Geometry::euclidean ? r : std::sinh(r); }

namespace detail {

// cosh x = e^x C(x) / 2 and sinh x = e^x S(x) / 2 for x >= 0.
inline double scaled_cosh(double x) { return 1.0 + std::exp(-2.0 * x); }
inline double scaled_sinh(double x) { return -std::expm1(-2.0 * x); }

inline void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DegenerateTriangle("non-positive or non-finite radius");
}

inline void check_phi(double phi) {
    if (!(phi >= 0.0 && phi <= kPi / 2 + 1e-15)) throw InputError("intersection angle outside [0, pi/2]");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Edge lengths

inline double edge_length(Geometry g, double ri, double rj, double phi) {
    detail::check_radius(ri);
    detail::check_radius(rj);
    detail::check_phi(phi);
    const double c = std::cos(phi);
    if (g == Geometry::euclidean) return std::sqrt(ri * ri + rj * rj + 2.0 * c * (ri * rj));
    if (ri + rj > kLogDomainLength) {
        using detail::scaled_cosh, detail::scaled_sinh;
        const double log_x = ri + rj - std::log(4.0) +
                             std::log(scaled_cosh(ri) * scaled_cosh(rj) + c * (scaled_sinh(ri) * scaled_sinh(rj)));
        return log_x + std::log1p(std::sqrt(-std::expm1(-2.0 * log_x)));
    }
    // cosh l - 1 = 2 sinh^2((ri + rj) / 2) - (1 - cos phi) sinh ri sinh rj
    const double sh = std::sinh(0.5 * (ri + rj));
    const double y = 2.0 * sh * sh - (1.0 - c) * (std::sinh(ri) * std::sinh(rj));
    return std::log1p(y + std::sqrt(y * (y + 2.0)));
}

/// dl_ij / du_i.
inline double edge_length_derivative(Geometry g, double ri, double rj, double phi, double l) {
    const double c = std::cos(phi);
    if (g == Geometry::euclidean) return ri * (ri + c * rj) / l;
    using detail::scaled_cosh, detail::scaled_sinh;
    const double num = scaled_sinh(ri) * (scaled_sinh(ri) * scaled_cosh(rj) + c * scaled_cosh(ri) * scaled_sinh(rj));
    return 0.25 * std::exp(2.0 * ri + rj - l) * num / scaled_sinh(l);
}

// ---------------------------------------------------------------------------
// Angles

struct FaceAngles {
    Triple angles{};   // angles[a] at vertex a
    Triple lengths{};  // lengths[a] opposite vertex a
};

namespace detail {

// Law-of-cosines argument for the angle opposite side a.
inline double cosine_argument(Geometry g, double a, double b, double c) {
    if (g == Geometry::euclidean) return (b * b + c * c - a * a) / (2.0 * b * c);
    return (scaled_cosh(b) * scaled_cosh(c) - 2.0 * std::exp(a - b - c) * scaled_cosh(a)) /
           (scaled_sinh(b) * scaled_sinh(c));
}

// Half-angle evaluation, accurate when the angle is close to 0 or pi.
inline double half_angle(Geometry g, double a, double b, double c) {
    const double s = 0.5 * (a + b + c);
    const double sa = 0.5 * (b + c - a), sb = 0.5 * (a + c - b), sc = 0.5 * (a + b - c);
    if (sa < 0.0 || sb < 0.0 || sc < 0.0) throw DegenerateTriangle("side lengths violate the triangle inequality");
    double t2;
    if (g == Geometry::euclidean) {
        t2 = (sb * sc) / (s * sa);
    } else {
        t2 = std::exp(a - b - c) * scaled_sinh(sb) * scaled_sinh(sc) / (scaled_sinh(s) * scaled_sinh(sa));
    }
    return 2.0 * std::atan(std::sqrt(t2));
}

inline double angle_opposite(Geometry g, double a, double b, double c) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw DegenerateTriangle("non-positive side length");
    double f = cosine_argument(g, a, b, c);
    if (!std::isfinite(f) || f > 1.0 + kCosineSlack || f < -1.0 - kCosineSlack)
        throw DegenerateTriangle("law-of-cosines argument " + std::to_string(f) + " outside [-1, 1]");
    if (std::abs(f) <= 0.9) return std::acos(f);
    if (f >= 1.0) return 0.0;
    if (f <= -1.0) return kPi;
    return half_angle(g, a, b, c);
}

// d(theta_a) / d(side) for the angle opposite side a, with sides (a, b, c).
inline Triple angle_length_gradient(Geometry g, double a, double b, double c, double theta) {
    const double s = std::sin(theta);
    if (!(s > 0.0)) throw DegenerateTriangle("zero angle in derivative");
    Triple df;
    if (g == Geometry::euclidean) {
        df = {-a / (b * c), (a * a + b * b - c * c) / (2.0 * b * b * c), (a * a + c * c - b * b) / (2.0 * b * c * c)};
    } else {
        const double ca = scaled_cosh(a), cb = scaled_cosh(b), cc = scaled_cosh(c);
        const double sa = scaled_sinh(a), sb = scaled_sinh(b), sc = scaled_sinh(c);
        const double e = std::exp(a - b - c);
        df = {-2.0 * e * sa / (sb * sc), 2.0 * e * (ca * cb - 2.0 * std::exp(c - a - b) * cc) / (sb * sb * sc),
              2.0 * e * (ca * cc - 2.0 * std::exp(b - a - c) * cb) / (sc * sc * sb)};
    }
    return {-df[0] / s, -df[1] / s, -df[2] / s};
}

} // namespace detail

inline FaceAngles angles_from_lengths(Geometry g, const Triple& lengths) {
    FaceAngles fa;
    fa.lengths = lengths;
    const auto& l = lengths;
    fa.angles[0] = detail::angle_opposite(g, l[0], l[1], l[2]);
    fa.angles[1] = detail::angle_opposite(g, l[1], l[2], l[0]);
    fa.angles[2] = detail::angle_opposite(g, l[2], l[0], l[1]);
    return fa;
}

/// Edge lengths and inner angles of the triangle with radii r and
/// intersection angles phi (phi[a] on the side opposite vertex a).
inline FaceAngles triangle_angles(Geometry g, const Triple& r, const Triple& phi) {
    const Triple lengths{edge_length(g, r[1], r[2], phi[0]), edge_length(g, r[0], r[2], phi[1]),
                         edge_length(g, r[0], r[1], phi[2])};
    return angles_from_lengths(g, lengths);
}

/// Analytic Jacobian J[a][b] = d theta_a / d u_b through the chain
/// u -> r -> l -> theta.
inline Matrix3 angle_jacobian(Geometry g, const Triple& r, const Triple& phi) {
    const FaceAngles fa = triangle_angles(g, r, phi);
    const Triple& l = fa.lengths;
    // dl[side][vertex] = d l_side / d u_vertex
    Matrix3 dl{};
    for (int side = 0; side < 3; ++side) {
        const int p = (side + 1) % 3, q = (side + 2) % 3;
        dl[side][p] = edge_length_derivative(g, r[p], r[q], phi[side], l[side]);
        dl[side][q] = edge_length_derivative(g, r[q], r[p], phi[side], l[side]);
    }
    Matrix3 jac{};
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        const Triple grad = detail::angle_length_gradient(g, l[a], l[b], l[c], fa.angles[a]);
        const std::array<int, 3> sides{a, b, c};
        for (int v = 0; v < 3; ++v) {
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) sum += grad[k] * dl[sides[k]][v];
            jac[a][v] = sum;
        }
    }
    return jac;
}

/// max over ordered pairs (i, j), i != j, of (d theta_i / d u_j) / theta_i.
inline double angle_derivative_ratio(Geometry g, const Triple& r, const Triple& phi) {
    const FaceAngles fa = triangle_angles(g, r, phi);
    const Matrix3 jac = angle_jacobian(g, r, phi);
    double best = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (!(fa.angles[i] > 0.0)) throw DegenerateTriangle("zero angle in derivative ratio");
        for (int j = 0; j < 3; ++j)
            if (j != i) best = std::max(best, jac[i][j] / fa.angles[i]);
    }
    return best;
}

/// d theta_i / d u_j recovered from the power center O of the three circles:
/// tanh(l_OD) / sinh(l_ij) in hyperbolic geometry and l_OD / l_ij in
/// Euclidean geometry, where D is the foot of the perpendicular from O to
/// the edge ij.
inline double power_center_derivative(Geometry g, const Triple& r, const Triple& phi, int i, int j) {
    if (i == j || i < 0 || j < 0 || i > 2 || j > 2) throw InputError("power center: need distinct vertices");
    const int k = 3 - i - j;
    const FaceAngles fa = triangle_angles(g, r, phi);
    const double lij = fa.lengths[k], lik = fa.lengths[j];
    const double ti = fa.angles[i];
    if (g == Geometry::euclidean) {
        // i at origin, j on +x axis, k above.
        const double pj[2] = {lij, 0.0};
        const double pk[2] = {lik * std::cos(ti), lik * std::sin(ti)};
        // |O - p|^2 - r^2 equal for all three: two linear equations.
        const double a1 = 2.0 * pj[0], b1 = 2.0 * pj[1];
        const double c1 = pj[0] * pj[0] + pj[1] * pj[1] - r[j] * r[j] + r[i] * r[i];
        const double a2 = 2.0 * pk[0], b2 = 2.0 * pk[1];
        const double c2 = pk[0] * pk[0] + pk[1] * pk[1] - r[k] * r[k] + r[i] * r[i];
        const double det = a1 * b2 - a2 * b1;
        const double oy = (a1 * c2 - a2 * c1) / det;
        return oy / lij;
    }
    // Hyperboloid model, <x, y> = -x0 y0 + x1 y1 + x2 y2.
    using V3 = std::array<double, 3>;
    const V3 pi{1.0, 0.0, 0.0};
    const V3 pj{std::cosh(lij), std::sinh(lij), 0.0};
    const V3 pk{std::cosh(lik), std::sinh(lik) * std::cos(ti), std::sinh(lik) * std::sin(ti)};
    auto scaled = [](const V3& p, double s) { return V3{p[0] / s, p[1] / s, p[2] / s}; };
    auto minus = [](const V3& a, const V3& b) { return V3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}; };
    auto mcross = [](const V3& a, const V3& b) {
        // Minkowski-orthogonal to a and b.
        V3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
        return V3{-c[0], c[1], c[2]};
    };
    auto mdot = [](const V3& a, const V3& b) { return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
    const V3 qi = scaled(pi, std::cosh(r[i])), qj = scaled(pj, std::cosh(r[j])), qk = scaled(pk, std::cosh(r[k]));
    V3 o = mcross(minus(qi, qj), minus(qi, qk));
    const double norm = std::sqrt(-mdot(o, o));
    o = scaled(o, o[0] > 0 ? norm : -norm);
    const V3 m = mcross(pi, pj);
    const double sinh_dist = std::abs(mdot(o, m)) / std::sqrt(mdot(m, m));
    return std::tanh(std::asinh(sinh_dist)) / std::sinh(lij);
}

// ---------------------------------------------------------------------------
// Metrics on complexes

/// Conformal factors per vertex id and intersection angles per edge index of
/// the owning triangulation.
struct PackingMetric {
    Geometry geometry = Geometry::euclidean;
    std::vector<double> u;
    std::vector<double> phi;

    double radius(VertexId v) const { return radius_from_factor(geometry, u[v]); }
};

/// Metric with constant factor `u0` and the triangulation's declared angles.
inline PackingMetric constant_metric(const Triangulation& t, Geometry g, double u0) {
    PackingMetric m{g, std::vector<double>(t.vertex_count(), u0), t.phi()};
    if (g == Geometry::hyperbolic && !(u0 < 0.0)) throw InputError("hyperbolic conformal factor must be negative");
    return m;
}

inline void validate_metric(const Triangulation& t, const PackingMetric& m) {
    if (m.u.size() != t.vertex_count()) throw InputError("metric size does not match triangulation");
    if (m.phi.size() != t.edge_count()) throw InputError("intersection angles do not match edge count");
    for (double x : m.u) {
        if (!std::isfinite(x)) throw InputError("non-finite conformal factor");
        if (m.geometry == Geometry::hyperbolic && !(x < 0.0))
            throw InputError("hyperbolic conformal factor must be negative");
    }
    for (double p : m.phi) detail::check_phi(p);
}

/// Radii and side angles of face f in its stored vertex order.
inline void face_data(const Triangulation& t, const PackingMetric& m, std::uint32_t f, Triple& r, Triple& phi,
                      const std::vector<double>* radii = nullptr) {
    const Face& face = t.faces()[f];
    for (int a = 0; a < 3; ++a) r[a] = radii ? (*radii)[face[a]] : m.radius(face[a]);
    for (int a = 0; a < 3; ++a) phi[a] = m.phi[*t.edge_index(face[(a + 1) % 3], face[(a + 2) % 3])];
}

inline int position_in_face(const Face& face, VertexId v) {
    for (int a = 0; a < 3; ++a)
        if (face[a] == v) return a;
    return -1;
}

/// K_v = 2 pi - sum of inner angles at v. Requires a closed star.
inline double curvature(const Triangulation& t, const PackingMetric& m, VertexId v) {
    if (v >= t.vertex_count()) throw InputError("curvature: unknown vertex");
    if (!t.has_closed_star(v)) throw InputError("curvature undefined at boundary vertex " + std::to_string(v));
    double sum = 0.0;
    for (std::uint32_t f : t.incident_faces(v)) {
        Triple r, phi;
        face_data(t, m, f, r, phi);
        sum += triangle_angles(m.geometry, r, phi).angles[position_in_face(t.faces()[f], v)];
    }
    return kTwoPi - sum;
}

inline double curvature(const Truncation& tr, const PackingMetric& m, VertexId v) {
    if (!tr.is_interior(v)) throw InputError("curvature undefined at non-interior vertex " + std::to_string(v));
    return curvature(*tr.parent, m, v);
}

/// Curvature at every interior vertex of the truncation (order of tr.interior).
/// Angles are computed once per face.
inline std::vector<double> interior_curvatures(const Truncation& tr, const PackingMetric& m) {
    const Triangulation& t = *tr.parent;
    std::vector<double> radii(t.vertex_count(), 0.0);
    for (VertexId v : tr.vertices) radii[v] = m.radius(v);
    std::vector<double> sums(t.vertex_count(), 0.0);
    for (std::uint32_t f : tr.faces) {
        const Face& face = t.faces()[f];
        if (!tr.is_interior(face[0]) && !tr.is_interior(face[1]) && !tr.is_interior(face[2])) continue;
        Triple r, phi;
        face_data(t, m, f, r, phi, &radii);
        const FaceAngles fa = triangle_angles(m.geometry, r, phi);
        for (int a = 0; a < 3; ++a) sums[face[a]] += fa.angles[a];
    }
    std::vector<double> k;
    k.reserve(tr.interior.size());
    for (VertexId v : tr.interior) k.push_back(kTwoPi - sums[v]);
    return k;
}

/// One row of the curvature Jacobian: dK_v/du_w for w = v and w ~ v, plus
/// the defect B_v = dK_v/du_v + sum_w dK_v/du_w (zero Euclidean, positive
/// hyperbolic).
struct CurvatureRow {
    std::map<VertexId, double> entries;
    double defect = 0.0;
};

inline CurvatureRow curvature_jacobian_row(const Triangulation& t, const PackingMetric& m, VertexId v) {
    if (v >= t.vertex_count() || !t.has_closed_star(v))
        throw InputError("curvature Jacobian undefined at boundary vertex " + std::to_string(v));
    CurvatureRow row;
    row.entries[v] = 0.0;
    for (std::uint32_t f : t.incident_faces(v)) {
        Triple r, phi;
        face_data(t, m, f, r, phi);
        const Matrix3 jac = angle_jacobian(m.geometry, r, phi);
        const Face& face = t.faces()[f];
        const int a = position_in_face(face, v);
        for (int b = 0; b < 3; ++b) row.entries[face[b]] -= jac[a][b];
    }
    for (const auto& [w, value] : row.entries) row.defect += value;
    return row;
}

inline CurvatureRow curvature_jacobian_row(const Truncation& tr, const PackingMetric& m, VertexId v) {
    if (!tr.is_interior(v)) throw InputError("curvature Jacobian undefined at non-interior vertex " + std::to_string(v));
    return curvature_jacobian_row(*tr.parent, m, v);
}

} // namespace crflab
