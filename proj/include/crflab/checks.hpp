#pragma once

// Named invariant suites run by `crflab check` and by the acceptance
// binary. Each suite compares library results with independent reference
// computations and reports its worst deviations.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crflab/flow.hpp"
#include "crflab/geometry.hpp"
#include "crflab/hexlab.hpp"
#include "crflab/vel.hpp"
#include "crflab/vel_oracle.hpp"

namespace crflab::checks {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::vector<std::string> failures;
    std::map<std::string, double> metrics;
    double seconds = 0.0;

    CheckResult() = default;
    explicit CheckResult(std::string n) : name(std::move(n)) {}

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            failures.push_back(what);
        }
    }
    std::string summary() const {
        std::ostringstream s;
        s.precision(6);
        bool first = true;
        for (const auto& [k, v] : metrics) {
            s << (first ? "" : ", ") << k << '=' << v;
            first = false;
        }
        return s.str();
    }
};

namespace detail {

using LD = long double;

// Inner angles straight from the laws of cosines in long double.
inline std::array<LD, 3> reference_angles(Geometry g, const std::array<LD, 3>& u, const Triple& phi) {
    std::array<LD, 3> r, l, theta;
    for (int a = 0; a < 3; ++a) r[a] = g == Geometry::euclidean ? std::exp(u[a]) : 2 * std::atanh(std::exp(u[a]));
    for (int a = 0; a < 3; ++a) {
        const LD ri = r[(a + 1) % 3], rj = r[(a + 2) % 3], c = std::cos(static_cast<LD>(phi[a]));
        l[a] = g == Geometry::euclidean ? std::sqrt(ri * ri + rj * rj + 2 * c * ri * rj)
                                        : std::acosh(std::cosh(ri) * std::cosh(rj) + c * std::sinh(ri) * std::sinh(rj));
    }
    for (int a = 0; a < 3; ++a) {
        const LD x = l[a], y = l[(a + 1) % 3], z = l[(a + 2) % 3];
        const LD f = g == Geometry::euclidean ? (y * y + z * z - x * x) / (2 * y * z)
                                              : (std::cosh(y) * std::cosh(z) - std::cosh(x)) / (std::sinh(y) * std::sinh(z));
        theta[a] = std::acos(std::clamp<LD>(f, -1, 1));
    }
    return theta;
}

// Richardson-extrapolated central differences of reference_angles.
inline Matrix3 reference_jacobian(Geometry g, const Triple& u, const Triple& phi, LD h = 1e-6L) {
    auto central = [&](int b, LD step) {
        std::array<LD, 3> up{u[0], u[1], u[2]}, dn = up;
        up[b] += step;
        dn[b] -= step;
        const auto tp = reference_angles(g, up, phi), tm = reference_angles(g, dn, phi);
        std::array<LD, 3> d;
        for (int a = 0; a < 3; ++a) d[a] = (tp[a] - tm[a]) / (2 * step);
        return d;
    };
    Matrix3 jac{};
    for (int b = 0; b < 3; ++b) {
        const auto d1 = central(b, h), d2 = central(b, h / 2);
        for (int a = 0; a < 3; ++a) jac[a][b] = static_cast<double>((4 * d2[a] - d1[a]) / 3);
    }
    return jac;
}

// The hexagonal face angle in its arccos form.
inline LD reference_face_angle(LD x, LD y) {
    const LD ex = std::exp(x), ey = std::exp(y);
    return std::acos(((1 + ex) * (1 + ex) + (1 + ey) * (1 + ey) - (ex + ey) * (ex + ey)) / (2 * (1 + ex) * (1 + ey)));
}

inline double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

/// Angle Jacobians on `count` random triangles per geometry against long
/// double finite differences (1e-6 relative), with diagonal < 0,
/// off-diagonal > 0, symmetry, and row sums = 0 (Euclidean) or < 0
/// (hyperbolic).
inline CheckResult geometry_derivatives(int count = 1000, std::uint64_t seed = 17) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res{"geometry-derivatives"};
    for (Geometry g : {Geometry::euclidean, Geometry::hyperbolic}) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> du = g == Geometry::euclidean
                                                        ? std::uniform_real_distribution<double>(-3.0, 1.0)
                                                        : std::uniform_real_distribution<double>(-4.0, -0.05);
        std::uniform_real_distribution<double> dphi(0.0, kPi / 2);
        double worst_fd = 0.0, worst_sym = 0.0, worst_row = 0.0, max_row = -1e300;
        std::size_t sign_errors = 0;
        for (int s = 0; s < count; ++s) {
            Triple u, phi, r;
            for (int a = 0; a < 3; ++a) u[a] = du(rng), phi[a] = dphi(rng);
            for (int a = 0; a < 3; ++a) r[a] = radius_from_factor(g, u[a]);
            const Matrix3 jac = angle_jacobian(g, r, phi);
            const Matrix3 fd = detail::reference_jacobian(g, u, phi);
            for (int a = 0; a < 3; ++a) {
                double row = 0.0, scale = 0.0;
                for (int b = 0; b < 3; ++b) {
                    worst_fd = std::max(worst_fd, std::abs(jac[a][b] - fd[a][b]) / std::abs(fd[a][b]));
                    worst_sym = std::max(worst_sym, std::abs(jac[a][b] - jac[b][a]) / std::max(1.0, std::abs(jac[a][b])));
                    if (a == b ? !(jac[a][b] < 0.0) : !(jac[a][b] > 0.0)) ++sign_errors;
                    row += jac[a][b];
                    scale = std::max(scale, std::abs(jac[a][b]));
                }
                if (g == Geometry::euclidean)
                    worst_row = std::max(worst_row, std::abs(row) / scale);
                else
                    max_row = std::max(max_row, row);
            }
        }
        const std::string tag = to_string(g);
        res.metrics[tag + ".fd_relative"] = worst_fd;
        res.metrics[tag + ".symmetry"] = worst_sym;
        res.metrics[tag + ".sign_errors"] = static_cast<double>(sign_errors);
        res.require(worst_fd <= 1e-6, tag + ": Jacobian differs from finite differences");
        res.require(worst_sym <= 1e-12, tag + ": Jacobian not symmetric");
        res.require(sign_errors == 0, tag + ": Jacobian sign pattern violated");
        if (g == Geometry::euclidean) {
            res.metrics[tag + ".row_sum"] = worst_row;
            res.require(worst_row <= 1e-12, "euclidean: row sums not zero");
        } else {
            res.metrics[tag + ".max_row_sum"] = max_row;
            res.require(max_row < 0.0, "hyperbolic: row sums not negative");
        }
    }
    res.seconds = detail::elapsed(start);
    return res;
}

struct MaxPrincipleRun {
    Geometry geometry = Geometry::euclidean;
    std::uint64_t seed = 0;
    FlowStatus status = FlowStatus::t_max_reached;
    MaxPrincipleReport max_principle;
    CurvatureBoundReport bounds;
};

/// Flow problem for the seeded monitor runs: a hexagonal radius-6 ball with
/// interior factors uniform in [-0.3, 0.3], or a degree-7 radius-3 ball with
/// factors uniform in [-4, -2].
inline FlowProblem monitor_problem(Geometry g, std::uint64_t seed) {
    const int radius = g == Geometry::euclidean ? 6 : 3;
    auto t = std::make_shared<const Triangulation>(g == Geometry::euclidean ? build_hexagonal(radius)
                                                                            : build_constant_degree(7, radius));
    FlowProblem p;
    p.truncation = truncate(t, radius);
    p.metric0 = constant_metric(*t, g, g == Geometry::euclidean ? 0.0 : -3.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    const double scale = g == Geometry::euclidean ? 0.6 : 2.0;
    for (VertexId v : p.truncation.interior) p.metric0.u[v] += scale * d(rng);
    p.t_max = g == Geometry::euclidean ? 40.0 : 30.0;
    p.tolerance = 1e-8;
    return p;
}

/// `runs` seeded K_hat = 0 flows, alternating hexagonal Euclidean and
/// degree-7 hyperbolic: m* non-decreasing, M* non-increasing within ten
/// times the integrator tolerance, degree and uniform curvature bounds.
inline CheckResult max_principle(int runs = 20, std::uint64_t seed = 1000) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res{"max-principle"};
    std::vector<MaxPrincipleRun> out(static_cast<std::size_t>(runs));
    parallel_for(out.size(), [&](std::size_t i) {
        const Geometry g = i % 2 == 0 ? Geometry::euclidean : Geometry::hyperbolic;
        const FlowProblem p = monitor_problem(g, seed + i);
        const Trajectory traj = solve_finite(p);
        out[i] = {g, seed + i, traj.status, max_principle_monitor(p, traj),
                  curvature_bound_monitor(traj, monitor_slack(p.integrator))};
    }, 1);
    double drop = 0.0, rise = 0.0;
    for (const auto& r : out) {
        const std::string tag = std::string(to_string(r.geometry)) + " seed " + std::to_string(r.seed);
        drop = std::max(drop, r.max_principle.worst_min_drop);
        rise = std::max(rise, r.max_principle.worst_max_rise);
        res.require(r.status == FlowStatus::converged || r.status == FlowStatus::t_max_reached,
                    tag + ": flow ended with " + to_string(r.status));
        res.require(r.max_principle.asserted && r.max_principle.ok(), tag + ": extremal curvature not monotone");
        res.require(r.bounds.degree_bound, tag + ": degree bound violated");
        res.require(r.bounds.uniform_bound, tag + ": uniform curvature bound violated");
    }
    res.metrics["runs"] = runs;
    res.metrics["worst_min_drop"] = drop;
    res.metrics["worst_max_rise"] = rise;
    res.seconds = detail::elapsed(start);
    return res;
}

/// Semilinear form of the hexagonal curvature against the geometry module on
/// `count` random fields with |u| <= 0.2, and the face-angle constants at the
/// origin.
inline CheckResult hexlab_identities(int count = 100, std::uint64_t seed = 7) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res{"hexlab-identities"};
    const int N = 6;
    auto t = std::make_shared<const Triangulation>(build_hexagonal(N + 1));
    const Truncation tr = truncate(t, N + 1);
    const auto pts = hexagonal_lattice_points(N + 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    double worst = 0.0;
    for (int s = 0; s < count; ++s) {
        hex::HexField u(N);
        for (double& x : u.values()) x = d(rng);
        PackingMetric metric = constant_metric(*t, Geometry::euclidean, 0.0);
        for (VertexId v = 0; v < pts.size(); ++v) metric.u[v] = u(pts[v][0], pts[v][1]);
        const std::vector<double> k = interior_curvatures(tr, metric);
        for (std::size_t a = 0; a < tr.interior.size(); ++a) {
            const auto& p = pts[tr.interior[a]];
            worst = std::max(worst, std::abs(hex::semilinear_rhs(u, p[0], p[1]) + k[a]));
        }
    }
    res.metrics["semilinear_vs_curvature"] = worst;
    res.require(worst <= 1e-10, "semilinear form disagrees with -K");

    const double g00 = std::abs(hex::G(0.0, 0.0) - kPi / 3.0);
    const double gx = std::abs(2.0 * hex::G_x(0.0, 0.0) - std::sqrt(3.0) / 3.0);
    const detail::LD h = 1e-5L;
    const double fd = static_cast<double>(
        (detail::reference_face_angle(h, 0) - detail::reference_face_angle(-h, 0)) / (2 * h));
    const double gx_fd = std::abs(2.0 * fd - std::sqrt(3.0) / 3.0);
    res.metrics["G00_error"] = g00;
    res.metrics["Gx0_error"] = gx;
    res.metrics["Gx0_fd_error"] = gx_fd;
    res.require(g00 <= 1e-12, "G(0,0) != pi/3");
    res.require(gx <= 1e-12, "2 G_x(0,0) != sqrt(3)/3");
    res.require(gx_fd <= 1e-8, "finite-difference 2 G_x(0,0) != sqrt(3)/3");
    res.seconds = detail::elapsed(start);
    return res;
}

/// Cutting-plane VEL against the exhaustive QP on every connected graph
/// with up to `max_vertices` vertices, plus VEL = n on paths of n <= 6 edges.
inline CheckResult vel_oracle(int max_vertices = 8, double rel_tol = 1e-6) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult res{"vel-oracle"};
    const vel::SuiteReport rep = vel::vel_oracle_suite(max_vertices, rel_tol);
    res.metrics["graphs"] = static_cast<double>(rep.graphs);
    res.metrics["cases"] = static_cast<double>(rep.cases);
    res.metrics["worst_relative"] = rep.worst_relative;
    res.metrics["worst_kkt"] = rep.worst_kkt;
    res.require(rep.failures == 0, std::to_string(rep.failures) + " graph cases disagree with the oracle");
    res.require(rep.worst_relative <= rel_tol, "relative difference above tolerance");
    double worst_path = 0.0;
    for (int n = 1; n <= 6; ++n) {
        vel::Graph g;
        g.adjacency.resize(static_cast<std::size_t>(n + 1));
        for (int i = 0; i < n; ++i) g.add_edge(static_cast<VertexId>(i), static_cast<VertexId>(i + 1));
        const vel::VelEstimate e = vel::vel_between(g, {0}, {static_cast<VertexId>(n)});
        worst_path = std::max(worst_path, std::abs(e.vel - n) / n);
        res.require(e.converged, "path of length " + std::to_string(n) + " did not converge");
    }
    res.metrics["path_relative"] = worst_path;
    res.require(worst_path <= rel_tol, "path graphs do not give VEL = n");
    res.seconds = detail::elapsed(start);
    return res;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"geometry-derivatives", "max-principle", "hexlab-identities",
                                                "vel-oracle"};
    return names;
}

inline CheckResult run_suite(const std::string& name) {
    if (name == "geometry-derivatives") return geometry_derivatives();
    if (name == "max-principle") return max_principle();
    if (name == "hexlab-identities") return hexlab_identities();
    if (name == "vel-oracle") return vel_oracle();
    throw InputError("unknown check suite '" + name + "'");
}

} // namespace crflab::checks
