#pragma once

// Combinatorial Ricci flow du/dt = -(K - K_hat) on a truncation with the
// boundary factors frozen at their initial values, plus the monitors and
// diagnostics used to check it: extrema of curvature, degree bounds, the
// hyperbolic barrier, exhaustion sequences and the uniqueness weights.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "crflab/geometry.hpp"
#include "crflab/ode.hpp"
#include "crflab/parallel.hpp"
#include "crflab/triangulation.hpp"

namespace crflab {

struct FlowProblem {
    Truncation truncation;
    PackingMetric metric0;       // indexed by parent vertex id
    std::vector<double> target;  // K_hat per interior vertex (truncation.interior order); empty means 0
    double t_max = 50.0;
    double tolerance = 1e-8;     // sup-norm of K - K_hat on the interior
    IntegratorConfig integrator;
    double sample_interval = 0.5;
    bool stop_on_convergence = true;
    bool barrier = true;         // hyperbolic only: abort if u exceeds the barrier
};

/// Scalar monitors after every accepted step (and at t = 0).
struct MonitorRecord {
    double t = 0.0;
    double m = 0.0, M = 0.0;            // min / max of K - K_hat over the interior
    double m_star = 0.0, M_star = 0.0;  // min(m, 0), max(M, 0)
    double energy = 0.0;                // sum of (K - K_hat)^2
    double max_rate = 0.0;              // max |du/dt|
    double step = 0.0;
    double k_min = 0.0, k_max = 0.0;    // raw curvature extrema
    double degree_margin = 0.0;         // min_v K_v - (2 pi - deg(v) pi)
    double min_increment = 0.0;         // min_v u_v(t) - u_v(t_prev)
    double max_u = 0.0;                 // max interior factor
    double barrier_margin = 0.0;        // min_v barrier_v - u_v (hyperbolic)
};

struct FlowSample {
    double t = 0.0;
    std::vector<double> u;  // truncation.vertices order
    std::vector<double> k;  // truncation.interior order (raw curvature)
};

enum class FlowStatus { converged, t_max_reached, step_failure, barrier_violation };

inline const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::converged: return "converged";
        case FlowStatus::t_max_reached: return "t_max_reached";
        case FlowStatus::step_failure: return "step_failure";
        case FlowStatus::barrier_violation: return "barrier_violation";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<VertexId> vertices;
    std::vector<VertexId> interior;
    std::vector<FlowSample> samples;
    std::vector<MonitorRecord> monitors;
    std::vector<double> barrier;  // per interior vertex, hyperbolic only
    FlowStatus status = FlowStatus::t_max_reached;
    double final_residual = 0.0;
    IntegrationStats stats;
    double wall_seconds = 0.0;
    std::string message;

    const FlowSample& final_sample() const { return samples.back(); }
};

// ---------------------------------------------------------------------------
// Hyperbolic barrier

namespace detail {

// Inner angle at vertex 0 when the two other factors sit at u_far (close to 0).
inline double worst_case_angle(double u_v, const Triple& phi, double u_far) {
    const Triple r{radius_from_factor(Geometry::hyperbolic, u_v), radius_from_factor(Geometry::hyperbolic, u_far),
                   radius_from_factor(Geometry::hyperbolic, u_far)};
    return triangle_angles(Geometry::hyperbolic, r, phi).angles[0];
}

} // namespace detail

/// Barrier per interior vertex: delta_bar_v = max(u_v(0), delta_v) / 2 where
/// u_v >= delta_v forces every incident angle at v below 2 pi / deg(v) no
/// matter how large the neighboring circles are.
inline std::vector<double> hyperbolic_barrier(const Truncation& tr, const PackingMetric& m) {
    if (m.geometry != Geometry::hyperbolic) throw InputError("barrier is defined for hyperbolic metrics only");
    const Triangulation& t = *tr.parent;
    constexpr double kFar = -1e-14, kLow = -50.0, kHigh = -1e-12;
    std::vector<double> out;
    out.reserve(tr.interior.size());
    for (VertexId v : tr.interior) {
        const double cap = kTwoPi / static_cast<double>(t.degree(v));
        double delta = kLow;
        for (std::uint32_t f : t.incident_faces(v)) {
            const Face& face = t.faces()[f];
            const int a = position_in_face(face, v);
            Triple phi;
            for (int s = 0; s < 3; ++s)
                phi[s] = m.phi[*t.edge_index(face[(a + s + 1) % 3], face[(a + s + 2) % 3])];
            // A circle too small to resolve against the far ones closes the angle to pi.
            auto excess = [&](double u) {
                try {
                    return detail::worst_case_angle(u, phi, kFar) - cap;
                } catch (const DegenerateTriangle&) {
                    return kPi - cap;
                }
            };
            double lo = kLow, hi = kHigh;
            if (excess(hi) >= 0.0)
                throw NumericalFailure("barrier bisection: angle at vertex " + std::to_string(v) + " in face " +
                                       std::to_string(f) + " stays above 2 pi / deg");
            if (excess(lo) < 0.0) continue;  // any factor above -50 already works for this face
            for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (excess(mid) >= 0.0 ? lo : hi) = mid;
            }
            delta = std::max(delta, hi);
        }
        out.push_back(0.5 * std::max(m.u[v], delta));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flow

namespace detail {

inline void validate_problem(const FlowProblem& p) {
    if (!p.truncation.parent) throw InputError("flow problem without a triangulation");
    validate_metric(*p.truncation.parent, p.metric0);
    if (!p.target.empty() && p.target.size() != p.truncation.interior.size())
        throw InputError("target curvature size does not match interior vertex count");
    for (double k : p.target)
        if (!(k < kTwoPi) || !std::isfinite(k)) throw InputError("target curvature must be finite and below 2 pi");
    if (!(p.tolerance > 0.0)) throw InputError("tolerance must be positive");
    if (!(p.t_max >= 0.0)) throw InputError("t_max must be non-negative");
    if (!(p.sample_interval > 0.0)) throw InputError("sample interval must be positive");
    if (p.truncation.interior.empty()) throw InputError("truncation has no interior vertex");
}

} // namespace detail

/// Evaluates -(K - K_hat) on the interior for interior factors `y`
/// (truncation.interior order); `work` is the full metric with boundary
/// values already in place.
inline void flow_rhs(const FlowProblem& p, PackingMetric& work, const State& y, State& dydt) {
    const Truncation& tr = p.truncation;
    for (std::size_t i = 0; i < y.size(); ++i) work.u[tr.interior[i]] = y[i];
    const std::vector<double> k = interior_curvatures(tr, work);
    dydt.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) dydt[i] = -(k[i] - (p.target.empty() ? 0.0 : p.target[i]));
}

/// rhs over the interior for the full metric `m` (parent vertex ids).
inline std::vector<double> rhs(const FlowProblem& p, const PackingMetric& m) {
    PackingMetric work = m;
    State y(p.truncation.interior.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = m.u[p.truncation.interior[i]];
    State dydt;
    flow_rhs(p, work, y, dydt);
    return dydt;
}

/// The initial metric with the sampled factors written back.
inline PackingMetric metric_at(const FlowProblem& p, const Trajectory& traj, const FlowSample& s) {
    PackingMetric m = p.metric0;
    for (std::size_t i = 0; i < traj.vertices.size(); ++i) m.u[traj.vertices[i]] = s.u[i];
    return m;
}

inline Trajectory solve_finite(const FlowProblem& p) {
    detail::validate_problem(p);
    const auto wall_start = std::chrono::steady_clock::now();
    const Truncation& tr = p.truncation;
    const Triangulation& t = *tr.parent;
    const bool hyperbolic = p.metric0.geometry == Geometry::hyperbolic;

    Trajectory traj;
    traj.vertices = tr.vertices;
    traj.interior = tr.interior;
    if (hyperbolic && p.barrier) traj.barrier = hyperbolic_barrier(tr, p.metric0);

    PackingMetric work = p.metric0;
    State y(tr.interior.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = p.metric0.u[tr.interior[i]];
    State y_prev = y;

    auto snapshot = [&](double time, const State& state, const State& dydt) {
        FlowSample s;
        s.t = time;
        for (std::size_t i = 0; i < state.size(); ++i) work.u[tr.interior[i]] = state[i];
        s.u.reserve(tr.vertices.size());
        for (VertexId v : tr.vertices) s.u.push_back(work.u[v]);
        s.k.resize(dydt.size());
        for (std::size_t i = 0; i < dydt.size(); ++i)
            s.k[i] = (p.target.empty() ? 0.0 : p.target[i]) - dydt[i];
        traj.samples.push_back(std::move(s));
    };

    auto record = [&](double time, const State& state, const State& dydt, double h) {
        MonitorRecord r;
        r.t = time;
        r.step = h;
        r.m = std::numeric_limits<double>::infinity();
        r.M = -r.m;
        r.k_min = r.m;
        r.k_max = -r.m;
        r.degree_margin = r.m;
        r.min_increment = r.m;
        r.max_u = -r.m;
        r.barrier_margin = r.m;
        for (std::size_t i = 0; i < dydt.size(); ++i) {
            const double diff = -dydt[i];
            const double k = (p.target.empty() ? 0.0 : p.target[i]) + diff;
            r.m = std::min(r.m, diff);
            r.M = std::max(r.M, diff);
            r.k_min = std::min(r.k_min, k);
            r.k_max = std::max(r.k_max, k);
            r.energy += diff * diff;
            r.max_rate = std::max(r.max_rate, std::abs(dydt[i]));
            r.degree_margin =
                std::min(r.degree_margin, k - (kTwoPi - kPi * static_cast<double>(t.degree(tr.interior[i]))));
            r.min_increment = std::min(r.min_increment, state[i] - y_prev[i]);
            r.max_u = std::max(r.max_u, state[i]);
            if (!traj.barrier.empty()) r.barrier_margin = std::min(r.barrier_margin, traj.barrier[i] - state[i]);
        }
        if (traj.barrier.empty()) r.barrier_margin = 0.0;
        r.m_star = std::min(r.m, 0.0);
        r.M_star = std::max(r.M, 0.0);
        traj.monitors.push_back(r);
        return r;
    };

    State dydt0;
    flow_rhs(p, work, y, dydt0);
    const MonitorRecord first = record(0.0, y, dydt0, 0.0);
    snapshot(0.0, y, dydt0);
    traj.final_residual = first.max_rate;
    if (!traj.barrier.empty() && first.barrier_margin < 0.0) {
        traj.status = FlowStatus::barrier_violation;
        traj.message = "initial data above the hyperbolic barrier";
        return traj;
    }
    if (p.stop_on_convergence && first.max_rate < p.tolerance) {
        traj.status = FlowStatus::converged;
        return traj;
    }

    const std::vector<double> stops = sample_times(p.t_max, p.sample_interval);
    std::size_t next_sample = 0;
    bool converged = false, barrier_hit = false;

    auto valid = [&](const State& state) {
        if (!hyperbolic) return true;
        for (double x : state)
            if (!(x < 0.0)) return false;
        return true;
    };
    auto field = [&](const State& state, State& out) { flow_rhs(p, work, state, out); };
    auto observer = [&](double time, const State& state, const State& dydt, double h) {
        const MonitorRecord r = record(time, state, dydt, h);
        y_prev = state;
        traj.final_residual = r.max_rate;
        while (next_sample < stops.size() && stops[next_sample] <= time) {
            if (stops[next_sample] == time) snapshot(time, state, dydt);
            ++next_sample;
        }
        if (!traj.barrier.empty() && r.barrier_margin < 0.0) {
            barrier_hit = true;
            if (traj.samples.back().t != time) snapshot(time, state, dydt);
            return false;
        }
        if (p.stop_on_convergence && r.max_rate < p.tolerance) {
            converged = true;
            if (traj.samples.back().t != time) snapshot(time, state, dydt);
            return false;
        }
        return true;
    };

    const IntegrationResult res = integrate(p.integrator, field, valid, observer, y, 0.0, p.t_max, stops);
    traj.stats = res.stats;
    if (barrier_hit) {
        traj.status = FlowStatus::barrier_violation;
        traj.message = "factor exceeded the hyperbolic barrier at t=" + std::to_string(res.t);
    } else if (converged) {
        traj.status = FlowStatus::converged;
    } else if (res.end == IntegrationEnd::step_underflow) {
        traj.status = FlowStatus::step_failure;
        traj.message = res.message;
    } else {
        traj.status = traj.final_residual < p.tolerance ? FlowStatus::converged : FlowStatus::t_max_reached;
    }
    traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return traj;
}

// ---------------------------------------------------------------------------
// Monitors

struct MaxPrincipleReport {
    bool asserted = false;            // only for K_hat == 0
    bool min_nondecreasing = true;
    bool max_nonincreasing = true;
    double worst_min_drop = 0.0;      // largest decrease of m*
    double worst_max_rise = 0.0;      // largest increase of M*
    double slack = 0.0;
    bool ok() const { return !asserted || (min_nondecreasing && max_nonincreasing); }
};

/// Monitor slack: ten times the integrator tolerance.
inline double monitor_slack(const IntegratorConfig& c) { return 10.0 * std::max(c.abs_tol, c.rel_tol); }

inline MaxPrincipleReport max_principle_monitor(const Trajectory& traj, bool zero_target, double slack) {
    MaxPrincipleReport rep;
    rep.asserted = zero_target;
    rep.slack = slack;
    for (std::size_t i = 1; i < traj.monitors.size(); ++i) {
        rep.worst_min_drop = std::max(rep.worst_min_drop, traj.monitors[i - 1].m_star - traj.monitors[i].m_star);
        rep.worst_max_rise = std::max(rep.worst_max_rise, traj.monitors[i].M_star - traj.monitors[i - 1].M_star);
    }
    rep.min_nondecreasing = rep.worst_min_drop <= slack;
    rep.max_nonincreasing = rep.worst_max_rise <= slack;
    return rep;
}

inline MaxPrincipleReport max_principle_monitor(const FlowProblem& p, const Trajectory& traj) {
    const bool zero = std::all_of(p.target.begin(), p.target.end(), [](double k) { return k == 0.0; });
    return max_principle_monitor(traj, zero, monitor_slack(p.integrator));
}

struct CurvatureBoundReport {
    bool degree_bound = true;      // 2 pi - deg pi <= K < 2 pi
    bool uniform_bound = true;     // |K| <= max(|min K(0)|, 2 pi)
    bool nonpositive = true;       // K <= 0 throughout (meaningful when K(0) <= 0)
    double worst_degree_margin = 0.0;
    double max_abs_curvature = 0.0;
    double uniform_limit = 0.0;
    double slack = 0.0;
    bool ok() const { return degree_bound && uniform_bound; }
};

inline CurvatureBoundReport curvature_bound_monitor(const Trajectory& traj, double slack) {
    CurvatureBoundReport rep;
    rep.slack = slack;
    if (traj.monitors.empty()) return rep;
    rep.uniform_limit = std::max(std::abs(traj.monitors.front().k_min), kTwoPi);
    rep.worst_degree_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : traj.monitors) {
        rep.worst_degree_margin = std::min(rep.worst_degree_margin, r.degree_margin);
        if (r.degree_margin < -slack || !(r.k_max < kTwoPi)) rep.degree_bound = false;
        const double a = std::max(std::abs(r.k_min), std::abs(r.k_max));
        rep.max_abs_curvature = std::max(rep.max_abs_curvature, a);
        if (a > rep.uniform_limit + slack) rep.uniform_bound = false;
        if (r.k_max > slack) rep.nonpositive = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exhaustion

struct ExhaustionReport {
    std::vector<int> radii;
    int inner_radius = 0;
    std::vector<VertexId> inner_vertices;
    std::vector<Trajectory> trajectories;
    std::vector<double> discrepancies;  // consecutive radii
    std::vector<std::string> failures;  // per radius, empty when fine
};

/// Sup over B_k(root) and sample times of |u^[i] - u^[i+1]|, both
/// trajectories sampled on the same grid.
inline double trajectory_discrepancy(const Trajectory& a, const Trajectory& b, const std::vector<VertexId>& vertices) {
    const std::size_t n = std::min(a.samples.size(), b.samples.size());
    auto index_of = [](const Trajectory& tr, VertexId v) {
        auto it = std::lower_bound(tr.vertices.begin(), tr.vertices.end(), v);
        if (it == tr.vertices.end() || *it != v) throw InputError("vertex missing from trajectory");
        return static_cast<std::size_t>(it - tr.vertices.begin());
    };
    double sup = 0.0;
    for (VertexId v : vertices) {
        const std::size_t ia = index_of(a, v), ib = index_of(b, v);
        for (std::size_t s = 0; s < n; ++s) {
            if (std::abs(a.samples[s].t - b.samples[s].t) > 1e-12 * std::max(1.0, a.samples[s].t))
                throw InputError("trajectories sampled on different grids");
            sup = std::max(sup, std::abs(a.samples[s].u[ia] - b.samples[s].u[ib]));
        }
    }
    return sup;
}

/// Runs the finite flow on truncations of increasing radius with shared
/// initial data (`metric0` indexed by parent ids) and a constant target.
inline ExhaustionReport solve_exhaustion(std::shared_ptr<const Triangulation> t, const PackingMetric& metric0,
                                         double target, const std::vector<int>& radii, int inner_radius,
                                         const FlowProblem& settings) {
    if (radii.empty()) throw InputError("exhaustion needs at least one radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1]) throw InputError("exhaustion radii must be strictly increasing");
    if (inner_radius < 0 || inner_radius >= radii.front()) throw InputError("inner radius must be below every radius");
    ExhaustionReport rep;
    rep.radii = radii;
    rep.inner_radius = inner_radius;
    rep.inner_vertices = ball(*t, t->root(), inner_radius);
    rep.trajectories.resize(radii.size());
    rep.failures.resize(radii.size());
    std::vector<std::exception_ptr> errors(radii.size());
    parallel_for(
        radii.size(),
        [&](std::size_t i) {
            try {
                FlowProblem p = settings;
                p.truncation = truncate(t, radii[i]);
                p.metric0 = metric0;
                p.target.assign(p.truncation.interior.size(), target);
                p.stop_on_convergence = false;
                rep.trajectories[i] = solve_finite(p);
                if (rep.trajectories[i].status == FlowStatus::step_failure ||
                    rep.trajectories[i].status == FlowStatus::barrier_violation)
                    rep.failures[i] = "radius " + std::to_string(radii[i]) + ": " + rep.trajectories[i].message;
            } catch (const std::exception& e) {
                rep.failures[i] = "radius " + std::to_string(radii[i]) + ": " + e.what();
            }
        },
        1);
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        if (!rep.failures[i].empty() || !rep.failures[i + 1].empty()) {
            rep.discrepancies.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        rep.discrepancies.push_back(
            trajectory_discrepancy(rep.trajectories[i], rep.trajectories[i + 1], rep.inner_vertices));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness diagnostics

struct WeightEntry {
    VertexId i = 0, j = 0;
    double omega = 0.0;
};

struct UniquenessWeights {
    std::vector<WeightEntry> omega;  // every ordered pair (i interior, j ~ i)
    std::vector<double> h;           // per interior vertex
    std::vector<double> row_sums;    // sum_j omega_ij per interior vertex
    bool omega_positive = true;
    bool h_nonnegative = true;
};

/// omega_ij = -int_0^1 dK_i/du_j(s u + (1 - s) u_hat) ds and
/// h_i = int_0^1 B_i(s u + (1 - s) u_hat) ds, by N-node Gauss-Legendre.
template <int N = 16>
UniquenessWeights uniqueness_weights(const Truncation& tr, const PackingMetric& u, const PackingMetric& u_hat) {
    if (u.geometry != u_hat.geometry || u.u.size() != u_hat.u.size())
        throw InputError("uniqueness weights need metrics of the same geometry and size");
    using Quad = boost::math::quadrature::gauss<double, N>;
    const auto& abscissa = Quad::abscissa();
    const auto& weights = Quad::weights();
    // Nodes on [0, 1]: s = (1 + x) / 2, weight w / 2, x = +-abscissa.
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
        nodes.emplace_back(0.5 * (1 + abscissa[k]), 0.5 * weights[k]);
        if (abscissa[k] != 0.0) nodes.emplace_back(0.5 * (1 - abscissa[k]), 0.5 * weights[k]);
    }
    UniquenessWeights out;
    std::map<std::pair<VertexId, VertexId>, double> omega;
    std::vector<double> h(tr.interior.size(), 0.0);
    PackingMetric mid = u;
    for (const auto& [s, w] : nodes) {
        for (VertexId v : tr.vertices) mid.u[v] = s * u.u[v] + (1 - s) * u_hat.u[v];
        for (std::size_t idx = 0; idx < tr.interior.size(); ++idx) {
            const VertexId i = tr.interior[idx];
            const CurvatureRow row = curvature_jacobian_row(tr, mid, i);
            for (const auto& [j, value] : row.entries)
                if (j != i) omega[{i, j}] -= w * value;
            h[idx] += w * row.defect;
        }
    }
    out.h = std::move(h);
    out.row_sums.assign(tr.interior.size(), 0.0);
    for (const auto& [key, value] : omega) {
        out.omega.push_back({key.first, key.second, value});
        if (!(value > 0.0)) out.omega_positive = false;
        const auto it = std::lower_bound(tr.interior.begin(), tr.interior.end(), key.first);
        out.row_sums[it - tr.interior.begin()] += value;
    }
    // Euclidean defects vanish identically; allow rounding relative to the row.
    for (std::size_t i = 0; i < out.h.size(); ++i)
        if (out.h[i] < -1e-12 * std::max(1.0, out.row_sums[i])) out.h_nonnegative = false;
    return out;
}

struct UniquenessReport {
    double step = 0.0;
    double rk4_vs_rk45 = 0.0;       // RK4(h) vs RK45
    double rk4_half_vs_rk45 = 0.0;  // RK4(h/2) vs RK45
    double rk4_vs_rk4_half = 0.0;
    double refinement_ratio = 0.0;  // rk4_vs_rk45 / rk4_half_vs_rk45
    std::vector<Trajectory> runs;   // RK45, RK4(h), RK4(h/2)
};

inline double full_discrepancy(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size()) throw InputError("trajectories have different sample counts");
    double sup = 0.0;
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
        if (std::abs(a.samples[s].t - b.samples[s].t) > 1e-12 * std::max(1.0, a.samples[s].t))
            throw InputError("trajectories sampled on different grids");
        for (std::size_t i = 0; i < a.samples[s].u.size(); ++i)
            sup = std::max(sup, std::abs(a.samples[s].u[i] - b.samples[s].u[i]));
    }
    return sup;
}

/// Integrates `p` with RK45 (the problem's tolerances) and with RK4 at steps
/// h and h/2 over [0, t_max] and reports sup-norm discrepancies over all
/// vertices and sample times.
inline UniquenessReport uniqueness_harness(FlowProblem p, double rk4_step) {
    if (!(rk4_step > 0.0)) throw InputError("RK4 step must be positive");
    p.stop_on_convergence = false;
    UniquenessReport rep;
    rep.step = rk4_step;
    FlowProblem a = p;
    a.integrator.kind = Stepper::rk45;
    FlowProblem b = p;
    b.integrator.kind = Stepper::rk4;
    b.integrator.fixed_step = rk4_step;
    FlowProblem c = b;
    c.integrator.fixed_step = rk4_step / 2;
    rep.runs.resize(3);
    const FlowProblem* problems[3] = {&a, &b, &c};
    parallel_for(3, [&](std::size_t i) { rep.runs[i] = solve_finite(*problems[i]); }, 1);
    for (const auto& run : rep.runs)
        if (run.status == FlowStatus::step_failure || run.status == FlowStatus::barrier_violation)
            throw NumericalFailure("uniqueness harness: " + run.message);
    rep.rk4_vs_rk45 = full_discrepancy(rep.runs[1], rep.runs[0]);
    rep.rk4_half_vs_rk45 = full_discrepancy(rep.runs[2], rep.runs[0]);
    rep.rk4_vs_rk4_half = full_discrepancy(rep.runs[1], rep.runs[2]);
    rep.refinement_ratio = rep.rk4_half_vs_rk45 > 0.0 ? rep.rk4_vs_rk45 / rep.rk4_half_vs_rk45
                                                      : std::numeric_limits<double>::infinity();
    return rep;
}

} // namespace crflab
