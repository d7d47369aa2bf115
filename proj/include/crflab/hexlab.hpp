#pragma once

// Analysis toolkit on the hexagonal lattice v_{m,n} = m + n e^{2 pi i / 3}:
// the six difference operators, the constant-weight Laplacian, the face
// nonlinearity G / F, the semilinear form of the Euclidean flow, energies,
// and decay runs on a finite ball.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "crflab/common.hpp"
#include "crflab/fixtures.hpp"
#include "crflab/ode.hpp"
#include "crflab/parallel.hpp"
#include "crflab/triangulation.hpp"

namespace crflab::hex {

/// Lattice steps of D_1 .. D_6, in counterclockwise order so that
/// consecutive directions span a face.
inline constexpr std::array<std::array<int, 2>, 6> kDirections{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}}};

/// Edge weight of the regular packing, cot(pi/3).
inline const double kOmega0 = std::sqrt(3.0) / 3.0;

using Stencil6 = std::array<double, 6>;
using Hessian6 = std::array<std::array<double, 6>, 6>;

enum class BoundaryRule { zero_dirichlet, frozen_ring };

inline const char* to_string(BoundaryRule b) {
    return b == BoundaryRule::zero_dirichlet ? "zero-dirichlet" : "frozen-ring";
}

inline BoundaryRule boundary_rule_from_string(const std::string& s) {
    if (s == "zero-dirichlet" || s == "dirichlet" || s == "zero") return BoundaryRule::zero_dirichlet;
    if (s == "frozen-ring" || s == "frozen") return BoundaryRule::frozen_ring;
    throw InputError("unknown boundary rule '" + s + "'");
}

/// Real values on the ball B_N = {d(v, root) <= N}. Points are stored in the
/// vertex-id order of build_hexagonal(N); reads outside the ball return 0.
class HexField {
public:
    explicit HexField(int radius, BoundaryRule rule = BoundaryRule::zero_dirichlet)
        : radius_(radius), rule_(rule) {
        if (radius < 1) throw InputError("hexagonal field radius must be >= 1");
        points_ = hexagonal_lattice_points(radius);
        const int side = 2 * radius + 1;
        index_.assign(static_cast<std::size_t>(side) * side, -1);
        for (std::size_t k = 0; k < points_.size(); ++k) index_[slot(points_[k][0], points_[k][1])] = static_cast<int>(k);
        values_.assign(points_.size(), 0.0);
    }

    int radius() const { return radius_; }
    BoundaryRule rule() const { return rule_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<std::array<int, 2>>& points() const { return points_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool contains(int m, int n) const { return hex_distance(m, n) <= radius_; }

    /// Index of (m, n) in points(), or -1 outside the ball.
    int index(int m, int n) const { return contains(m, n) ? index_[slot(m, n)] : -1; }

    double operator()(int m, int n) const {
        const int k = index(m, n);
        return k < 0 ? 0.0 : values_[static_cast<std::size_t>(k)];
    }
    double& at(int m, int n) {
        const int k = index(m, n);
        if (k < 0) throw InputError("lattice point outside the field's ball");
        return values_[static_cast<std::size_t>(k)];
    }

    /// Whether evolution updates the value at point k.
    bool evolving(std::size_t k) const {
        return rule_ == BoundaryRule::zero_dirichlet || hex_distance(points_[k][0], points_[k][1]) < radius_;
    }

private:
    std::size_t slot(int m, int n) const {
        const int side = 2 * radius_ + 1;
        return static_cast<std::size_t>(m + radius_) * side + static_cast<std::size_t>(n + radius_);
    }

    int radius_;
    BoundaryRule rule_;
    std::vector<std::array<int, 2>> points_;
    std::vector<int> index_;
    std::vector<double> values_;
};

/// D_i u(m, n) for i in 1..6.
inline double difference(const HexField& u, int m, int n, int i) {
    if (i < 1 || i > 6) throw InputError("difference direction must be in 1..6");
    const auto& d = kDirections[static_cast<std::size_t>(i - 1)];
    return u(m + d[0], n + d[1]) - u(m, n);
}

inline Stencil6 gradient(const HexField& u, int m, int n) {
    Stencil6 z;
    const double c = u(m, n);
    for (std::size_t i = 0; i < 6; ++i) z[i] = u(m + kDirections[i][0], n + kDirections[i][1]) - c;
    return z;
}

/// Entries D_i D_j u(m, n), symmetric by construction.
inline Hessian6 hessian(const HexField& u, int m, int n) {
    Hessian6 h;
    const double c = u(m, n);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) {
            const auto& a = kDirections[i];
            const auto& b = kDirections[j];
            const double v = (u(m + a[0] + b[0], n + a[1] + b[1]) + c) - (u(m + a[0], n + a[1]) + u(m + b[0], n + b[1]));
            h[i][j] = h[j][i] = v;
        }
    return h;
}

inline double laplacian(const HexField& u, int m, int n) {
    const Stencil6 z = gradient(u, m, n);
    double s = 0.0;
    for (double x : z) s += x;
    return kOmega0 * s;
}

namespace detail {
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// 1 - s(x) s(y) as a sum of positive terms, symmetric in (x, y) bit for bit.
inline double complement(double sx, double sy, double cx, double cy) { return cx * cy + (cx * sy + sx * cy); }

inline void check_finite(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw InputError("hexagonal angle needs finite arguments");
}
} // namespace detail

/// Angle at the unit circle of a face whose other two circles have radii
/// e^x and e^y (all tangent). Evaluated as 2 atan2(sqrt p, sqrt(1 - p)) with
/// p = s(x) s(y), s the logistic function, which equals
/// arccos((1+e^x)^2 + (1+e^y)^2 - (e^x+e^y)^2) / (2(1+e^x)(1+e^y)) and is
/// defined for every real x, y.
inline double G(double x, double y) {
    detail::check_finite(x, y);
    const double sx = detail::logistic(x), sy = detail::logistic(y);
    const double p = sx * sy;
    const double q = detail::complement(sx, sy, detail::logistic(-x), detail::logistic(-y));
    return 2.0 * std::atan2(std::sqrt(p), std::sqrt(q));
}

inline double G_x(double x, double y) {
    detail::check_finite(x, y);
    const double sx = detail::logistic(x), sy = detail::logistic(y);
    const double cx = detail::logistic(-x);
    const double q = detail::complement(sx, sy, cx, detail::logistic(-y));
    return cx * std::sqrt(sx * sy / q);
}

inline double G_y(double x, double y) { return G_x(y, x); }

/// G_x(0, 0) = sqrt(3) / 6.
inline const double kGx0 = std::sqrt(3.0) / 6.0;

/// G(0, 0) as evaluated above, pi / 3 up to rounding. Subtracting it rather
/// than the rounded pi / 3 makes F(0) exactly 0.
inline const double kG00 = G(0.0, 0.0);

inline double Ftilde(double x, double y) { return G(x, y) - kG00 - kGx0 * x - kGx0 * y; }

/// Face sum F(z) = sum_k Ftilde(z_k, z_{k+1}), indices cyclic.
inline double F(const Stencil6& z) {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += Ftilde(z[k], z[(k + 1) % 6]);
    return s;
}

/// Laplacian plus nonlinearity; equals minus the Euclidean curvature of the
/// packing with radii e^u and tangent circles.
inline double semilinear_rhs(const HexField& u, int m, int n) {
    const Stencil6 z = gradient(u, m, n);
    double s = 0.0;
    for (double x : z) s += x;
    return kOmega0 * s + F(z);
}

// Edge enumeration: each lattice edge is visited once from its endpoint p
// along directions D_1, D_2, D_3. Edges are kept when at least one endpoint
// is in the ball (zero-Dirichlet) or both are (frozen ring).
template <class Fn>
void for_each_edge(const HexField& u, Fn&& fn) {
    const bool crossing = u.rule() == BoundaryRule::zero_dirichlet;
    const int r = u.radius() + (crossing ? 1 : 0);
    for (int m = -r; m <= r; ++m)
        for (int n = -r; n <= r; ++n) {
            const bool in_p = u.contains(m, n);
            if (!in_p && !crossing) continue;
            for (std::size_t i = 0; i < 3; ++i) {
                const int m2 = m + kDirections[i][0], n2 = n + kDirections[i][1];
                const bool in_q = u.contains(m2, n2);
                if (crossing ? (in_p || in_q) : (in_p && in_q)) fn(m, n, m2, n2);
            }
        }
}

/// sum over edges of (f_i - f_j)(g_i - g_j), using f's boundary rule.
inline double energy_form(const HexField& f, const HexField& g) {
    double s = 0.0;
    for_each_edge(f, [&](int m, int n, int m2, int n2) { s += (f(m, n) - f(m2, n2)) * (g(m, n) - g(m2, n2)); });
    return s;
}

/// E(u) = sum over edges of |u_i - u_j|^2.
inline double energy(const HexField& u) { return energy_form(u, u); }

/// Number of edges counted by energy().
inline std::size_t energy_edge_count(const HexField& u) {
    std::size_t c = 0;
    for_each_edge(u, [&](int, int, int, int) { ++c; });
    return c;
}

struct DirichletNorms {
    double du_l2 = 0.0;   // (1/2 sum_v sum_i |D_i u|^2)^(1/2)
    double du_l4 = 0.0;   // (1/2 sum_v sum_i |D_i u|^4)^(1/4)
    double d2u_l2 = 0.0;  // (sum_v sum_{i,j} |D_i D_j u|^2)^(1/2)
};

/// sum_v sum_{i,j} |D_i D_j u(v)|^2 over the lattice, u vanishing outside
/// the ball.
inline double hessian_norm_squared(const HexField& u) {
    double h2 = 0.0;
    const int r2 = u.radius() + 2;
    for (int m = -r2; m <= r2; ++m)
        for (int n = -r2; n <= r2; ++n) {
            if (hex_distance(m, n) > r2) continue;
            for (const auto& row : hessian(u, m, n))
                for (double x : row) h2 += x * x;
        }
    return h2;
}

/// Norms over the whole lattice, taking the field to vanish outside the ball.
inline DirichletNorms dirichlet_norms(const HexField& u) {
    double s2 = 0.0, s4 = 0.0;
    const int r1 = u.radius() + 1;
    for (int m = -r1; m <= r1; ++m)
        for (int n = -r1; n <= r1; ++n) {
            if (hex_distance(m, n) > r1) continue;
            for (double z : gradient(u, m, n)) {
                const double z2 = z * z;
                s2 += z2;
                s4 += z2 * z2;
            }
        }
    return {std::sqrt(0.5 * s2), std::pow(0.5 * s4, 0.25), std::sqrt(hessian_norm_squared(u))};
}

inline double inner(const HexField& f, const HexField& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f.values()[k] * g.values()[k];
    return s;
}

inline double l2_norm(const HexField& u) { return std::sqrt(inner(u, u)); }

inline double linf_norm(const HexField& u) {
    double s = 0.0;
    for (double x : u.values()) s = std::max(s, std::abs(x));
    return s;
}

/// Values listed row-major over (m, n) within the ball.
inline std::vector<double> row_major_values(const HexField& u) {
    std::vector<double> out;
    out.reserve(u.size());
    const int r = u.radius();
    for (int m = -r; m <= r; ++m)
        for (int n = -r; n <= r; ++n)
            if (u.contains(m, n)) out.push_back(u(m, n));
    return out;
}

/// Seeded uniform field on the evolving points, scaled to the given l2 norm.
inline HexField random_field(int radius, double l2, std::uint64_t seed,
                             BoundaryRule rule = BoundaryRule::zero_dirichlet) {
    HexField u(radius, rule);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.evolving(k)) u.values()[k] = dist(rng);
    const double norm = l2_norm(u);
    if (norm > 0.0)
        for (double& x : u.values()) x *= l2 / norm;
    return u;
}

/// Radius of the stencil ball on which |F(z)| <= C_1 |z|^2 is certified.
inline double epsilon1() { return fixtures::kFieldRadius; }

/// Certified quadratic constant C_1 for |z| <= epsilon1().
inline double quadratic_bound() { return fixtures::kQuadraticBound; }

/// l2 radius below which d/dt ||u||^2 + omega_0 E(u) <= 0. With
/// ||u||_inf <= ||u||_2: every |Du(v)| <= 2 sqrt(6) ||u||_2 stays within
/// epsilon1, and |2 (u, F(Du))| <= 4 C_1 ||u||_2 E(u) <= omega_0 E(u).
inline double epsilon2() {
    return std::min(kOmega0 / (4.0 * quadratic_bound()), epsilon1() / (2.0 * std::sqrt(6.0)));
}

struct EvolveConfig {
    double t_max = 200.0;
    double sample_interval = 2.0;
    std::vector<double> snapshot_times;
    IntegratorConfig integrator{Stepper::rk45, 1e-12, 1e-10, 1.0, 1e-3, 0.1, 1e-12};
};

struct EvolveSample {
    double t = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double energy = 0.0;
    double ddt_l2sq = 0.0;        // 2 (u, u_t)
    double decay_residual = 0.0;  // ddt_l2sq + omega_0 E(u)
    double ddt_energy = 0.0;      // 2 sum_edges (u_i - u_j)(u_t,i - u_t,j)
    double d2u_l2 = 0.0;
};

struct EvolveSnapshot {
    double t = 0.0;
    HexField field;
};

enum class EvolveStatus { completed, domain_violation, step_failure };

inline const char* to_string(EvolveStatus s) {
    switch (s) {
    case EvolveStatus::completed: return "completed";
    case EvolveStatus::domain_violation: return "domain_violation";
    case EvolveStatus::step_failure: return "step_failure";
    }
    return "?";
}

struct EvolveResult {
    EvolveStatus status = EvolveStatus::completed;
    std::vector<EvolveSample> samples;
    std::vector<EvolveSnapshot> snapshots;
    HexField final_field{1};
    IntegrationStats stats;
    double wall_seconds = 0.0;
    std::string message;
};

/// Precomputed stencils for repeated right-hand-side evaluation.
class SemilinearOperator {
public:
    explicit SemilinearOperator(const HexField& shape) : shape_(shape) {
        const std::size_t n = shape.size();
        const std::size_t zero_slot = n;
        for (std::size_t k = 0; k < n; ++k)
            if (shape.evolving(k)) moving_.push_back(k);
        neighbors_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& p = shape.points()[k];
            for (std::size_t i = 0; i < 6; ++i) {
                const int j = shape.index(p[0] + kDirections[i][0], p[1] + kDirections[i][1]);
                neighbors_[k][i] = j < 0 ? zero_slot : static_cast<std::size_t>(j);
            }
        }
    }

    /// Indices (into the field's points) updated by evolution.
    const std::vector<std::size_t>& moving() const { return moving_; }

    /// values has size() + 1 entries, the last one 0. Writes the right-hand
    /// side at every moving point into out (moving() order).
    void apply(const std::vector<double>& values, std::vector<double>& out) const {
        out.resize(moving_.size());
        parallel_for(moving_.size(), [&](std::size_t a) {
            const std::size_t k = moving_[a];
            const double c = values[k];
            Stencil6 z;
            double s = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                z[i] = values[neighbors_[k][i]] - c;
                s += z[i];
            }
            if (!std::isfinite(c) || !std::isfinite(s)) {
                const auto& p = shape_.points()[k];
                throw InputError("non-finite stencil at v(" + std::to_string(p[0]) + "," + std::to_string(p[1]) + ")");
            }
            out[a] = kOmega0 * s + F(z);
        });
    }

private:
    const HexField& shape_;
    std::vector<std::size_t> moving_;
    std::vector<std::array<std::size_t, 6>> neighbors_;
};

/// Integrates u_t = Delta u + F(Du) under the field's boundary rule and
/// samples norms, energy and the l2 decay residual.
inline EvolveResult evolve(const HexField& u0, const EvolveConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    if (!(cfg.t_max > 0.0) || !(cfg.sample_interval > 0.0)) throw InputError("t_max and sample_interval must be positive");
    for (double x : u0.values())
        if (!std::isfinite(x)) throw InputError("initial field has non-finite values");

    EvolveResult res;
    res.final_field = u0;
    HexField& u = res.final_field;
    const SemilinearOperator op(u0);
    const auto& moving = op.moving();
    std::vector<double> full(u0.values());
    full.push_back(0.0);
    HexField rate(u0.radius(), u0.rule());

    auto load = [&](const State& y) {
        for (std::size_t a = 0; a < moving.size(); ++a) full[moving[a]] = y[a];
    };
    auto refresh = [&](const State& y) {
        load(y);
        std::copy(full.begin(), full.end() - 1, u.values().begin());
    };
    auto sample = [&](double t, const State& y, const State& dydt) {
        refresh(y);
        std::fill(rate.values().begin(), rate.values().end(), 0.0);
        double dot = 0.0;
        for (std::size_t a = 0; a < moving.size(); ++a) {
            rate.values()[moving[a]] = dydt[a];
            dot += y[a] * dydt[a];
        }
        EvolveSample s;
        s.t = t;
        s.l2 = l2_norm(u);
        s.linf = linf_norm(u);
        s.energy = energy(u);
        s.ddt_l2sq = 2.0 * dot;
        s.decay_residual = s.ddt_l2sq + kOmega0 * s.energy;
        s.ddt_energy = 2.0 * energy_form(u, rate);
        s.d2u_l2 = std::sqrt(hessian_norm_squared(u));
        res.samples.push_back(s);
    };

    State y(moving.size());
    for (std::size_t a = 0; a < moving.size(); ++a) y[a] = u0.values()[moving[a]];
    auto rhs = [&](const State& state, State& out) {
        load(state);
        op.apply(full, out);
    };
    auto valid = [](const State& state) {
        for (double x : state)
            if (!std::isfinite(x)) return false;
        return true;
    };

    std::vector<double> stops = sample_times(cfg.t_max, cfg.sample_interval);
    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    for (double t : snaps) {
        if (!(t >= 0.0) || t > cfg.t_max) throw InputError("snapshot time outside [0, t_max]");
        if (t > 0.0) stops.push_back(t);
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    State d0;
    try {
        rhs(y, d0);
    } catch (const InputError& e) {
        res.status = EvolveStatus::domain_violation;
        res.message = e.what();
        return res;
    }
    sample(0.0, y, d0);
    std::size_t next_snap = 0;
    auto take_snapshots = [&](double t) {
        while (next_snap < snaps.size() && snaps[next_snap] <= t * (1 + 1e-12)) {
            res.snapshots.push_back({snaps[next_snap], u});
            ++next_snap;
        }
    };
    take_snapshots(0.0);

    const auto sample_stops = sample_times(cfg.t_max, cfg.sample_interval);
    std::size_t next_sample = 0;
    auto observer = [&](double t, const State& state, const State& dydt, double) {
        bool at_sample = false;
        while (next_sample < sample_stops.size() && sample_stops[next_sample] <= t) {
            at_sample = true;
            ++next_sample;
        }
        const bool at_snap = next_snap < snaps.size() && snaps[next_snap] <= t * (1 + 1e-12);
        if (at_sample) sample(t, state, dydt);
        if (at_snap) {
            if (!at_sample) refresh(state);
            take_snapshots(t);
        }
        return true;
    };

    const IntegrationResult ir = integrate(cfg.integrator, rhs, valid, observer, y, 0.0, cfg.t_max, stops);
    res.stats = ir.stats;
    refresh(y);
    if (ir.end == IntegrationEnd::step_underflow) {
        res.status = EvolveStatus::step_failure;
        res.message = ir.message;
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return res;
}

/// CSV of (t, l2, linf, energy, decay_residual), 17 significant digits.
inline void write_csv(const EvolveResult& r, std::ostream& out) {
    const auto old = out.precision(17);
    out << "t,l2,linf,energy,decay_residual\n";
    for (const auto& s : r.samples)
        out << s.t << ',' << s.l2 << ',' << s.linf << ',' << s.energy << ',' << s.decay_residual << '\n';
    out.precision(old);
}

} // namespace crflab::hex
