#pragma once

// Vertex extremal length between two vertex sets of a finite graph:
// VEL(A, B) = 1 / min { ||m||^2 : sum_{i>=1} m(v_i) >= 1 on every path
// v_0 .. v_k with v_0 in A, v_k in B }. Solved by cutting planes over the
// path constraints with a Dijkstra separation oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "crflab/common.hpp"
#include "crflab/parallel.hpp"
#include "crflab/triangulation.hpp"

namespace crflab::vel {

/// Undirected simple graph as adjacency lists.
struct Graph {
    std::vector<std::vector<VertexId>> adjacency;

    std::size_t size() const { return adjacency.size(); }

    void add_edge(VertexId a, VertexId b) {
        if (a == b || a >= size() || b >= size()) throw InputError("bad graph edge");
        if (std::find(adjacency[a].begin(), adjacency[a].end(), b) != adjacency[a].end()) return;
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    }
};

inline Graph make_graph(std::size_t n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
    Graph g;
    g.adjacency.resize(n);
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    return g;
}

/// 1-skeleton of the triangulation restricted to B_radius(root); ids are kept.
/// Vertices outside the ball are isolated.
inline Graph skeleton(const Triangulation& t, int radius) {
    Graph g;
    g.adjacency.resize(t.vertex_count());
    for (const Edge& e : t.edges())
        if (t.depth(e.first) <= radius && t.depth(e.second) <= radius) g.add_edge(e.first, e.second);
    return g;
}

inline bool connected(const Graph& g) {
    if (g.size() == 0) return true;
    std::vector<char> seen(g.size(), 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (VertexId w : g.adjacency[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == g.size();
}

struct VelConfig {
    double tol = 1e-9;                  // separation: stop when every path weighs >= 1 - tol
    std::size_t max_iterations = 1000;  // cutting-plane rounds
    std::size_t paths_per_round = 64;   // most violated paths added per round
};

struct VelEstimate {
    std::vector<double> m;
    double norm_sq = 0.0;
    double vel = 0.0;
    std::vector<std::vector<VertexId>> certificate_paths;
    std::size_t iterations = 0;
    std::size_t constraints = 0;
    double gap = 0.0;  // max(0, 1 - min path weight)
    bool converged = false;
};

/// Weight of a path: sum of m over its non-initial vertices.
inline double path_weight(const std::vector<double>& m, const std::vector<VertexId>& path) {
    double s = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) s += m[path[i]];
    return s;
}

namespace detail {

struct ShortestPaths {
    std::vector<double> dist;
    std::vector<std::int64_t> parent;
};

// Dijkstra on the node-split graph: entering v costs m(v); sources in A
// start at 0.
inline ShortestPaths separate(const Graph& g, const std::vector<double>& m, const std::vector<VertexId>& sources) {
    const std::size_t n = g.size();
    ShortestPaths sp{std::vector<double>(n, std::numeric_limits<double>::infinity()), std::vector<std::int64_t>(n, -1)};
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (VertexId a : sources) {
        sp.dist[a] = 0.0;
        heap.push({0.0, a});
    }
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > sp.dist[v]) continue;
        for (VertexId w : g.adjacency[v]) {
            const double nd = d + m[w];
            if (nd < sp.dist[w]) {
                sp.dist[w] = nd;
                sp.parent[w] = v;
                heap.push({nd, w});
            }
        }
    }
    return sp;
}

inline std::vector<VertexId> trace(const ShortestPaths& sp, VertexId b) {
    std::vector<VertexId> path;
    for (std::int64_t v = b; v >= 0; v = sp.parent[static_cast<std::size_t>(v)]) path.push_back(static_cast<VertexId>(v));
    std::reverse(path.begin(), path.end());
    return path;
}

// Minimum of ||m||^2 subject to a_P . m >= 1 over the stored paths, where a_P
// is the indicator of P's non-initial vertices. Goldfarb-Idnani dual
// active-set method for the identity Hessian: starting from m = 0, the most
// violated constraint enters, constraints whose multipliers would turn
// negative leave, and the dual objective never decreases. Stored constraints
// persist between solves, so new cutting planes warm-start from the previous
// optimum. Coordinates are created for vertices as paths first touch them.
class PathQp {
public:
    explicit PathQp(std::size_t vertices) : coord_(vertices, -1) {}

    bool add(std::vector<VertexId> path) {
        std::vector<VertexId> key(path.begin() + 1, path.end());
        std::sort(key.begin(), key.end());
        if (!keys_.insert(key).second) return false;
        std::vector<int> row;
        for (VertexId v : key) row.push_back(coordinate(v));
        rows_.push_back(std::move(row));
        paths_.push_back(std::move(path));
        return true;
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::vector<VertexId>>& paths() const { return paths_; }

    /// Multiplier of stored constraint p (0 when inactive).
    double multiplier(std::size_t p) const {
        for (std::size_t a = 0; a < active_.size(); ++a)
            if (active_[a] == p) return u_[a];
        return 0.0;
    }

    /// The current optimum as a vertex-indexed weight.
    std::vector<double> weights() const {
        std::vector<double> m(coord_.size(), 0.0);
        for (std::size_t v = 0; v < coord_.size(); ++v)
            if (coord_[v] >= 0) m[v] = std::max(0.0, x_[coord_[v]]);
        return m;
    }

    double row_dot(std::size_t p) const {
        double s = 0.0;
        for (int c : rows_[p]) s += x_[c];
        return s;
    }

    /// Solves to feasibility tolerance `tol` on every stored constraint.
    void solve(double tol) {
        for (;;) {
            std::size_t p = rows_.size();
            double worst = -tol;
            std::vector<char> is_active(rows_.size(), 0);
            for (std::size_t a : active_) is_active[a] = 1;
            for (std::size_t k = 0; k < rows_.size(); ++k) {
                if (is_active[k]) continue;
                const double slack = row_dot(k) - 1.0;
                if (slack < worst) worst = slack, p = k;
            }
            if (p == rows_.size()) return;
            enter(p);
        }
    }

private:
    int coordinate(VertexId v) {
        if (coord_[v] >= 0) return coord_[v];
        const Eigen::Index n = n_;
        if (n == j_.rows()) {
            // Grow capacity geometrically; new rows and columns start at zero.
            const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * n);
            Eigen::MatrixXd j = Eigen::MatrixXd::Zero(cap, cap), r = Eigen::MatrixXd::Zero(cap, cap);
            j.topLeftCorner(n, n) = j_.topLeftCorner(n, n);
            r.topLeftCorner(n, n) = r_.topLeftCorner(n, n);
            j_.swap(j);
            r_.swap(r);
            x_.conservativeResize(cap);
        }
        // The new coordinate extends J by an identity block.
        j_(n, n) = 1.0;
        x_[n] = 0.0;
        coord_[v] = static_cast<int>(n);
        ++n_;
        return static_cast<int>(n);
    }

    // Rotation zeroing b against a; applied to columns (i, k) of J.
    void rotate_j(Eigen::Index i, Eigen::Index k, double c, double s) {
        for (Eigen::Index row = 0; row < n_; ++row) {
            const double a = j_(row, i), b = j_(row, k);
            j_(row, i) = c * a + s * b;
            j_(row, k) = -s * a + c * b;
        }
    }

    void enter(std::size_t p) {
        const Eigen::Index n = n_;
        const auto& cp = rows_[p];
        std::vector<double> u_plus = u_;
        u_plus.push_back(0.0);
        for (;;) {
            const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
            Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
            for (int c : cp) d += j_.row(c).head(n).transpose();
            Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
            if (q < n) z = j_.block(0, q, n, n - q) * d.tail(n - q);
            Eigen::VectorXd r = Eigen::VectorXd::Zero(q);
            if (q > 0) r = r_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));

            double t1 = std::numeric_limits<double>::infinity();
            Eigen::Index drop = -1;
            for (Eigen::Index a = 0; a < q; ++a)
                if (r[a] > 0.0 && u_plus[a] / r[a] < t1) t1 = u_plus[a] / r[a], drop = a;
            double zc = 0.0;
            for (int c : cp) zc += z[c];
            const double norm_c = std::sqrt(static_cast<double>(cp.size()));
            double t2 = std::numeric_limits<double>::infinity();
            if (z.norm() > 1e-12 * norm_c && zc > 0.0) t2 = (1.0 - row_dot(p)) / zc;
            const double t = std::min(t1, t2);
            if (!std::isfinite(t)) throw NumericalFailure("path constraints are infeasible");

            for (Eigen::Index a = 0; a < q; ++a) u_plus[a] -= t * r[a];
            u_plus[q] += t;
            if (std::isfinite(t2)) x_.head(n) += t * z;
            if (t == t2) {
                add_active(p, d);
                u_ = std::move(u_plus);
                return;
            }
            remove_active(drop, u_plus);
        }
    }

    void add_active(std::size_t p, Eigen::VectorXd d) {
        const Eigen::Index n = n_;
        const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index k = n - 1; k > q; --k) {
            if (d[k] == 0.0) continue;
            const double h = std::hypot(d[k - 1], d[k]);
            const double c = d[k - 1] / h, s = d[k] / h;
            d[k - 1] = h;
            d[k] = 0.0;
            rotate_j(k - 1, k, c, s);
        }
        r_.col(q).head(q + 1) = d.head(q + 1);
        active_.push_back(p);
    }

    void remove_active(Eigen::Index l, std::vector<double>& u_plus) {
        const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index k = l; k + 1 < q; ++k) r_.col(k) = r_.col(k + 1);
        r_.col(q - 1).setZero();
        // Restore triangularity: zero the subdiagonal left in columns l..q-2.
        for (Eigen::Index k = l; k + 1 < q; ++k) {
            const double a = r_(k, k), b = r_(k + 1, k);
            if (b == 0.0) continue;
            const double h = std::hypot(a, b);
            const double c = a / h, s = b / h;
            for (Eigen::Index col = k; col < q - 1; ++col) {
                const double x = r_(k, col), y = r_(k + 1, col);
                r_(k, col) = c * x + s * y;
                r_(k + 1, col) = -s * x + c * y;
            }
            r_(k + 1, k) = 0.0;
            rotate_j(k, k + 1, c, s);
        }
        active_.erase(active_.begin() + l);
        u_plus.erase(u_plus.begin() + l);
        u_.erase(u_.begin() + l);
    }

    std::vector<int> coord_;
    Eigen::Index n_ = 0;  // coordinates in use; matrices carry spare capacity
    Eigen::VectorXd x_ = Eigen::VectorXd::Zero(0);
    Eigen::MatrixXd j_ = Eigen::MatrixXd::Zero(0, 0);
    Eigen::MatrixXd r_ = Eigen::MatrixXd::Zero(0, 0);
    std::vector<std::size_t> active_;
    std::vector<double> u_;
    std::vector<std::vector<int>> rows_;
    std::vector<std::vector<VertexId>> paths_;
    std::set<std::vector<VertexId>> keys_;
};

inline void check_sets(const Graph& g, const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    if (a.empty() || b.empty()) throw InputError("VEL needs nonempty vertex sets");
    std::vector<char> in_a(g.size(), 0);
    for (VertexId v : a) {
        if (v >= g.size()) throw InputError("VEL source vertex out of range");
        in_a[v] = 1;
    }
    for (VertexId v : b) {
        if (v >= g.size()) throw InputError("VEL target vertex out of range");
        if (in_a[v]) throw InputError("VEL vertex sets must be disjoint");
    }
}

} // namespace detail

/// VEL between A and B in the connected component(s) reachable from A.
inline VelEstimate vel_between(const Graph& g, const std::vector<VertexId>& a, const std::vector<VertexId>& b,
                               const VelConfig& cfg = {}) {
    detail::check_sets(g, a, b);
    detail::PathQp qp(g.size());
    VelEstimate est;
    std::vector<double> m(g.size(), 0.0);
    double min_weight = 0.0;
    for (;;) {
        const detail::ShortestPaths sp = detail::separate(g, m, a);
        std::vector<std::pair<double, VertexId>> violated;
        min_weight = std::numeric_limits<double>::infinity();
        for (VertexId t : b) {
            min_weight = std::min(min_weight, sp.dist[t]);
            if (sp.dist[t] < 1.0 - cfg.tol) violated.push_back({sp.dist[t], t});
        }
        if (!std::isfinite(min_weight)) throw InputError("no path joins the VEL vertex sets");
        if (violated.empty()) {
            est.converged = true;
            break;
        }
        if (est.iterations == cfg.max_iterations) break;
        ++est.iterations;
        std::sort(violated.begin(), violated.end());
        if (violated.size() > cfg.paths_per_round) violated.resize(cfg.paths_per_round);
        bool added = false;
        for (const auto& [w, t] : violated) added = qp.add(detail::trace(sp, t)) || added;
        if (!added) break;  // stored constraints already hold to solver precision
        qp.solve(0.01 * cfg.tol);
        m = qp.weights();
    }
    est.m = std::move(m);
    est.constraints = qp.size();
    for (double x : est.m) est.norm_sq += x * x;
    est.vel = 1.0 / est.norm_sq;
    est.gap = std::max(0.0, 1.0 - min_weight);
    for (std::size_t p = 0; p < qp.size(); ++p)
        if (qp.multiplier(p) > 0.0) est.certificate_paths.push_back(qp.paths()[p]);
    return est;
}

enum class Trend { parabolic_leaning, hyperbolic_leaning, inconclusive };

inline const char* to_string(Trend t) {
    switch (t) {
    case Trend::parabolic_leaning: return "parabolic-leaning";
    case Trend::hyperbolic_leaning: return "hyperbolic-leaning";
    case Trend::inconclusive: return "inconclusive";
    }
    return "?";
}

struct TrendEntry {
    int radius = 0;
    std::size_t sphere_size = 0;
    VelEstimate estimate;
};

struct TrendReport {
    std::vector<TrendEntry> entries;
    bool monotone = true;
    double last_relative_change = 0.0;
    Trend label = Trend::inconclusive;
};

/// VEL(A, dB_n) for each radius; dB_n is the sphere at depth n. The label is
/// a heuristic: plateau (last two values within `plateau` relative) reads
/// hyperbolic, strict increase otherwise reads parabolic.
inline TrendReport classify(const Triangulation& t, const std::vector<VertexId>& a, const std::vector<int>& radii,
                            const VelConfig& cfg = {}, double plateau = 0.05) {
    if (radii.empty()) throw InputError("classify needs at least one radius");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (radii[k] < 1 || radii[k] > t.radius()) throw InputError("radius outside the triangulation");
        if (k > 0 && radii[k] <= radii[k - 1]) throw InputError("radii must be increasing");
    }
    for (VertexId v : a)
        if (v >= t.vertex_count() || t.depth(v) >= radii.front()) throw InputError("A must lie inside the smallest ball");
    TrendReport rep;
    rep.entries.resize(radii.size());
    parallel_for(
        radii.size(),
        [&](std::size_t k) {
            const int n = radii[k];
            std::vector<VertexId> sphere;
            for (VertexId v = 0; v < t.vertex_count(); ++v)
                if (t.depth(v) == n) sphere.push_back(v);
            rep.entries[k] = {n, sphere.size(), vel_between(skeleton(t, n), a, sphere, cfg)};
        },
        1);
    for (std::size_t k = 1; k < rep.entries.size(); ++k) {
        const double prev = rep.entries[k - 1].estimate.vel, cur = rep.entries[k].estimate.vel;
        if (cur < prev * (1.0 - 1e-6)) rep.monotone = false;
    }
    if (rep.entries.size() >= 2) {
        const double prev = rep.entries[rep.entries.size() - 2].estimate.vel;
        const double cur = rep.entries.back().estimate.vel;
        rep.last_relative_change = (cur - prev) / prev;
        bool increasing = true;
        for (std::size_t k = 1; k < rep.entries.size(); ++k)
            increasing = increasing && rep.entries[k].estimate.vel > rep.entries[k - 1].estimate.vel;
        if (std::abs(rep.last_relative_change) <= plateau) rep.label = Trend::hyperbolic_leaning;
        else if (increasing) rep.label = Trend::parabolic_leaning;
    }
    return rep;
}

} // namespace crflab::vel
