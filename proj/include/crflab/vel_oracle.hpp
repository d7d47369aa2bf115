#pragma once

// Reference machinery for checking the VEL solver on small graphs:
// enumeration of all graphs up to isomorphism (colour refinement plus
// brute force inside colour classes), and VEL from the complete list of
// path constraints solved by a Lawson-Hanson active-set method on the dual.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "crflab/common.hpp"
#include "crflab/vel.hpp"

namespace crflab::vel {

/// Small graph as adjacency bit rows (n <= 16).
struct SmallGraph {
    int n = 0;
    std::vector<std::uint16_t> rows;

    bool edge(int a, int b) const { return (rows[a] >> b) & 1u; }

    Graph to_graph() const {
        Graph g;
        g.adjacency.resize(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (edge(a, b)) g.add_edge(static_cast<VertexId>(a), static_cast<VertexId>(b));
        return g;
    }
};

namespace detail {

inline std::vector<int> refine_colours(const SmallGraph& g) {
    std::vector<int> colour(static_cast<std::size_t>(g.n));
    for (int v = 0; v < g.n; ++v) colour[v] = __builtin_popcount(g.rows[v]);
    for (;;) {
        std::vector<std::pair<int, std::vector<int>>> sig(static_cast<std::size_t>(g.n));
        for (int v = 0; v < g.n; ++v) {
            sig[v].first = colour[v];
            for (int w = 0; w < g.n; ++w)
                if (g.edge(v, w)) sig[v].second.push_back(colour[w]);
            std::sort(sig[v].second.begin(), sig[v].second.end());
        }
        std::vector<std::pair<int, std::vector<int>>> sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<int> next(static_cast<std::size_t>(g.n));
        for (int v = 0; v < g.n; ++v)
            next[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
        const auto classes = [](const std::vector<int>& c) { return std::set<int>(c.begin(), c.end()).size(); };
        const bool stable = classes(next) == classes(colour);
        colour = std::move(next);
        if (stable) return colour;
    }
}

inline std::uint64_t code_of(const SmallGraph& g, const std::vector<int>& order) {
    std::uint64_t code = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) code = (code << 1) | (g.edge(order[i], order[j]) ? 1u : 0u);
    return code;
}

// Largest adjacency code over orderings that list colour classes in colour
// order; any ordering inside a class is tried.
inline std::pair<std::uint64_t, std::vector<int>> canonical(const SmallGraph& g) {
    const std::vector<int> colour = refine_colours(g);
    std::vector<int> order(static_cast<std::size_t>(g.n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return colour[a] < colour[b]; });
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < g.n;) {
        int j = i;
        while (j < g.n && colour[order[j]] == colour[order[i]]) ++j;
        cells.push_back({i, j});
        i = j;
    }
    std::uint64_t best = 0;
    std::vector<int> best_order = order;
    bool first = true;
    std::vector<int> cur = order;
    for (auto& [lo, hi] : cells) std::sort(cur.begin() + lo, cur.begin() + hi);
    for (;;) {
        const std::uint64_t c = code_of(g, cur);
        if (first || c > best) best = c, best_order = cur, first = false;
        std::size_t k = 0;
        for (; k < cells.size(); ++k) {
            const auto [lo, hi] = cells[k];
            if (std::next_permutation(cur.begin() + lo, cur.begin() + hi)) break;
        }
        if (k == cells.size()) break;
    }
    return {best, best_order};
}

inline SmallGraph relabel(const SmallGraph& g, const std::vector<int>& order) {
    SmallGraph h{g.n, std::vector<std::uint16_t>(static_cast<std::size_t>(g.n), 0)};
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (i != j && g.edge(order[i], order[j])) h.rows[i] |= static_cast<std::uint16_t>(1u << j);
    return h;
}

inline bool small_connected(const SmallGraph& g) {
    std::uint32_t seen = 1, frontier = 1;
    while (frontier) {
        std::uint32_t next = 0;
        for (int v = 0; v < g.n; ++v)
            if ((frontier >> v) & 1u) next |= g.rows[v];
        frontier = next & ~seen;
        seen |= next;
    }
    return seen == (g.n >= 32 ? ~0u : ((1u << g.n) - 1u));
}

} // namespace detail

/// All graphs on exactly n vertices up to isomorphism, each in canonical
/// labelling. Built by adding a vertex to every graph on n - 1 vertices.
inline std::vector<SmallGraph> all_graphs(int n) {
    if (n < 1 || n > 10) throw InputError("graph enumeration supports 1..10 vertices");
    std::vector<SmallGraph> level{SmallGraph{1, {0}}};
    for (int k = 2; k <= n; ++k) {
        std::map<std::uint64_t, SmallGraph> next;
        for (const SmallGraph& g : level)
            for (std::uint32_t mask = 0; mask < (1u << (k - 1)); ++mask) {
                SmallGraph h{k, g.rows};
                h.rows.push_back(static_cast<std::uint16_t>(mask));
                for (int v = 0; v < k - 1; ++v)
                    if ((mask >> v) & 1u) h.rows[v] |= static_cast<std::uint16_t>(1u << (k - 1));
                auto [code, order] = detail::canonical(h);
                if (!next.count(code)) next.emplace(code, detail::relabel(h, order));
            }
        level.clear();
        for (auto& [code, g] : next) level.push_back(std::move(g));
    }
    return level;
}

inline std::vector<SmallGraph> connected_graphs(int n) {
    std::vector<SmallGraph> out;
    for (SmallGraph& g : all_graphs(n))
        if (detail::small_connected(g)) out.push_back(std::move(g));
    return out;
}

struct ExhaustiveVel {
    double norm_sq = 0.0;
    double vel = 0.0;
    std::vector<double> m;
    std::size_t paths = 0;        // simple A-B paths enumerated
    std::size_t constraints = 0;  // inclusion-minimal vertex sets kept
    double kkt_residual = 0.0;    // max primal violation
};

/// VEL from every simple path A -> B (stopping at the first vertex of B),
/// each reduced to the set of its non-initial vertices. Requires <= 16
/// vertices.
inline ExhaustiveVel exhaustive_vel(const Graph& g, const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    detail::check_sets(g, a, b);
    const std::size_t n = g.size();
    if (n > 16) throw InputError("exhaustive VEL is limited to 16 vertices");
    std::uint32_t in_a = 0, in_b = 0;
    for (VertexId v : a) in_a |= 1u << v;
    for (VertexId v : b) in_b |= 1u << v;

    ExhaustiveVel res;
    std::set<std::uint32_t> sets;
    std::vector<VertexId> stack;
    auto dfs = [&](auto&& self, VertexId v, std::uint32_t visited, std::uint32_t tail) -> void {
        for (VertexId w : g.adjacency[v]) {
            if ((visited >> w) & 1u) continue;
            if ((in_a >> w) & 1u) continue;  // a suffix from that source is never heavier
            const std::uint32_t t = tail | (1u << w);
            if ((in_b >> w) & 1u) {
                ++res.paths;
                sets.insert(t);
                continue;
            }
            self(self, w, visited | (1u << w), t);
        }
    };
    for (VertexId s : a) dfs(dfs, s, in_a, 0u);
    if (sets.empty()) throw InputError("no path joins the VEL vertex sets");

    std::vector<std::uint32_t> minimal;
    for (std::uint32_t s : sets) {
        bool dominated = false;
        for (std::uint32_t t : sets)
            if (t != s && (t & s) == t) dominated = true;
        if (!dominated) minimal.push_back(s);
    }
    res.constraints = minimal.size();

    // Dual: minimise 1/2 l^T Q l - 1^T l over l >= 0, Q the overlap counts.
    const Eigen::Index k = static_cast<Eigen::Index>(minimal.size());
    Eigen::MatrixXd q(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) q(i, j) = __builtin_popcount(minimal[i] & minimal[j]);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    std::vector<char> passive(static_cast<std::size_t>(k), 0);
    const double eps = 1e-13;
    for (int outer = 0; outer < 10 * k + 10; ++outer) {
        const Eigen::VectorXd w = Eigen::VectorXd::Ones(k) - q * lambda;
        Eigen::Index t = -1;
        double best = eps;
        for (Eigen::Index j = 0; j < k; ++j)
            if (!passive[j] && w[j] > best) best = w[j], t = j;
        if (t < 0) break;
        passive[t] = 1;
        for (int inner = 0; inner < 10 * k + 10; ++inner) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index j = 0; j < k; ++j)
                if (passive[j]) idx.push_back(j);
            const Eigen::Index p = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXd qp(p, p);
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) qp(i, j) = q(idx[i], idx[j]);
            const Eigen::VectorXd sp = qp.completeOrthogonalDecomposition().solve(Eigen::VectorXd::Ones(p));
            if (sp.minCoeff() > eps) {
                lambda.setZero();
                for (Eigen::Index i = 0; i < p; ++i) lambda[idx[i]] = sp[i];
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < p; ++i)
                if (sp[i] <= eps) alpha = std::min(alpha, lambda[idx[i]] / (lambda[idx[i]] - sp[i]));
            for (Eigen::Index i = 0; i < p; ++i) lambda[idx[i]] += alpha * (sp[i] - lambda[idx[i]]);
            for (Eigen::Index i = 0; i < p; ++i)
                if (lambda[idx[i]] <= eps) {
                    lambda[idx[i]] = 0.0;
                    passive[idx[i]] = 0;
                }
        }
    }
    res.m.assign(n, 0.0);
    for (Eigen::Index j = 0; j < k; ++j)
        for (std::size_t v = 0; v < n; ++v)
            if ((minimal[j] >> v) & 1u) res.m[v] += lambda[j];
    for (double x : res.m) res.norm_sq += x * x;
    res.vel = 1.0 / res.norm_sq;
    for (std::uint32_t s : minimal) {
        double w = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if ((s >> v) & 1u) w += res.m[v];
        res.kkt_residual = std::max(res.kkt_residual, 1.0 - w);
    }
    return res;
}

/// Vertices at maximal graph distance from v.
inline std::vector<VertexId> farthest_layer(const Graph& g, VertexId v) {
    std::vector<int> dist(g.size(), -1);
    std::vector<VertexId> queue{v};
    dist[v] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
        for (VertexId w : g.adjacency[queue[h]])
            if (dist[w] < 0) dist[w] = dist[queue[h]] + 1, queue.push_back(w);
    const int far = *std::max_element(dist.begin(), dist.end());
    std::vector<VertexId> out;
    for (VertexId w = 0; w < g.size(); ++w)
        if (dist[w] == far) out.push_back(w);
    return out;
}

struct SuiteReport {
    std::size_t graphs = 0;
    std::size_t cases = 0;
    double worst_relative = 0.0;
    double worst_kkt = 0.0;
    std::size_t failures = 0;  // cases beyond the tolerance or unconverged
};

/// Cutting-plane VEL against the exhaustive oracle on every connected graph
/// with 2..max_vertices vertices: A = {0}, B = {n - 1} and A = {0}, B = the
/// farthest layer from 0.
inline SuiteReport vel_oracle_suite(int max_vertices, double rel_tol, const VelConfig& cfg = {}) {
    SuiteReport rep;
    for (int n = 2; n <= max_vertices; ++n) {
        for (const SmallGraph& sg : connected_graphs(n)) {
            ++rep.graphs;
            const Graph g = sg.to_graph();
            const std::vector<VertexId> a{0};
            std::vector<std::vector<VertexId>> targets{{static_cast<VertexId>(n - 1)}};
            const auto far = farthest_layer(g, 0);
            if (far != targets.front()) targets.push_back(far);
            for (const auto& b : targets) {
                ++rep.cases;
                const VelEstimate est = vel_between(g, a, b, cfg);
                const ExhaustiveVel ref = exhaustive_vel(g, a, b);
                const double rel = std::abs(est.vel - ref.vel) / ref.vel;
                rep.worst_relative = std::max(rep.worst_relative, rel);
                rep.worst_kkt = std::max(rep.worst_kkt, ref.kkt_residual);
                if (!(rel <= rel_tol) || !est.converged || ref.kkt_residual > 1e-9) ++rep.failures;
            }
        }
    }
    return rep;
}

} // namespace crflab::vel
