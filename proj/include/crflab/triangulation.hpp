#pragma once

// Combinatorial disk triangulations: construction, validation, balls,
// truncations and the line-oriented text format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crflab/common.hpp"

namespace crflab {

using Face = std::array<VertexId, 3>;
using Edge = std::pair<VertexId, VertexId>;  // first < second

inline Edge make_edge(VertexId a, VertexId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// An intersection angle assigned to one edge, as read from or written to file.
struct EdgeAngle {
    VertexId a;
    VertexId b;
    double phi;
};

/// Finite, oriented, simplicial disk complex with a distinguished root.
///
/// Faces are stored with a consistent orientation (each interior edge is
/// traversed in opposite directions by its two faces). Infinite families are
/// realized up to a requested radius; `radius()` is the eccentricity of the
/// root, i.e. the largest n for which B_n(root) is available.
class Triangulation {
public:
    Triangulation() = default;

    /// Validates and orients `faces`. Throws InputError on dangling ids,
    /// repeated vertices in a face, edges with more than two faces,
    /// non-orientable or disconnected input, or unused vertices.
    Triangulation(std::size_t vertex_count, std::vector<Face> faces, VertexId root,
                  std::span<const EdgeAngle> angles = {}, int family_degree = 0)
        : vertex_count_(vertex_count), faces_(std::move(faces)), root_(root),
          family_degree_(family_degree) {
        if (vertex_count_ == 0) throw InputError("triangulation has no vertices");
        if (root_ >= vertex_count_) throw InputError("root id out of range");
        build_topology();
        orient_faces();
        classify_stars();
        compute_radius();
        phi_.assign(edges_.size(), 0.0);
        for (const auto& a : angles) {
            if (a.a >= vertex_count_ || a.b >= vertex_count_)
                throw InputError("intersection angle references undeclared vertex");
            auto idx = edge_index(a.a, a.b);
            if (!idx) throw InputError("intersection angle on a non-edge");
            if (!(a.phi >= 0.0 && a.phi <= kPi / 2 + 1e-15))
                throw InputError("intersection angle outside [0, pi/2]");
            phi_[*idx] = a.phi;
        }
    }

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t face_count() const { return faces_.size(); }
    VertexId root() const { return root_; }
    int radius() const { return radius_; }
    /// 6 for the hexagonal family, d for the constant-degree family, 0 otherwise.
    int family_degree() const { return family_degree_; }

    const std::vector<Face>& faces() const { return faces_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const VertexId> neighbors(VertexId v) const { return adjacency_[v]; }
    std::span<const std::uint32_t> incident_faces(VertexId v) const { return vertex_faces_[v]; }
    std::size_t degree(VertexId v) const { return adjacency_[v].size(); }
    /// True iff the link of v is a closed cycle (v is not on the complex boundary).
    bool has_closed_star(VertexId v) const { return closed_star_[v] != 0; }
    /// Distance from the root, computed once at construction.
    int depth(VertexId v) const { return depth_[v]; }

    std::optional<std::size_t> edge_index(VertexId a, VertexId b) const {
        const Edge e = make_edge(a, b);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) return std::nullopt;
        return static_cast<std::size_t>(it - edges_.begin());
    }
    const std::vector<double>& phi() const { return phi_; }

private:
    void build_topology() {
        adjacency_.assign(vertex_count_, {});
        vertex_faces_.assign(vertex_count_, {});
        std::map<Edge, int> edge_faces;
        std::vector<Face> sorted_faces;
        sorted_faces.reserve(faces_.size());
        for (std::uint32_t f = 0; f < faces_.size(); ++f) {
            const Face& face = faces_[f];
            for (VertexId v : face)
                if (v >= vertex_count_) throw InputError("face references undeclared vertex " + std::to_string(v));
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
                throw InputError("face with repeated vertex");
            Face s = face;
            std::sort(s.begin(), s.end());
            sorted_faces.push_back(s);
            for (int k = 0; k < 3; ++k) {
                Edge e = make_edge(face[k], face[(k + 1) % 3]);
                if (++edge_faces[e] > 2) throw InputError("edge belongs to more than two faces");
            }
            for (VertexId v : face) vertex_faces_[v].push_back(f);
        }
        std::sort(sorted_faces.begin(), sorted_faces.end());
        if (std::adjacent_find(sorted_faces.begin(), sorted_faces.end()) != sorted_faces.end())
            throw InputError("duplicate face");
        edges_.reserve(edge_faces.size());
        for (const auto& [e, count] : edge_faces) {
            edges_.push_back(e);
            adjacency_[e.first].push_back(e.second);
            adjacency_[e.second].push_back(e.first);
        }
        for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
        for (std::size_t v = 0; v < vertex_count_; ++v)
            if (adjacency_[v].empty()) throw InputError("vertex " + std::to_string(v) + " belongs to no face");
    }

    // Propagates the orientation of face 0 across shared edges.
    void orient_faces() {
        std::map<Edge, std::vector<std::uint32_t>> by_edge;
        for (std::uint32_t f = 0; f < faces_.size(); ++f)
            for (int k = 0; k < 3; ++k) by_edge[make_edge(faces_[f][k], faces_[f][(k + 1) % 3])].push_back(f);
        std::vector<char> seen(faces_.size(), 0);
        std::queue<std::uint32_t> queue;
        queue.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!queue.empty()) {
            const std::uint32_t f = queue.front();
            queue.pop();
            for (int k = 0; k < 3; ++k) {
                const VertexId a = faces_[f][k], b = faces_[f][(k + 1) % 3];
                for (std::uint32_t g : by_edge[make_edge(a, b)]) {
                    if (g == f || seen[g]) continue;
                    // g must traverse the shared edge as b -> a.
                    Face& fg = faces_[g];
                    for (int m = 0; m < 3; ++m)
                        if (fg[m] == a && fg[(m + 1) % 3] == b) {
                            std::swap(fg[1], fg[2]);
                            break;
                        }
                    seen[g] = 1;
                    ++reached;
                    queue.push(g);
                }
            }
        }
        if (reached != faces_.size()) throw InputError("face set is not connected");
        std::map<std::pair<VertexId, VertexId>, int> directed;
        for (const Face& face : faces_)
            for (int k = 0; k < 3; ++k)
                if (++directed[{face[k], face[(k + 1) % 3]}] > 1) throw InputError("complex is not orientable");
    }

    void classify_stars() {
        closed_star_.assign(vertex_count_, 0);
        for (VertexId v = 0; v < vertex_count_; ++v) {
            const auto& fs = vertex_faces_[v];
            if (fs.size() != adjacency_[v].size()) continue;
            // Link is a disjoint union of cycles; closed star iff it is one cycle.
            std::map<VertexId, std::vector<VertexId>> link;
            for (std::uint32_t f : fs) {
                std::array<VertexId, 2> opp{};
                int c = 0;
                for (VertexId w : faces_[f])
                    if (w != v) opp[c++] = w;
                link[opp[0]].push_back(opp[1]);
                link[opp[1]].push_back(opp[0]);
            }
            bool ok = true;
            for (const auto& [w, nb] : link) ok = ok && nb.size() == 2;
            if (!ok) continue;
            std::size_t steps = 0;
            VertexId start = link.begin()->first, prev = start, cur = link.begin()->second[0];
            while (cur != start && steps <= fs.size()) {
                const auto& nb = link[cur];
                VertexId next = nb[0] == prev ? nb[1] : nb[0];
                prev = cur;
                cur = next;
                ++steps;
            }
            closed_star_[v] = (steps + 1 == fs.size()) ? 1 : 0;
        }
    }

    void compute_radius() {
        depth_.assign(vertex_count_, -1);
        std::queue<VertexId> queue;
        depth_[root_] = 0;
        queue.push(root_);
        while (!queue.empty()) {
            VertexId v = queue.front();
            queue.pop();
            for (VertexId w : adjacency_[v])
                if (depth_[w] < 0) {
                    depth_[w] = depth_[v] + 1;
                    queue.push(w);
                }
        }
        radius_ = 0;
        for (int d : depth_) {
            if (d < 0) throw InputError("triangulation is not connected");
            radius_ = std::max(radius_, d);
        }
    }

    std::size_t vertex_count_ = 0;
    std::vector<Face> faces_;
    VertexId root_ = 0;
    int family_degree_ = 0;
    int radius_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<VertexId>> adjacency_;
    std::vector<std::vector<std::uint32_t>> vertex_faces_;
    std::vector<char> closed_star_;
    std::vector<int> depth_;
    std::vector<double> phi_;
};

/// Breadth-first ball B_n(v), sorted by vertex id.
inline std::vector<VertexId> ball(const Triangulation& t, VertexId v, int n) {
    if (v >= t.vertex_count()) throw InputError("ball: unknown vertex " + std::to_string(v));
    if (n < 0) throw InputError("ball: negative radius");
    std::vector<int> dist(t.vertex_count(), -1);
    std::vector<VertexId> out{v};
    std::queue<VertexId> queue;
    dist[v] = 0;
    queue.push(v);
    while (!queue.empty()) {
        VertexId x = queue.front();
        queue.pop();
        if (dist[x] == n) continue;
        for (VertexId w : t.neighbors(x))
            if (dist[w] < 0) {
                dist[w] = dist[x] + 1;
                out.push_back(w);
                queue.push(w);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// The subcomplex T_n spanned by faces with all vertices in B_n(root).
struct Truncation {
    std::shared_ptr<const Triangulation> parent;
    int radius = 0;
    std::vector<VertexId> vertices;      // V_n, sorted
    std::vector<VertexId> interior;      // int(V_n), sorted
    std::vector<VertexId> boundary;      // dV_n, sorted
    std::vector<std::uint32_t> faces;    // indices into parent->faces()
    std::vector<char> in_complex;        // parent-sized membership flags for V_n
    std::vector<char> interior_flag;     // parent-sized

    bool is_interior(VertexId v) const { return v < interior_flag.size() && interior_flag[v]; }
    bool contains(VertexId v) const { return v < in_complex.size() && in_complex[v]; }
};

inline Truncation truncate(std::shared_ptr<const Triangulation> t, int n) {
    if (!t) throw InputError("truncate: null triangulation");
    if (n < 1 || n > t->radius())
        throw InputError("truncate: radius " + std::to_string(n) + " outside [1, " + std::to_string(t->radius()) + "]");
    Truncation tr;
    tr.radius = n;
    const std::size_t nv = t->vertex_count();
    std::vector<char> in_ball(nv, 0);
    for (VertexId v = 0; v < nv; ++v) in_ball[v] = t->depth(v) <= n;
    std::vector<char> face_in(t->face_count(), 0);
    tr.in_complex.assign(nv, 0);
    for (std::uint32_t f = 0; f < t->face_count(); ++f) {
        const Face& face = t->faces()[f];
        if (in_ball[face[0]] && in_ball[face[1]] && in_ball[face[2]]) {
            face_in[f] = 1;
            tr.faces.push_back(f);
            for (VertexId v : face) tr.in_complex[v] = 1;
        }
    }
    tr.interior_flag.assign(nv, 0);
    for (VertexId v = 0; v < nv; ++v) {
        if (!tr.in_complex[v]) continue;
        tr.vertices.push_back(v);
        bool interior = t->has_closed_star(v);
        for (std::uint32_t f : t->incident_faces(v)) interior = interior && face_in[f];
        tr.interior_flag[v] = interior ? 1 : 0;
        (interior ? tr.interior : tr.boundary).push_back(v);
    }
    tr.parent = std::move(t);
    return tr;
}

/// Number of edges of the truncation (edges of its faces).
inline std::size_t truncation_edge_count(const Truncation& tr) {
    std::vector<Edge> edges;
    for (std::uint32_t f : tr.faces) {
        const Face& face = tr.parent->faces()[f];
        for (int k = 0; k < 3; ++k) edges.push_back(make_edge(face[k], face[(k + 1) % 3]));
    }
    std::sort(edges.begin(), edges.end());
    return static_cast<std::size_t>(std::unique(edges.begin(), edges.end()) - edges.begin());
}

// ---------------------------------------------------------------------------
// Built-in families

/// Combinatorial distance of v_{m,n} = m + n e^{2 pi i / 3} from v_{0,0}.
inline int hex_distance(int m, int n) { return (std::abs(m) + std::abs(n) + std::abs(m - n)) / 2; }

/// Lattice points of the hexagonal ball in vertex-id order of build_hexagonal:
/// sorted by (distance, m, n), so the root v_{0,0} has id 0.
inline std::vector<std::array<int, 2>> hexagonal_lattice_points(int radius) {
    std::vector<std::array<int, 3>> keyed;
    for (int m = -radius; m <= radius; ++m)
        for (int n = -radius; n <= radius; ++n) {
            int d = hex_distance(m, n);
            if (d <= radius) keyed.push_back({d, m, n});
        }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::array<int, 2>> pts;
    pts.reserve(keyed.size());
    for (const auto& k : keyed) pts.push_back({k[1], k[2]});
    return pts;
}

inline Triangulation build_hexagonal(int radius) {
    if (radius < 1) throw InputError("hexagonal radius must be >= 1");
    const auto pts = hexagonal_lattice_points(radius);
    std::map<std::pair<int, int>, VertexId> id;
    for (VertexId i = 0; i < pts.size(); ++i) id[{pts[i][0], pts[i][1]}] = i;
    auto lookup = [&](int m, int n) -> std::optional<VertexId> {
        auto it = id.find({m, n});
        if (it == id.end()) return std::nullopt;
        return it->second;
    };
    std::vector<Face> faces;
    for (const auto& p : pts) {
        const int m = p[0], n = p[1];
        auto a = lookup(m, n), b = lookup(m + 1, n), c = lookup(m + 1, n + 1), d = lookup(m, n + 1);
        if (a && b && c) faces.push_back({*a, *b, *c});
        if (a && c && d) faces.push_back({*a, *c, *d});
    }
    return Triangulation(pts.size(), std::move(faces), 0, {}, 6);
}

/// Ball of radius `radius` in the order-d triangular tessellation, grown
/// layer by layer around a degree-d root.
inline Triangulation build_constant_degree(int d, int radius) {
    if (d < 7) throw InputError("constant-degree family requires d >= 7 (got " + std::to_string(d) + ")");
    if (radius < 1) throw InputError("constant-degree radius must be >= 1");
    std::vector<Face> faces;
    std::vector<int> deg;
    VertexId next = 0;
    const VertexId root = next++;
    deg.push_back(d);
    std::vector<VertexId> cycle;
    for (int i = 0; i < d; ++i) {
        cycle.push_back(next++);
        deg.push_back(3);
    }
    for (int i = 0; i < d; ++i) faces.push_back({root, cycle[i], cycle[(i + 1) % d]});

    for (int layer = 2; layer <= radius; ++layer) {
        const std::size_t k = cycle.size();
        // One shared vertex outside each boundary edge (cycle[i], cycle[i+1]).
        std::vector<VertexId> shared(k);
        for (std::size_t i = 0; i < k; ++i) {
            shared[i] = next++;
            deg.push_back(4);
            faces.push_back({cycle[(i + 1) % k], cycle[i], shared[i]});
        }
        std::vector<VertexId> new_cycle;
        for (std::size_t i = 0; i < k; ++i) {
            const VertexId b = cycle[i];
            const int fans = d - deg[b] - 2;
            if (fans < 0) throw NumericalFailure("constant-degree growth: vertex degree overflow");
            VertexId prev = shared[(i + k - 1) % k];
            new_cycle.push_back(prev);
            for (int f = 0; f < fans; ++f) {
                VertexId x = next++;
                deg.push_back(3);
                faces.push_back({b, prev, x});
                new_cycle.push_back(x);
                prev = x;
            }
            faces.push_back({b, prev, shared[i]});
            deg[b] = d;
        }
        cycle = std::move(new_cycle);
    }
    return Triangulation(next, std::move(faces), root, {}, d);
}

// ---------------------------------------------------------------------------
// Text format:
//   tri v=<count> root=<id>
//   f <i> <j> <k>
//   phi <i> <j> <radians>
// Blank lines and lines starting with '#' are ignored.

inline Triangulation read_triangulation(std::istream& in) {
    std::string line;
    std::size_t count = 0;
    long root = -1;
    bool header = false;
    std::vector<Face> faces;
    std::vector<EdgeAngle> angles;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fail = [&](const std::string& what) {
            throw InputError("line " + std::to_string(lineno) + ": " + what);
        };
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "tri") {
            std::string tok;
            while (ls >> tok) {
                if (tok.rfind("v=", 0) == 0) count = std::stoul(tok.substr(2));
                else if (tok.rfind("root=", 0) == 0) root = std::stol(tok.substr(5));
                else fail("unknown header field '" + tok + "'");
            }
            header = true;
        } else if (tag == "f") {
            if (!header) fail("face before header");
            std::vector<long> ids;
            long x;
            while (ls >> x) ids.push_back(x);
            if (!ls.eof()) fail("non-integer vertex id");
            if (ids.size() != 3) fail("face has " + std::to_string(ids.size()) + " vertices; faces must be triangles");
            for (long id : ids)
                if (id < 0 || static_cast<std::size_t>(id) >= count) fail("face references undeclared vertex " + std::to_string(id));
            faces.push_back({static_cast<VertexId>(ids[0]), static_cast<VertexId>(ids[1]), static_cast<VertexId>(ids[2])});
        } else if (tag == "phi") {
            long a, b;
            double value;
            if (!(ls >> a >> b >> value)) fail("malformed phi line");
            if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= count || static_cast<std::size_t>(b) >= count)
                fail("edge references undeclared vertex");
            angles.push_back({static_cast<VertexId>(a), static_cast<VertexId>(b), value});
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    if (!header) throw InputError("missing 'tri' header");
    if (root < 0) throw InputError("header lacks root");
    return Triangulation(count, std::move(faces), static_cast<VertexId>(root), angles);
}

inline void write_triangulation(const Triangulation& t, std::ostream& out) {
    out << "tri v=" << t.vertex_count() << " root=" << t.root() << '\n';
    for (const Face& f : t.faces()) out << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    char buf[64];
    for (std::size_t e = 0; e < t.edge_count(); ++e) {
        if (t.phi()[e] == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", t.phi()[e]);
        out << "phi " << t.edges()[e].first << ' ' << t.edges()[e].second << ' ' << buf << '\n';
    }
}

inline Triangulation load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_triangulation(in);
}

inline void save(const Triangulation& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    write_triangulation(t, out);
}

} // namespace crflab
