#ifndef PPUM_MESH_HPP
#define PPUM_MESH_HPP

// Ringed-vertex 2D simplicial mesh kernel: fixed-size vertex/triangle records
// with per-face neighbor links, deterministic longest-edge bisection with
// conformity closure, point location, and reconciliation of independently
// refined copies of a common coarse mesh.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ppum/errors.hpp"

namespace ppum {

using VertexId = std::uint32_t;
using SimplexId = std::uint32_t;
inline constexpr SimplexId kNoSimplex = 0xffffffffu;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double xx, double yy) : x(xx), y(yy) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double dist2(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Fixed-size records: one anchor simplex per vertex, per-face neighbor links
// per simplex. Rings are recovered by walking neighbor links from the anchor.
struct Vertex {
    Vec2 pos;
    SimplexId anchor = kNoSimplex;
    int marker = 0; // 0 = interior, >0 = boundary segment id
};

struct Simplex {
    std::array<VertexId, 3> v{};                                // counterclockwise
    std::array<SimplexId, 3> nbr{kNoSimplex, kNoSimplex, kNoSimplex}; // nbr[k] across edge opposite v[k]
    std::int32_t generation = 0;
    std::int32_t subdomain = -1; // -1 = unassigned
    bool alive = true;
};

struct RefinementReport {
    std::size_t n_marked = 0;
    std::size_t n_bisections = 0;        // simplices split, closure included
    std::size_t n_closure = 0;           // splits not requested by the mark set
    // new vertex records: {new vertex id, edge endpoint a, edge endpoint b}
    std::vector<std::array<VertexId, 3>> new_vertices;
    // child records in creation order: {parent, child keeping endpoint a, child keeping endpoint b}
    std::vector<std::array<SimplexId, 3>> children;
    bool quality_collapse = false;
    double quality_min_after = 1.0;
};

struct Located {
    SimplexId simplex = kNoSimplex;
    std::array<double, 3> bary{0.0, 0.0, 0.0};
};

struct AuditReport {
    bool ok = true;
    std::size_t n_interior_edges = 0;
    std::size_t n_boundary_edges = 0;
    std::vector<std::string> issues;

    void fail(std::string msg) {
        ok = false;
        if (issues.size() < 64) issues.push_back(std::move(msg));
    }
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

class Mesh {
public:
    std::vector<Vertex> vertices;
    std::vector<Simplex> simplices; // dead entries stay flagged until compact()
    double quality_floor = 0.01;

    static constexpr double kLocateTol = 1e-12;

    std::uint64_t fingerprint() const { return fingerprint_; }

    std::size_t n_live() const {
        std::size_t n = 0;
        for (const auto& s : simplices)
            if (s.alive) ++n;
        return n;
    }

    double signed_area(SimplexId t) const {
        const auto& s = simplices[t];
        const Vec2& a = vertices[s.v[0]].pos;
        const Vec2& b = vertices[s.v[1]].pos;
        const Vec2& c = vertices[s.v[2]].pos;
        return 0.5 * cross(b - a, c - a);
    }

    Vec2 centroid(SimplexId t) const {
        const auto& s = simplices[t];
        const Vec2& a = vertices[s.v[0]].pos;
        const Vec2& b = vertices[s.v[1]].pos;
        const Vec2& c = vertices[s.v[2]].pos;
        return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    }

    // Edge k of simplex t is opposite vertex t.v[k].
    std::array<VertexId, 2> edge(SimplexId t, int k) const {
        const auto& s = simplices[t];
        return {s.v[(k + 1) % 3], s.v[(k + 2) % 3]};
    }

    double edge_len2(SimplexId t, int k) const {
        const auto e = edge(t, k);
        return dist2(vertices[e[0]].pos, vertices[e[1]].pos);
    }

    // quality = 4*sqrt(3)*area / (sum of squared edge lengths); 1 for equilateral.
    double shape_quality(SimplexId t) const {
        const double area = signed_area(t);
        if (!(area > 0.0)) throw DegenerateSimplex("shape_quality: area <= 0");
        const double l2 = edge_len2(t, 0) + edge_len2(t, 1) + edge_len2(t, 2);
        return 4.0 * std::sqrt(3.0) * area / l2;
    }

    double h_max() const { refresh_stats(); return h_max_; }
    double h_min() const { refresh_stats(); return h_min_; }
    double quality_min() const { refresh_stats(); return quality_min_; }

    int local_index(SimplexId t, VertexId v) const {
        const auto& s = simplices[t];
        for (int k = 0; k < 3; ++k)
            if (s.v[k] == v) return k;
        return -1;
    }

    // Refinement edge: longest edge; exact-length ties broken by the
    // lexicographically smallest sorted endpoint coordinate pair so that the
    // choice is exchangeable between independently refined copies, with the
    // sorted endpoint id pair as a final fallback.
    int longest_edge_index(SimplexId t) const {
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (edge_before(t, best, k)) best = k;
        return best;
    }

    std::vector<SimplexId> ring(VertexId v) const {
        const SimplexId a = vertices[v].anchor;
        std::vector<SimplexId> out;
        if (a == kNoSimplex || !simplices[a].alive) return out;
        const std::size_t guard = simplices.size() + 1;
        // forward walk
        SimplexId cur = a;
        while (true) {
            out.push_back(cur);
            const int i = local_index(cur, v);
            const SimplexId next = simplices[cur].nbr[(i + 1) % 3];
            if (next == kNoSimplex) break;     // open fan: restart from anchor
            if (next == a) return out;         // closed ring
            cur = next;
            if (out.size() > guard) throw Error("ring: walk did not terminate");
        }
        // backward walk, prepended so the fan stays contiguous
        std::vector<SimplexId> back;
        cur = a;
        while (true) {
            const int i = local_index(cur, v);
            const SimplexId next = simplices[cur].nbr[(i + 2) % 3];
            if (next == kNoSimplex || next == a) break;
            back.push_back(next);
            cur = next;
            if (back.size() > guard) throw Error("ring: walk did not terminate");
        }
        out.insert(out.begin(), back.rbegin(), back.rend());
        return out;
    }

    std::array<double, 3> barycentric(SimplexId t, const Vec2& p) const {
        const auto& s = simplices[t];
        const Vec2& a = vertices[s.v[0]].pos;
        const Vec2& b = vertices[s.v[1]].pos;
        const Vec2& c = vertices[s.v[2]].pos;
        const double a0 = 0.5 * cross(b - p, c - p);
        const double a1 = 0.5 * cross(c - p, a - p);
        const double a2 = 0.5 * cross(a - p, b - p);
        const double sum = a0 + a1 + a2;
        return {a0 / sum, a1 / sum, a2 / sum};
    }

    // Orientation walk from a seed simplex; falls back to an exhaustive scan
    // when the walk cycles or exits through the boundary (nonconvex domains).
    Located locate_point(const Vec2& p, SimplexId hint = kNoSimplex) const {
        SimplexId cur = (hint != kNoSimplex && hint < simplices.size() && simplices[hint].alive)
                            ? hint
                            : first_live();
        if (cur == kNoSimplex) throw OutsideDomain("locate_point: empty mesh");
        const std::size_t max_steps = simplices.size() + 8;
        for (std::size_t step = 0; step < max_steps; ++step) {
            const auto bc = barycentric(cur, p);
            int worst = 0;
            for (int k = 1; k < 3; ++k)
                if (bc[k] < bc[worst]) worst = k;
            if (bc[worst] >= -kLocateTol) return {cur, bc};
            const SimplexId next = simplices[cur].nbr[worst];
            if (next == kNoSimplex) break; // boundary hit: not conclusive, scan
            cur = next;
        }
        return locate_scan(p);
    }

    Located locate_scan(const Vec2& p) const {
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            if (!simplices[t].alive) continue;
            const auto bc = barycentric(t, p);
            if (bc[0] >= -kLocateTol && bc[1] >= -kLocateTol && bc[2] >= -kLocateTol)
                return {t, bc};
        }
        throw OutsideDomain("locate_point: point outside the meshed domain");
    }

    RefinementReport bisect(std::vector<SimplexId> marked) {
        RefinementReport rep;
        rep.n_marked = marked.size();
        if (marked.empty()) {
            rep.quality_min_after = quality_min();
            return rep; // EmptyMarkSet: no-op success
        }
        std::sort(marked.begin(), marked.end());
        marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
        for (const SimplexId t : marked) {
            if (t >= simplices.size() || !simplices[t].alive)
                throw Error("bisect: marked simplex is not live");
        }
        std::size_t requested = 0;
        for (const SimplexId t : marked) {
            if (simplices[t].alive) {
                refine_leaf(t, rep);
            }
            ++requested;
        }
        (void)requested;
        // splits beyond one per marked simplex are conformity closure
        rep.n_closure = rep.n_bisections >= marked.size() ? rep.n_bisections - marked.size() : 0;
        dirty_ = true;
        rep.quality_min_after = quality_min();
        rep.quality_collapse = rep.quality_min_after < quality_floor;
        return rep;
    }

    // Drop dead simplices and renumber simplex ids; vertex ids are untouched.
    // Only safe between refinement sessions.
    void compact() {
        std::vector<SimplexId> remap(simplices.size(), kNoSimplex);
        std::vector<Simplex> live;
        live.reserve(n_live());
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            if (simplices[t].alive) {
                remap[t] = static_cast<SimplexId>(live.size());
                live.push_back(simplices[t]);
            }
        }
        for (auto& s : live)
            for (auto& n : s.nbr)
                if (n != kNoSimplex) n = remap[n];
        for (auto& v : vertices)
            if (v.anchor != kNoSimplex) v.anchor = remap[v.anchor];
        simplices = std::move(live);
        dirty_ = true;
    }

    AuditReport audit() const {
        AuditReport rep;
        // orientation and neighbor symmetry
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            const auto& s = simplices[t];
            if (!s.alive) continue;
            if (!(signed_area(t) > 0.0)) rep.fail("simplex " + std::to_string(t) + ": area <= 0");
            for (int k = 0; k < 3; ++k) {
                const SimplexId n = s.nbr[k];
                if (n == kNoSimplex) continue;
                if (n >= simplices.size() || !simplices[n].alive) {
                    rep.fail("simplex " + std::to_string(t) + ": dead neighbor");
                    continue;
                }
                const auto e = edge(t, k);
                bool found = false;
                for (int j = 0; j < 3; ++j) {
                    const auto f = edge(n, j);
                    if (((f[0] == e[0] && f[1] == e[1]) || (f[0] == e[1] && f[1] == e[0])) &&
                        simplices[n].nbr[j] == t)
                        found = true;
                }
                if (!found) rep.fail("simplex " + std::to_string(t) + ": asymmetric neighbor link");
            }
        }
        // brute-force edge incidence: interior edges in exactly 2 simplices
        std::vector<std::pair<std::uint64_t, SimplexId>> edges;
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            if (!simplices[t].alive) continue;
            for (int k = 0; k < 3; ++k) {
                auto e = edge(t, k);
                if (e[0] > e[1]) std::swap(e[0], e[1]);
                edges.emplace_back((std::uint64_t(e[0]) << 32) | e[1], t);
            }
        }
        std::sort(edges.begin(), edges.end());
        for (std::size_t i = 0; i < edges.size();) {
            std::size_t j = i;
            while (j < edges.size() && edges[j].first == edges[i].first) ++j;
            const std::size_t cnt = j - i;
            if (cnt == 1) ++rep.n_boundary_edges;
            else if (cnt == 2) ++rep.n_interior_edges;
            else rep.fail("edge shared by " + std::to_string(cnt) + " simplices");
            i = j;
        }
        // anchors and ring completeness against a brute-force incidence scan
        std::vector<std::vector<SimplexId>> incident(vertices.size());
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            if (!simplices[t].alive) continue;
            for (const VertexId v : simplices[t].v) incident[v].push_back(t);
        }
        for (VertexId v = 0; v < vertices.size(); ++v) {
            if (incident[v].empty()) {
                rep.fail("vertex " + std::to_string(v) + ": dangling");
                continue;
            }
            const SimplexId a = vertices[v].anchor;
            if (a == kNoSimplex || a >= simplices.size() || !simplices[a].alive ||
                local_index(a, v) < 0) {
                rep.fail("vertex " + std::to_string(v) + ": bad anchor");
                continue;
            }
            auto r = ring(v);
            std::sort(r.begin(), r.end());
            if (std::adjacent_find(r.begin(), r.end()) != r.end())
                rep.fail("vertex " + std::to_string(v) + ": ring revisits a simplex");
            if (r != incident[v])
                rep.fail("vertex " + std::to_string(v) + ": ring != incidence scan");
        }
        return rep;
    }

    friend Mesh build_mesh(const std::vector<std::pair<Vec2, int>>& verts,
                           const std::vector<std::array<VertexId, 3>>& tris);
    friend Mesh reconcile(const Mesh& a, const Mesh& b);

private:
    std::uint64_t fingerprint_ = 0;
    mutable bool dirty_ = true;
    mutable double h_max_ = 0.0, h_min_ = 0.0, quality_min_ = 1.0;

    SimplexId first_live() const {
        for (SimplexId t = 0; t < simplices.size(); ++t)
            if (simplices[t].alive) return t;
        return kNoSimplex;
    }

    void refresh_stats() const {
        if (!dirty_) return;
        h_max_ = 0.0;
        h_min_ = std::numeric_limits<double>::max();
        quality_min_ = 1.0;
        bool any = false;
        for (SimplexId t = 0; t < simplices.size(); ++t) {
            if (!simplices[t].alive) continue;
            any = true;
            for (int k = 0; k < 3; ++k) {
                const double l = std::sqrt(edge_len2(t, k));
                h_max_ = std::max(h_max_, l);
                h_min_ = std::min(h_min_, l);
            }
            quality_min_ = std::min(quality_min_, shape_quality(t));
        }
        if (!any) { h_min_ = 0.0; quality_min_ = 0.0; }
        dirty_ = false;
    }

    // total order on edges: longer first, then smaller sorted coordinate pair,
    // then smaller sorted id pair
    bool edge_before(SimplexId t, int cur, int cand) const {
        const double lc = edge_len2(t, cur);
        const double ln = edge_len2(t, cand);
        if (ln != lc) return ln > lc;
        auto key = [&](int k) {
            auto e = edge(t, k);
            const Vec2& p = vertices[e[0]].pos;
            const Vec2& q = vertices[e[1]].pos;
            std::array<double, 4> c{p.x, p.y, q.x, q.y};
            if (q.x < p.x || (q.x == p.x && q.y < p.y)) c = {q.x, q.y, p.x, p.y};
            VertexId lo = std::min(e[0], e[1]), hi = std::max(e[0], e[1]);
            return std::tuple<double, double, double, double, VertexId, VertexId>(
                c[0], c[1], c[2], c[3], lo, hi);
        };
        return key(cand) < key(cur);
    }

    // Split leaf t0 across its longest edge; recursively split incompatible
    // neighbors first (longest-edge propagation). Terminates because each
    // propagation step strictly increases the edge order.
    void refine_leaf(SimplexId t0, RefinementReport& rep) {
        std::vector<SimplexId> stack{t0};
        while (!stack.empty()) {
            const SimplexId t = stack.back();
            if (!simplices[t].alive) {
                stack.pop_back();
                continue;
            }
            const int k = longest_edge_index(t);
            const SimplexId n = simplices[t].nbr[k];
            if (n == kNoSimplex) {
                split_boundary(t, k, rep);
                continue;
            }
            const int kn = longest_edge_index(n);
            if (simplices[n].nbr[kn] == t) {
                split_pair(t, k, n, kn, rep);
            } else {
                stack.push_back(n);
            }
        }
    }

    VertexId make_midpoint(VertexId a, VertexId b, bool boundary_edge, RefinementReport& rep) {
        Vertex m;
        m.pos = {(vertices[a].pos.x + vertices[b].pos.x) / 2.0,
                 (vertices[a].pos.y + vertices[b].pos.y) / 2.0};
        if (boundary_edge) {
            const int ma = vertices[a].marker, mb = vertices[b].marker;
            if (ma > 0 && mb > 0) m.marker = std::min(ma, mb);
            else m.marker = std::max(ma, mb);
        } else {
            m.marker = 0;
        }
        const auto id = static_cast<VertexId>(vertices.size());
        vertices.push_back(m);
        rep.new_vertices.push_back({id, a, b});
        return id;
    }

    void relink(SimplexId old_owner, SimplexId nbr, SimplexId new_owner) {
        if (nbr == kNoSimplex) return;
        for (auto& x : simplices[nbr].nbr)
            if (x == old_owner) x = new_owner;
    }

    // Split t across edge k = (a, b) with apex c and midpoint m.
    // Children: ca = (a, m, c), cb = (m, b, c); returns {ca, cb}.
    std::array<SimplexId, 2> split_one(SimplexId t, int k, VertexId m, RefinementReport& rep) {
        const auto& s = simplices[t];
        const VertexId a = s.v[(k + 1) % 3];
        const VertexId b = s.v[(k + 2) % 3];
        const VertexId c = s.v[k];
        const SimplexId nbr_a = s.nbr[(k + 1) % 3]; // across (b, c)
        const SimplexId nbr_b = s.nbr[(k + 2) % 3]; // across (c, a)
        const std::int32_t gen = s.generation + 1;
        const std::int32_t sub = s.subdomain;

        const auto ca = static_cast<SimplexId>(simplices.size());
        const auto cb = ca + 1;
        Simplex sa, sb;
        sa.v = {a, m, c};
        sa.nbr = {cb, nbr_b, kNoSimplex}; // [0] across (m,c), [1] across (c,a), [2] across (a,m)
        sa.generation = gen;
        sa.subdomain = sub;
        sb.v = {m, b, c};
        sb.nbr = {nbr_a, ca, kNoSimplex}; // [0] across (b,c), [1] across (c,m), [2] across (m,b)
        sb.generation = gen;
        sb.subdomain = sub;
        simplices.push_back(sa);
        simplices.push_back(sb);
        simplices[t].alive = false;
        relink(t, nbr_a, cb);
        relink(t, nbr_b, ca);
        // fix anchors that pointed at the split simplex
        if (vertices[a].anchor == t) vertices[a].anchor = ca;
        if (vertices[b].anchor == t) vertices[b].anchor = cb;
        if (vertices[c].anchor == t) vertices[c].anchor = ca;
        if (vertices[m].anchor == kNoSimplex) vertices[m].anchor = ca;
        rep.children.push_back({t, ca, cb});
        ++rep.n_bisections;
        return {ca, cb};
    }

    void split_boundary(SimplexId t, int k, RefinementReport& rep) {
        const auto e = edge(t, k);
        const VertexId m = make_midpoint(e[0], e[1], /*boundary_edge=*/true, rep);
        split_one(t, k, m, rep);
    }

    void split_pair(SimplexId t, int kt, SimplexId n, int kn, RefinementReport& rep) {
        const auto e = edge(t, kt); // (a, b) seen from t; n traverses it as (b, a)
        const VertexId m = make_midpoint(e[0], e[1], /*boundary_edge=*/false, rep);
        const auto ct = split_one(t, kt, m, rep); // {(a,m,ct_apex), (m,b,..)}
        const auto cn = split_one(n, kn, m, rep); // {(b,m,cn_apex), (m,a,..)}
        // cross links across the two halves of the split edge
        // edge (a, m): t-child ct[0] (slot 2) <-> n-child cn[1] (slot 2)
        simplices[ct[0]].nbr[2] = cn[1];
        simplices[cn[1]].nbr[2] = ct[0];
        // edge (m, b): t-child ct[1] (slot 2) <-> n-child cn[0] (slot 2)
        simplices[ct[1]].nbr[2] = cn[0];
        simplices[cn[0]].nbr[2] = ct[1];
    }
};

inline Mesh build_mesh(const std::vector<std::pair<Vec2, int>>& verts,
                       const std::vector<std::array<VertexId, 3>>& tris) {
    Mesh m;
    m.vertices.reserve(verts.size());
    for (const auto& [pos, marker] : verts) {
        Vertex v;
        v.pos = pos;
        v.marker = marker;
        m.vertices.push_back(v);
    }
    m.simplices.reserve(tris.size());
    for (const auto& t : tris) {
        for (const VertexId v : t)
            if (v >= m.vertices.size()) throw Error("build_mesh: triangle references invalid vertex");
        Simplex s;
        s.v = t;
        m.simplices.push_back(s);
    }
    // orient counterclockwise
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        double area = m.signed_area(t);
        if (area < 0.0) {
            std::swap(m.simplices[t].v[1], m.simplices[t].v[2]);
            area = m.signed_area(t);
        }
        if (!(area > 0.0)) throw DegenerateSimplex("build_mesh: simplex " + std::to_string(t) + " has area <= 0");
    }
    // neighbor links from a directed edge map; after CCW orientation an
    // interior edge must be traversed once in each direction
    std::vector<std::pair<std::uint64_t, std::pair<SimplexId, int>>> dir;
    dir.reserve(3 * m.simplices.size());
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        for (int k = 0; k < 3; ++k) {
            const auto e = m.edge(t, k);
            dir.emplace_back((std::uint64_t(e[0]) << 32) | e[1], std::make_pair(t, k));
        }
    auto undirected = [](std::uint64_t key) {
        const auto a = static_cast<VertexId>(key >> 32);
        const auto b = static_cast<VertexId>(key & 0xffffffffu);
        return (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
    };
    std::sort(dir.begin(), dir.end(), [&](const auto& x, const auto& y) {
        return undirected(x.first) < undirected(y.first);
    });
    for (std::size_t i = 0; i < dir.size();) {
        std::size_t j = i;
        while (j < dir.size() && undirected(dir[j].first) == undirected(dir[i].first)) ++j;
        const std::size_t cnt = j - i;
        if (cnt == 2) {
            if (dir[i].first == dir[i + 1].first)
                throw NonConforming("build_mesh: edge traversed twice in the same direction");
            const auto [t0, k0] = dir[i].second;
            const auto [t1, k1] = dir[i + 1].second;
            m.simplices[t0].nbr[k0] = t1;
            m.simplices[t1].nbr[k1] = t0;
        } else if (cnt != 1) {
            throw NonConforming("build_mesh: edge shared by " + std::to_string(cnt) + " triangles");
        }
        i = j;
    }
    // anchors; every vertex must be referenced
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        for (const VertexId v : m.simplices[t].v)
            if (m.vertices[v].anchor == kNoSimplex) m.vertices[v].anchor = t;
    for (VertexId v = 0; v < m.vertices.size(); ++v)
        if (m.vertices[v].anchor == kNoSimplex)
            throw DanglingVertex("build_mesh: vertex " + std::to_string(v) + " not referenced");
    // genealogy fingerprint of the initial mesh
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& v : m.vertices) {
        h = detail::fnv1a(h, &v.pos.x, sizeof(double));
        h = detail::fnv1a(h, &v.pos.y, sizeof(double));
        h = detail::fnv1a(h, &v.marker, sizeof(int));
    }
    for (const auto& s : m.simplices)
        h = detail::fnv1a(h, s.v.data(), sizeof(VertexId) * 3);
    m.fingerprint_ = h;
    return m;
}

// Coarsest common conforming refinement of two meshes refined from the same
// initial mesh. Starting from a copy of `a`, any simplex that some simplex of
// `b` subdivides further is bisected; deterministic bisection makes the
// generation comparison meaningful across copies.
inline Mesh reconcile(const Mesh& a, const Mesh& b) {
    if (a.fingerprint() != b.fingerprint())
        throw IncompatibleGenealogy("reconcile: meshes do not share the initial mesh fingerprint");
    Mesh out = a;
    while (true) {
        std::vector<SimplexId> marks;
        SimplexId hint = kNoSimplex;
        for (SimplexId t = 0; t < out.simplices.size(); ++t) {
            if (!out.simplices[t].alive) continue;
            const Located loc = b.locate_point(out.centroid(t), hint);
            hint = loc.simplex;
            if (b.simplices[loc.simplex].generation > out.simplices[t].generation)
                marks.push_back(t);
        }
        if (marks.empty()) break;
        out.bisect(std::move(marks));
    }
    return out;
}

} // namespace ppum

#endif // PPUM_MESH_HPP
