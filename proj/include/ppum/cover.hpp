#ifndef PPUM_COVER_HPP
#define PPUM_COVER_HPP

// Error-weighted mesh partitioning (inertial and spectral recursive
// bisection), overlap extension via boundary-vertex 1-rings, and the
// piecewise-linear partition of unity with its certified constants.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <tuple>
#include <vector>

#include "ppum/linalg.hpp"
#include "ppum/mesh.hpp"
#include "ppum/quadrature.hpp"

namespace ppum {

struct Partition {
    std::vector<int> subdomain_of; // per simplex id; -1 for dead entries
    int p = 1;
    std::vector<double> weights;
    bool spectral_fallback = false; // eigen solve failed, inertial split used
};

struct Cover {
    std::vector<std::vector<SimplexId>> member; // sorted simplex ids per subdomain
    std::vector<int> owner_of_vertex;           // disjoint vertex ownership
    int layers = 1;
    int p = 1;

    bool is_member(int i, SimplexId t) const {
        const auto& v = member[static_cast<std::size_t>(i)];
        return std::binary_search(v.begin(), v.end(), t);
    }
};

struct PuReport {
    int M = 1;             // max per-simplex subdomain membership count
    double C_inf = 1.0;    // sup-norm bound of the phi_i
    double C_G = 0.0;      // max gradient norm of any phi_i over any simplex
    double diam_min = 0.0; // min subdomain diameter
    double sum_residual = 0.0;
};

namespace cover_detail {

inline std::uint64_t lcg_next(std::uint64_t& s) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return s;
}

inline double lcg_unit(std::uint64_t& s) {
    return static_cast<double>(lcg_next(s) >> 11) / 9007199254740992.0;
}

// connected components of a simplex subset under face adjacency; returns
// component index per position in ids
inline std::vector<int> components(const Mesh& mesh, const std::vector<SimplexId>& ids) {
    std::vector<int> comp(ids.size(), -1);
    std::vector<std::size_t> pos_of(mesh.simplices.size(), SIZE_MAX);
    for (std::size_t k = 0; k < ids.size(); ++k) pos_of[ids[k]] = k;
    int nc = 0;
    std::vector<std::size_t> stack;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (comp[k] >= 0) continue;
        comp[k] = nc;
        stack.push_back(k);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            for (const SimplexId n : mesh.simplices[ids[cur]].nbr) {
                if (n == kNoSimplex) continue;
                const std::size_t pn = pos_of[n];
                if (pn != SIZE_MAX && comp[pn] < 0) {
                    comp[pn] = nc;
                    stack.push_back(pn);
                }
            }
        }
        ++nc;
    }
    return comp;
}

// weighted-median split of ids sorted by score; both sides kept nonempty
inline std::size_t median_split(const std::vector<SimplexId>& ids,
                                const std::vector<double>& score,
                                const std::vector<double>& weights,
                                std::vector<SimplexId>& order) {
    order.resize(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](SimplexId a, SimplexId b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return ids[a] < ids[b];
    });
    double total = 0.0;
    for (const SimplexId t : ids) total += weights[t];
    double cum = 0.0;
    std::size_t cut = ids.size() - 1;
    for (std::size_t k = 0; k < order.size(); ++k) {
        cum += weights[ids[order[k]]];
        if (cum >= 0.5 * total) {
            cut = k;
            break;
        }
    }
    if (cut + 1 >= ids.size()) cut = ids.size() - 2; // keep the right side nonempty
    return cut; // left = order[0..cut], right = order[cut+1..]
}

// migrate stranded components to the other side of a two-way split
inline void repair_split(const Mesh& mesh, const std::vector<double>& weights,
                         std::vector<SimplexId>& left, std::vector<SimplexId>& right) {
    for (int pass = 0; pass < 10; ++pass) {
        bool moved = false;
        for (int side = 0; side < 2; ++side) {
            std::vector<SimplexId>& mine = side == 0 ? left : right;
            std::vector<SimplexId>& other = side == 0 ? right : left;
            if (mine.size() <= 1) continue;
            std::sort(mine.begin(), mine.end());
            const auto comp = components(mesh, mine);
            const int nc = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
            if (nc <= 1) continue;
            // keep the heaviest component (ties: the one containing the smallest id)
            std::vector<double> cw(nc, 0.0);
            for (std::size_t k = 0; k < mine.size(); ++k) cw[comp[k]] += weights[mine[k]];
            int keep = 0;
            for (int c = 1; c < nc; ++c)
                if (cw[c] > cw[keep]) keep = c;
            std::vector<SimplexId> stay;
            for (std::size_t k = 0; k < mine.size(); ++k) {
                if (comp[k] == keep) stay.push_back(mine[k]);
                else other.push_back(mine[k]);
            }
            if (stay.size() != mine.size()) moved = true;
            mine = std::move(stay);
        }
        if (!moved) break;
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
}

inline std::tuple<std::vector<double>, double> principal_axis_scores(
    const Mesh& mesh, const std::vector<SimplexId>& ids, const std::vector<double>& weights) {
    double W = 0.0;
    Vec2 mu{0.0, 0.0};
    for (const SimplexId t : ids) {
        const Vec2 c = mesh.centroid(t);
        const double w = weights[t];
        mu.x += w * c.x;
        mu.y += w * c.y;
        W += w;
    }
    if (W > 0.0) {
        mu.x /= W;
        mu.y /= W;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const SimplexId t : ids) {
        const Vec2 c = mesh.centroid(t);
        const double w = weights[t];
        sxx += w * (c.x - mu.x) * (c.x - mu.x);
        sxy += w * (c.x - mu.x) * (c.y - mu.y);
        syy += w * (c.y - mu.y) * (c.y - mu.y);
    }
    // principal eigenvector of [[sxx sxy][sxy syy]]; near-isotropic clouds
    // fall back to the x axis so the choice stays deterministic
    const double tr = sxx + syy;
    const double disc = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
    const double lmax = 0.5 * (tr + disc);
    Vec2 axis{1.0, 0.0};
    if (disc > 1e-12 * std::max(tr, 1e-300)) {
        const Vec2 c1{sxy, lmax - sxx};
        const Vec2 c2{lmax - syy, sxy};
        axis = dot(c1, c1) > dot(c2, c2) ? c1 : c2;
        const double n = norm(axis);
        axis = {axis.x / n, axis.y / n};
        if (axis.x < 0.0 || (axis.x == 0.0 && axis.y < 0.0)) axis = {-axis.x, -axis.y};
    }
    std::vector<double> score(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Vec2 c = mesh.centroid(ids[k]);
        score[k] = dot(c, axis);
    }
    return {score, W};
}

} // namespace cover_detail

struct FiedlerResult {
    std::vector<double> vector;
    double eigenvalue = 0.0;
    std::size_t iterations = 0;
};

// eigenvector of the second-smallest Laplacian eigenvalue via deflated power
// iteration on the shifted operator sigma*I - L; sign fixed by the first
// nonzero entry
inline FiedlerResult fiedler_vector(const CsrMatrix& laplacian, double tol = 1e-8,
                                    std::size_t max_iter = 0) {
    const std::size_t n = laplacian.rows();
    if (n < 2) throw Error("fiedler_vector: need at least 2 nodes");
    double sigma = 0.0;
    for (std::size_t i = 0; i < n; ++i) sigma = std::max(sigma, laplacian.get(i, i));
    sigma = 2.0 * sigma + 1.0;
    if (max_iter == 0) max_iter = 400 * n + 2000;

    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
    std::vector<double> v(n);
    for (auto& x : v) x = 2.0 * cover_detail::lcg_unit(seed) - 1.0;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto deflate = [&](std::vector<double>& w) {
        double mean = 0.0;
        for (double x : w) mean += x;
        mean /= static_cast<double>(n);
        for (auto& x : w) x -= mean;
    };
    auto normalize = [&](std::vector<double>& w) {
        const double nn = norm2(w);
        if (nn == 0.0) throw EigenNoConvergence("fiedler_vector: degenerate iterate");
        for (auto& x : w) x /= nn;
    };
    deflate(v);
    normalize(v);
    std::vector<double> lv, w(n);
    FiedlerResult out;
    for (std::size_t it = 0; it < max_iter; ++it) {
        laplacian.multiply(v, lv);
        for (std::size_t i = 0; i < n; ++i) w[i] = sigma * v[i] - lv[i];
        deflate(w);
        normalize(w);
        v.swap(w);
        if (it % 8 == 7 || it + 1 == max_iter) {
            laplacian.multiply(v, lv);
            const double lambda = dot(v, lv);
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) res += (lv[i] - lambda * v[i]) * (lv[i] - lambda * v[i]);
            if (std::sqrt(res) <= tol) {
                out.vector = v;
                out.eigenvalue = lambda;
                out.iterations = it + 1;
                for (std::size_t i = 0; i < n; ++i) {
                    if (std::abs(out.vector[i]) > 1e-12 * inv_sqrt_n) {
                        if (out.vector[i] < 0.0)
                            for (auto& x : out.vector) x = -x;
                        break;
                    }
                }
                return out;
            }
        }
    }
    throw EigenNoConvergence("fiedler_vector: no convergence in " + std::to_string(max_iter) +
                             " iterations");
}

// graph Laplacian of the face-adjacency dual graph of a simplex subset
inline CsrMatrix dual_laplacian(const Mesh& mesh, const std::vector<SimplexId>& ids) {
    std::vector<std::size_t> pos_of(mesh.simplices.size(), SIZE_MAX);
    for (std::size_t k = 0; k < ids.size(); ++k) pos_of[ids[k]] = k;
    std::vector<std::pair<std::size_t, std::size_t>> pattern;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        pattern.emplace_back(k, k);
        for (const SimplexId nb : mesh.simplices[ids[k]].nbr) {
            if (nb == kNoSimplex) continue;
            const std::size_t pn = pos_of[nb];
            if (pn != SIZE_MAX) pattern.emplace_back(k, pn);
        }
    }
    CsrMatrix L(ids.size(), std::move(pattern));
    for (std::size_t k = 0; k < ids.size(); ++k) {
        for (const SimplexId nb : mesh.simplices[ids[k]].nbr) {
            if (nb == kNoSimplex) continue;
            const std::size_t pn = pos_of[nb];
            if (pn != SIZE_MAX) {
                L.add(k, k, 1.0);
                L.add(k, pn, -1.0);
            }
        }
    }
    return L;
}

namespace cover_detail {

enum class SplitKind { Inertial, Spectral };

inline void split_two(const Mesh& mesh, const std::vector<double>& weights,
                      const std::vector<SimplexId>& ids, SplitKind kind, bool& fallback,
                      std::vector<SimplexId>& left, std::vector<SimplexId>& right) {
    left.clear();
    right.clear();
    if (kind == SplitKind::Spectral) {
        const auto comp = components(mesh, ids);
        const int nc = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
        if (nc > 1) {
            // disconnected dual graph: pre-split whole components, heaviest first
            std::vector<double> cw(nc, 0.0);
            for (std::size_t k = 0; k < ids.size(); ++k) cw[comp[k]] += weights[ids[k]];
            std::vector<int> order(nc);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (cw[a] != cw[b]) return cw[a] > cw[b];
                return a < b;
            });
            std::vector<int> side(nc, 0);
            double wl = 0.0, wr = 0.0;
            for (const int c : order) {
                if (wl <= wr) {
                    side[c] = 0;
                    wl += cw[c];
                } else {
                    side[c] = 1;
                    wr += cw[c];
                }
            }
            for (std::size_t k = 0; k < ids.size(); ++k)
                (side[comp[k]] == 0 ? left : right).push_back(ids[k]);
            if (left.empty() || right.empty()) {
                // single nonempty group; fall through to a median split instead
                left.clear();
                right.clear();
            } else {
                std::sort(left.begin(), left.end());
                std::sort(right.begin(), right.end());
                return;
            }
        }
        try {
            const CsrMatrix L = dual_laplacian(mesh, ids);
            const FiedlerResult f = fiedler_vector(L, 1e-6);
            std::vector<SimplexId> order;
            const std::size_t cut = median_split(ids, f.vector, weights, order);
            for (std::size_t k = 0; k < ids.size(); ++k)
                (k <= cut ? left : right).push_back(ids[order[k]]);
            repair_split(mesh, weights, left, right);
            return;
        } catch (const EigenNoConvergence&) {
            fallback = true; // fall back to the inertial split below
        }
    }
    auto [score, W] = principal_axis_scores(mesh, ids, weights);
    (void)W;
    std::vector<SimplexId> order;
    const std::size_t cut = median_split(ids, score, weights, order);
    for (std::size_t k = 0; k < ids.size(); ++k)
        (k <= cut ? left : right).push_back(ids[order[k]]);
    repair_split(mesh, weights, left, right);
}

inline Partition partition_recursive(const Mesh& mesh, const std::vector<double>& weights, int p,
                                     SplitKind kind) {
    if (p < 1 || (p & (p - 1)) != 0) throw Error("partition: p must be a power of 2");
    std::vector<SimplexId> ids;
    for (SimplexId t = 0; t < mesh.simplices.size(); ++t)
        if (mesh.simplices[t].alive) ids.push_back(t);
    if (ids.size() < static_cast<std::size_t>(p))
        throw TooFewSimplices("partition: fewer live simplices than subdomains");
    double total = 0.0;
    for (const SimplexId t : ids) total += weights[t];
    if (!(total > 0.0)) throw Error("partition: total weight must be positive");

    Partition part;
    part.p = p;
    part.weights = weights;
    part.subdomain_of.assign(mesh.simplices.size(), -1);

    struct Item {
        std::vector<SimplexId> ids;
        int lo, hi;
    };
    std::vector<Item> work{{ids, 0, p}};
    while (!work.empty()) {
        Item it = std::move(work.back());
        work.pop_back();
        if (it.hi - it.lo == 1) {
            for (const SimplexId t : it.ids) part.subdomain_of[t] = it.lo;
            continue;
        }
        std::vector<SimplexId> left, right;
        split_two(mesh, weights, it.ids, kind, part.spectral_fallback, left, right);
        const int mid = it.lo + (it.hi - it.lo) / 2;
        if (left.size() < static_cast<std::size_t>(mid - it.lo) ||
            right.size() < static_cast<std::size_t>(it.hi - mid))
            throw TooFewSimplices("partition: a split side has fewer simplices than subdomains");
        work.push_back({std::move(left), it.lo, mid});
        work.push_back({std::move(right), mid, it.hi});
    }
    return part;
}

} // namespace cover_detail

inline Partition partition_inertial(const Mesh& mesh, const std::vector<double>& weights, int p) {
    return cover_detail::partition_recursive(mesh, weights, p, cover_detail::SplitKind::Inertial);
}

inline Partition partition_spectral(const Mesh& mesh, const std::vector<double>& weights, int p) {
    return cover_detail::partition_recursive(mesh, weights, p, cover_detail::SplitKind::Spectral);
}

// overlap extension: each round adds the full 1-ring of every boundary vertex
// of the current member set
inline Cover extend_overlap(const Mesh& mesh, const Partition& part, int layers) {
    if (layers < 1) throw Error("extend_overlap: layers must be >= 1");
    Cover cover;
    cover.p = part.p;
    cover.layers = layers;
    cover.owner_of_vertex.assign(mesh.vertices.size(), -1);
    for (SimplexId t = 0; t < mesh.simplices.size(); ++t) {
        if (!mesh.simplices[t].alive) continue;
        const int sd = part.subdomain_of[t];
        for (const VertexId v : mesh.simplices[t].v) {
            int& o = cover.owner_of_vertex[v];
            if (o < 0 || sd < o) o = sd;
        }
    }
    cover.member.resize(static_cast<std::size_t>(part.p));
    for (int i = 0; i < part.p; ++i) {
        std::vector<char> in(mesh.simplices.size(), 0);
        for (SimplexId t = 0; t < mesh.simplices.size(); ++t)
            if (mesh.simplices[t].alive && part.subdomain_of[t] == i) in[t] = 1;
        for (int round = 0; round < layers; ++round) {
            std::vector<char> vtouch(mesh.vertices.size(), 0), vout(mesh.vertices.size(), 0);
            for (SimplexId t = 0; t < mesh.simplices.size(); ++t) {
                if (!mesh.simplices[t].alive) continue;
                for (const VertexId v : mesh.simplices[t].v)
                    (in[t] ? vtouch : vout)[v] = 1;
            }
            std::vector<char> next = in;
            for (SimplexId t = 0; t < mesh.simplices.size(); ++t) {
                if (!mesh.simplices[t].alive || in[t]) continue;
                for (const VertexId v : mesh.simplices[t].v)
                    if (vtouch[v] && vout[v]) next[t] = 1; // 1-ring of a boundary vertex
            }
            in = std::move(next);
        }
        auto& mem = cover.member[static_cast<std::size_t>(i)];
        for (SimplexId t = 0; t < mesh.simplices.size(); ++t)
            if (in[t]) mem.push_back(t);
    }
    return cover;
}

class PartitionOfUnity {
public:
    std::shared_ptr<const Mesh> coarse;
    std::vector<std::vector<double>> coeffs; // [subdomain][vertex]
    PuReport report;
    int p = 1;

    // phi_i and its gradient inside a located coarse simplex
    double value(int i, const Located& loc) const {
        const auto& s = coarse->simplices[loc.simplex];
        const auto& c = coeffs[static_cast<std::size_t>(i)];
        return c[s.v[0]] * loc.bary[0] + c[s.v[1]] * loc.bary[1] + c[s.v[2]] * loc.bary[2];
    }

    Vec2 gradient(int i, SimplexId t) const {
        const auto& s = coarse->simplices[t];
        const auto& c = coeffs[static_cast<std::size_t>(i)];
        const Vec2& p0 = coarse->vertices[s.v[0]].pos;
        const Vec2& p1 = coarse->vertices[s.v[1]].pos;
        const Vec2& p2 = coarse->vertices[s.v[2]].pos;
        const double inv = 1.0 / (2.0 * 0.5 * cross(p1 - p0, p2 - p0));
        Vec2 g{0.0, 0.0};
        const std::array<Vec2, 3> gh = {Vec2{(p1.y - p2.y) * inv, (p2.x - p1.x) * inv},
                                        Vec2{(p2.y - p0.y) * inv, (p0.x - p2.x) * inv},
                                        Vec2{(p0.y - p1.y) * inv, (p1.x - p0.x) * inv}};
        for (int k = 0; k < 3; ++k) {
            g.x += c[s.v[k]] * gh[k].x;
            g.y += c[s.v[k]] * gh[k].y;
        }
        return g;
    }

    // true when phi_i vanishes identically on the coarse simplex
    bool zero_on(int i, SimplexId t) const {
        const auto& s = coarse->simplices[t];
        const auto& c = coeffs[static_cast<std::size_t>(i)];
        return c[s.v[0]] == 0.0 && c[s.v[1]] == 0.0 && c[s.v[2]] == 0.0;
    }
};

// phi_i = sum of nodal hat functions of the vertices owned by subdomain i
inline PartitionOfUnity build_pu(std::shared_ptr<const Mesh> mesh, const Cover& cover) {
    PartitionOfUnity pu;
    pu.coarse = std::move(mesh);
    pu.p = cover.p;
    const Mesh& m = *pu.coarse;
    pu.coeffs.assign(static_cast<std::size_t>(cover.p), std::vector<double>(m.vertices.size(), 0.0));
    for (VertexId v = 0; v < m.vertices.size(); ++v) {
        const int o = cover.owner_of_vertex[v];
        if (o >= 0) pu.coeffs[static_cast<std::size_t>(o)][v] = 1.0;
    }
    // support containment: the hat of every owned vertex must stay inside the
    // owner's overlapped subdomain
    for (VertexId v = 0; v < m.vertices.size(); ++v) {
        const int o = cover.owner_of_vertex[v];
        if (o < 0) continue;
        for (const SimplexId t : m.ring(v))
            if (!cover.is_member(o, t))
                throw SupportViolation("build_pu: hat support of vertex " + std::to_string(v) +
                                       " leaves subdomain " + std::to_string(o) +
                                       "; rebuild the cover with layers >= 1");
    }
    // certified constants
    std::vector<int> count(m.simplices.size(), 0);
    for (int i = 0; i < cover.p; ++i)
        for (const SimplexId t : cover.member[static_cast<std::size_t>(i)]) ++count[t];
    int M = 1;
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        if (m.simplices[t].alive) M = std::max(M, count[t]);
    pu.report.M = M;
    double cinf = 0.0;
    for (const auto& c : pu.coeffs)
        for (const double x : c) cinf = std::max(cinf, std::abs(x));
    pu.report.C_inf = cinf;
    double cg = 0.0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const auto& s = m.simplices[t];
        std::array<int, 3> owners{cover.owner_of_vertex[s.v[0]], cover.owner_of_vertex[s.v[1]],
                                  cover.owner_of_vertex[s.v[2]]};
        for (int k = 0; k < 3; ++k) {
            bool dup = false;
            for (int j = 0; j < k; ++j) dup |= owners[j] == owners[k];
            if (dup || owners[k] < 0) continue;
            cg = std::max(cg, norm(pu.gradient(owners[k], t)));
        }
    }
    pu.report.C_G = cg;
    double diam_min = 0.0;
    bool first = true;
    for (int i = 0; i < cover.p; ++i) {
        std::vector<VertexId> vs;
        for (const SimplexId t : cover.member[static_cast<std::size_t>(i)])
            for (const VertexId v : m.simplices[t].v) vs.push_back(v);
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        double d2 = 0.0;
        for (std::size_t a = 0; a < vs.size(); ++a)
            for (std::size_t b = a + 1; b < vs.size(); ++b)
                d2 = std::max(d2, dist2(m.vertices[vs[a]].pos, m.vertices[vs[b]].pos));
        const double d = std::sqrt(d2);
        if (first || d < diam_min) diam_min = d;
        first = false;
    }
    pu.report.diam_min = diam_min;
    double sr = 0.0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const auto& s = m.simplices[t];
        double sum = 0.0;
        for (int i = 0; i < cover.p; ++i)
            for (int k = 0; k < 3; ++k)
                sum += pu.coeffs[static_cast<std::size_t>(i)][s.v[k]] / 3.0;
        sr = std::max(sr, std::abs(sum - 1.0));
    }
    pu.report.sum_residual = sr;
    return pu;
}

// --- certification helpers ----------------------------------------------------

struct PuCertificate {
    double sum_max_dev = 0.0; // max |sum_i phi_i - 1| over sampled points
    bool support_ok = true;
    int M_reported = 1;
    int M_bruteforce = 1;
    double C_inf = 0.0;
    bool coefficients_binary = true; // every coefficient is 0 or 1
    bool pass(double tol = 1e-12) const {
        return sum_max_dev <= tol && support_ok && M_reported == M_bruteforce;
    }
};

inline PuCertificate certify_pu(const PartitionOfUnity& pu, const Cover& cover,
                                int n_points = 1000, std::uint64_t seed = 1234) {
    PuCertificate cert;
    const Mesh& m = *pu.coarse;
    std::vector<SimplexId> live;
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        if (m.simplices[t].alive) live.push_back(t);
    std::uint64_t s = seed;
    for (int k = 0; k < n_points; ++k) {
        const SimplexId t = live[cover_detail::lcg_next(s) % live.size()];
        double b0 = cover_detail::lcg_unit(s), b1 = cover_detail::lcg_unit(s);
        if (b0 + b1 > 1.0) {
            b0 = 1.0 - b0;
            b1 = 1.0 - b1;
        }
        const Located loc{t, {b0, b1, 1.0 - b0 - b1}};
        double sum = 0.0;
        for (int i = 0; i < pu.p; ++i) sum += pu.value(i, loc);
        cert.sum_max_dev = std::max(cert.sum_max_dev, std::abs(sum - 1.0));
    }
    for (int i = 0; i < pu.p; ++i)
        for (SimplexId t = 0; t < m.simplices.size(); ++t) {
            if (!m.simplices[t].alive) continue;
            if (!cover.is_member(i, t) && !pu.zero_on(i, t)) cert.support_ok = false;
        }
    std::vector<int> count(m.simplices.size(), 0);
    for (int i = 0; i < cover.p; ++i)
        for (const SimplexId t : cover.member[static_cast<std::size_t>(i)]) ++count[t];
    cert.M_bruteforce = 1;
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        if (m.simplices[t].alive) cert.M_bruteforce = std::max(cert.M_bruteforce, count[t]);
    cert.M_reported = pu.report.M;
    cert.C_inf = pu.report.C_inf;
    for (const auto& c : pu.coeffs)
        for (const double x : c)
            if (x != 0.0 && x != 1.0) cert.coefficients_binary = false;
    return cert;
}

// H1(subset)^2 = L2^2 + seminorm^2 of a nodal P1 field over a simplex subset
inline std::pair<double, double> norms2_on_subset(const Mesh& m, const std::vector<double>& nodal,
                                                  const std::vector<char>& in_subset) {
    const auto& rule = tri_quadrature();
    double l2 = 0.0, h1 = 0.0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive || !in_subset[t]) continue;
        const auto& s = m.simplices[t];
        const Vec2& p0 = m.vertices[s.v[0]].pos;
        const Vec2& p1 = m.vertices[s.v[1]].pos;
        const Vec2& p2 = m.vertices[s.v[2]].pos;
        const double area = 0.5 * cross(p1 - p0, p2 - p0);
        const double inv = 1.0 / (2.0 * area);
        const std::array<Vec2, 3> gh = {Vec2{(p1.y - p2.y) * inv, (p2.x - p1.x) * inv},
                                        Vec2{(p2.y - p0.y) * inv, (p0.x - p2.x) * inv},
                                        Vec2{(p0.y - p1.y) * inv, (p1.x - p0.x) * inv}};
        Vec2 g{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            g.x += nodal[s.v[k]] * gh[k].x;
            g.y += nodal[s.v[k]] * gh[k].y;
        }
        for (const auto& qp : rule) {
            double v = 0.0;
            for (int k = 0; k < 3; ++k) v += nodal[s.v[k]] * qp.bary[k];
            l2 += qp.weight * area * v * v;
        }
        h1 += area * dot(g, g);
    }
    return {l2, h1};
}

struct LemmaCheckResult {
    int violations_subadditivity = 0; // sum_i ||w||^2_{Omega_i} <= M ||w||^2
    int violations_superposition = 0; // ||sum w_i||^2 <= M sum_i ||w_i||^2_{Omega_i}
    double worst_ratio_1 = 0.0;
    double worst_ratio_2 = 0.0;
    bool pass() const { return violations_subadditivity == 0 && violations_superposition == 0; }
};

// numeric check of the overlap inequalities for random nodal fields and random
// tuples of locally supported fields
inline LemmaCheckResult lemma_overlap_check(const Mesh& m, const Cover& cover, int M,
                                            int n_samples = 50, std::uint64_t seed = 7) {
    LemmaCheckResult out;
    std::uint64_t s = seed;
    std::vector<std::vector<char>> in(static_cast<std::size_t>(cover.p),
                                      std::vector<char>(m.simplices.size(), 0));
    for (int i = 0; i < cover.p; ++i)
        for (const SimplexId t : cover.member[static_cast<std::size_t>(i)])
            in[static_cast<std::size_t>(i)][t] = 1;
    std::vector<char> all(m.simplices.size(), 0);
    for (SimplexId t = 0; t < m.simplices.size(); ++t)
        if (m.simplices[t].alive) all[t] = 1;
    // vertices interior to each subdomain: full ring inside the member set
    std::vector<std::vector<VertexId>> interior(static_cast<std::size_t>(cover.p));
    for (VertexId v = 0; v < m.vertices.size(); ++v) {
        const auto r = m.ring(v);
        for (int i = 0; i < cover.p; ++i) {
            bool inside = !r.empty();
            for (const SimplexId t : r) inside &= in[static_cast<std::size_t>(i)][t] != 0;
            if (inside) interior[static_cast<std::size_t>(i)].push_back(v);
        }
    }
    for (int k = 0; k < n_samples; ++k) {
        std::vector<double> w(m.vertices.size());
        for (auto& x : w) x = 2.0 * cover_detail::lcg_unit(s) - 1.0;
        const auto [l2, h1] = norms2_on_subset(m, w, all);
        const double whole = l2 + h1;
        double parts = 0.0;
        for (int i = 0; i < cover.p; ++i) {
            const auto [pl2, ph1] = norms2_on_subset(m, w, in[static_cast<std::size_t>(i)]);
            parts += pl2 + ph1;
        }
        const double ratio = parts / std::max(whole, 1e-300);
        out.worst_ratio_1 = std::max(out.worst_ratio_1, ratio);
        if (parts > M * whole * (1.0 + 1e-12)) ++out.violations_subadditivity;
    }
    for (int k = 0; k < n_samples; ++k) {
        std::vector<double> wsum(m.vertices.size(), 0.0);
        double parts = 0.0;
        for (int i = 0; i < cover.p; ++i) {
            std::vector<double> wi(m.vertices.size(), 0.0);
            for (const VertexId v : interior[static_cast<std::size_t>(i)])
                wi[v] = 2.0 * cover_detail::lcg_unit(s) - 1.0;
            for (VertexId v = 0; v < m.vertices.size(); ++v) wsum[v] += wi[v];
            const auto [pl2, ph1] = norms2_on_subset(m, wi, in[static_cast<std::size_t>(i)]);
            parts += pl2 + ph1;
        }
        const auto [l2, h1] = norms2_on_subset(m, wsum, all);
        const double whole = l2 + h1;
        const double ratio = whole / std::max(parts, 1e-300);
        out.worst_ratio_2 = std::max(out.worst_ratio_2, ratio);
        if (whole > M * parts * (1.0 + 1e-12)) ++out.violations_superposition;
    }
    return out;
}

inline void write_partition_csv(const Partition& part, std::ostream& os) {
    os << "simplex_id,subdomain\n";
    for (std::size_t t = 0; t < part.subdomain_of.size(); ++t)
        if (part.subdomain_of[t] >= 0) os << t << ',' << part.subdomain_of[t] << '\n';
}

} // namespace ppum

#endif // PPUM_COVER_HPP
