#ifndef PPUM_ESTIMATE_HPP
#define PPUM_ESTIMATE_HPP

// A posteriori residual error indicators, bulk marking, and the duality
// machinery: linearized dual solves with localized data and the resulting
// goal-error terms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ppum/cover.hpp"
#include "ppum/fem.hpp"

namespace ppum {

struct ErrorIndicator {
    std::vector<double> eta; // per simplex id, 0 for dead entries
    double total = 0.0;      // (sum eta_t^2)^(1/2)

    void recompute_total() {
        double s = 0.0;
        for (const double e : eta) s += e * e;
        total = std::sqrt(s);
    }
};

struct GoalFunctional {
    std::string name;
    std::function<double(const Vec2&)> psi; // Riesz representer of l(.)
};

struct DualSolution {
    std::vector<FeFunction> omega; // one localized dual per subdomain
    std::string dual_space;        // which mesh family it lives on
};

// eta_t^2 = h_t^2 ||r||^2_{L2(T)} + 1/2 sum_e h_e ||[flux . n]_e||^2_{L2(e)}
// with r the strong-form residual at quadrature points (the source part; the
// elementwise P1 flux is divergence-free for the built-in constant tensors)
// and the jump split half per adjacent element.
inline ErrorIndicator residual_indicator(const WeakProblem& problem, const FeFunction& u) {
    const Mesh& m = u.space().mesh();
    ErrorIndicator ind;
    ind.eta.assign(m.simplices.size(), 0.0);
    const auto& rule = tri_quadrature();
    const auto& erule = edge_quadrature();

    // elementwise gradients and fluxes are reused by the jump terms
    std::vector<Vec2> grad(m.simplices.size(), Vec2{0.0, 0.0});
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        for (int k = 0; k < 3; ++k) {
            grad[t].x += u.nodal()[s.v[k]] * g.grad[k].x;
            grad[t].y += u.nodal()[s.v[k]] * g.grad[k].y;
        }
    }
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        double h_t2 = 0.0;
        for (int k = 0; k < 3; ++k) h_t2 = std::max(h_t2, m.edge_len2(t, k));

        double elem = 0.0;
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            double uval = 0.0;
            for (int k = 0; k < 3; ++k) uval += u.nodal()[s.v[k]] * qp.bary[k];
            const ResidualTerm f = problem.residual_form(x, uval, grad[t]);
            fem_detail::check_finite(f.source, "indicator source");
            elem += qp.weight * g.area * f.source * f.source;
        }
        double jump = 0.0;
        for (int k = 0; k < 3; ++k) {
            const SimplexId n = s.nbr[k];
            if (n == kNoSimplex) continue;
            const auto e = m.edge(t, k);
            const Vec2& a = m.vertices[e[0]].pos;
            const Vec2& b = m.vertices[e[1]].pos;
            const Vec2 tang = b - a;
            const double len = norm(tang);
            // outward normal of t on this edge (t is CCW, edge traversed a->b)
            const Vec2 nrm{tang.y / len, -tang.x / len};
            double je2 = 0.0;
            for (const auto& eq : erule) {
                const Vec2 x{a.x + eq.t * tang.x, a.y + eq.t * tang.y};
                const Located lt{t, m.barycentric(t, x)};
                double uval = 0.0;
                for (int kk = 0; kk < 3; ++kk) uval += u.nodal()[s.v[kk]] * lt.bary[kk];
                const ResidualTerm ft = problem.residual_form(x, uval, grad[t]);
                const ResidualTerm fn = problem.residual_form(x, uval, grad[n]);
                const double j = dot(ft.flux, nrm) - dot(fn.flux, nrm);
                je2 += eq.weight * len * j * j;
            }
            jump += 0.5 * len * je2; // h_e = edge length, half per adjacent element
        }
        const double eta2 = h_t2 * elem + jump;
        ind.eta[t] = std::sqrt(eta2);
    }
    ind.recompute_total();
    return ind;
}

inline ErrorIndicator restrict_indicator(const ErrorIndicator& ind,
                                         const std::vector<char>& region) {
    ErrorIndicator out = ind;
    for (std::size_t t = 0; t < out.eta.size(); ++t)
        if (t >= region.size() || !region[t]) out.eta[t] = 0.0;
    out.recompute_total();
    return out;
}

inline ErrorIndicator restrict_indicator(const ErrorIndicator& ind,
                                         const std::vector<SimplexId>& region_ids) {
    std::vector<char> region(ind.eta.size(), 0);
    for (const SimplexId t : region_ids)
        if (t < region.size()) region[t] = 1;
    return restrict_indicator(ind, region);
}

// Dörfler bulk marking: smallest prefix in decreasing-eta order (ties by id)
// whose squared sum reaches theta * total^2
inline std::vector<SimplexId> mark(const ErrorIndicator& ind, double theta) {
    std::vector<SimplexId> order;
    for (SimplexId t = 0; t < ind.eta.size(); ++t)
        if (ind.eta[t] > 0.0) order.push_back(t);
    std::sort(order.begin(), order.end(), [&](SimplexId a, SimplexId b) {
        if (ind.eta[a] != ind.eta[b]) return ind.eta[a] > ind.eta[b];
        return a < b;
    });
    if (theta >= 1.0) return order; // everything with positive eta
    const double target = theta * ind.total * ind.total;
    std::vector<SimplexId> out;
    double acc = 0.0;
    for (const SimplexId t : order) {
        if (acc >= target && !out.empty()) break;
        out.push_back(t);
        acc += ind.eta[t] * ind.eta[t];
    }
    return out;
}

inline void write_indicator_csv(const ErrorIndicator& ind, std::ostream& os) {
    os << "simplex_id,eta\n";
    os << std::setprecision(17);
    for (std::size_t t = 0; t < ind.eta.size(); ++t)
        if (ind.eta[t] != 0.0) os << t << ',' << ind.eta[t] << '\n';
}

// load vector entries integral(phi_i * psi * lambda_j) on u's space
inline std::vector<double> localized_load(const FeSpace& space, const GoalFunctional& goal,
                                          const PartitionOfUnity& pu, int i) {
    const Mesh& m = space.mesh();
    std::vector<double> b(space.n_dofs(), 0.0);
    const auto& rule = tri_quadrature();
    SimplexId hint = kNoSimplex;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            const Located loc = pu.coarse->locate_point(x, hint);
            hint = loc.simplex;
            const double phi = pu.value(i, loc);
            if (phi == 0.0) continue;
            const double w = qp.weight * g.area * phi * goal.psi(x);
            for (int k = 0; k < 3; ++k) {
                const int dof = space.dof(s.v[k]);
                if (dof >= 0) b[static_cast<std::size_t>(dof)] += w * qp.bary[k];
            }
        }
    }
    return b;
}

// discrete transposed-Jacobian solve (Jacobian assembled at u) with localized
// load; the dual lives in the same space as u
inline FeFunction solve_dual_localized(const WeakProblem& problem, const FeFunction& u,
                                       const GoalFunctional& goal, const PartitionOfUnity& pu,
                                       int i, double tol = 1e-12) {
    const auto space = u.space_ptr();
    SparseSystem sys = assemble_jacobian(problem, u);
    if (!problem.symmetric) sys.matrix = sys.matrix.transpose();
    sys.rhs = localized_load(*space, goal, pu, i);
    const LinearSolveResult lin = solve_linear(sys, tol, 20 * sys.matrix.rows() + 200);
    FeFunction omega(space);
    omega.add_free_coeffs(lin.x);
    return omega;
}

// <F(u), omega> assembled on the common refinement of the two meshes
inline double goal_error_term(const WeakProblem& problem, const FeFunction& u,
                              const FeFunction& omega) {
    const Mesh& mu = u.space().mesh();
    const Mesh& mo = omega.space().mesh();
    if (&mu == &mo) {
        const std::vector<double> r = assemble_residual(problem, u);
        const std::vector<double> of = omega.free_coeffs();
        return dot(r, of);
    }
    const Mesh common = reconcile(mu, mo);
    const auto& rule = tri_quadrature();
    double acc = 0.0;
    SimplexId hu = kNoSimplex, ho = kNoSimplex;
    for (SimplexId t = 0; t < common.simplices.size(); ++t) {
        if (!common.simplices[t].alive) continue;
        const ElementGeometry g(common, t);
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            const Located lu = mu.locate_point(x, hu);
            hu = lu.simplex;
            const Located lo = mo.locate_point(x, ho);
            ho = lo.simplex;
            const auto [uval, ugrad] = u.evaluate_in(lu);
            const auto [oval, ograd] = omega.evaluate_in(lo);
            const ResidualTerm f = problem.residual_form(x, uval, ugrad);
            acc += qp.weight * g.area * (dot(f.flux, ograd) + f.source * oval);
        }
    }
    return acc;
}

inline std::vector<double> goal_error_terms(const WeakProblem& problem,
                                            const std::vector<FeFunction>& u_locals,
                                            const DualSolution& duals) {
    std::vector<double> terms;
    terms.reserve(u_locals.size());
    for (std::size_t i = 0; i < u_locals.size(); ++i)
        terms.push_back(goal_error_term(problem, u_locals[i], duals.omega[i]));
    return terms;
}

struct ToleranceDecision {
    std::vector<bool> pass;  // per subdomain: |term_i| < epsilon / p
    bool global_guarantee = false;
};

inline ToleranceDecision check_local_tolerances(const std::vector<double>& terms, double epsilon) {
    ToleranceDecision d;
    const double p = static_cast<double>(terms.size());
    d.global_guarantee = !terms.empty();
    for (const double t : terms) {
        const bool ok = std::abs(t) < epsilon / p;
        d.pass.push_back(ok);
        d.global_guarantee = d.global_guarantee && ok;
    }
    return d;
}

} // namespace ppum

#endif // PPUM_ESTIMATE_HPP
