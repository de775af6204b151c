#ifndef PPUM_FEM_HPP
#define PPUM_FEM_HPP

// P1 Lagrange finite elements over a Mesh: abstract nonlinear weak-form
// problems, residual/Jacobian assembly with Dirichlet elimination, damped
// Newton, pointwise evaluation, norms, and interpolation.

#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "ppum/linalg.hpp"
#include "ppum/mesh.hpp"
#include "ppum/quadrature.hpp"

namespace ppum {

// integrand data for <F(u),v> at a point: source pairs with v, flux with grad v
struct ResidualTerm {
    double source = 0.0;
    Vec2 flux{0.0, 0.0};
};

// integrand data for <DF(u)w,v>: reaction pairs w*v, diffusion grad w * grad v
struct JacobianTerm {
    double reaction = 0.0;
    std::array<std::array<double, 2>, 2> diffusion{{{0.0, 0.0}, {0.0, 0.0}}};
};

struct WeakProblem {
    std::string name;
    std::function<ResidualTerm(const Vec2& x, double u, const Vec2& grad_u)> residual_form;
    std::function<JacobianTerm(const Vec2& x, double u, const Vec2& grad_u)> jacobian_form;
    std::function<double(const Vec2& x)> dirichlet_data;
    std::function<double(const Vec2& x)> initial_guess; // optional feasible start
    bool symmetric = true;
};

constexpr int kDirichletDof = -1;

class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
        const auto& m = *mesh_;
        dof_of_vertex_.assign(m.vertices.size(), kDirichletDof);
        for (VertexId v = 0; v < m.vertices.size(); ++v)
            if (m.vertices[v].marker == 0) dof_of_vertex_[v] = static_cast<int>(n_dofs_++);
    }

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    std::size_t n_dofs() const { return n_dofs_; }
    int dof(VertexId v) const { return dof_of_vertex_[v]; }

private:
    std::shared_ptr<const Mesh> mesh_;
    std::vector<int> dof_of_vertex_;
    std::size_t n_dofs_ = 0;
};

// per-element geometry used by every quadrature loop
struct ElementGeometry {
    std::array<Vec2, 3> p;
    std::array<Vec2, 3> grad; // gradients of the three hat functions
    double area = 0.0;

    ElementGeometry(const Mesh& m, SimplexId t) {
        const auto& s = m.simplices[t];
        for (int k = 0; k < 3; ++k) p[k] = m.vertices[s.v[k]].pos;
        area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
        const double inv = 1.0 / (2.0 * area);
        grad[0] = {(p[1].y - p[2].y) * inv, (p[2].x - p[1].x) * inv};
        grad[1] = {(p[2].y - p[0].y) * inv, (p[0].x - p[2].x) * inv};
        grad[2] = {(p[0].y - p[1].y) * inv, (p[1].x - p[0].x) * inv};
    }

    Vec2 point(const std::array<double, 3>& bary) const {
        return {bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x,
                bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y};
    }
};

class FeFunction {
public:
    FeFunction() = default;
    explicit FeFunction(std::shared_ptr<const FeSpace> space)
        : space_(std::move(space)), nodal_(space_->mesh().vertices.size(), 0.0) {}

    const FeSpace& space() const { return *space_; }
    std::shared_ptr<const FeSpace> space_ptr() const { return space_; }
    std::vector<double>& nodal() { return nodal_; }
    const std::vector<double>& nodal() const { return nodal_; }

    std::vector<double> free_coeffs() const {
        const auto& sp = *space_;
        std::vector<double> c(sp.n_dofs(), 0.0);
        for (VertexId v = 0; v < nodal_.size(); ++v)
            if (sp.dof(v) >= 0) c[static_cast<std::size_t>(sp.dof(v))] = nodal_[v];
        return c;
    }

    void add_free_coeffs(const std::vector<double>& delta, double scale = 1.0) {
        const auto& sp = *space_;
        for (VertexId v = 0; v < nodal_.size(); ++v)
            if (sp.dof(v) >= 0) nodal_[v] += scale * delta[static_cast<std::size_t>(sp.dof(v))];
    }

    // value and (elementwise constant) gradient at x
    std::pair<double, Vec2> evaluate(const Vec2& x, SimplexId hint = kNoSimplex) const {
        const Mesh& m = space_->mesh();
        const Located loc = m.locate_point(x, hint);
        return evaluate_in(loc);
    }

    std::pair<double, Vec2> evaluate_in(const Located& loc) const {
        const Mesh& m = space_->mesh();
        const ElementGeometry g(m, loc.simplex);
        const auto& s = m.simplices[loc.simplex];
        double val = 0.0;
        Vec2 grad{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            const double c = nodal_[s.v[k]];
            val += c * loc.bary[k];
            grad.x += c * g.grad[k].x;
            grad.y += c * g.grad[k].y;
        }
        return {val, grad};
    }

private:
    std::shared_ptr<const FeSpace> space_;
    std::vector<double> nodal_;
};

inline FeFunction interpolate(std::shared_ptr<const FeSpace> space,
                              const std::function<double(const Vec2&)>& g) {
    FeFunction f(space);
    const Mesh& m = space->mesh();
    for (VertexId v = 0; v < m.vertices.size(); ++v) f.nodal()[v] = g(m.vertices[v].pos);
    return f;
}

inline void apply_dirichlet(const WeakProblem& problem, FeFunction& u) {
    const auto& sp = u.space();
    const Mesh& m = sp.mesh();
    for (VertexId v = 0; v < m.vertices.size(); ++v)
        if (sp.dof(v) == kDirichletDof) u.nodal()[v] = problem.dirichlet_data(m.vertices[v].pos);
}

namespace fem_detail {

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw QuadratureFailure(std::string("non-finite integrand: ") + what);
}

} // namespace fem_detail

// entries <F(u), lambda_j> for the free nodal basis functions
inline std::vector<double> assemble_residual(const WeakProblem& problem, const FeFunction& u) {
    const FeSpace& sp = u.space();
    const Mesh& m = sp.mesh();
    std::vector<double> r(sp.n_dofs(), 0.0);
    const auto& rule = tri_quadrature();
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        Vec2 grad_u{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            grad_u.x += u.nodal()[s.v[k]] * g.grad[k].x;
            grad_u.y += u.nodal()[s.v[k]] * g.grad[k].y;
        }
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            double uval = 0.0;
            for (int k = 0; k < 3; ++k) uval += u.nodal()[s.v[k]] * qp.bary[k];
            const ResidualTerm f = problem.residual_form(x, uval, grad_u);
            fem_detail::check_finite(f.source, "source");
            fem_detail::check_finite(f.flux.x + f.flux.y, "flux");
            const double w = qp.weight * g.area;
            for (int k = 0; k < 3; ++k) {
                const int dof = sp.dof(s.v[k]);
                if (dof < 0) continue;
                r[static_cast<std::size_t>(dof)] +=
                    w * (dot(f.flux, g.grad[k]) + f.source * qp.bary[k]);
            }
        }
    }
    return r;
}

// matrix entries <DF(u) lambda_j, lambda_i> on the free-by-free block
inline SparseSystem assemble_jacobian(const WeakProblem& problem, const FeFunction& u) {
    const FeSpace& sp = u.space();
    const Mesh& m = sp.mesh();
    std::vector<std::pair<std::size_t, std::size_t>> pattern;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const auto& s = m.simplices[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int di = sp.dof(s.v[i]);
                const int dj = sp.dof(s.v[j]);
                if (di >= 0 && dj >= 0)
                    pattern.emplace_back(static_cast<std::size_t>(di), static_cast<std::size_t>(dj));
            }
    }
    SparseSystem sys;
    sys.matrix = CsrMatrix(sp.n_dofs(), std::move(pattern));
    sys.rhs.assign(sp.n_dofs(), 0.0);
    const auto& rule = tri_quadrature();
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        Vec2 grad_u{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            grad_u.x += u.nodal()[s.v[k]] * g.grad[k].x;
            grad_u.y += u.nodal()[s.v[k]] * g.grad[k].y;
        }
        std::array<std::array<double, 3>, 3> ke{};
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            double uval = 0.0;
            for (int k = 0; k < 3; ++k) uval += u.nodal()[s.v[k]] * qp.bary[k];
            const JacobianTerm jt = problem.jacobian_form(x, uval, grad_u);
            fem_detail::check_finite(jt.reaction, "reaction");
            const double w = qp.weight * g.area;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const Vec2 dflux{jt.diffusion[0][0] * g.grad[j].x + jt.diffusion[0][1] * g.grad[j].y,
                                     jt.diffusion[1][0] * g.grad[j].x + jt.diffusion[1][1] * g.grad[j].y};
                    ke[i][j] += w * (dot(dflux, g.grad[i]) + jt.reaction * qp.bary[i] * qp.bary[j]);
                }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int di = sp.dof(s.v[i]);
                const int dj = sp.dof(s.v[j]);
                if (di >= 0 && dj >= 0)
                    sys.matrix.add(static_cast<std::size_t>(di), static_cast<std::size_t>(dj), ke[i][j]);
            }
    }
    return sys;
}

struct NewtonResult {
    FeFunction u;
    std::vector<double> residual_norms;
    std::size_t iterations = 0;
};

struct NewtonOptions {
    double tol = 1e-10;
    std::size_t max_iter = 50;
    double linear_tol = 1e-13;
    std::size_t linear_max_iter = 0; // 0 = 20*n + 200
    int max_backtracks = 30;
};

// Damped Newton with residual-norm backtracking; Dirichlet values of u0 are
// kept fixed, corrections act on free dofs only. A linear problem converges
// in one step.
inline NewtonResult solve_newton(const WeakProblem& problem, const FeFunction& u0,
                                 const NewtonOptions& opt = {}) {
    NewtonResult res;
    res.u = u0;
    std::vector<double> r;
    try {
        r = assemble_residual(problem, res.u);
    } catch (const QuadratureFailure& e) {
        throw InfeasibleIterate(std::string("initial iterate infeasible: ") + e.what());
    }
    double rnorm = norm2(r);
    res.residual_norms.push_back(rnorm);
    while (rnorm > opt.tol) {
        if (res.iterations >= opt.max_iter)
            throw MaxIterations("solve_newton: no convergence in " + std::to_string(opt.max_iter) +
                                " iterations (residual " + std::to_string(rnorm) + ")");
        SparseSystem sys = assemble_jacobian(problem, res.u);
        for (std::size_t i = 0; i < r.size(); ++i) sys.rhs[i] = -r[i];
        const std::size_t lin_iters =
            opt.linear_max_iter ? opt.linear_max_iter : 20 * sys.matrix.rows() + 200;
        const LinearSolveResult lin = solve_linear(sys, opt.linear_tol, lin_iters);
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            FeFunction trial = res.u;
            trial.add_free_coeffs(lin.x, step);
            try {
                std::vector<double> rt = assemble_residual(problem, trial);
                const double rtnorm = norm2(rt);
                if (rtnorm < rnorm) {
                    res.u = std::move(trial);
                    r = std::move(rt);
                    rnorm = rtnorm;
                    accepted = true;
                    break;
                }
            } catch (const QuadratureFailure&) {
                // infeasible trial point: shorten the step
            }
            step *= 0.5;
        }
        if (!accepted) throw LineSearchFailure("solve_newton: backtracking failed at residual " +
                                               std::to_string(rnorm));
        ++res.iterations;
        res.residual_norms.push_back(rnorm);
    }
    return res;
}

// elementwise order-4 quadrature of ||u - exact|| in L2 and H1-seminorm
inline std::pair<double, double> error_norms(
    const FeFunction& u, const std::function<std::pair<double, Vec2>(const Vec2&)>& exact) {
    const Mesh& m = u.space().mesh();
    const auto& rule = tri_quadrature();
    double l2 = 0.0, h1 = 0.0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        Vec2 grad_u{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            grad_u.x += u.nodal()[s.v[k]] * g.grad[k].x;
            grad_u.y += u.nodal()[s.v[k]] * g.grad[k].y;
        }
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            double uval = 0.0;
            for (int k = 0; k < 3; ++k) uval += u.nodal()[s.v[k]] * qp.bary[k];
            const auto [ev, eg] = exact(x);
            const double w = qp.weight * g.area;
            l2 += w * (uval - ev) * (uval - ev);
            const Vec2 dg{grad_u.x - eg.x, grad_u.y - eg.y};
            h1 += w * dot(dg, dg);
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

// finite-difference directional check of the assembled Jacobian; returns the
// max relative error over n_dirs deterministic pseudo-random directions
inline double jacobian_fd_check(const WeakProblem& problem, const FeFunction& u, int n_dirs = 20,
                                double eps = 1e-6, std::uint64_t seed = 42) {
    const std::size_t n = u.space().n_dofs();
    if (n == 0) return 0.0;
    const SparseSystem sys = assemble_jacobian(problem, u);
    const std::vector<double> r0 = assemble_residual(problem, u);
    std::uint64_t state = seed ? seed : 1;
    auto next_unit = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return 2.0 * (static_cast<double>(state >> 11) / 9007199254740992.0) - 1.0;
    };
    double worst = 0.0;
    for (int d = 0; d < n_dirs; ++d) {
        std::vector<double> w(n);
        for (auto& x : w) x = next_unit();
        const double wn = norm2(w);
        for (auto& x : w) x /= wn;
        FeFunction up = u;
        up.add_free_coeffs(w, eps);
        const std::vector<double> r1 = assemble_residual(problem, up);
        std::vector<double> fd(n), jw;
        for (std::size_t i = 0; i < n; ++i) fd[i] = (r1[i] - r0[i]) / eps;
        sys.matrix.multiply(w, jw);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += (fd[i] - jw[i]) * (fd[i] - jw[i]);
        const double scale = std::max(norm2(jw), 1e-30);
        worst = std::max(worst, std::sqrt(diff) / scale);
    }
    return worst;
}

inline void write_solution_csv(const FeFunction& u, std::ostream& os) {
    os << "vertex_id,x,y,value\n";
    const Mesh& m = u.space().mesh();
    os << std::setprecision(17);
    for (VertexId v = 0; v < m.vertices.size(); ++v)
        os << v << ',' << m.vertices[v].pos.x << ',' << m.vertices[v].pos.y << ','
           << u.nodal()[v] << '\n';
}

} // namespace ppum

#endif // PPUM_FEM_HPP
