#ifndef PPUM_PROBLEMS_HPP
#define PPUM_PROBLEMS_HPP

// Built-in model problems (with manufactured exact solutions where available)
// and coarse meshes for the test domains.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ppum/fem.hpp"
#include "ppum/mesh.hpp"

namespace ppum {

struct ModelProblem {
    std::string name;
    WeakProblem weak;
    // exact solution (value, gradient) when manufactured
    std::function<std::pair<double, Vec2>(const Vec2&)> exact;
    double alpha = 1.0; // regularity tag: 1 smooth, ~2/3 for the L-shape corner
    bool linear = true;

    bool has_exact() const { return static_cast<bool>(exact); }
};

inline constexpr double kPi = std::numbers::pi;

// -div(grad u) = f with u* = sin(pi x) sin(pi y), f = 2 pi^2 u*
inline ModelProblem poisson_smooth() {
    ModelProblem p;
    p.name = "poisson_smooth";
    auto f = [](const Vec2& x) { return 2.0 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y); };
    p.weak.name = p.name;
    p.weak.residual_form = [f](const Vec2& x, double, const Vec2& gu) {
        return ResidualTerm{-f(x), gu};
    };
    p.weak.jacobian_form = [](const Vec2&, double, const Vec2&) {
        JacobianTerm j;
        j.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
        return j;
    };
    p.weak.dirichlet_data = [](const Vec2&) { return 0.0; };
    p.exact = [](const Vec2& x) {
        const double sx = std::sin(kPi * x.x), sy = std::sin(kPi * x.y);
        const double cx = std::cos(kPi * x.x), cy = std::cos(kPi * x.y);
        return std::pair<double, Vec2>{sx * sy, {kPi * cx * sy, kPi * sx * cy}};
    };
    p.alpha = 1.0;
    return p;
}

// Laplace with the linear exact solution u* = 1 + 2x + 3y (P1 reproduction)
inline ModelProblem poisson_linear() {
    ModelProblem p;
    p.name = "poisson_linear";
    p.weak.name = p.name;
    p.weak.residual_form = [](const Vec2&, double, const Vec2& gu) {
        return ResidualTerm{0.0, gu};
    };
    p.weak.jacobian_form = [](const Vec2&, double, const Vec2&) {
        JacobianTerm j;
        j.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
        return j;
    };
    p.weak.dirichlet_data = [](const Vec2& x) { return 1.0 + 2.0 * x.x + 3.0 * x.y; };
    p.exact = [](const Vec2& x) {
        return std::pair<double, Vec2>{1.0 + 2.0 * x.x + 3.0 * x.y, {2.0, 3.0}};
    };
    p.alpha = 1.0;
    return p;
}

// Laplace on the L-shape with the reentrant-corner solution r^{2/3} sin(2 theta / 3)
inline ModelProblem poisson_lshape() {
    ModelProblem p;
    p.name = "poisson_lshape";
    auto exact = [](const Vec2& x) -> std::pair<double, Vec2> {
        const double r2 = x.x * x.x + x.y * x.y;
        if (r2 == 0.0) return {0.0, {0.0, 0.0}};
        const double r = std::sqrt(r2);
        double th = std::atan2(x.y, x.x);
        if (th < 0.0) th += 2.0 * kPi;
        const double a = 2.0 / 3.0;
        const double v = std::pow(r, a) * std::sin(a * th);
        // du/dr, du/dtheta in polar, mapped to cartesian
        const double ur = a * std::pow(r, a - 1.0) * std::sin(a * th);
        const double ut = a * std::pow(r, a - 1.0) * std::cos(a * th);
        const double c = x.x / r, s = x.y / r;
        return {v, {ur * c - ut * s, ur * s + ut * c}};
    };
    p.weak.name = p.name;
    p.weak.residual_form = [](const Vec2&, double, const Vec2& gu) {
        return ResidualTerm{0.0, gu};
    };
    p.weak.jacobian_form = [](const Vec2&, double, const Vec2&) {
        JacobianTerm j;
        j.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
        return j;
    };
    p.weak.dirichlet_data = [exact](const Vec2& x) { return exact(x).first; };
    p.exact = exact;
    p.alpha = 2.0 / 3.0;
    return p;
}

// Nonlinear scalar reaction-diffusion toy with stiff negative-power term:
//   -lap(phi) + c1 phi + c2 phi^5 - c3 phi^-7 = g
// with manufactured phi* = 1 + sin(pi x) sin(pi y) / 2 > 0 and Dirichlet phi*.
inline ModelProblem nonlinear_toy() {
    ModelProblem p;
    p.name = "nonlinear_toy";
    p.linear = false;
    constexpr double c1 = 1.0, c2 = 0.1, c3 = 0.01;
    auto phi_star = [](const Vec2& x) -> std::pair<double, Vec2> {
        const double sx = std::sin(kPi * x.x), sy = std::sin(kPi * x.y);
        const double cx = std::cos(kPi * x.x), cy = std::cos(kPi * x.y);
        return {1.0 + 0.5 * sx * sy, {0.5 * kPi * cx * sy, 0.5 * kPi * sx * cy}};
    };
    auto g = [phi_star](const Vec2& x) {
        const double s = std::sin(kPi * x.x) * std::sin(kPi * x.y);
        const double v = phi_star(x).first;
        // -lap(phi*) = pi^2 s
        return kPi * kPi * s + c1 * v + c2 * std::pow(v, 5) - c3 * std::pow(v, -7);
    };
    p.weak.name = p.name;
    p.weak.residual_form = [g](const Vec2& x, double u, const Vec2& gu) {
        if (u <= 0.0) throw QuadratureFailure("nonlinear_toy: nonpositive iterate at quadrature point");
        const double src = c1 * u + c2 * std::pow(u, 5) - c3 * std::pow(u, -7) - g(x);
        return ResidualTerm{src, gu};
    };
    p.weak.jacobian_form = [](const Vec2&, double u, const Vec2&) {
        if (u <= 0.0) throw QuadratureFailure("nonlinear_toy: nonpositive iterate at quadrature point");
        JacobianTerm j;
        j.reaction = c1 + 5.0 * c2 * std::pow(u, 4) + 7.0 * c3 * std::pow(u, -8);
        j.diffusion = {{{1.0, 0.0}, {0.0, 1.0}}};
        return j;
    };
    p.weak.dirichlet_data = [phi_star](const Vec2& x) { return phi_star(x).first; };
    p.weak.initial_guess = [](const Vec2&) { return 1.0; };
    p.exact = phi_star;
    p.alpha = 1.0;
    return p;
}

inline ModelProblem make_problem(const std::string& name) {
    if (name == "poisson_smooth") return poisson_smooth();
    if (name == "poisson_linear") return poisson_linear();
    if (name == "poisson_lshape") return poisson_lshape();
    if (name == "nonlinear_toy") return nonlinear_toy();
    throw UnknownProblem("unknown problem: " + name);
}

inline std::vector<std::string> problem_names() {
    return {"poisson_smooth", "poisson_linear", "poisson_lshape", "nonlinear_toy"};
}

// --- built-in coarse domains -------------------------------------------------

inline Mesh domain_unit_square() {
    return build_mesh({{{0.0, 0.0}, 1}, {{1.0, 0.0}, 1}, {{1.0, 1.0}, 1}, {{0.0, 1.0}, 1}},
                      {{0, 1, 2}, {0, 2, 3}});
}

// [-1,1]^2 minus the fourth quadrant, 6 triangles, diagonals through the corner
inline Mesh domain_l_shape() {
    const std::vector<std::pair<Vec2, int>> v = {
        {{-1.0, -1.0}, 1}, {{0.0, -1.0}, 1}, {{0.0, 0.0}, 1}, {{1.0, 0.0}, 1},
        {{1.0, 1.0}, 1},   {{0.0, 1.0}, 1},  {{-1.0, 1.0}, 1}, {{-1.0, 0.0}, 1}};
    const std::vector<std::array<VertexId, 3>> t = {
        {0, 1, 2}, {0, 2, 7}, {7, 2, 6}, {2, 5, 6}, {2, 3, 4}, {2, 4, 5}};
    return build_mesh(v, t);
}

// polygonal ring: two concentric octagons, 16 triangles; outer marker 1, inner 2
inline Mesh domain_annulus_approx() {
    std::vector<std::pair<Vec2, int>> v;
    for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * kPi * k / 8.0;
        v.push_back({{std::cos(a), std::sin(a)}, 1});
    }
    for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * kPi * k / 8.0;
        v.push_back({{0.5 * std::cos(a), 0.5 * std::sin(a)}, 2});
    }
    std::vector<std::array<VertexId, 3>> t;
    for (VertexId k = 0; k < 8; ++k) {
        const VertexId o0 = k, o1 = (k + 1) % 8;
        const VertexId i0 = 8 + k, i1 = 8 + (k + 1) % 8;
        t.push_back({o0, o1, i0});
        t.push_back({o1, i1, i0});
    }
    return build_mesh(v, t);
}

inline Mesh make_domain(const std::string& name, int initial_refines) {
    Mesh m;
    if (name == "unit_square") m = domain_unit_square();
    else if (name == "l_shape") m = domain_l_shape();
    else if (name == "annulus_approx") m = domain_annulus_approx();
    else throw UnknownDomain("unknown domain: " + name);
    for (int r = 0; r < initial_refines; ++r) {
        std::vector<SimplexId> all;
        for (SimplexId t = 0; t < m.simplices.size(); ++t)
            if (m.simplices[t].alive) all.push_back(t);
        m.bisect(std::move(all));
    }
    m.compact();
    return m;
}

inline std::vector<std::string> domain_names() {
    return {"unit_square", "l_shape", "annulus_approx"};
}

} // namespace ppum

#endif // PPUM_PROBLEMS_HPP
