#ifndef PPUM_PPUM_HPP
#define PPUM_PPUM_HPP

// The four-step parallel partition-of-unity driver: coarse solve,
// error-weighted decomposition, independent local adaptive solves restricted
// to assigned regions, and partition-of-unity recombination. Both
// estimator-driven and goal-oriented modes.

#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ppum/cover.hpp"
#include "ppum/estimate.hpp"
#include "ppum/fem.hpp"
#include "ppum/mesh.hpp"

namespace ppum {

struct PpumConfig {
    int p = 4;
    int overlap_layers = 1;
    std::string partitioner = "inertial"; // inertial | spectral
    double theta = 0.5;
    std::string mode = "estimator"; // estimator | goal
    int target_dofs_per_subdomain = 2000;
    double epsilon = 1e-3; // goal tolerance
    int max_rounds = 30;
    bool dual_refine = true;
    double eta_stop = 0.0; // optional estimator-mode stop on the restricted total; 0 disables

    void validate() const {
        if (p < 1 || (p & (p - 1)) != 0) throw ConfigError("ppum: p must be a power of 2");
        if (overlap_layers < 1) throw ConfigError("ppum: overlap_layers must be >= 1");
        if (partitioner != "inertial" && partitioner != "spectral")
            throw ConfigError("ppum: partitioner must be inertial or spectral");
        if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("ppum: theta must be in (0,1]");
        if (mode != "estimator" && mode != "goal")
            throw ConfigError("ppum: mode must be estimator or goal");
        if (mode == "goal" && !(epsilon > 0.0))
            throw ConfigError("ppum: epsilon must be positive in goal mode");
        if (max_rounds < 0) throw ConfigError("ppum: max_rounds must be >= 0");
        if (target_dofs_per_subdomain < 0) throw ConfigError("ppum: target_dofs must be >= 0");
    }
};

struct SubdomainReport {
    int index = 0;
    std::size_t dofs = 0;
    int rounds = 0;
    double eta_total = 0.0; // restricted indicator total on the final mesh
    double goal_term = 0.0; // <F(u_i), omega_i> at termination (goal mode)
    double l2_err = std::numeric_limits<double>::quiet_NaN(); // over Omega_i
    double h1_err = std::numeric_limits<double>::quiet_NaN();
    double h_min_region = 0.0; // min edge length inside the disjoint region
    std::size_t marks_total = 0;
    std::size_t marks_outside_region = 0;
    bool tolerance_met = true; // goal mode: local tolerance reached
    bool failed = false;
    std::string failure;
};

struct SubdomainTask {
    int index = 0;
    Mesh mesh;                // private working copy, refined in place
    std::vector<char> region; // Omega_i membership per private simplex id
    std::vector<double> nodal; // carried solution values, prolonged on refinement
    FeFunction solution;       // on the final snapshot
    FeFunction dual;           // goal mode: localized dual on its own space
    SubdomainReport report;
};

struct PpumSolution {
    std::shared_ptr<const Mesh> coarse; // decomposition mesh with subdomain labels
    Partition partition;
    Cover cover;
    PartitionOfUnity pu;
    PpumConfig config;
    FeFunction coarse_solution;
    std::vector<SubdomainTask> tasks;
    std::vector<double> goal_terms;
    double goal_estimate = 0.0; // -sum of terms
    bool guarantee = false;     // all local tolerances met (goal mode)
    std::string goal_name;
    bool any_failed = false;
};

inline FeFunction initial_iterate(const WeakProblem& problem, std::shared_ptr<const FeSpace> space) {
    FeFunction u(space);
    if (problem.initial_guess) {
        const Mesh& m = space->mesh();
        for (VertexId v = 0; v < m.vertices.size(); ++v)
            u.nodal()[v] = problem.initial_guess(m.vertices[v].pos);
    }
    apply_dirichlet(problem, u);
    return u;
}

// Step 1: Newton (one step for linear problems) on the coarse space.
inline FeFunction coarse_solve(const WeakProblem& problem, const Mesh& coarse_mesh,
                               const NewtonOptions& opt = {}) {
    auto snapshot = std::make_shared<const Mesh>(coarse_mesh);
    auto space = std::make_shared<const FeSpace>(snapshot);
    const FeFunction u0 = initial_iterate(problem, space);
    return solve_newton(problem, u0, opt).u;
}

struct Decomposition {
    Partition partition;
    Cover cover;
    PartitionOfUnity pu;
    std::shared_ptr<const Mesh> labeled; // coarse mesh with subdomain labels set
};

// Step 2: indicator weights, balanced partition, overlap, partition of unity.
inline Decomposition decompose(const WeakProblem& problem, const FeFunction& coarse_u,
                               const Mesh& coarse_mesh, const PpumConfig& config) {
    const ErrorIndicator ind = residual_indicator(problem, coarse_u);
    std::vector<double> weights(ind.eta.size(), 0.0);
    bool any = false;
    for (std::size_t t = 0; t < ind.eta.size(); ++t) {
        weights[t] = ind.eta[t] * ind.eta[t];
        any = any || weights[t] > 0.0;
    }
    if (!any) // degenerate zero-error coarse solve: balance by count
        for (SimplexId t = 0; t < coarse_mesh.simplices.size(); ++t)
            if (coarse_mesh.simplices[t].alive) weights[t] = 1.0;
    Decomposition d;
    d.partition = config.partitioner == "spectral"
                      ? partition_spectral(coarse_mesh, weights, config.p)
                      : partition_inertial(coarse_mesh, weights, config.p);
    Mesh labeled = coarse_mesh;
    for (SimplexId t = 0; t < labeled.simplices.size(); ++t)
        if (labeled.simplices[t].alive)
            labeled.simplices[t].subdomain = d.partition.subdomain_of[t];
    d.labeled = std::make_shared<const Mesh>(std::move(labeled));
    d.cover = extend_overlap(*d.labeled, d.partition, config.overlap_layers);
    d.pu = build_pu(d.labeled, d.cover);
    return d;
}

namespace ppum_detail {

inline void prolong(std::vector<double>& nodal, const RefinementReport& rep) {
    for (const auto& nv : rep.new_vertices) {
        const std::size_t id = nv[0];
        if (nodal.size() <= id) nodal.resize(id + 1, 0.0);
        nodal[id] = 0.5 * (nodal[nv[1]] + nodal[nv[2]]);
    }
}

inline void propagate_region(std::vector<char>& region, const RefinementReport& rep) {
    for (const auto& ch : rep.children) {
        const std::size_t need = std::max(ch[1], ch[2]) + 1;
        if (region.size() < need) region.resize(need, 0);
        region[ch[1]] = region[ch[0]];
        region[ch[2]] = region[ch[0]];
    }
}

inline std::pair<double, double> region_error_norms(
    const FeFunction& u, const std::vector<char>& region,
    const std::function<std::pair<double, Vec2>(const Vec2&)>& exact) {
    const Mesh& m = u.space().mesh();
    const auto& rule = tri_quadrature();
    double l2 = 0.0, h1 = 0.0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive || t >= region.size() || !region[t]) continue;
        const ElementGeometry g(m, t);
        const auto& s = m.simplices[t];
        Vec2 gu{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            gu.x += u.nodal()[s.v[k]] * g.grad[k].x;
            gu.y += u.nodal()[s.v[k]] * g.grad[k].y;
        }
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            double uv = 0.0;
            for (int k = 0; k < 3; ++k) uv += u.nodal()[s.v[k]] * qp.bary[k];
            const auto [ev, eg] = exact(x);
            const double w = qp.weight * g.area;
            l2 += w * (uv - ev) * (uv - ev);
            const Vec2 dg{gu.x - eg.x, gu.y - eg.y};
            h1 += w * dot(dg, dg);
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

} // namespace ppum_detail

// Step 3: one completely independent local adaptive solve. The task owns its
// mesh; marks are restricted to the assigned region, closure may spill out.
inline void local_adapt_solve(SubdomainTask& task, const WeakProblem& problem,
                              const PpumConfig& config, const PartitionOfUnity& pu,
                              const GoalFunctional* goal, const NewtonOptions& newton_opt = {}) {
    auto& rep = task.report;
    try {
        for (int round = 0;; ++round) {
            auto snapshot = std::make_shared<const Mesh>(task.mesh);
            auto space = std::make_shared<const FeSpace>(snapshot);
            FeFunction u(space);
            if (round == 0 && task.nodal.empty()) {
                u = initial_iterate(problem, space);
            } else {
                u.nodal() = task.nodal;
                apply_dirichlet(problem, u);
            }
            task.solution = solve_newton(problem, u, newton_opt).u;
            task.nodal = task.solution.nodal();
            rep.rounds = round;
            rep.dofs = space->n_dofs();

            bool stop = false;
            if (goal != nullptr) {
                if (config.dual_refine) {
                    // one uniform refinement finer for the dual space
                    Mesh dual_mesh = task.mesh;
                    std::vector<SimplexId> all;
                    for (SimplexId t = 0; t < dual_mesh.simplices.size(); ++t)
                        if (dual_mesh.simplices[t].alive) all.push_back(t);
                    std::vector<double> fine_nodal = task.nodal;
                    const RefinementReport rr = dual_mesh.bisect(std::move(all));
                    ppum_detail::prolong(fine_nodal, rr);
                    auto dual_snap = std::make_shared<const Mesh>(std::move(dual_mesh));
                    auto dual_space = std::make_shared<const FeSpace>(dual_snap);
                    FeFunction u_fine(dual_space);
                    u_fine.nodal() = fine_nodal;
                    apply_dirichlet(problem, u_fine);
                    task.dual = solve_dual_localized(problem, u_fine, *goal, pu, task.index);
                } else {
                    task.dual = solve_dual_localized(problem, task.solution, *goal, pu, task.index);
                }
                rep.goal_term = goal_error_term(problem, task.solution, task.dual);
                rep.tolerance_met = std::abs(rep.goal_term) < config.epsilon / config.p;
                if (rep.tolerance_met) stop = true;
            }
            if (config.target_dofs_per_subdomain > 0 &&
                rep.dofs >= static_cast<std::size_t>(config.target_dofs_per_subdomain))
                stop = true;
            if (round >= config.max_rounds) {
                if (goal != nullptr && !rep.tolerance_met) rep.failure = "MaxRoundsWithoutTolerance";
                stop = true;
            }

            const ErrorIndicator ind = residual_indicator(problem, task.solution);
            const ErrorIndicator restricted = restrict_indicator(ind, task.region);
            rep.eta_total = restricted.total;
            if (config.eta_stop > 0.0 && restricted.total <= config.eta_stop) stop = true;
            if (stop) break;

            const std::vector<SimplexId> marks = mark(restricted, config.theta);
            if (marks.empty()) break; // nothing left to refine inside the region
            rep.marks_total += marks.size();
            for (const SimplexId t : marks)
                if (t >= task.region.size() || !task.region[t]) ++rep.marks_outside_region;
            const RefinementReport rr = task.mesh.bisect(marks);
            ppum_detail::propagate_region(task.region, rr);
            ppum_detail::prolong(task.nodal, rr);
        }
        // final bookkeeping on the disjoint region
        const Mesh& m = task.solution.space().mesh();
        double hmin2 = std::numeric_limits<double>::max();
        for (SimplexId t = 0; t < m.simplices.size(); ++t) {
            if (!m.simplices[t].alive || m.simplices[t].subdomain != task.index) continue;
            for (int k = 0; k < 3; ++k) hmin2 = std::min(hmin2, m.edge_len2(t, k));
        }
        rep.h_min_region = hmin2 == std::numeric_limits<double>::max() ? 0.0 : std::sqrt(hmin2);
    } catch (const Error& e) {
        rep.failed = true;
        rep.failure = e.what();
    }
}

// u_pp(x) = sum_i phi_i(x) u_i(x) with product-rule gradient; terms with
// phi_i identically zero on the containing coarse simplex are skipped.
class CombinedEvaluator {
public:
    explicit CombinedEvaluator(const PpumSolution& sol)
        : sol_(sol), task_hints_(sol.tasks.size(), kNoSimplex) {}

    std::pair<double, Vec2> operator()(const Vec2& x) {
        const Located loc = sol_.pu.coarse->locate_point(x, coarse_hint_);
        coarse_hint_ = loc.simplex;
        double val = 0.0;
        Vec2 grad{0.0, 0.0};
        for (std::size_t i = 0; i < sol_.tasks.size(); ++i) {
            const int ii = static_cast<int>(i);
            if (sol_.pu.zero_on(ii, loc.simplex)) continue;
            const double phi = sol_.pu.value(ii, loc);
            const Vec2 gphi = sol_.pu.gradient(ii, loc.simplex);
            const Located lt = sol_.tasks[i].solution.space().mesh().locate_point(x, task_hints_[i]);
            task_hints_[i] = lt.simplex;
            const auto [uv, ug] = sol_.tasks[i].solution.evaluate_in(lt);
            val += phi * uv;
            grad.x += gphi.x * uv + phi * ug.x;
            grad.y += gphi.y * uv + phi * ug.y;
        }
        return {val, grad};
    }

private:
    const PpumSolution& sol_;
    SimplexId coarse_hint_ = kNoSimplex;
    std::vector<SimplexId> task_hints_;
};

inline std::pair<double, Vec2> combine_evaluate(const PpumSolution& sol, const Vec2& x) {
    CombinedEvaluator ev(sol);
    return ev(x);
}

// union of all task meshes by pairwise reconciliation
inline Mesh union_mesh(const PpumSolution& sol) {
    Mesh u = sol.tasks.front().solution.space().mesh();
    for (std::size_t i = 1; i < sol.tasks.size(); ++i)
        u = reconcile(u, sol.tasks[i].solution.space().mesh());
    return u;
}

// quadrature of u_pp against the exact solution on the reconciled union mesh
inline std::pair<double, double> global_error(
    const PpumSolution& sol, const std::function<std::pair<double, Vec2>(const Vec2&)>& exact) {
    const Mesh un = union_mesh(sol);
    const auto& rule = tri_quadrature();
    CombinedEvaluator ev(sol);
    double l2 = 0.0, h1 = 0.0;
    for (SimplexId t = 0; t < un.simplices.size(); ++t) {
        if (!un.simplices[t].alive) continue;
        const ElementGeometry g(un, t);
        for (const auto& qp : rule) {
            const Vec2 x = g.point(qp.bary);
            const auto [uv, ug] = ev(x);
            const auto [evv, egg] = exact(x);
            const double w = qp.weight * g.area;
            l2 += w * (uv - evv) * (uv - evv);
            const Vec2 dg{ug.x - egg.x, ug.y - egg.y};
            h1 += w * dot(dg, dg);
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

// Steps 1-4. Tasks run concurrently when threads > 1; results are identical
// to sequential execution because tasks share only immutable inputs and are
// reduced in fixed index order.
inline PpumSolution run_ppum_impl(
    const WeakProblem& problem, const Mesh& coarse_mesh, const PpumConfig& config,
    const GoalFunctional* goal,
    const std::function<std::pair<double, Vec2>(const Vec2&)>& exact, int threads,
    const NewtonOptions& newton_opt) {
    config.validate();
    if (goal == nullptr && config.mode == "goal")
        throw ConfigError("run_ppum: goal mode requires a goal functional");

    PpumSolution sol;
    sol.config = config;
    sol.coarse_solution = coarse_solve(problem, coarse_mesh, newton_opt);
    Decomposition d =
        decompose(problem, sol.coarse_solution, sol.coarse_solution.space().mesh(), config);
    sol.partition = std::move(d.partition);
    sol.cover = std::move(d.cover);
    sol.pu = std::move(d.pu);
    sol.coarse = d.labeled;
    if (goal) sol.goal_name = goal->name;

    sol.tasks.resize(static_cast<std::size_t>(config.p));
    for (int i = 0; i < config.p; ++i) {
        SubdomainTask& task = sol.tasks[static_cast<std::size_t>(i)];
        task.index = i;
        task.report.index = i;
        task.mesh = *sol.coarse; // the entire mesh goes to every task
        task.region.assign(task.mesh.simplices.size(), 0);
        for (const SimplexId t : sol.cover.member[static_cast<std::size_t>(i)]) task.region[t] = 1;
        task.nodal = sol.coarse_solution.nodal();
    }
    auto run_task = [&](int i) {
        local_adapt_solve(sol.tasks[static_cast<std::size_t>(i)], problem, config, sol.pu, goal,
                          newton_opt);
    };
    if (threads > 1) {
        std::vector<std::future<void>> futs;
        for (int i = 0; i < config.p; ++i)
            futs.push_back(std::async(std::launch::async, run_task, i));
        for (auto& f : futs) f.get();
    } else {
        for (int i = 0; i < config.p; ++i) run_task(i);
    }
    for (const auto& task : sol.tasks) sol.any_failed = sol.any_failed || task.report.failed;

    if (goal) {
        for (const auto& task : sol.tasks) sol.goal_terms.push_back(task.report.goal_term);
        double s = 0.0;
        for (const double t : sol.goal_terms) s += t;
        sol.goal_estimate = -s;
        sol.guarantee = check_local_tolerances(sol.goal_terms, config.epsilon).global_guarantee;
    }
    if (exact) {
        for (auto& task : sol.tasks) {
            if (task.report.failed) continue;
            const auto [l2, h1] =
                ppum_detail::region_error_norms(task.solution, task.region, exact);
            task.report.l2_err = l2;
            task.report.h1_err = h1;
        }
    }
    return sol;
}

inline PpumSolution run_ppum(const WeakProblem& problem, const Mesh& coarse_mesh,
                             const PpumConfig& config,
                             const std::function<std::pair<double, Vec2>(const Vec2&)>& exact = {},
                             int threads = 1, const NewtonOptions& newton_opt = {}) {
    PpumConfig c = config;
    c.mode = "estimator";
    return run_ppum_impl(problem, coarse_mesh, c, nullptr, exact, threads, newton_opt);
}

inline PpumSolution run_ppum_goal(
    const WeakProblem& problem, const Mesh& coarse_mesh, const PpumConfig& config,
    const GoalFunctional& goal,
    const std::function<std::pair<double, Vec2>(const Vec2&)>& exact = {}, int threads = 1,
    const NewtonOptions& newton_opt = {}) {
    PpumConfig c = config;
    c.mode = "goal";
    return run_ppum_impl(problem, coarse_mesh, c, &goal, exact, threads, newton_opt);
}

} // namespace ppum

#endif // PPUM_PPUM_HPP
