#ifndef PPUM_CLI_HPP
#define PPUM_CLI_HPP

// Command front end: strict JSON run configuration, convergence studies,
// PPUM runs, the verification suite, and all file exports. Every command is a
// pure function of its configuration.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppum/estimate.hpp"
#include "ppum/mesh_io.hpp"
#include "ppum/ppum.hpp"
#include "ppum/problems.hpp"

namespace ppum {

using nlohmann::json;

struct StudyConfig {
    int levels = 4;
    std::string mode = "uniform"; // uniform | adaptive
};

struct RunConfig {
    std::string problem = "poisson_smooth";
    std::string domain = "unit_square";
    int initial_refines = 3;
    StudyConfig study;
    PpumConfig ppum;
    std::string goal = "mean_value";
    std::string output_dir = "out";
    std::vector<std::string> formats = {"csv", "json", "vtk"};

    bool wants(const std::string& fmt) const {
        for (const auto& f : formats)
            if (f == fmt) return true;
        return false;
    }
};

namespace cli_detail {

inline void reject_unknown(const json& j, const std::vector<std::string>& known,
                           const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: bad value for \"") + key + "\": " + e.what());
        }
    }
}

} // namespace cli_detail

inline RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    cli_detail::reject_unknown(j,
                               {"problem", "domain", "initial_refines", "study", "ppum", "goal",
                                "output_dir", "formats"},
                               "top level");
    RunConfig c;
    cli_detail::read_into(j, "problem", c.problem);
    cli_detail::read_into(j, "domain", c.domain);
    cli_detail::read_into(j, "initial_refines", c.initial_refines);
    cli_detail::read_into(j, "goal", c.goal);
    cli_detail::read_into(j, "output_dir", c.output_dir);
    cli_detail::read_into(j, "formats", c.formats);
    if (j.contains("study")) {
        const json& s = j.at("study");
        cli_detail::reject_unknown(s, {"levels", "mode"}, "study");
        cli_detail::read_into(s, "levels", c.study.levels);
        cli_detail::read_into(s, "mode", c.study.mode);
    }
    if (j.contains("ppum")) {
        const json& p = j.at("ppum");
        cli_detail::reject_unknown(p,
                                   {"p", "overlap_layers", "partitioner", "theta", "mode",
                                    "target_dofs", "epsilon", "dual_refine", "max_rounds",
                                    "eta_stop"},
                                   "ppum");
        cli_detail::read_into(p, "p", c.ppum.p);
        cli_detail::read_into(p, "overlap_layers", c.ppum.overlap_layers);
        cli_detail::read_into(p, "partitioner", c.ppum.partitioner);
        cli_detail::read_into(p, "theta", c.ppum.theta);
        cli_detail::read_into(p, "mode", c.ppum.mode);
        cli_detail::read_into(p, "target_dofs", c.ppum.target_dofs_per_subdomain);
        cli_detail::read_into(p, "epsilon", c.ppum.epsilon);
        cli_detail::read_into(p, "dual_refine", c.ppum.dual_refine);
        cli_detail::read_into(p, "max_rounds", c.ppum.max_rounds);
        cli_detail::read_into(p, "eta_stop", c.ppum.eta_stop);
    }
    // validate eagerly so bad configs never produce partial outputs
    if (c.initial_refines < 0) throw ConfigError("config: initial_refines must be >= 0");
    if (c.study.levels < 1) throw ConfigError("config: study.levels must be >= 1");
    if (c.study.mode != "uniform" && c.study.mode != "adaptive")
        throw ConfigError("config: study.mode must be uniform or adaptive");
    for (const auto& f : c.formats)
        if (f != "csv" && f != "json" && f != "vtk")
            throw ConfigError("config: unknown format \"" + f + "\"");
    c.ppum.validate();
    make_problem(c.problem);
    make_domain(c.domain, 0);
    if (c.goal != "mean_value") throw ConfigError("config: unknown goal \"" + c.goal + "\"");
    return c;
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["problem"] = c.problem;
    j["domain"] = c.domain;
    j["initial_refines"] = c.initial_refines;
    j["study"] = {{"levels", c.study.levels}, {"mode", c.study.mode}};
    j["ppum"] = {{"p", c.ppum.p},
                 {"overlap_layers", c.ppum.overlap_layers},
                 {"partitioner", c.ppum.partitioner},
                 {"theta", c.ppum.theta},
                 {"mode", c.ppum.mode},
                 {"target_dofs", c.ppum.target_dofs_per_subdomain},
                 {"epsilon", c.ppum.epsilon},
                 {"dual_refine", c.ppum.dual_refine},
                 {"max_rounds", c.ppum.max_rounds},
                 {"eta_stop", c.ppum.eta_stop}};
    j["goal"] = c.goal;
    j["output_dir"] = c.output_dir;
    j["formats"] = c.formats;
    return j;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

inline GoalFunctional make_goal(const std::string& name) {
    if (name == "mean_value") return {"mean_value", [](const Vec2&) { return 1.0; }};
    throw ConfigError("unknown goal: " + name);
}

namespace cli_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << text;
}

inline void export_mesh(const Mesh& m, const RunConfig& cfg, const std::filesystem::path& dir,
                        const std::string& base,
                        const std::vector<std::pair<std::string, std::vector<double>>>& point_fields = {},
                        const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields = {}) {
    {
        std::ostringstream n, e;
        write_node(m, n);
        write_ele(m, e);
        write_text(dir / (base + ".node"), n.str());
        write_text(dir / (base + ".ele"), e.str());
    }
    if (cfg.wants("json")) write_text(dir / (base + ".json"), mesh_to_json(m).dump(2) + "\n");
    if (cfg.wants("vtk")) {
        std::ostringstream v;
        write_vtk(m, v, base, point_fields, cell_fields);
        write_text(dir / (base + ".vtk"), v.str());
    }
}

} // namespace cli_detail

inline json pu_report_json(const PuReport& r) {
    return json{{"M", r.M},
                {"C_inf", r.C_inf},
                {"C_G", r.C_G},
                {"diam_min", r.diam_min},
                {"sum_residual", r.sum_residual}};
}

inline json run_report_json(const PpumSolution& sol, const RunConfig& cfg,
                            const std::pair<double, double>* global_err) {
    json rep;
    rep["config"] = config_to_json(cfg);
    rep["pu_report"] = pu_report_json(sol.pu.report);
    rep["per_subdomain"] = json::array();
    for (const auto& task : sol.tasks) {
        const auto& r = task.report;
        json t;
        t["index"] = r.index;
        t["dofs"] = r.dofs;
        t["rounds"] = r.rounds;
        t["eta_total"] = r.eta_total;
        t["goal_term"] = r.goal_term;
        t["l2_err"] = r.l2_err;
        t["h1_err"] = r.h1_err;
        t["h_min_region"] = r.h_min_region;
        t["marks_total"] = r.marks_total;
        t["marks_outside_region"] = r.marks_outside_region;
        t["tolerance_met"] = r.tolerance_met;
        t["failed"] = r.failed;
        t["failure"] = r.failure;
        rep["per_subdomain"].push_back(t);
    }
    json g;
    if (global_err) {
        g["l2_err"] = global_err->first;
        g["h1_err"] = global_err->second;
    } else {
        g["l2_err"] = nullptr;
        g["h1_err"] = nullptr;
    }
    g["goal_estimate"] = sol.goal_estimate;
    g["guarantee"] = sol.guarantee;
    rep["global"] = g;
    return rep;
}

// --- commands -----------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg, const std::string& out_dir) {
    const ModelProblem mp = make_problem(cfg.problem);
    const Mesh mesh = make_domain(cfg.domain, cfg.initial_refines);
    const FeFunction u = coarse_solve(mp.weak, mesh);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (cfg.wants("csv")) {
        std::ostringstream os;
        write_solution_csv(u, os);
        cli_detail::write_text(dir / "solution.csv", os.str());
    }
    if (cfg.wants("vtk")) {
        std::ostringstream os;
        write_vtk(u.space().mesh(), os, "solution", {{"u", u.nodal()}});
        cli_detail::write_text(dir / "solution.vtk", os.str());
    }
    json rep;
    rep["config"] = config_to_json(cfg);
    rep["dofs"] = u.space().n_dofs();
    if (mp.has_exact()) {
        const auto [l2, h1] = error_norms(u, mp.exact);
        rep["l2_err"] = l2;
        rep["h1_err"] = h1;
        std::cout << "solve " << cfg.problem << " on " << cfg.domain << ": dofs "
                  << u.space().n_dofs() << " l2_err " << l2 << " h1_err " << h1 << "\n";
    } else {
        std::cout << "solve " << cfg.problem << " on " << cfg.domain << ": dofs "
                  << u.space().n_dofs() << "\n";
    }
    if (cfg.wants("json")) cli_detail::write_text(dir / "report.json", rep.dump(2) + "\n");
    return 0;
}

struct ConvergenceRow {
    int level = 0;
    double h_max = 0.0;
    std::size_t dofs = 0;
    double l2_err = 0.0, h1_err = 0.0;
    double l2_rate = 0.0, h1_rate = 0.0;
    double eta_total = 0.0;
};

inline std::vector<ConvergenceRow> converge_study(const ModelProblem& mp, const RunConfig& cfg) {
    std::vector<ConvergenceRow> rows;
    Mesh mesh = make_domain(cfg.domain, cfg.initial_refines);
    for (int level = 0; level < cfg.study.levels; ++level) {
        const FeFunction u = coarse_solve(mp.weak, mesh);
        ConvergenceRow row;
        row.level = level;
        row.h_max = mesh.h_max();
        row.dofs = u.space().n_dofs();
        row.eta_total = residual_indicator(mp.weak, u).total;
        if (mp.has_exact()) {
            const auto [l2, h1] = error_norms(u, mp.exact);
            row.l2_err = l2;
            row.h1_err = h1;
            if (level > 0) {
                row.l2_rate = std::log2(rows.back().l2_err / l2);
                row.h1_rate = std::log2(rows.back().h1_err / h1);
            }
        }
        rows.push_back(row);
        if (level + 1 == cfg.study.levels) break;
        if (cfg.study.mode == "uniform") {
            // one level halves h: two rounds of full bisection
            for (int r = 0; r < 2; ++r) {
                std::vector<SimplexId> all;
                for (SimplexId t = 0; t < mesh.simplices.size(); ++t)
                    if (mesh.simplices[t].alive) all.push_back(t);
                mesh.bisect(std::move(all));
            }
        } else {
            const ErrorIndicator ind = residual_indicator(mp.weak, u);
            mesh.bisect(mark(ind, cfg.ppum.theta));
        }
        mesh.compact();
    }
    return rows;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows, bool has_exact) {
    std::ostringstream os;
    os << std::setprecision(17);
    if (has_exact) {
        os << "level,h_max,dofs,l2_err,h1_err,l2_rate,h1_rate\n";
        for (const auto& r : rows)
            os << r.level << ',' << r.h_max << ',' << r.dofs << ',' << r.l2_err << ',' << r.h1_err
               << ',' << r.l2_rate << ',' << r.h1_rate << '\n';
    } else {
        os << "level,h_max,dofs,eta_total\n";
        for (const auto& r : rows)
            os << r.level << ',' << r.h_max << ',' << r.dofs << ',' << r.eta_total << '\n';
    }
    return os.str();
}

inline int cmd_converge(const RunConfig& cfg, const std::string& out_dir) {
    const ModelProblem mp = make_problem(cfg.problem);
    const auto rows = converge_study(mp, cfg);
    const std::string csv = convergence_csv(rows, mp.has_exact());
    std::cout << csv;
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    cli_detail::write_text(dir / "convergence.csv", csv);
    if (cfg.wants("json")) {
        json rep;
        rep["config"] = config_to_json(cfg);
        rep["alpha"] = mp.alpha;
        rep["rows"] = json::array();
        for (const auto& r : rows)
            rep["rows"].push_back({{"level", r.level},
                                   {"h_max", r.h_max},
                                   {"dofs", r.dofs},
                                   {"l2_err", r.l2_err},
                                   {"h1_err", r.h1_err},
                                   {"l2_rate", r.l2_rate},
                                   {"h1_rate", r.h1_rate},
                                   {"eta_total", r.eta_total}});
        cli_detail::write_text(dir / "report.json", rep.dump(2) + "\n");
    }
    return 0;
}

inline int cmd_ppum(const RunConfig& cfg, const std::string& out_dir, int threads, bool strict) {
    const ModelProblem mp = make_problem(cfg.problem);
    const Mesh mesh = make_domain(cfg.domain, cfg.initial_refines);
    PpumSolution sol;
    if (cfg.ppum.mode == "goal") {
        const GoalFunctional goal = make_goal(cfg.goal);
        sol = run_ppum_goal(mp.weak, mesh, cfg.ppum, goal, mp.exact, threads);
    } else {
        sol = run_ppum(mp.weak, mesh, cfg.ppum, mp.exact, threads);
    }
    std::pair<double, double> gerr{0.0, 0.0};
    const bool have_err = mp.has_exact() && !sol.any_failed;
    if (have_err) gerr = global_error(sol, mp.exact);

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const json rep = run_report_json(sol, cfg, have_err ? &gerr : nullptr);
    cli_detail::write_text(dir / "report.json", rep.dump(2) + "\n");
    cli_detail::write_text(dir / "pu_report.json", pu_report_json(sol.pu.report).dump(2) + "\n");
    if (cfg.wants("csv")) {
        std::ostringstream os;
        write_partition_csv(sol.partition, os);
        cli_detail::write_text(dir / "partition.csv", os.str());
    }
    for (const auto& task : sol.tasks) {
        const std::string base = "subdomain_" + std::to_string(task.index);
        const Mesh& tm = task.solution.space().mesh();
        std::vector<double> sub(tm.simplices.size(), -1.0);
        for (SimplexId t = 0; t < tm.simplices.size(); ++t) sub[t] = tm.simplices[t].subdomain;
        cli_detail::export_mesh(tm, cfg, dir, base, {{"u", task.solution.nodal()}},
                                {{"subdomain", sub}});
        if (cfg.wants("csv")) {
            std::ostringstream os;
            write_solution_csv(task.solution, os);
            cli_detail::write_text(dir / (base + "_solution.csv"), os.str());
        }
    }
    std::cout << "ppum " << cfg.ppum.mode << " p=" << cfg.ppum.p << ": ";
    for (const auto& task : sol.tasks)
        std::cout << "[" << task.report.index << "] dofs=" << task.report.dofs
                  << " rounds=" << task.report.rounds << (task.report.failed ? " FAILED" : "")
                  << " ";
    if (have_err) std::cout << "global l2=" << gerr.first << " h1=" << gerr.second;
    if (cfg.ppum.mode == "goal")
        std::cout << " estimate=" << sol.goal_estimate << " guarantee=" << sol.guarantee;
    std::cout << "\n";

    if (sol.any_failed) return 1;
    if (cfg.ppum.mode == "goal" && strict && !sol.guarantee) return 1;
    return 0;
}

// the invariant suite behind `verify`; failures are data, not errors
inline json verify_suite(const RunConfig& cfg, int threads) {
    json checks = json::array();
    auto add = [&checks](const std::string& name, bool pass, json detail) {
        detail["name"] = name;
        detail["pass"] = pass;
        checks.push_back(detail);
    };

    // mesh conformity audits across domains and refinement patterns
    for (const std::string& dom : domain_names()) {
        Mesh m = make_domain(dom, dom == "unit_square" ? 4 : 2);
        AuditReport a = m.audit();
        add("conformity_" + dom, a.ok,
            {{"interior_edges", a.n_interior_edges}, {"boundary_edges", a.n_boundary_edges}});
        // deterministic non-uniform refinement: mark every third simplex, twice
        for (int round = 0; round < 2; ++round) {
            std::vector<SimplexId> marks;
            int k = 0;
            for (SimplexId t = 0; t < m.simplices.size(); ++t)
                if (m.simplices[t].alive && (k++ % 3 == 0)) marks.push_back(t);
            m.bisect(std::move(marks));
        }
        a = m.audit();
        add("conformity_" + dom + "_refined", a.ok, {{"live", m.n_live()}});
    }

    // PU certification and overlap-lemma checks
    const Mesh base = make_domain(cfg.domain, std::max(cfg.initial_refines, 7));
    auto mesh_ptr = std::make_shared<const Mesh>(base);
    for (const int p : {1, 2, 4}) {
        std::vector<double> w(base.simplices.size(), 1.0);
        const Partition part = cfg.ppum.partitioner == "spectral"
                                   ? partition_spectral(base, w, p)
                                   : partition_inertial(base, w, p);
        for (const int layers : {1, 2}) {
            const Cover cover = extend_overlap(base, part, layers);
            const PartitionOfUnity pu = build_pu(mesh_ptr, cover);
            const PuCertificate cert = certify_pu(pu, cover);
            add("pu_certification_p" + std::to_string(p) + "_layers" + std::to_string(layers),
                cert.pass() && cert.C_inf == 1.0,
                {{"M", pu.report.M},
                 {"M_bruteforce", cert.M_bruteforce},
                 {"C_inf", cert.C_inf},
                 {"C_G", pu.report.C_G},
                 {"sum_max_dev", cert.sum_max_dev},
                 {"support_ok", cert.support_ok}});
            const LemmaCheckResult lemma = lemma_overlap_check(base, cover, pu.report.M);
            add("lemma_overlap_p" + std::to_string(p) + "_layers" + std::to_string(layers),
                lemma.pass(),
                {{"violations_subadditivity", lemma.violations_subadditivity},
                 {"violations_superposition", lemma.violations_superposition},
                 {"worst_ratio_1", lemma.worst_ratio_1},
                 {"worst_ratio_2", lemma.worst_ratio_2},
                 {"M", pu.report.M}});
        }
    }

    // Jacobian finite-difference checks for every registered problem
    for (const std::string& name : problem_names()) {
        const ModelProblem mp = make_problem(name);
        const std::string dom = name == "poisson_lshape" ? "l_shape" : "unit_square";
        auto mp_mesh = std::make_shared<const Mesh>(make_domain(dom, 4));
        auto space = std::make_shared<const FeSpace>(mp_mesh);
        FeFunction u = initial_iterate(mp.weak, space);
        if (mp.linear) {
            // check at a nonzero state so linearity is actually exercised
            for (VertexId v = 0; v < u.nodal().size(); ++v)
                if (space->dof(v) >= 0) u.nodal()[v] = 0.25 + 0.001 * static_cast<double>(v % 17);
        }
        const double err = jacobian_fd_check(mp.weak, u);
        add("jacobian_fd_" + name, err < 1e-5, {{"max_rel_err", err}});
    }

    // mark-locality audit on a small estimator-mode run
    {
        const ModelProblem mp = make_problem(cfg.problem);
        PpumConfig pc = cfg.ppum;
        pc.mode = "estimator";
        pc.p = std::min(pc.p, 2);
        pc.target_dofs_per_subdomain = 300;
        pc.max_rounds = 12;
        const Mesh mesh = make_domain(cfg.domain, std::max(cfg.initial_refines, 4));
        const PpumSolution sol = run_ppum(mp.weak, mesh, pc, mp.exact, threads);
        std::size_t total = 0, outside = 0;
        bool failed = sol.any_failed;
        for (const auto& task : sol.tasks) {
            total += task.report.marks_total;
            outside += task.report.marks_outside_region;
        }
        add("mark_locality", !failed && outside == 0,
            {{"marks_total", total}, {"marks_outside_region", outside}});
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.at("pass").get<bool>();
    return json{{"checks", checks}, {"all_pass", all}};
}

inline int cmd_verify(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const json result = verify_suite(cfg, threads);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    cli_detail::write_text(dir / "verify.json", result.dump(2) + "\n");
    for (const auto& c : result.at("checks"))
        std::cout << (c.at("pass").get<bool>() ? "[pass] " : "[FAIL] ")
                  << c.at("name").get<std::string>() << "\n";
    const bool all = result.at("all_pass").get<bool>();
    std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES\n");
    return all ? 0 : 1;
}

inline int cmd_mesh_make(const RunConfig& cfg, const std::string& out_dir) {
    const Mesh m = make_domain(cfg.domain, cfg.initial_refines);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    cli_detail::export_mesh(m, cfg, dir, "mesh");
    std::cout << "mesh " << cfg.domain << ": " << m.vertices.size() << " vertices, " << m.n_live()
              << " triangles, h_max " << m.h_max() << "\n";
    return 0;
}

inline int cmd_mesh_info(const std::string& node_path, const std::string& ele_path) {
    const Mesh m = read_mesh_files(node_path, ele_path);
    const AuditReport a = m.audit();
    std::cout << "vertices " << m.vertices.size() << "\ntriangles " << m.n_live() << "\nh_max "
              << m.h_max() << "\nh_min " << m.h_min() << "\nquality_min " << m.quality_min()
              << "\ninterior_edges " << a.n_interior_edges << "\nboundary_edges "
              << a.n_boundary_edges << "\nconforming " << (a.ok ? "yes" : "NO") << "\n";
    for (const auto& issue : a.issues) std::cout << "issue: " << issue << "\n";
    return a.ok ? 0 : 1;
}

inline int cmd_mesh_refine(const RunConfig& cfg, const std::string& node_path,
                           const std::string& ele_path, int rounds, const std::string& out_dir) {
    Mesh m = read_mesh_files(node_path, ele_path);
    for (int r = 0; r < rounds; ++r) {
        std::vector<SimplexId> all;
        for (SimplexId t = 0; t < m.simplices.size(); ++t)
            if (m.simplices[t].alive) all.push_back(t);
        m.bisect(std::move(all));
    }
    m.compact();
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    cli_detail::export_mesh(m, cfg, dir, "mesh_refined");
    std::cout << "refined " << rounds << " rounds: " << m.vertices.size() << " vertices, "
              << m.n_live() << " triangles\n";
    return 0;
}

} // namespace ppum

#endif // PPUM_CLI_HPP
