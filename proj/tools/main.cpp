// ppumfem command line: mesh generation, single solves, convergence studies,
// partition-of-unity runs, and the verification suite.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ppum/cli.hpp"

namespace {

ppum::RunConfig effective_config(const std::string& config_path) {
    if (config_path.empty()) return ppum::RunConfig{};
    return ppum::load_config(config_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ppumfem: adaptive finite elements with partition-of-unity recombination"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads = 1;
    bool no_strict = false;
    app.add_option("--config", config_path, "JSON run configuration file")->expected(1);
    app.add_option("--out", out_override, "output directory (overrides config)")->expected(1);
    app.add_option("--threads", threads, "worker threads (affects speed only, never output)")
        ->expected(1);
    app.add_flag("--no-strict", no_strict, "do not fail the exit code on a missed goal guarantee");

    auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
    mesh_cmd->require_subcommand(1);
    std::string mesh_domain;
    int mesh_refines = -1;
    auto* mesh_make = mesh_cmd->add_subcommand("make", "write a built-in domain mesh");
    mesh_make->add_option("--domain", mesh_domain, "unit_square | l_shape | annulus_approx");
    mesh_make->add_option("--refines", mesh_refines, "uniform bisection rounds");
    std::string in_node, in_ele;
    auto* mesh_info = mesh_cmd->add_subcommand("info", "print stats and a conformity audit");
    mesh_info->add_option("--node", in_node, ".node file")->required();
    mesh_info->add_option("--ele", in_ele, ".ele file")->required();
    int refine_rounds = 1;
    auto* mesh_refine = mesh_cmd->add_subcommand("refine", "uniformly bisect a mesh file");
    mesh_refine->add_option("--node", in_node, ".node file")->required();
    mesh_refine->add_option("--ele", in_ele, ".ele file")->required();
    mesh_refine->add_option("--rounds", refine_rounds, "bisection rounds");

    auto* solve_cmd = app.add_subcommand("solve", "single solve of the configured problem");
    auto* converge_cmd = app.add_subcommand("converge", "convergence study");
    auto* ppum_cmd = app.add_subcommand("ppum", "partition-of-unity run (


estimator or goal mode)");
    auto* verify_cmd = app.add_subcommand("verify", "invariant and certification suite");

    CLI11_PARSE(app, argc, argv);

    try {
        ppum::RunConfig cfg = effective_config(config_path);
        if (mesh_domain != "") cfg.domain = mesh_domain;
        if (mesh_refines >= 0) cfg.initial_refines = mesh_refines;
        const std::string out = out_override.empty() ? cfg.output_dir : out_override;
        if (threads < 1) threads = 1;

        if (mesh_make->parsed()) return ppum::cmd_mesh_make(cfg, out);
        if (mesh_info->parsed()) return ppum::cmd_mesh_info(in_node, in_ele);
        if (mesh_refine->parsed())
            return ppum::cmd_mesh_refine(cfg, in_node, in_ele, refine_rounds, out);
        if (solve_cmd->parsed()) return ppum::cmd_solve(cfg, out);
        if (converge_cmd->parsed()) return ppum::cmd_converge(cfg, out);
        if (ppum_cmd->parsed()) return ppum::cmd_ppum(cfg, out, threads, !no_strict);
        if (verify_cmd->parsed()) return ppum::cmd_verify(cfg, out, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
