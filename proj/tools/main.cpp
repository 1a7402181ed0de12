#include "qdet/cli.hpp"
#include "qdet/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Optimal detection boundaries for multi-coordinate Brownian drift changes"};
    app.require_subcommand(1);

    qdet::cli::CommonOpts common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config, "problem config file");
        sub->add_option("--seed", common.seed, "root RNG seed");
        sub->add_option("--workers", common.workers, "worker threads (0 = auto)");
        sub->add_flag("--json", common.json, "machine-readable stdout");
        sub->add_option("--out", common.out, "output file");
    };

    auto* family = app.add_subcommand("family", "print the ordered subset family");
    add_common(family);

    auto* horm = app.add_subcommand("hormander", "verify the bracket rank condition");
    add_common(horm);
    qdet::cli::HormanderOpts hopts;
    horm->add_flag("--parabolic", hopts.parabolic, "time-space variant (rank N+1)");
    horm->add_option("--depth", hopts.depth, "bracket depth cap (0 = auto)");
    horm->add_flag("--full-tree", hopts.full_tree, "search all bracket pairs");
    horm->add_option("--spot-checks", hopts.spot_checks, "extra random interior points");

    auto* solve1d = app.add_subcommand("solve1d", "per-coordinate one-dimensional roots");
    add_common(solve1d);

    auto* solve = app.add_subcommand("solve", "solve the boundary integral equation");
    add_common(solve);
    qdet::cli::SolveOpts sopts;
    solve->add_option("--grid-nodes", sopts.grid_nodes, "nodes per axis");
    solve->add_option("--mc-samples", sopts.mc_samples, "kernel sample paths");
    solve->add_option("--tol", sopts.tol, "sup-norm stopping tolerance (0 = auto)");
    solve->add_option("--max-sweeps", sopts.max_sweeps, "sweep cap");

    auto* sim = app.add_subcommand("simulate", "simulate observation paths and the flow");
    add_common(sim);
    qdet::cli::SimulateOpts simopts;
    sim->add_option("--paths", simopts.paths, "number of paths");
    sim->add_option("--dt", simopts.dt, "time step");
    sim->add_option("--horizon", simopts.horizon, "time horizon");
    sim->add_option("--scenario", simopts.scenario, "prior | nochange");
    double sim_pi = -1.0;
    sim->add_option("--pi", sim_pi, "override prior probability");

    auto* eval = app.add_subcommand("evaluate", "Monte Carlo operating characteristics");
    add_common(eval);
    qdet::cli::EvaluateOpts eopts;
    eval->add_option("--boundary", eopts.boundary, "boundary CSV from solve");
    double eval_pi = -1.0;
    eval->add_option("--pi", eval_pi, "prior probability at evaluation");
    double eval_thr = -1.0;
    eval->add_option("--threshold", eval_thr, "scalar-threshold policy instead");
    eval->add_option("--paths", eopts.paths, "number of paths");
    eval->add_option("--horizon", eopts.horizon, "horizon (0 = 20/lambda)");
    eval->add_option("--per-path", eopts.per_path_csv, "per-path CSV output");

    auto* expo = app.add_subcommand("export", "plot-ready surface export");
    add_common(expo);
    qdet::cli::ExportOpts xopts;
    expo->add_option("--boundary", xopts.boundary, "boundary CSV from solve");

    auto* replay = app.add_subcommand("replay", "re-run from a manifest and verify digests");
    std::string manifest_path;
    replay->add_option("--manifest", manifest_path, "manifest file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (family->parsed()) return qdet::cli::run_family(common);
        if (horm->parsed()) return qdet::cli::run_hormander(common, hopts);
        if (solve1d->parsed()) return qdet::cli::run_solve1d(common);
        if (solve->parsed()) return qdet::cli::run_solve(common, sopts);
        if (sim->parsed()) {
            if (sim_pi >= 0.0) simopts.pi = sim_pi;
            return qdet::cli::run_simulate(common, simopts);
        }
        if (eval->parsed()) {
            if (eval_pi >= 0.0) eopts.pi = eval_pi;
            if (eval_thr >= 0.0) eopts.threshold = eval_thr;
            return qdet::cli::run_evaluate(common, eopts);
        }
        if (expo->parsed()) return qdet::cli::run_export(common, xopts);
        if (replay->parsed()) return qdet::cli::run_replay(manifest_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
