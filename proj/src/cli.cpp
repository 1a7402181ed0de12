#include "qdet/cli.hpp"

#include "qdet/boundary_grid.hpp"
#include "qdet/config.hpp"
#include "qdet/detect.hpp"
#include "qdet/digest.hpp"
#include "qdet/errors.hpp"
#include "qdet/format.hpp"
#include "qdet/fredholm.hpp"
#include "qdet/hormander.hpp"
#include "qdet/kernel.hpp"
#include "qdet/manifest.hpp"
#include "qdet/simulate.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

namespace qdet::cli {

namespace {

using nlohmann::json;

struct RunScope {
    RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    RunScope(const std::string& subcommand, const CommonOpts& opts) {
        manifest.version = kVersion;
        manifest.subcommand = subcommand;
        manifest.seed = opts.seed;
        manifest.flags["config"] = opts.config;
        manifest.flags["seed"] = std::to_string(opts.seed);
        manifest.flags["workers"] = std::to_string(opts.workers);
        manifest.flags["json"] = opts.json ? "1" : "0";
        manifest.flags["out"] = opts.out;
    }

    void add_output(const std::string& path) {
        manifest.output_digests[path] = file_digest(path);
    }

    // manifests accompany file outputs; print-only runs skip them
    void finish() {
        if (manifest.output_digests.empty()) return;
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string path = manifest.output_digests.begin()->first + ".manifest.json";
        write_manifest(manifest, path);
    }
};

ProblemSpec load_spec(const CommonOpts& opts, RunScope& scope) {
    if (opts.config.empty()) throw ConfigError("--config is required");
    ProblemSpec spec = parse_config_file(opts.config);
    scope.manifest.spec_echo = spec.canonical_string();
    return spec;
}

json certificate_json(const RankCertificate& cert) {
    json j;
    j["rank"] = cert.rank;
    j["dimension"] = cert.N;
    j["full_rank"] = cert.full_rank();
    json wits = json::array();
    for (size_t i = 0; i < cert.witnesses.size(); ++i) {
        json w;
        w["coordinate"] = i;
        if (cert.witnesses[i]) w["word"] = word_str(*cert.witnesses[i]);
        wits.push_back(w);
    }
    j["witnesses"] = wits;
    j["unreached"] = cert.unreached;
    return j;
}

}  // namespace

int run_family(const CommonOpts& opts) {
    RunScope scope("family", opts);
    const ProblemSpec spec = load_spec(opts, scope);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!opts.out.empty()) {
        file.open(opts.out);
        if (!file) throw ConfigError("cannot open output: " + opts.out);
        os = &file;
    }
    if (opts.json) {
        json j;
        j["n"] = spec.n;
        j["N"] = spec.N();
        json members = json::array();
        for (int i = 0; i < spec.N(); ++i) {
            json m;
            m["index"] = i + 1;
            m["subset"] = spec.family.subsets[i];
            m["prob"] = spec.family.probs[i];
            m["kappa"] = spec.kappa(i);
            members.push_back(m);
        }
        j["members"] = members;
        *os << j.dump(2) << "\n";
    } else {
        *os << "index,subset,p,kappa\n";
        for (int i = 0; i < spec.N(); ++i)
            *os << (i + 1) << ",\"" << spec.family.subset_str(i) << "\","
                << fmt17(spec.family.probs[i]) << "," << fmt17(spec.kappa(i)) << "\n";
    }
    if (!opts.out.empty()) {
        file.close();
        scope.add_output(opts.out);
    }
    scope.finish();
    return 0;
}

int run_hormander(const CommonOpts& opts, const HormanderOpts& h) {
    RunScope scope("hormander", opts);
    const ProblemSpec spec = load_spec(opts, scope);

    HormanderOptions ho;
    ho.depth = h.depth;
    ho.full_tree = h.full_tree;

    const auto points = default_check_points(spec.N(), h.spot_checks, opts.seed);
    json report = json::array();
    bool all_full = true;
    RankCertificate first_cert;
    for (size_t pi = 0; pi < points.size(); ++pi) {
        const RankCertificate cert = h.parabolic ? check_parabolic(spec, points[pi], ho)
                                                 : check_hormander(spec, points[pi], ho);
        if (pi == 0) first_cert = cert;
        all_full = all_full && cert.full_rank();
        json entry = certificate_json(cert);
        json pt = json::array();
        for (const auto& r : points[pi]) pt.push_back(r.str());
        entry["point"] = pt;
        report.push_back(entry);
    }

    if (opts.json) {
        json j;
        j["parabolic"] = h.parabolic;
        j["N"] = spec.N();
        j["all_full_rank"] = all_full;
        j["checks"] = report;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << (h.parabolic ? "parabolic " : "") << "rank " << first_cert.rank << " of "
                  << first_cert.N << " at (1,...,1)";
        std::cout << (all_full ? "; full rank at all checked points\n"
                               : "; RANK DEFICIENT at some point\n");
        for (size_t i = 0; i < first_cert.witnesses.size(); ++i) {
            std::cout << "  coordinate " << i + 1 << ": ";
            if (first_cert.witnesses[i])
                std::cout << word_str(*first_cert.witnesses[i]) << "\n";
            else
                std::cout << "(no witness)\n";
        }
    }
    if (!opts.out.empty()) {
        std::ofstream f(opts.out);
        json j;
        j["parabolic"] = h.parabolic;
        j["all_full_rank"] = all_full;
        j["checks"] = report;
        f << j.dump(2) << "\n";
        f.close();
        scope.add_output(opts.out);
    }
    scope.finish();
    return all_full ? 0 : 1;
}

int run_solve1d(const CommonOpts& opts) {
    RunScope scope("solve1d", opts);
    const ProblemSpec spec = load_spec(opts, scope);
    const KernelParams kp = kernel_params(spec);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!opts.out.empty()) {
        file.open(opts.out);
        if (!file) throw ConfigError("cannot open output: " + opts.out);
        os = &file;
    }
    *os << "index,subset,p,kappa,phi_star\n";
    for (int i = 0; i < spec.N(); ++i)
        *os << (i + 1) << ",\"" << spec.family.subset_str(i) << "\","
            << fmt17(spec.family.probs[i]) << "," << fmt17(kp.kappa[i]) << ","
            << fmt17(kp.phi_star[i]) << "\n";
    if (!opts.out.empty()) {
        file.close();
        scope.add_output(opts.out);
    }
    scope.finish();
    return 0;
}

int run_solve(const CommonOpts& opts, const SolveOpts& s) {
    RunScope scope("solve", opts);
    scope.manifest.flags["grid-nodes"] = std::to_string(s.grid_nodes);
    scope.manifest.flags["mc-samples"] = std::to_string(s.mc_samples);
    scope.manifest.flags["tol"] = fmt17(s.tol);
    scope.manifest.flags["max-sweeps"] = std::to_string(s.max_sweeps);
    const ProblemSpec spec = load_spec(opts, scope);

    PicardConfig pc;
    pc.nodes_per_axis = s.grid_nodes;
    pc.tol_sup = s.tol;
    pc.max_sweeps = s.max_sweeps;
    pc.workers = opts.workers;
    McConfig mc;
    mc.samples = s.mc_samples;
    mc.seed = opts.seed;

    auto [grid, report] = picard_solve(spec, pc, mc);

    const std::string out = opts.out.empty() ? "boundary.csv" : opts.out;
    write_boundary_csv(grid, out);
    scope.add_output(out);

    json meta;
    meta["spec_hash"] = grid.spec_hash;
    meta["spec"] = spec.canonical_string();
    meta["seed"] = mc.seed;
    meta["samples"] = mc.samples;
    meta["iterations"] = report.iterations;
    meta["converged"] = report.converged;
    meta["sup_change"] = report.sup_change;
    meta["residual_max"] = report.residual_max;
    meta["residual_mean"] = report.residual_mean;
    meta["stderr_max"] = report.stderr_max;
    meta["stderr_mean"] = report.stderr_mean;
    meta["flagged_nodes"] = report.flagged_nodes;
    meta["wall_seconds"] = report.wall_seconds;
    const std::string meta_path = out + ".meta.json";
    {
        std::ofstream f(meta_path);
        f << meta.dump(2) << "\n";
    }
    scope.add_output(meta_path);
    scope.finish();

    std::cout << "solve: " << report.iterations << " sweeps, sup-change "
              << (report.sup_change.empty() ? 0.0 : report.sup_change.back())
              << ", max residual " << report.residual_max << " (stderr max "
              << report.stderr_max << "), " << (report.converged ? "converged" : "NOT CONVERGED")
              << "\n";
    return report.converged ? 0 : 2;
}

int run_simulate(const CommonOpts& opts, const SimulateOpts& s) {
    RunScope scope("simulate", opts);
    scope.manifest.flags["paths"] = std::to_string(s.paths);
    scope.manifest.flags["dt"] = fmt17(s.dt);
    scope.manifest.flags["horizon"] = fmt17(s.horizon);
    scope.manifest.flags["scenario"] = s.scenario;
    const ProblemSpec spec = load_spec(opts, scope);

    ScenarioConfig sc;
    if (s.scenario == "prior")
        sc.measure = ScenarioConfig::Measure::Prior;
    else if (s.scenario == "nochange")
        sc.measure = ScenarioConfig::Measure::NoChange;
    else
        throw ConfigError("scenario must be prior or nochange");
    sc.pi_override = s.pi;

    const PathEnsemble ens = simulate_paths(spec, sc, s.horizon, s.dt, s.paths, opts.seed);

    const std::string out = opts.out.empty() ? "paths.csv" : opts.out;
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot open output: " + out);
    f << "path,t";
    for (int j = 1; j <= spec.n; ++j) f << ",X" << j;
    for (int i = 1; i <= spec.N(); ++i) f << ",Phi" << i;
    f << ",Pi\n";
    std::vector<double> x(spec.n);
    std::vector<double> phi(spec.N());
    for (int m = 0; m < ens.n_paths; ++m) {
        std::fill(x.begin(), x.end(), 0.0);
        for (int g = 0; g <= ens.steps; ++g) {
            if (g > 0)
                for (int j = 0; j < spec.n; ++j) x[j] += ens.x_inc(m, g - 1, j);
            for (int i = 0; i < spec.N(); ++i) phi[i] = ens.phi_at(m, g, i);
            f << m << "," << fmt17(g * ens.dt);
            for (int j = 0; j < spec.n; ++j) f << "," << fmt17(x[j]);
            for (int i = 0; i < spec.N(); ++i) f << "," << fmt17(phi[i]);
            f << "," << fmt17(posterior_from_phi(phi, spec.family.probs)) << "\n";
        }
    }
    f.close();
    scope.add_output(out);
    scope.finish();
    std::cout << "simulate: wrote " << ens.n_paths << " paths x " << (ens.steps + 1)
              << " grid times to " << out << "\n";
    return 0;
}

int run_evaluate(const CommonOpts& opts, const EvaluateOpts& e) {
    RunScope scope("evaluate", opts);
    scope.manifest.flags["boundary"] = e.boundary;
    scope.manifest.flags["paths"] = std::to_string(e.paths);
    scope.manifest.flags["horizon"] = fmt17(e.horizon);
    if (e.pi) scope.manifest.flags["pi"] = fmt17(*e.pi);
    if (!e.per_path_csv.empty()) scope.manifest.flags["per-path"] = e.per_path_csv;
    const ProblemSpec spec = load_spec(opts, scope);

    BoundaryGrid grid;
    Policy policy;
    if (e.threshold) {
        policy = scalar_threshold_policy(*e.threshold);
        scope.manifest.flags["threshold"] = fmt17(*e.threshold);
    } else {
        if (e.boundary.empty()) throw ConfigError("evaluate needs --boundary or --threshold");
        grid = read_boundary_csv(e.boundary);
        policy = boundary_policy(grid);
    }

    EvalConfig cfg;
    cfg.horizon = e.horizon;
    cfg.n_paths = e.paths;
    cfg.seed = opts.seed;
    cfg.pi_override = e.pi;
    cfg.workers = opts.workers;
    cfg.keep_paths = !e.per_path_csv.empty();

    const PolicyResult r = evaluate_policy(spec, policy, cfg);

    json j;
    j["pi"] = e.pi.value_or(spec.pi0);
    j["paths"] = r.n_paths;
    j["false_alarm"] = r.false_alarm;
    j["false_alarm_se"] = r.false_alarm_se;
    j["delay"] = r.delay;
    j["delay_se"] = r.delay_se;
    j["risk"] = r.risk;
    j["risk_se"] = r.risk_se;
    j["censored"] = r.censored_count;
    j["horizon_warning"] = r.horizon_warning;

    if (!opts.out.empty()) {
        std::ofstream f(opts.out);
        f << j.dump(2) << "\n";
        f.close();
        scope.add_output(opts.out);
    }
    if (!e.per_path_csv.empty()) {
        std::ofstream f(e.per_path_csv);
        f << "path,theta,beta,tau,false_alarm,delay\n";
        for (int m = 0; m < r.n_paths; ++m) {
            const double tau = r.stop_times[m];
            const bool fa = !r.censored[m] && tau < r.theta[m];
            f << m << "," << fmt17(r.theta[m]) << "," << (r.beta[m] + 1) << "," << fmt17(tau)
              << "," << (fa ? 1 : 0) << "," << fmt17(std::max(0.0, tau - r.theta[m])) << "\n";
        }
        f.close();
        scope.add_output(e.per_path_csv);
    }
    std::cout << j.dump(2) << "\n";
    scope.finish();
    if (r.horizon_warning)
        std::cerr << "warning: " << r.censored_count
                  << " paths were censored at the horizon (> 1%); delay is underestimated\n";
    return 0;
}

int run_export(const CommonOpts& opts, const ExportOpts& e) {
    RunScope scope("export", opts);
    scope.manifest.flags["boundary"] = e.boundary;
    if (e.boundary.empty()) throw ConfigError("export needs --boundary");
    const BoundaryGrid grid = read_boundary_csv(e.boundary);

    const std::string out = opts.out.empty() ? "surface.csv" : opts.out;
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot open output: " + out);

    const int D = grid.dims();
    if (D > 2) f << "# raw grid export; not plot-ready for " << D << " axes\n";
    for (int d = 0; d < D; ++d) f << "phi_" << (d + 1) << ",";
    f << "b\n";
    std::vector<double> coords;
    for (size_t fl = 0; fl < grid.node_count(); ++fl) {
        grid.node_coords(fl, coords);
        for (double cv : coords) f << fmt17(cv) << ",";
        f << fmt17(grid.values[fl]) << "\n";
    }
    f.close();
    scope.add_output(out);
    scope.finish();
    return 0;
}

int run_replay(const std::string& manifest_path) {
    const RunManifest m = read_manifest(manifest_path);
    CommonOpts opts;
    opts.config = m.flags.count("config") ? m.flags.at("config") : "";
    opts.seed = m.seed;
    opts.workers = m.flags.count("workers") ? std::stoi(m.flags.at("workers")) : 0;
    opts.json = m.flags.count("json") && m.flags.at("json") == "1";
    opts.out = m.flags.count("out") ? m.flags.at("out") : "";

    int rc = 1;
    if (m.subcommand == "family") {
        rc = run_family(opts);
    } else if (m.subcommand == "solve1d") {
        rc = run_solve1d(opts);
    } else if (m.subcommand == "solve") {
        SolveOpts s;
        s.grid_nodes = std::stoi(m.flags.at("grid-nodes"));
        s.mc_samples = std::stoi(m.flags.at("mc-samples"));
        s.tol = std::stod(m.flags.at("tol"));
        s.max_sweeps = std::stoi(m.flags.at("max-sweeps"));
        rc = run_solve(opts, s);
    } else if (m.subcommand == "simulate") {
        SimulateOpts s;
        s.paths = std::stoi(m.flags.at("paths"));
        s.dt = std::stod(m.flags.at("dt"));
        s.horizon = std::stod(m.flags.at("horizon"));
        s.scenario = m.flags.at("scenario");
        rc = run_simulate(opts, s);
    } else if (m.subcommand == "evaluate") {
        EvaluateOpts e;
        e.boundary = m.flags.count("boundary") ? m.flags.at("boundary") : "";
        e.paths = std::stoi(m.flags.at("paths"));
        e.horizon = std::stod(m.flags.at("horizon"));
        if (m.flags.count("pi")) e.pi = std::stod(m.flags.at("pi"));
        if (m.flags.count("threshold")) e.threshold = std::stod(m.flags.at("threshold"));
        if (m.flags.count("per-path")) e.per_path_csv = m.flags.at("per-path");
        rc = run_evaluate(opts, e);
    } else if (m.subcommand == "export") {
        ExportOpts e;
        e.boundary = m.flags.at("boundary");
        rc = run_export(opts, e);
    } else {
        throw ConfigError("replay does not support subcommand: " + m.subcommand);
    }
    if (rc != 0 && rc != 2) return rc;

    for (const auto& [path, digest] : m.output_digests) {
        const std::string now = file_digest(path);
        if (now != digest) {
            std::cerr << "replay mismatch for " << path << ": " << now << " vs " << digest
                      << "\n";
            return 1;
        }
    }
    std::cout << "replay: all " << m.output_digests.size() << " digests reproduced\n";
    return 0;
}

}  // namespace qdet::cli
