#pragma once

#include <optional>
#include <string>

namespace qdet::cli {

inline constexpr const char* kVersion = "qdet 0.1.0";

struct CommonOpts {
    std::string config;
    uint64_t seed = 1;
    int workers = 0;
    bool json = false;
    std::string out;
};

int run_family(const CommonOpts& opts);

struct HormanderOpts {
    bool parabolic = false;
    int depth = 0;
    bool full_tree = false;
    int spot_checks = 3;
};
int run_hormander(const CommonOpts& opts, const HormanderOpts& h);

int run_solve1d(const CommonOpts& opts);

struct SolveOpts {
    int grid_nodes = 21;
    int mc_samples = 20000;
    double tol = 0.0;
    int max_sweeps = 16;
};
int run_solve(const CommonOpts& opts, const SolveOpts& s);

struct SimulateOpts {
    int paths = 100;
    double dt = 0.01;
    double horizon = 5.0;
    std::string scenario = "prior";  // prior | nochange
    std::optional<double> pi;
};
int run_simulate(const CommonOpts& opts, const SimulateOpts& s);

struct EvaluateOpts {
    std::string boundary;
    std::optional<double> pi;
    std::optional<double> threshold;  // scalar-threshold policy instead of the boundary
    int paths = 100000;
    double horizon = 0.0;
    std::string per_path_csv;
};
int run_evaluate(const CommonOpts& opts, const EvaluateOpts& e);

struct ExportOpts {
    std::string boundary;
};
int run_export(const CommonOpts& opts, const ExportOpts& e);

/// Re-runs the subcommand recorded in a manifest and verifies that the
/// output digests reproduce. Returns 0 on exact reproduction.
int run_replay(const std::string& manifest_path);

}  // namespace qdet::cli
