#pragma once

#include "qdet/boundary_grid.hpp"
#include "qdet/kernel.hpp"
#include "qdet/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qdet {

/// Time quadrature for the discounted kernel integral: composite
/// Gauss-Legendre on a geometric panel subdivision of [0, Tmax], with Tmax
/// set by the tail bound e^{-lambda T} Lmax / lambda < eps_tail.
struct QuadConfig {
    int panels = 12;
    double panel_ratio = 1.7;
    double eps_tail_factor = 1e-4;  // eps_tail = factor * (lambda/c)
    double flow_h_factor = 0.05;    // flow substep cap = factor / lambda
};

struct McConfig {
    int samples = 20000;
    uint64_t seed = 1;
};

struct PicardConfig {
    int nodes_per_axis = 21;
    double margin = 1.05;   // axis extent relative to phi*_i
    double tol_sup = 0.0;   // 0 = auto: 2e-3 * max phi*
    int max_sweeps = 40;
    int workers = 0;        // 0 = hardware concurrency
    // relaxation of the node update: the plain root-for-root substitution has
    // map slope near -1 (raising the surface lowers every root) and cycles
    double damping = 0.5;
    // curvature-driven axis refinement between solve phases: cells whose
    // interpolation chord sags more than sag_tol against the convex surface
    // get midpoints inserted (the curvature concentrates where the boundary
    // approaches its floor contact)
    int refine_passes = 2;
    double sag_tol = 0.0;  // 0 = auto: 2.5e-5 * phi*_N
};

struct ValueEstimate {
    double value = 0.0;
    double se = 0.0;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> sup_change;       // applied change per sweep
    std::vector<double> fixed_point_gap;  // max |proposal - value| per sweep
    double residual_max = 0.0;
    double residual_mean = 0.0;
    double stderr_max = 0.0;
    double stderr_mean = 0.0;
    double wall_seconds = 0.0;
    int flagged_nodes = 0;
    bool converged = false;
    bool sup_change_monotone = true;  // over the last three sweeps
    long long kernel_samples = 0;
    double damping = 0.0;     // relaxation factor at exit
    int inserted_nodes = 0;   // axis nodes added by curvature refinement
};

struct ResidualSummary {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double stderr_max = 0.0;
    double stderr_mean = 0.0;
};

/// Quadrature times and discounted weights.
struct TimeGrid {
    std::vector<double> times;
    std::vector<double> weights;  // GL weight * e^{-lambda t}
    double t_max = 0.0;
};

TimeGrid make_time_grid(const ProblemSpec& spec, double l_max, const QuadConfig& cfg);

/// Frozen common-random-numbers block. The exact flow is linear in its
/// start point, Phi_t^i = G_t^i phi_i + H_t^i, with G and H functionals of
/// the driving noise only; one simulated block therefore serves every grid
/// node, every Picard sweep and every bisection probe.
struct FlowBlock {
    int n_paths = 0;
    int n_times = 0;
    int N = 0;
    std::vector<double> times;
    std::vector<double> G, H;  // layout [(i * n_times + q) * n_paths + m]

    const double* g_row(int i, int q) const {
        return &G[(static_cast<size_t>(i) * n_times + q) * n_paths];
    }
    const double* h_row(int i, int q) const {
        return &H[(static_cast<size_t>(i) * n_times + q) * n_paths];
    }
};

FlowBlock build_flow_block(const ProblemSpec& spec, std::span<const double> times, int n_paths,
                           uint64_t seed, double h_max, int workers);

/// Monte Carlo evaluator for the discounted kernel integrals, owning one
/// frozen flow block. All estimates derived from the same engine share
/// their random numbers (common random numbers across probes and points).
class FredholmEngine {
  public:
    FredholmEngine(const ProblemSpec& spec, const QuadConfig& quad, const McConfig& mc,
                   int workers = 0);
    FredholmEngine(const ProblemSpec& spec, const QuadConfig& quad, const McConfig& mc,
                   std::vector<double> phi_star, int workers);

    const ProblemSpec& spec() const { return spec_; }
    const TimeGrid& time_grid() const { return tg_; }
    const std::vector<double>& phi_star() const { return phi_star_; }
    int samples() const { return mc_.samples; }
    int workers() const { return workers_; }

    /// F(node, y) = integral_0^Tmax e^{-lambda t} K_b(t; node, y) dt.
    ValueEstimate fredholm_lhs(const BoundaryGrid& b, std::span<const double> node,
                               double y) const;

    /// Value representation at a full start point.
    ValueEstimate value_hat(const BoundaryGrid& b, std::span<const double> phi) const;

    /// Central-difference slope of F in y (used for boundary-noise scale).
    double lhs_slope(const BoundaryGrid& b, std::span<const double> node, double y,
                     double delta) const;

    const FlowBlock& block() const { return block_; }

  private:
    ProblemSpec spec_;
    QuadConfig quad_;
    McConfig mc_;
    int workers_;
    std::vector<double> phi_star_;
    TimeGrid tg_;
    FlowBlock block_;
};

/// One-off Monte Carlo estimate of K_b(t; phi) from `n_samples` fresh paths.
/// Deterministic (zero stderr) at t = 0.
ValueEstimate kernel_K(const ProblemSpec& spec, const BoundaryGrid& b, double t,
                       std::span<const double> phi, int n_samples, uint64_t seed,
                       double h_max = 0.0, int workers = 0);

/// Picard iteration on the boundary equation: every node is re-solved by
/// bisection against the frozen previous surface, then the grid is projected
/// to joint monotonicity and clamped into the analytic sandwich.
std::pair<BoundaryGrid, SolveReport> picard_solve(const ProblemSpec& spec,
                                                  const PicardConfig& cfg, const McConfig& mc,
                                                  const QuadConfig& quad = {});

/// Re-evaluates |F| at every node with a fresh sample block and fills the
/// grid's residual/stderr/value_se columns.
ResidualSummary residual_report(const ProblemSpec& spec, BoundaryGrid& grid, const McConfig& mc,
                                const QuadConfig& quad = {}, int workers = 0);

/// Value of the initial-problem at prior probability pi (zero at pi = 1).
ValueEstimate value_initial(const FredholmEngine& engine, const BoundaryGrid& b, double pi);

}  // namespace qdet
