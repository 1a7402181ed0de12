#pragma once

#include "qdet/boundary_grid.hpp"
#include "qdet/fredholm.hpp"
#include "qdet/simulate.hpp"

#include <optional>
#include <vector>

namespace qdet {

/// Stopping rules evaluated on the observable flow: the boundary rule stops
/// when Phi^N crosses the interpolated surface, the scalar rule when the
/// statistic S = sum_i p_i Phi^i crosses a fixed threshold.
struct Policy {
    enum class Kind { Boundary, ScalarThreshold, StopImmediately, NeverStop };
    Kind kind = Kind::StopImmediately;
    const BoundaryGrid* boundary = nullptr;
    double threshold = 0.0;
};

inline Policy boundary_policy(const BoundaryGrid& b) {
    return {Policy::Kind::Boundary, &b, 0.0};
}
Policy scalar_threshold_policy(double threshold);

struct PolicyResult {
    double false_alarm = 0.0, false_alarm_se = 0.0;
    double delay = 0.0, delay_se = 0.0;
    double risk = 0.0, risk_se = 0.0;
    int censored_count = 0;
    int n_paths = 0;
    bool horizon_warning = false;  // censored fraction above 1%
    std::vector<double> stop_times;  // per path; horizon when censored
    std::vector<double> theta;
    std::vector<int> beta;
    std::vector<std::uint8_t> censored;
};

/// Evaluation grid and sampling setup for policy Monte Carlo. The time grid
/// starts at dt0_factor/lambda and grows geometrically up to a cap; boundary
/// crossings cluster early when pi is large.
struct EvalConfig {
    double horizon = 0.0;        // 0 = auto: 20/lambda
    double dt0_factor = 1e-3;
    double growth = 1.05;
    double h_max_factor = 0.02;  // cap keeps the tau quantisation bias small
    int n_paths = 100000;
    uint64_t seed = 1;
    std::optional<double> pi_override;
    int workers = 0;
    bool keep_paths = true;  // fill the per-path vectors in PolicyResult
};

/// Geometric detection time grid on [0, horizon].
std::vector<double> detection_time_grid(double horizon, double lambda, const EvalConfig& cfg);

/// First grid time at which the stored flow crosses the boundary surface.
/// Returns nullopt when the path never crosses within its horizon.
std::optional<double> run_detector(const ProblemSpec& spec, const BoundaryGrid& b,
                                   const PathEnsemble& paths, int path);

/// Monte Carlo operating characteristics under the prior scenario. All
/// policies are evaluated on the same simulated paths (common random
/// numbers); the reduction runs in fixed path order so results are
/// bit-stable across worker counts.
std::vector<PolicyResult> evaluate_policies(const ProblemSpec& spec,
                                            const std::vector<Policy>& policies,
                                            const EvalConfig& cfg);
PolicyResult evaluate_policy(const ProblemSpec& spec, const Policy& policy,
                             const EvalConfig& cfg);

/// Finite-difference gradient of the value representation across a boundary
/// point, one entry per coordinate. Smooth fit predicts magnitudes near zero
/// at the converged boundary.
struct SmoothFitReport {
    std::vector<double> gradient;
    std::vector<double> se;  // combined MC noise of each difference
    double probe_step = 0.0;
};
SmoothFitReport smooth_fit_probe(const FredholmEngine& engine, const BoundaryGrid& b,
                                 std::span<const double> node, double h = 0.05);

}  // namespace qdet
