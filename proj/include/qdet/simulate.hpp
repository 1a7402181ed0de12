#pragma once

#include "qdet/model.hpp"
#include "qdet/rng.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qdet {

constexpr double kNoChange = std::numeric_limits<double>::infinity();

/// Measure the paths are drawn under. NoChange is the reference measure
/// (driftless forever); Prior draws theta from the pi/exponential prior and
/// beta from the family probabilities. Forced values pin theta or beta for
/// conditional experiments.
struct ScenarioConfig {
    enum class Measure { NoChange, Prior };
    Measure measure = Measure::Prior;
    std::optional<double> pi_override;
    std::optional<double> forced_theta;
    std::optional<int> forced_beta;
};

/// Simulated ensemble: per-path scenario labels, observation increments and
/// the posterior-ratio flow along the uniform time grid. Index layout is
/// path-major; time t_s = (s+1)*dt for increment slot s.
struct PathEnsemble {
    double dt = 0.0;
    int steps = 0;
    int n_paths = 0;
    int n = 0;  // observation dimension
    int N = 0;  // flow dimension
    uint64_t seed_root = 0;

    std::vector<double> theta;  // change time per path (kNoChange if never)
    std::vector<int> beta;      // family index per path (-1 if no change)
    std::vector<double> x_increments;  // [path][step][coord], n per step
    std::vector<double> phi;           // [path][step+1][i], N per grid time incl. t=0

    double x_inc(int path, int step, int coord) const {
        return x_increments[(static_cast<size_t>(path) * steps + step) * n + coord];
    }
    double phi_at(int path, int grid_idx, int i) const {
        return phi[(static_cast<size_t>(path) * (steps + 1) + grid_idx) * N + i];
    }
    /// X_t by prefix sum of increments (grid_idx in [0, steps]).
    double x_at(int path, int grid_idx, int coord) const {
        double s = 0.0;
        for (int k = 0; k < grid_idx; ++k) s += x_inc(path, k, coord);
        return s;
    }
};

/// Scenario draws for one path (deterministic in (seed, path)).
struct ScenarioDraw {
    double theta;
    int beta;
};
ScenarioDraw draw_scenario(const ProblemSpec& spec, const ScenarioConfig& cfg, uint64_t seed,
                           uint64_t path);

/// Simulate `n_paths` observation paths on a uniform grid and compute the
/// posterior-ratio flow along each. Per-path streams are derived from
/// (seed, path) so the ensemble is independent of execution order.
PathEnsemble simulate_paths(const ProblemSpec& spec, const ScenarioConfig& scenario,
                            double horizon, double dt, int n_paths, uint64_t seed);

/// Likelihood ratio L_t^i = exp(mu * sum_{j in subset i} x_j - k_i mu^2 t / 2)
/// evaluated from the observation vector at time t.
double likelihood(const ProblemSpec& spec, std::span<const double> x_at_t, int i, double t);

/// One step of the exact flow: phi' = R*phi + (lambda*h/2)*(R+1) with
/// R = exp(lambda*h + mu*dx_sum - k_i mu^2 h/2); unrolling the recursion
/// over the grid reproduces the exponential-functional representation with
/// the time integral discretised by the trapezoid rule.
inline double flow_factor(const ProblemSpec& spec, int i, double h, double dx_sum) {
    return std::exp(spec.lambda * h + spec.mu * dx_sum - 0.5 * spec.mu2_eff(i) * h);
}
inline double flow_update(const ProblemSpec& spec, double phi_i, double h, double factor) {
    return factor * phi_i + 0.5 * spec.lambda * h * (factor + 1.0);
}

/// Exact-flow trajectory along a stored increment path: returns phi at all
/// grid times 0, dt, ..., steps*dt (length steps+1, N values per time).
std::vector<double> phi_flow(const ProblemSpec& spec, std::span<const double> x_increments,
                             int steps, double dt, std::span<const double> phi0);

/// One Euler-Maruyama update of the flow SDE; negative results are clamped
/// to zero (the orthant boundary consists of entrance points).
std::vector<double> euler_step(const ProblemSpec& spec, std::span<const double> phi,
                               std::span<const double> dB, double dt);

/// Posterior probability from the ratio vector: Pi = S/(1+S), S = sum p_i phi_i.
double posterior_from_phi(std::span<const double> phi, std::span<const double> probs);

}  // namespace qdet
