#include "qdet/detect.hpp"

#include "qdet/errors.hpp"
#include "qdet/workers.hpp"

#include <algorithm>
#include <cmath>

namespace qdet {

Policy scalar_threshold_policy(double threshold) {
    if (threshold < 0.0) throw DomainError("scalar threshold must be >= 0");
    return {Policy::Kind::ScalarThreshold, nullptr, threshold};
}

std::vector<double> detection_time_grid(double horizon, double lambda, const EvalConfig& cfg) {
    std::vector<double> grid{0.0};
    double h = cfg.dt0_factor / lambda;
    const double h_max = cfg.h_max_factor / lambda;
    double t = 0.0;
    while (t < horizon - 1e-12) {
        t = std::min(horizon, t + h);
        grid.push_back(t);
        h = std::min(h * cfg.growth, h_max);
    }
    return grid;
}

std::optional<double> run_detector(const ProblemSpec& spec, const BoundaryGrid& b,
                                   const PathEnsemble& paths, int path) {
    if (path < 0 || path >= paths.n_paths) throw IndexError("path index out of range");
    const int N = spec.N();
    const int D = N - 1;
    std::vector<double> head(D);
    for (int s = 0; s <= paths.steps; ++s) {
        for (int d = 0; d < D; ++d) head[d] = paths.phi_at(path, s, d);
        if (paths.phi_at(path, s, D) >= b.eval(head)) return s * paths.dt;
    }
    return std::nullopt;
}

namespace {

struct PathOutcome {
    double tau = 0.0;
    bool stopped = false;
};

// trace one path through the time grid, recording tau per policy
void run_path(const ProblemSpec& spec, const std::vector<Policy>& policies,
              const std::vector<double>& grid, double pi, uint64_t seed, int m,
              double& theta_out, int& beta_out, std::vector<PathOutcome>& out) {
    const int N = spec.N();
    const int D = N - 1;
    const int n_policies = static_cast<int>(policies.size());

    ScenarioConfig sc;
    sc.measure = ScenarioConfig::Measure::Prior;
    sc.pi_override = pi;
    const ScenarioDraw draw = draw_scenario(spec, sc, seed, m);
    theta_out = draw.theta;
    beta_out = draw.beta;

    std::vector<double> phi(N, pi / (1.0 - pi));
    std::vector<double> z(spec.n);
    std::vector<double> head(D);
    NormalStream normals(seed, m, 0);

    int remaining = n_policies;
    auto check = [&](double t) {
        double stat = 0.0;
        for (int i = 0; i < N; ++i) stat += spec.family.probs[i] * phi[i];
        for (int k = 0; k < n_policies; ++k) {
            if (out[k].stopped) continue;
            bool stop = false;
            switch (policies[k].kind) {
                case Policy::Kind::Boundary: {
                    for (int d = 0; d < D; ++d) head[d] = phi[d];
                    stop = phi[D] >= policies[k].boundary->eval(head);
                    break;
                }
                case Policy::Kind::ScalarThreshold:
                    stop = stat >= policies[k].threshold;
                    break;
                case Policy::Kind::StopImmediately:
                    stop = true;
                    break;
                case Policy::Kind::NeverStop:
                    stop = false;
                    break;
            }
            if (stop) {
                out[k].tau = t;
                out[k].stopped = true;
                --remaining;
            }
        }
    };

    check(0.0);
    for (size_t s = 0; s + 1 < grid.size() && remaining > 0; ++s) {
        const double t0 = grid[s];
        const double t1 = grid[s + 1];
        const double h = t1 - t0;
        normals.fill(static_cast<uint32_t>(s), z.data(), spec.n);
        const double sqrt_h = std::sqrt(h);
        const double drift_len =
            draw.beta >= 0 ? std::max(0.0, t1 - std::max(t0, draw.theta)) : 0.0;
        for (int i = 0; i < N; ++i) {
            double dx = 0.0;
            for (int coord : spec.family.subsets[i]) {
                dx += sqrt_h * z[coord - 1];
                if (drift_len > 0.0 && spec.family.contains(draw.beta, coord))
                    dx += spec.mu * drift_len;
            }
            const double r = flow_factor(spec, i, h, dx);
            phi[i] = flow_update(spec, phi[i], h, r);
        }
        check(t1);
    }
}

}  // namespace

std::vector<PolicyResult> evaluate_policies(const ProblemSpec& spec,
                                            const std::vector<Policy>& policies,
                                            const EvalConfig& cfg) {
    if (policies.empty()) return {};
    if (cfg.n_paths < 1) throw DomainError("evaluate_policies: need at least one path");
    const double pi = cfg.pi_override.value_or(spec.pi0);
    if (!(pi >= 0.0 && pi < 1.0)) throw DomainError("evaluate_policies: pi must lie in [0,1)");
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 20.0 / spec.lambda;
    const std::vector<double> grid = detection_time_grid(horizon, spec.lambda, cfg);
    const int n_policies = static_cast<int>(policies.size());
    const int M = cfg.n_paths;

    // per-path slots; filled in parallel, reduced in fixed order afterwards
    std::vector<double> theta(M);
    std::vector<int> beta(M);
    std::vector<double> tau(static_cast<size_t>(M) * n_policies);
    std::vector<std::uint8_t> stopped(static_cast<size_t>(M) * n_policies);

    const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
    parallel_for(M, workers, [&](int m) {
        std::vector<PathOutcome> outcome(n_policies);
        run_path(spec, policies, grid, pi, cfg.seed, m, theta[m], beta[m], outcome);
        for (int k = 0; k < n_policies; ++k) {
            tau[static_cast<size_t>(m) * n_policies + k] = outcome[k].tau;
            stopped[static_cast<size_t>(m) * n_policies + k] = outcome[k].stopped ? 1 : 0;
        }
    });

    std::vector<PolicyResult> results(n_policies);
    for (int k = 0; k < n_policies; ++k) {
        PolicyResult& r = results[k];
        r.n_paths = M;
        if (cfg.keep_paths) {
            r.stop_times.resize(M);
            r.theta = theta;
            r.beta = beta;
            r.censored.resize(M);
        }
        double fa_sum = 0.0, fa_sum2 = 0.0;
        double d_sum = 0.0, d_sum2 = 0.0;
        double risk_sum = 0.0, risk_sum2 = 0.0;
        for (int m = 0; m < M; ++m) {
            const bool is_stopped = stopped[static_cast<size_t>(m) * n_policies + k] != 0;
            const double t = is_stopped ? tau[static_cast<size_t>(m) * n_policies + k] : horizon;
            // censored paths raise no alarm and contribute the truncated delay
            const double fa = (is_stopped && t < theta[m]) ? 1.0 : 0.0;
            const double delay = std::max(0.0, t - theta[m]);
            const double risk = fa + spec.c * delay;
            fa_sum += fa;
            fa_sum2 += fa * fa;
            d_sum += delay;
            d_sum2 += delay * delay;
            risk_sum += risk;
            risk_sum2 += risk * risk;
            if (!is_stopped) ++r.censored_count;
            if (cfg.keep_paths) {
                r.stop_times[m] = t;
                r.censored[m] = is_stopped ? 0 : 1;
            }
        }
        auto mean_se = [M](double s, double s2, double& mean, double& se) {
            mean = s / M;
            const double var = std::max(0.0, s2 / M - mean * mean);
            se = std::sqrt(var / M);
        };
        mean_se(fa_sum, fa_sum2, r.false_alarm, r.false_alarm_se);
        mean_se(d_sum, d_sum2, r.delay, r.delay_se);
        mean_se(risk_sum, risk_sum2, r.risk, r.risk_se);
        r.horizon_warning = r.censored_count > M / 100;
    }
    return results;
}

PolicyResult evaluate_policy(const ProblemSpec& spec, const Policy& policy,
                             const EvalConfig& cfg) {
    return evaluate_policies(spec, {policy}, cfg).front();
}

SmoothFitReport smooth_fit_probe(const FredholmEngine& engine, const BoundaryGrid& b,
                                 std::span<const double> node, double h) {
    const ProblemSpec& spec = engine.spec();
    const int N = spec.N();
    if (static_cast<int>(node.size()) != N - 1)
        throw DimensionError("smooth_fit_probe expects N-1 node coordinates");

    std::vector<double> x(node.begin(), node.end());
    x.push_back(b.eval(node));

    SmoothFitReport rep;
    rep.probe_step = h;
    rep.gradient.resize(N);
    rep.se.resize(N);
    std::vector<double> up(x), dn(x);
    for (int i = 0; i < N; ++i) {
        up = x;
        dn = x;
        up[i] = x[i] + h;
        dn[i] = std::max(0.0, x[i] - h);
        const double width = up[i] - dn[i];
        const ValueEstimate vu = engine.value_hat(b, up);
        const ValueEstimate vd = engine.value_hat(b, dn);
        rep.gradient[i] = (vu.value - vd.value) / width;
        rep.se[i] = std::sqrt(vu.se * vu.se + vd.se * vd.se) / width;
    }
    return rep;
}

}  // namespace qdet
