#include "qdet/simulate.hpp"

#include "qdet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qdet {

namespace {
// stream ids within a path
constexpr uint32_t kStreamIncrements = 0;
constexpr uint32_t kStreamScenario = 1;
}  // namespace

ScenarioDraw draw_scenario(const ProblemSpec& spec, const ScenarioConfig& cfg, uint64_t seed,
                           uint64_t path) {
    ScenarioDraw out{kNoChange, -1};
    if (cfg.measure == ScenarioConfig::Measure::NoChange) return out;

    const double pi0 = cfg.pi_override.value_or(spec.pi0);
    if (cfg.forced_theta) {
        out.theta = *cfg.forced_theta;
    } else {
        const double u = uniform_draw(seed, path, kStreamScenario, 0);
        if (u < pi0) {
            out.theta = 0.0;
        } else {
            const double v = uniform_draw(seed, path, kStreamScenario, 1);
            out.theta = -std::log(v) / spec.lambda;
        }
    }
    if (cfg.forced_beta) {
        if (*cfg.forced_beta < 0 || *cfg.forced_beta >= spec.N())
            throw IndexError("forced beta out of range");
        out.beta = *cfg.forced_beta;
    } else {
        const double u = uniform_draw(seed, path, kStreamScenario, 2);
        double acc = 0.0;
        out.beta = spec.N() - 1;
        for (int i = 0; i < spec.N(); ++i) {
            acc += spec.family.probs[i];
            if (u < acc) {
                out.beta = i;
                break;
            }
        }
    }
    return out;
}

PathEnsemble simulate_paths(const ProblemSpec& spec, const ScenarioConfig& scenario,
                            double horizon, double dt, int n_paths, uint64_t seed) {
    if (!(dt > 0.0)) throw DomainError("simulate_paths: dt must be > 0");
    if (!(horizon >= dt)) throw DomainError("simulate_paths: horizon must cover one step");
    if (n_paths < 1) throw DomainError("simulate_paths: need at least one path");

    PathEnsemble ens;
    ens.dt = dt;
    ens.steps = static_cast<int>(std::llround(std::floor(horizon / dt + 1e-9)));
    ens.n_paths = n_paths;
    ens.n = spec.n;
    ens.N = spec.N();
    ens.seed_root = seed;
    ens.theta.resize(n_paths);
    ens.beta.resize(n_paths);
    ens.x_increments.resize(static_cast<size_t>(n_paths) * ens.steps * spec.n);
    ens.phi.resize(static_cast<size_t>(n_paths) * (ens.steps + 1) * ens.N);

    const double sqrt_dt = std::sqrt(dt);
    const double phi0 = spec.pi0 / (1.0 - spec.pi0);
    std::vector<double> z(spec.n);

    for (int m = 0; m < n_paths; ++m) {
        const ScenarioDraw sc = draw_scenario(spec, scenario, seed, m);
        ens.theta[m] = sc.theta;
        ens.beta[m] = sc.beta;

        NormalStream normals(seed, m, kStreamIncrements);
        double* xrow = &ens.x_increments[static_cast<size_t>(m) * ens.steps * spec.n];
        for (int s = 0; s < ens.steps; ++s) {
            normals.fill(static_cast<uint32_t>(s), z.data(), spec.n);
            const double t0 = s * dt;
            const double t1 = t0 + dt;
            // drifted portion of the step, exact for steps straddling theta
            const double drift_len =
                sc.beta >= 0 ? std::max(0.0, t1 - std::max(t0, sc.theta)) : 0.0;
            for (int j = 0; j < spec.n; ++j) {
                double inc = sqrt_dt * z[j];
                if (drift_len > 0.0 && spec.family.contains(sc.beta, j + 1))
                    inc += spec.mu * drift_len;
                xrow[static_cast<size_t>(s) * spec.n + j] = inc;
            }
        }

        // flow along the path from the diagonal prior start
        double* phirow = &ens.phi[static_cast<size_t>(m) * (ens.steps + 1) * ens.N];
        for (int i = 0; i < ens.N; ++i) phirow[i] = phi0;
        for (int s = 0; s < ens.steps; ++s) {
            const double* inc = &xrow[static_cast<size_t>(s) * spec.n];
            for (int i = 0; i < ens.N; ++i) {
                double dx = 0.0;
                for (int coord : spec.family.subsets[i]) dx += inc[coord - 1];
                const double r = flow_factor(spec, i, dt, dx);
                phirow[static_cast<size_t>(s + 1) * ens.N + i] =
                    flow_update(spec, phirow[static_cast<size_t>(s) * ens.N + i], dt, r);
            }
        }
    }
    return ens;
}

double likelihood(const ProblemSpec& spec, std::span<const double> x_at_t, int i, double t) {
    if (static_cast<int>(x_at_t.size()) != spec.n)
        throw DimensionError("likelihood expects the n observation values");
    if (i < 0 || i >= spec.N()) throw IndexError("likelihood: family index out of range");
    double s = 0.0;
    for (int coord : spec.family.subsets[i]) s += x_at_t[coord - 1];
    return std::exp(spec.mu * s - 0.5 * spec.mu2_eff(i) * t);
}

std::vector<double> phi_flow(const ProblemSpec& spec, std::span<const double> x_increments,
                             int steps, double dt, std::span<const double> phi0) {
    if (static_cast<int>(phi0.size()) != spec.N())
        throw DimensionError("phi_flow expects an N-vector start");
    if (static_cast<int>(x_increments.size()) != steps * spec.n)
        throw DimensionError("phi_flow: increment buffer size mismatch");
    for (double v : phi0)
        if (v < 0.0) throw DomainError("phi_flow: start must be nonnegative");

    const int N = spec.N();
    std::vector<double> out(static_cast<size_t>(steps + 1) * N);
    for (int i = 0; i < N; ++i) out[i] = phi0[i];
    for (int s = 0; s < steps; ++s) {
        const double* inc = &x_increments[static_cast<size_t>(s) * spec.n];
        for (int i = 0; i < N; ++i) {
            double dx = 0.0;
            for (int coord : spec.family.subsets[i]) dx += inc[coord - 1];
            const double r = flow_factor(spec, i, dt, dx);
            out[static_cast<size_t>(s + 1) * N + i] =
                flow_update(spec, out[static_cast<size_t>(s) * N + i], dt, r);
        }
    }
    return out;
}

std::vector<double> euler_step(const ProblemSpec& spec, std::span<const double> phi,
                               std::span<const double> dB, double dt) {
    if (static_cast<int>(phi.size()) != spec.N())
        throw DimensionError("euler_step expects an N-vector");
    if (static_cast<int>(dB.size()) != spec.n)
        throw DimensionError("euler_step expects n Brownian increments");
    std::vector<double> out(spec.N());
    for (int i = 0; i < spec.N(); ++i) {
        double db = 0.0;
        for (int coord : spec.family.subsets[i]) db += dB[coord - 1];
        const double next = phi[i] + spec.lambda * (1.0 + phi[i]) * dt + spec.mu * phi[i] * db;
        out[i] = std::max(0.0, next);
    }
    return out;
}

double posterior_from_phi(std::span<const double> phi, std::span<const double> probs) {
    if (phi.size() != probs.size()) throw DimensionError("posterior_from_phi size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < phi.size(); ++i) {
        if (phi[i] < 0.0) throw DomainError("posterior_from_phi: negative coordinate");
        s += probs[i] * phi[i];
    }
    return s / (1.0 + s);
}

}  // namespace qdet
