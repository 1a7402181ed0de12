#include "qdet/kernel.hpp"

#include "qdet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdet {

namespace {

// log of the inner integrand u^(kappa-1) (1-u)^-(kappa+2) exp(-kappa/u)
double log_inner(double u, double kappa) {
    if (u <= 0.0 || u >= 1.0) return -std::numeric_limits<double>::infinity();
    return (kappa - 1.0) * std::log(u) - (kappa + 2.0) * std::log1p(-u) - kappa / u;
}

// J(v) = integral_0^v exp(log_inner(u) - log_inner(v)) du. The integrand is
// increasing for kappa > 1/12 so the scale log_inner(v) keeps it in [0,1];
// for tiny kappa the true max is located by sampling first.
double inner_j(double v, double kappa, double abs_tol, int budget) {
    if (v <= 0.0) return 0.0;
    double scale = log_inner(v, kappa);
    if (kappa <= 1.0 / 12.0) {
        for (int i = 1; i <= 64; ++i) scale = std::max(scale, log_inner(v * i / 64.0, kappa));
    }
    auto f = [kappa, scale](double u) {
        const double lg = log_inner(u, kappa);
        return std::isfinite(lg) ? std::exp(lg - scale) : 0.0;
    };
    QuadOptions inner_opts;
    inner_opts.abs_tol = abs_tol;
    inner_opts.max_intervals = budget;
    return integrate_adaptive(f, 0.0, v, inner_opts);
}

constexpr double kEndpointCutoff = 1.0 - 1e-14;

}  // namespace

double running_cost(const ProblemSpec& spec, std::span<const double> phi) {
    if (static_cast<int>(phi.size()) != spec.N())
        throw DimensionError("running_cost expects an N-vector");
    double s = 0.0;
    for (int i = 0; i < spec.N(); ++i) {
        if (phi[i] < 0.0) throw DomainError("running_cost: negative coordinate");
        s += spec.family.probs[i] * phi[i];
    }
    return s - spec.lambda / spec.c;
}

double mayer_one(double phi, double kappa, const QuadOptions& opts) {
    if (phi < 0.0) throw DomainError("mayer_one: phi must be >= 0");
    if (!(kappa > 0.0)) throw DomainError("mayer_one: kappa must be > 0");
    if (phi == 0.0) return 0.0;

    double vstar = phi / (1.0 + phi);
    vstar = std::min(vstar, kEndpointCutoff);

    // After factoring exp(log_inner(v)) out of the inner integral, the
    // kappa-sized exponents cancel and the outer integrand collapses to
    // J(v) / (v (1-v)^2), which stays bounded for every kappa.
    const double outer_tol = opts.abs_tol / (kappa * (1.0 + phi));
    auto outer = [kappa, vstar, outer_tol, &opts](double v) {
        if (v <= 0.0) return 0.0;
        const double rel_guard = std::max(v * (1.0 - v) * (1.0 - v), 1e-6 * vstar);
        const double j = inner_j(v, kappa, 0.02 * outer_tol * rel_guard, opts.max_intervals);
        return j / (v * (1.0 - v) * (1.0 - v));
    };
    QuadOptions outer_opts = opts;
    outer_opts.abs_tol = outer_tol;
    const double integral = integrate_adaptive(outer, 0.0, vstar, outer_opts);
    return kappa * (1.0 + phi) * integral;
}

double mayer_full(const ProblemSpec& spec, std::span<const double> phi, const QuadOptions& opts,
                  DriftScaling scaling) {
    if (static_cast<int>(phi.size()) != spec.N())
        throw DimensionError("mayer_full expects an N-vector");
    double s = 0.0;
    for (int i = 0; i < spec.N(); ++i) {
        if (phi[i] < 0.0) throw DomainError("mayer_full: negative coordinate");
        const double kap = scaling == DriftScaling::PerSubset
                               ? spec.kappa(i)
                               : 2.0 * spec.lambda / (spec.mu * spec.mu);
        s += spec.family.probs[i] * mayer_one(phi[i], kap, opts);
    }
    return s / spec.lambda + 1.0 / spec.c;
}

double boundary_equation_log_lhs(double phi, double kappa, const QuadOptions& opts) {
    if (!(phi > 0.0)) throw DomainError("boundary equation needs phi > 0");
    double vstar = std::min(phi / (1.0 + phi), kEndpointCutoff);
    const double j = inner_j(vstar, kappa, 1e-15, opts.max_intervals);
    return std::log(j) + 3.0 * std::log1p(phi) - std::log(phi);
}

double phi_star_root(double kappa, double rhs, double rel_tol, const QuadOptions& opts) {
    if (!(kappa > 0.0)) throw DomainError("phi_star_root: kappa must be > 0");
    if (!(rhs > 0.0)) throw DomainError("phi_star_root: rhs must be > 0");

    const double log_rhs = std::log(rhs);
    const double lower = kappa * rhs;  // lambda_eff / c_eff

    auto fn = [&](double phi) { return boundary_equation_log_lhs(phi, kappa, opts) - log_rhs; };

    double lo = lower;
    double f_lo = fn(lo);
    if (f_lo >= 0.0) throw BracketError("phi_star_root: no sign change at the lower end");

    double hi = 2.0 * lower;
    double f_hi = fn(hi);
    int doublings = 0;
    while (f_hi < 0.0) {
        if (++doublings > 60) throw BracketError("phi_star_root: bracket not found");
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = fn(hi);
    }

    while (hi - lo > rel_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = fn(mid);
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> phi_star_all(const ProblemSpec& spec, double rel_tol, DriftScaling scaling) {
    std::vector<double> out(spec.N());
    for (int i = 0; i < spec.N(); ++i) {
        const double mu2 =
            scaling == DriftScaling::PerSubset ? spec.mu2_eff(i) : spec.mu * spec.mu;
        const double kap = 2.0 * spec.lambda / mu2;
        const double rhs = mu2 / (2.0 * spec.family.probs[i] * spec.c);
        out[i] = phi_star_root(kap, rhs, rel_tol);
    }
    return out;
}

KernelParams kernel_params(const ProblemSpec& spec, double rel_tol, DriftScaling scaling) {
    KernelParams kp;
    kp.kappa.resize(spec.N());
    kp.rhs1d.resize(spec.N());
    for (int i = 0; i < spec.N(); ++i) {
        const double mu2 =
            scaling == DriftScaling::PerSubset ? spec.mu2_eff(i) : spec.mu * spec.mu;
        kp.kappa[i] = 2.0 * spec.lambda / mu2;
        kp.rhs1d[i] = mu2 / (2.0 * spec.family.probs[i] * spec.c);
    }
    kp.phi_star = phi_star_all(spec, rel_tol, scaling);
    return kp;
}

double BoundSurfaces::lower_plane(std::span<const double> node) const {
    const int last = N() - 1;
    double v = lambda / (p[last] * c);
    for (int i = 0; i < last; ++i) v -= (p[i] / p[last]) * node[i];
    return v;
}

double BoundSurfaces::upper_plane(std::span<const double> node) const {
    const int last = N() - 1;
    double s = 0.0;
    for (int i = 0; i < last; ++i) s += node[i] / phi_star[i];
    return phi_star[last] * (1.0 - s);
}

bool BoundSurfaces::in_lower_box(std::span<const double> node) const {
    for (int i = 0; i + 1 < N(); ++i)
        if (node[i] > lambda / (p[i] * c)) return false;
    return true;
}

bool BoundSurfaces::in_upper_box(std::span<const double> node) const {
    for (int i = 0; i + 1 < N(); ++i)
        if (node[i] > phi_star[i]) return false;
    return true;
}

BoundSurfaces bound_surfaces(const ProblemSpec& spec, double rel_tol) {
    BoundSurfaces bs;
    bs.p = spec.family.probs;
    bs.phi_star = phi_star_all(spec, rel_tol);
    bs.lambda = spec.lambda;
    bs.c = spec.c;
    return bs;
}

}  // namespace qdet
