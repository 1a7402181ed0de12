#pragma once

#include "qdet/model.hpp"
#include "qdet/quadrature.hpp"

#include <span>
#include <vector>

namespace qdet {

/// Which effective drift enters the one-dimensional pieces. PerSubset scales
/// the squared drift by the subset size k_i (the sum of k_i driving motions
/// normalised by 1/sqrt(k_i) is a standard Brownian motion); Literal keeps
/// the unscaled mu^2 for side-by-side comparison.
enum class DriftScaling { PerSubset, Literal };

/// Running cost L(phi) = sum_i p_i phi_i - lambda/c.
double running_cost(const ProblemSpec& spec, std::span<const double> phi);

/// One-dimensional Mayer transform, normalised so that
///   (1+phi) W' + phi^2 W'' / kappa - W = phi,  W(0) = 0.
/// Evaluated through the nested double integral in log-space; the large
/// exp(kappa/v) prefactor cancels exactly against the inner integrand's
/// scale, so the evaluation is stable for any kappa > 0.
double mayer_one(double phi, double kappa, const QuadOptions& opts = {});

/// Full Mayer function M(phi) = sum_i p_i W(phi_i; kappa_i)/lambda + 1/c,
/// which solves the generator equation L_Phi M - lambda M = L.
double mayer_full(const ProblemSpec& spec, std::span<const double> phi,
                  const QuadOptions& opts = {}, DriftScaling scaling = DriftScaling::PerSubset);

/// Unique root phi* of the one-dimensional boundary equation
///   H(phi) = rhs  on (kappa*rhs, inf),   H(phi) = J(v*) (1+phi)^3 / phi,
/// located by geometric bracket growth followed by bisection to the given
/// relative tolerance. Throws BracketError when no sign change is found.
double phi_star_root(double kappa, double rhs, double rel_tol = 1e-10,
                     const QuadOptions& opts = {});

/// Left-hand side H(phi) of the boundary equation (log value), exposed for
/// monotonicity scans.
double boundary_equation_log_lhs(double phi, double kappa, const QuadOptions& opts = {});

/// Per-coordinate roots phi*_i with effective parameters kappa_i and
/// rhs_i = k_i mu^2 / (2 p_i c).
std::vector<double> phi_star_all(const ProblemSpec& spec, double rel_tol = 1e-10,
                                 DriftScaling scaling = DriftScaling::PerSubset);

/// Scalar inputs of the one-dimensional pieces, tabulated per coordinate.
struct KernelParams {
    std::vector<double> kappa;     // 2 lambda / (k_i mu^2)
    std::vector<double> rhs1d;     // k_i mu^2 / (2 p_i c)
    std::vector<double> phi_star;  // root of the boundary equation per coordinate
};

KernelParams kernel_params(const ProblemSpec& spec, double rel_tol = 1e-10,
                           DriftScaling scaling = DriftScaling::PerSubset);

/// Analytic sandwich for the stopping boundary over the first N-1
/// coordinates: two hyperplanes, each clamped at zero.
///   lower(x) = lambda/(p_N c) - sum_i (p_i/p_N) x_i      (valid on x_i <= lambda/(p_i c))
///   upper(x) = phi*_N (1 - sum_i x_i / phi*_i)           (valid on x_i <= phi*_i)
struct BoundSurfaces {
    std::vector<double> p;         // family probabilities
    std::vector<double> phi_star;  // per-coordinate roots
    double lambda = 0.0;
    double c = 0.0;

    int N() const { return static_cast<int>(p.size()); }

    double lower_plane(std::span<const double> node) const;
    double upper_plane(std::span<const double> node) const;
    double lower(std::span<const double> node) const { return clamp0(lower_plane(node)); }
    double upper(std::span<const double> node) const { return clamp0(upper_plane(node)); }

    /// True when the node lies in the validity box of the lower bound.
    bool in_lower_box(std::span<const double> node) const;
    bool in_upper_box(std::span<const double> node) const;

  private:
    static double clamp0(double v) { return v > 0.0 ? v : 0.0; }
};

BoundSurfaces bound_surfaces(const ProblemSpec& spec, double rel_tol = 1e-10);

}  // namespace qdet
