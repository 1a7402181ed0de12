#pragma once

#include "qdet/errors.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace qdet {

struct QuadOptions {
    double abs_tol = 1e-10;
    int max_intervals = 4000;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration on [a,b] to an absolute
/// tolerance. Throws QuadratureError when the interval budget is exhausted
/// before the summed error estimate meets the tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts = {});

/// Nodes and weights of the 8-point Gauss-Legendre rule on [-1,1].
struct GaussLegendre8 {
    static const double nodes[8];
    static const double weights[8];
};

/// Fixed composite Gauss-Legendre rule: `panels` equal panels, 8 points each.
double integrate_gl8(const std::function<double(double)>& f, double a, double b, int panels);

/// Panel edges of a geometric subdivision of [0, total]: panel widths grow
/// by `ratio`, `count` panels in total.
std::vector<double> geometric_edges(double total, int count, double ratio);

}  // namespace qdet
