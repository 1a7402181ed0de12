#pragma once

#include "qdet/kernel.hpp"

#include <span>
#include <string>
#include <vector>

namespace qdet {

/// Tabulated stopping boundary b over a tensor grid in the first N-1
/// coordinates. Values are kept componentwise nonincreasing (the solver
/// projects every sweep); queries outside the grid fall back to the known
/// limits: zero beyond the phi* polytope, clamped upper plane otherwise.
///
/// For N = 1 the grid is zero-dimensional: a single scalar boundary value.
struct BoundaryGrid {
    std::vector<std::vector<double>> axes;  // N-1 sorted node vectors
    std::vector<double> values;             // row-major over the tensor grid
    std::vector<double> phi_star;           // all N roots (extension rule + metadata)

    // diagnostics filled by the solver
    std::vector<double> residual;  // per node, from the final resampled pass
    std::vector<double> stderr_;   // per node MC standard error of the residual
    std::vector<double> value_se;  // per node: residual se / |dF/dy|
    std::string spec_hash;
    uint64_t seed = 0;
    int iterations = 0;
    long long kernel_samples = 0;

    int dims() const { return static_cast<int>(axes.size()); }
    size_t node_count() const;
    size_t flat_index(std::span<const int> idx) const;
    void unflatten(size_t flat, std::vector<int>& idx) const;
    void node_coords(size_t flat, std::vector<double>& coords) const;

    /// Multilinear interpolation inside the grid box with the monotone
    /// extension outside (0 beyond the polytope, edge clamp otherwise).
    double eval(std::span<const double> point) const;

    /// Pool-adjacent-violators projection to componentwise nonincreasing
    /// values, cycled over axes until jointly monotone.
    void project_monotone();

    bool is_monotone() const;
};

/// Tensor grid covering [0, margin * phi*_i] per axis with nodes clustered
/// near zero (the boundary bends there).
BoundaryGrid make_boundary_grid(const ProblemSpec& spec, int nodes_per_axis,
                                std::span<const double> phi_star, double margin = 1.05);

/// CSV round trip: header phi_1..phi_{N-1},b,residual,stderr; one row per
/// node in row-major order; 17 significant digits.
void write_boundary_csv(const BoundaryGrid& grid, const std::string& path);
BoundaryGrid read_boundary_csv(const std::string& path);

}  // namespace qdet
