#include "qdet/boundary_grid.hpp"

#include "qdet/errors.hpp"
#include "qdet/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qdet {

namespace {

// nonincreasing least-squares fit by pool-adjacent-violators
void pav_nonincreasing(std::vector<double>& v) {
    const size_t m = v.size();
    if (m < 2) return;
    std::vector<double> sum(m);
    std::vector<size_t> count(m);
    size_t top = 0;
    for (size_t i = 0; i < m; ++i) {
        sum[top] = v[i];
        count[top] = 1;
        while (top > 0 && sum[top] / count[top] > sum[top - 1] / count[top - 1]) {
            sum[top - 1] += sum[top];
            count[top - 1] += count[top];
            --top;
        }
        ++top;
    }
    size_t pos = 0;
    for (size_t b = 0; b < top; ++b) {
        const double avg = sum[b] / count[b];
        for (size_t k = 0; k < count[b]; ++k) v[pos++] = avg;
    }
}

}  // namespace

size_t BoundaryGrid::node_count() const {
    size_t c = 1;
    for (const auto& ax : axes) c *= ax.size();
    return c;
}

size_t BoundaryGrid::flat_index(std::span<const int> idx) const {
    size_t flat = 0;
    for (int d = 0; d < dims(); ++d) flat = flat * axes[d].size() + idx[d];
    return flat;
}

void BoundaryGrid::unflatten(size_t flat, std::vector<int>& idx) const {
    idx.resize(dims());
    for (int d = dims() - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % axes[d].size());
        flat /= axes[d].size();
    }
}

void BoundaryGrid::node_coords(size_t flat, std::vector<double>& coords) const {
    std::vector<int> idx;
    unflatten(flat, idx);
    coords.resize(dims());
    for (int d = 0; d < dims(); ++d) coords[d] = axes[d][idx[d]];
}

double BoundaryGrid::eval(std::span<const double> point) const {
    const int D = dims();
    if (static_cast<int>(point.size()) != D)
        throw DimensionError("boundary eval expects N-1 coordinates");
    if (D == 0) return values[0];
    if (D > 12) throw DimensionError("boundary eval supports up to 12 axes");

    // beyond the phi* polytope the stopping set reaches the floor: b = 0
    double poly = 0.0;
    for (int d = 0; d < D; ++d) poly += point[d] / phi_star[d];
    if (poly >= 1.0) return 0.0;

    // multilinear cell interpolation, clamped to the grid box
    int lo[12];
    double frac[12];
    for (int d = 0; d < D; ++d) {
        const auto& ax = axes[d];
        double x = std::clamp(point[d], ax.front(), ax.back());
        auto it = std::upper_bound(ax.begin(), ax.end(), x);
        int hi = static_cast<int>(it - ax.begin());
        hi = std::clamp(hi, 1, static_cast<int>(ax.size()) - 1);
        lo[d] = hi - 1;
        frac[d] = (x - ax[lo[d]]) / (ax[hi] - ax[lo[d]]);
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << D); ++corner) {
        double w = 1.0;
        size_t flat = 0;
        for (int d = 0; d < D; ++d) {
            const bool upper = corner & (1 << d);
            flat = flat * axes[d].size() + static_cast<size_t>(lo[d] + (upper ? 1 : 0));
            w *= upper ? frac[d] : 1.0 - frac[d];
        }
        if (w != 0.0) acc += w * values[flat];
    }
    // chords of the piecewise-linear fit overshoot the convex surface at the
    // clamp kink; the phi* plane is a valid cap everywhere
    return std::min(acc, phi_star[D] * (1.0 - poly));
}

void BoundaryGrid::project_monotone() {
    const int D = dims();
    if (D == 0) return;
    for (int cycle = 0; cycle < 100; ++cycle) {
        bool changed = false;
        for (int d = 0; d < D; ++d) {
            // stride and line enumeration along axis d
            size_t stride = 1;
            for (int e = d + 1; e < D; ++e) stride *= axes[e].size();
            const size_t len = axes[d].size();
            const size_t lines = node_count() / len;
            std::vector<double> line(len);
            for (size_t l = 0; l < lines; ++l) {
                const size_t block = stride * len;
                const size_t base = (l / stride) * block + (l % stride);
                for (size_t k = 0; k < len; ++k) line[k] = values[base + k * stride];
                std::vector<double> fitted = line;
                pav_nonincreasing(fitted);
                for (size_t k = 0; k < len; ++k) {
                    if (fitted[k] != line[k]) {
                        values[base + k * stride] = fitted[k];
                        changed = true;
                    }
                }
            }
        }
        if (!changed) return;
    }
}

bool BoundaryGrid::is_monotone() const {
    const int D = dims();
    std::vector<int> idx;
    for (size_t f = 0; f < node_count(); ++f) {
        unflatten(f, idx);
        for (int d = 0; d < D; ++d) {
            if (idx[d] + 1 < static_cast<int>(axes[d].size())) {
                std::vector<int> up(idx.begin(), idx.end());
                ++up[d];
                if (values[flat_index(up)] > values[f] + 1e-12) return false;
            }
        }
    }
    return true;
}

BoundaryGrid make_boundary_grid(const ProblemSpec& spec, int nodes_per_axis,
                                std::span<const double> phi_star, double margin) {
    if (nodes_per_axis < 2 && spec.N() > 1)
        throw DomainError("need at least two nodes per axis");
    BoundaryGrid g;
    g.phi_star.assign(phi_star.begin(), phi_star.end());
    const int D = spec.N() - 1;
    g.axes.resize(D);
    for (int d = 0; d < D; ++d) {
        const double top = margin * phi_star[d];
        auto& ax = g.axes[d];
        ax.resize(nodes_per_axis);
        // Chebyshev nodes: clustered near zero where the surface bends and
        // near the polytope edge where it meets the floor
        for (int j = 0; j < nodes_per_axis; ++j) {
            const double theta = M_PI * j / (nodes_per_axis - 1);
            ax[j] = top * 0.5 * (1.0 - std::cos(theta));
        }
        ax.front() = 0.0;
        ax.back() = top;
        // pin phi*_d itself: along the axis the boundary meets the floor
        // exactly there, and a node on the kink removes the chord overshoot
        ax.push_back(phi_star[d]);
        std::sort(ax.begin(), ax.end());
        ax.erase(std::unique(ax.begin(), ax.end(),
                             [&](double a, double b) { return b - a < 1e-9 * top; }),
                 ax.end());
    }
    g.values.assign(g.node_count(), 0.0);
    g.residual.assign(g.node_count(), 0.0);
    g.stderr_.assign(g.node_count(), 0.0);
    g.value_se.assign(g.node_count(), 0.0);
    return g;
}

void write_boundary_csv(const BoundaryGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open boundary file for writing: " + path);
    out << "# spec_hash " << grid.spec_hash << "\n";
    out << "# seed " << grid.seed << "\n";
    out << "# iterations " << grid.iterations << "\n";
    out << "# kernel_samples " << grid.kernel_samples << "\n";
    out << "# phi_star";
    for (double v : grid.phi_star) out << " " << fmt17(v);
    out << "\n";
    for (int d = 0; d < grid.dims(); ++d) {
        out << "phi_" << (d + 1) << ",";
    }
    out << "b,residual,stderr\n";
    std::vector<double> coords;
    for (size_t f = 0; f < grid.node_count(); ++f) {
        grid.node_coords(f, coords);
        for (double cv : coords) out << fmt17(cv) << ",";
        out << fmt17(grid.values[f]) << "," << fmt17(f < grid.residual.size() ? grid.residual[f] : 0.0)
            << "," << fmt17(f < grid.stderr_.size() ? grid.stderr_[f] : 0.0) << "\n";
    }
}

BoundaryGrid read_boundary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open boundary file: " + path);
    BoundaryGrid g;
    std::string line;
    std::vector<std::vector<double>> rows;
    int ncols = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream is(line.substr(1));
            std::string key;
            is >> key;
            if (key == "spec_hash") {
                is >> g.spec_hash;
            } else if (key == "seed") {
                is >> g.seed;
            } else if (key == "iterations") {
                is >> g.iterations;
            } else if (key == "kernel_samples") {
                is >> g.kernel_samples;
            } else if (key == "phi_star") {
                double v;
                while (is >> v) g.phi_star.push_back(v);
            }
            continue;
        }
        if (line.rfind("phi_", 0) == 0 || line.rfind("b,", 0) == 0) {
            ncols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
            continue;
        }
        std::vector<double> row;
        std::istringstream is(line);
        std::string cell;
        while (std::getline(is, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("boundary file has no data rows: " + path);
    if (ncols < 0) ncols = static_cast<int>(rows.front().size());
    const int D = ncols - 3;
    if (D < 0) throw ConfigError("boundary file is missing columns: " + path);

    g.axes.resize(D);
    for (int d = 0; d < D; ++d) {
        std::vector<double> ax;
        for (const auto& r : rows) ax.push_back(r[d]);
        std::sort(ax.begin(), ax.end());
        ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
        g.axes[d] = std::move(ax);
    }
    const size_t expect = g.node_count();
    if (rows.size() != expect) throw ConfigError("boundary file is not a full tensor grid");
    g.values.assign(expect, 0.0);
    g.residual.assign(expect, 0.0);
    g.stderr_.assign(expect, 0.0);
    g.value_se.assign(expect, 0.0);
    std::vector<int> idx(D);
    for (const auto& r : rows) {
        for (int d = 0; d < D; ++d) {
            const auto& ax = g.axes[d];
            idx[d] = static_cast<int>(std::lower_bound(ax.begin(), ax.end(), r[d]) - ax.begin());
        }
        const size_t f = g.flat_index(idx);
        g.values[f] = r[D];
        g.residual[f] = r[D + 1];
        g.stderr_[f] = r[D + 2];
    }
    if (g.phi_star.empty()) {
        // files written by other tools may omit the metadata; fall back to
        // the grid extents for the polytope rule
        for (int d = 0; d < D; ++d) g.phi_star.push_back(g.axes[d].back());
        g.phi_star.push_back(g.values.empty() ? 1.0 : *std::max_element(g.values.begin(), g.values.end()));
    }
    return g;
}

}  // namespace qdet
