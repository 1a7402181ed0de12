#include "qdet/fredholm.hpp"

#include "qdet/digest.hpp"
#include "qdet/quadrature.hpp"
#include "qdet/rng.hpp"
#include "qdet/simulate.hpp"
#include "qdet/workers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>

namespace qdet {

namespace {

// Substep schedule covering the record times with steps no longer than h_max.
struct StepPlan {
    std::vector<double> h;       // step widths
    std::vector<int> record_at;  // record index after the step, -1 otherwise
};

StepPlan make_step_plan(std::span<const double> times, double h_max) {
    StepPlan plan;
    double prev = 0.0;
    for (size_t q = 0; q < times.size(); ++q) {
        const double gap = times[q] - prev;
        if (gap <= 0.0) {
            // coincident record times: re-record without advancing
            plan.h.push_back(0.0);
            plan.record_at.push_back(static_cast<int>(q));
            continue;
        }
        const int nsub = std::max(1, static_cast<int>(std::ceil(gap / h_max - 1e-12)));
        const double h = gap / nsub;
        for (int s = 0; s < nsub; ++s) {
            plan.h.push_back(h);
            plan.record_at.push_back(s + 1 == nsub ? static_cast<int>(q) : -1);
        }
        prev = times[q];
    }
    return plan;
}

// F(y) = sum over (q, m) slots of [y < c] * (u + g*y); u and g carry the
// discounted quadrature weight, so eval() divides by the path count once.
// s = 1/G^N per slot lets the surface threshold move jointly with y.
struct NodeScan {
    int Q = 0;
    int M = 0;
    std::unique_ptr<double[]> c, u, g, s;
    size_t capacity = 0;

    void alloc(int q, int m) {
        Q = q;
        M = m;
        const size_t need = static_cast<size_t>(q) * m;
        if (need > capacity) {
            c.reset(new double[need]);
            u.reset(new double[need]);
            g.reset(new double[need]);
            s.reset(new double[need]);
            capacity = need;
        }
    }

    double eval(double y) const {
        const size_t total = static_cast<size_t>(Q) * M;
        double acc = 0.0;
        for (size_t t = 0; t < total; ++t) {
            const double open = y < c[t] ? 1.0 : 0.0;  // branchless, vectorizes
            acc += open * (u[t] + g[t] * y);
        }
        return acc / M;
    }

    // start at y and shift the local surface level by (y - y_ref) with it
    double eval_joint(double y, double y_ref) const {
        const size_t total = static_cast<size_t>(Q) * M;
        const double shift = y - y_ref;
        double acc = 0.0;
        for (size_t t = 0; t < total; ++t) {
            const double open = y < c[t] + shift * s[t] ? 1.0 : 0.0;
            acc += open * (u[t] + g[t] * y);
        }
        return acc / M;
    }

    // mean and standard error from per-path integral values
    void eval_se(double y, double& mean, double& se, std::vector<double>& vpath) const {
        vpath.assign(M, 0.0);
        for (int q = 0; q < Q; ++q) {
            const double* cq = c.get() + static_cast<size_t>(q) * M;
            const double* uq = u.get() + static_cast<size_t>(q) * M;
            const double* gq = g.get() + static_cast<size_t>(q) * M;
            for (int m = 0; m < M; ++m)
                if (y < cq[m]) vpath[m] += uq[m] + gq[m] * y;
        }
        double sum = 0.0, sum2 = 0.0;
        for (int m = 0; m < M; ++m) {
            sum += vpath[m];
            sum2 += vpath[m] * vpath[m];
        }
        mean = sum / M;
        const double var = std::max(0.0, sum2 / M - mean * mean);
        se = std::sqrt(var / M);
    }
};

void build_scan(const ProblemSpec& spec, const FlowBlock& blk, const TimeGrid& tg,
                const BoundaryGrid& b, std::span<const double> node, NodeScan& scan,
                int m_eff = 0) {
    const int N = spec.N();
    const int D = N - 1;
    const int Q = blk.n_times;
    const int M = m_eff > 0 ? std::min(m_eff, blk.n_paths) : blk.n_paths;
    const auto& p = spec.family.probs;
    const double lam_over_c = spec.lambda / spec.c;
    scan.alloc(Q, M);

    double point[12];
    for (int q = 0; q < Q; ++q) {
        const double wq = tg.weights[q];
        const double* gN = blk.g_row(D, q);
        const double* hN = blk.h_row(D, q);
        const double* gRow[12];
        const double* hRow[12];
        for (int d = 0; d < D; ++d) {
            gRow[d] = blk.g_row(d, q);
            hRow[d] = blk.h_row(d, q);
        }
        double* cq = scan.c.get() + static_cast<size_t>(q) * M;
        double* uq = scan.u.get() + static_cast<size_t>(q) * M;
        double* gq = scan.g.get() + static_cast<size_t>(q) * M;
        double* sq = scan.s.get() + static_cast<size_t>(q) * M;
        for (int m = 0; m < M; ++m) {
            double partial = -lam_over_c;
            for (int d = 0; d < D; ++d) {
                point[d] = gRow[d][m] * node[d] + hRow[d][m];
                partial += p[d] * point[d];
            }
            const double thr = b.eval(std::span<const double>(point, static_cast<size_t>(D)));
            cq[m] = (thr - hN[m]) / gN[m];
            uq[m] = wq * (partial + p[D] * hN[m]);
            gq[m] = wq * p[D] * gN[m];
            sq[m] = 1.0 / gN[m];
        }
    }
}

// Node update in two stages. A value-matching pass (the equation is linear
// in y once the indicator set is frozen) gives a cheap first proposal, but
// F(., y) is nearly flat above the root, so the equation alone pins the
// surface poorly near its floor contact. The polish step therefore solves
// G(z) = F(start z, surface level moved to z) = 0 by a guarded secant:
// moving start and local level together restores a healthy slope, and the
// fixed point of this update zeroes the residual at every node.
double solve_node(const NodeScan& scan, double y_start, double lo, double hi, double y_tol,
                  bool polish, bool& pinned) {
    const size_t total = static_cast<size_t>(scan.Q) * scan.M;
    double y = std::clamp(y_start, lo, hi);
    pinned = false;
    for (int it = 0; it < 5; ++it) {
        double num = 0.0, den = 0.0;
        for (size_t t = 0; t < total; ++t) {
            const double open = y < scan.c[t] ? 1.0 : 0.0;
            num += open * scan.u[t];
            den += open * scan.g[t];
        }
        if (den <= 0.0) {
            pinned = true;
            break;
        }
        const double y_next = std::clamp(-num / den, lo, hi);
        const bool done = std::fabs(y_next - y) < y_tol;
        y = y_next;
        if (done) break;
    }
    if (!polish) return std::clamp(y, lo, hi);

    const double y_ref = y;
    const double probe = std::max(0.02 * (hi - lo), 4.0 * y_tol);
    for (int it = 0; it < 3; ++it) {
        const double r = scan.eval_joint(y, y_ref);
        const double up = scan.eval_joint(y + probe, y_ref);
        const double dn = scan.eval_joint(std::max(0.0, y - probe), y_ref);
        const double slope = (up - dn) / (y + probe - std::max(0.0, y - probe));
        if (!(slope > 1e-12)) break;
        double step = -r / slope;
        step = std::clamp(step, -0.25 * (hi - lo) - probe, 0.25 * (hi - lo) + probe);
        const double y_next = std::clamp(y + step, 0.0, hi);
        const bool done = std::fabs(y_next - y) < y_tol;
        y = y_next;
        if (done) break;
    }
    return std::clamp(y, lo, hi);
}

double l_max_bound(const ProblemSpec& spec, std::span<const double> phi_star) {
    double s = 0.0;
    for (int i = 0; i < spec.N(); ++i) s += spec.family.probs[i] * phi_star[i];
    return std::max(spec.lambda / spec.c, s - spec.lambda / spec.c);
}

}  // namespace

TimeGrid make_time_grid(const ProblemSpec& spec, double l_max, const QuadConfig& cfg) {
    const double eps_tail = cfg.eps_tail_factor * (spec.lambda / spec.c);
    const double t_max =
        std::log(std::max(l_max / (spec.lambda * eps_tail), 8.0)) / spec.lambda;
    TimeGrid tg;
    tg.t_max = t_max;
    const auto edges = geometric_edges(t_max, cfg.panels, cfg.panel_ratio);
    for (int pnl = 0; pnl < cfg.panels; ++pnl) {
        const double mid = 0.5 * (edges[pnl] + edges[pnl + 1]);
        const double half = 0.5 * (edges[pnl + 1] - edges[pnl]);
        for (int i = 0; i < 8; ++i) {
            const double t = mid + half * GaussLegendre8::nodes[i];
            tg.times.push_back(t);
            tg.weights.push_back(GaussLegendre8::weights[i] * half * std::exp(-spec.lambda * t));
        }
    }
    return tg;
}

FlowBlock build_flow_block(const ProblemSpec& spec, std::span<const double> times, int n_paths,
                           uint64_t seed, double h_max, int workers) {
    const int N = spec.N();
    const int Q = static_cast<int>(times.size());
    FlowBlock blk;
    blk.n_paths = n_paths;
    blk.n_times = Q;
    blk.N = N;
    blk.times.assign(times.begin(), times.end());
    blk.G.resize(static_cast<size_t>(N) * Q * n_paths);
    blk.H.resize(static_cast<size_t>(N) * Q * n_paths);

    const StepPlan plan = make_step_plan(times, h_max);
    const int n_steps = static_cast<int>(plan.h.size());

    // per-step deterministic factors exp((lambda - k mu^2/2) h) by subset size
    std::vector<int> sizes(N);
    for (int i = 0; i < N; ++i) sizes[i] = spec.family.subset_size(i);
    std::vector<double> size_factor(static_cast<size_t>(N) * n_steps);
    for (int i = 0; i < N; ++i) {
        const double rate = spec.lambda - 0.5 * spec.mu2_eff(i);
        for (int s = 0; s < n_steps; ++s)
            size_factor[static_cast<size_t>(i) * n_steps + s] = std::exp(rate * plan.h[s]);
    }
    std::vector<double> sqrt_h(n_steps);
    for (int s = 0; s < n_steps; ++s) sqrt_h[s] = std::sqrt(plan.h[s]);

    if (workers <= 0) workers = default_workers();
    parallel_for(n_paths, workers, [&](int m) {
        std::vector<double> z(spec.n);
        std::vector<double> ej(spec.n);
        std::vector<double> gcur(N, 1.0), hcur(N, 0.0);
        NormalStream normals(seed, static_cast<uint64_t>(m), 0);
        for (int s = 0; s < n_steps; ++s) {
            const double h = plan.h[s];
            if (h > 0.0) {
                normals.fill(static_cast<uint32_t>(s), z.data(), spec.n);
                for (int j = 0; j < spec.n; ++j) ej[j] = std::exp(spec.mu * sqrt_h[s] * z[j]);
                for (int i = 0; i < N; ++i) {
                    double r = size_factor[static_cast<size_t>(i) * n_steps + s];
                    for (int coord : spec.family.subsets[i]) r *= ej[coord - 1];
                    gcur[i] *= r;
                    hcur[i] = hcur[i] * r + 0.5 * spec.lambda * h * (r + 1.0);
                }
            }
            const int q = plan.record_at[s];
            if (q >= 0) {
                for (int i = 0; i < N; ++i) {
                    const size_t at = (static_cast<size_t>(i) * Q + q) * n_paths + m;
                    blk.G[at] = gcur[i];
                    blk.H[at] = hcur[i];
                }
            }
        }
    });
    return blk;
}

FredholmEngine::FredholmEngine(const ProblemSpec& spec, const QuadConfig& quad, const McConfig& mc,
                               int workers)
    : FredholmEngine(spec, quad, mc, phi_star_all(spec), workers) {}

FredholmEngine::FredholmEngine(const ProblemSpec& spec, const QuadConfig& quad, const McConfig& mc,
                               std::vector<double> phi_star, int workers)
    : spec_(spec),
      quad_(quad),
      mc_(mc),
      workers_(workers <= 0 ? default_workers() : workers),
      phi_star_(std::move(phi_star)) {
    tg_ = make_time_grid(spec_, l_max_bound(spec_, phi_star_), quad_);
    block_ = build_flow_block(spec_, tg_.times, mc_.samples, mc_.seed,
                              quad_.flow_h_factor / spec_.lambda, workers_);
}

ValueEstimate FredholmEngine::value_hat(const BoundaryGrid& b, std::span<const double> phi) const {
    const int N = spec_.N();
    if (static_cast<int>(phi.size()) != N)
        throw DimensionError("value_hat expects an N-vector start");
    const int D = N - 1;
    const int Q = block_.n_times;
    const int M = block_.n_paths;
    const auto& p = spec_.family.probs;
    const double lam_over_c = spec_.lambda / spec_.c;

    // per-path integral values; slot writes keep the reduction order fixed
    std::vector<double> vpath(M, 0.0);
    parallel_for(workers_, workers_, [&](int w) {
        const int chunk = (M + workers_ - 1) / workers_;
        const int m_lo = w * chunk;
        const int m_hi = std::min(M, m_lo + chunk);
        double point[12];
        for (int q = 0; q < Q; ++q) {
            const double wq = tg_.weights[q];
            const double* gN = block_.g_row(D, q);
            const double* hN = block_.h_row(D, q);
            const double* gRow[12];
            const double* hRow[12];
            for (int d = 0; d < D; ++d) {
                gRow[d] = block_.g_row(d, q);
                hRow[d] = block_.h_row(d, q);
            }
            for (int m = m_lo; m < m_hi; ++m) {
                double cost = -lam_over_c;
                for (int d = 0; d < D; ++d) {
                    point[d] = gRow[d][m] * phi[d] + hRow[d][m];
                    cost += p[d] * point[d];
                }
                const double phi_last = gN[m] * phi[D] + hN[m];
                if (phi_last <
                    b.eval(std::span<const double>(point, static_cast<size_t>(D)))) {
                    vpath[m] += wq * (cost + p[D] * phi_last);
                }
            }
        }
    });

    double sum = 0.0, sum2 = 0.0;
    for (int m = 0; m < M; ++m) {
        sum += vpath[m];
        sum2 += vpath[m] * vpath[m];
    }
    const double mean = sum / M;
    const double var = std::max(0.0, sum2 / M - mean * mean);
    return {mean, std::sqrt(var / M)};
}

ValueEstimate FredholmEngine::fredholm_lhs(const BoundaryGrid& b, std::span<const double> node,
                                           double y) const {
    const int N = spec_.N();
    if (static_cast<int>(node.size()) != N - 1)
        throw DimensionError("fredholm_lhs expects N-1 node coordinates");
    std::vector<double> phi(node.begin(), node.end());
    phi.push_back(y);
    return value_hat(b, phi);
}

double FredholmEngine::lhs_slope(const BoundaryGrid& b, std::span<const double> node, double y,
                                 double delta) const {
    const double up = fredholm_lhs(b, node, y + delta).value;
    const double dn = fredholm_lhs(b, node, std::max(0.0, y - delta)).value;
    const double width = y + delta - std::max(0.0, y - delta);
    return (up - dn) / width;
}

ValueEstimate kernel_K(const ProblemSpec& spec, const BoundaryGrid& b, double t,
                       std::span<const double> phi, int n_samples, uint64_t seed, double h_max,
                       int workers) {
    const int N = spec.N();
    if (static_cast<int>(phi.size()) != N) throw DimensionError("kernel_K expects an N-vector");
    if (t < 0.0) throw DomainError("kernel_K: t must be >= 0");
    const int D = N - 1;
    const auto& p = spec.family.probs;
    const double lam_over_c = spec.lambda / spec.c;

    if (t == 0.0) {
        double cost = -lam_over_c;
        for (int i = 0; i < N; ++i) cost += p[i] * phi[i];
        const double thr = b.eval(phi.subspan(0, D));
        return {phi[D] < thr ? cost : 0.0, 0.0};
    }

    if (h_max <= 0.0) h_max = 0.1 / spec.lambda;
    const double times[1] = {t};
    FlowBlock blk = build_flow_block(spec, times, n_samples, seed, h_max, workers);

    double sum = 0.0, sum2 = 0.0;
    double point[12];
    for (int m = 0; m < n_samples; ++m) {
        double cost = -lam_over_c;
        for (int d = 0; d < D; ++d) {
            point[d] = blk.g_row(d, 0)[m] * phi[d] + blk.h_row(d, 0)[m];
            cost += p[d] * point[d];
        }
        const double phi_last = blk.g_row(D, 0)[m] * phi[D] + blk.h_row(D, 0)[m];
        double v = 0.0;
        if (phi_last < b.eval(std::span<const double>(point, static_cast<size_t>(D))))
            v = cost + p[D] * phi_last;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n_samples;
    const double var = std::max(0.0, sum2 / n_samples - mean * mean);
    return {mean, std::sqrt(var / n_samples)};
}

namespace {

// One phase of damped sweeps on a fixed grid.
void run_sweeps(const ProblemSpec& spec, const FredholmEngine& engine, const BoundSurfaces& bs,
                BoundaryGrid& grid, const PicardConfig& cfg, double tol, double y_tol,
                int workers, SolveReport& report) {
    const size_t n_nodes = grid.node_count();
    double omega = std::clamp(cfg.damping, 0.05, 1.0);
    std::vector<double> new_values(n_nodes);
    std::vector<int> flagged(n_nodes, 0);
    std::vector<double> prev_step(n_nodes, 0.0);
    std::vector<double> proposal_gap(n_nodes, 0.0);
    std::vector<double> coords_buf;
    report.converged = false;

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        const BoundaryGrid prev = grid;  // frozen thresholds for this sweep
        // far from the fixed point a deterministic prefix of the sample block
        // suffices; full samples and the joint-level polish engage once the
        // proposal gap is within an order of magnitude of the tolerance
        const bool coarse =
            report.fixed_point_gap.empty() || report.fixed_point_gap.back() >= 10.0 * tol;
        const int m_eff = coarse ? engine.samples() / 4 : 0;
        const bool polish = !coarse;
        parallel_for(static_cast<int>(n_nodes), workers, [&](int fi) {
            const size_t f = static_cast<size_t>(fi);
            std::vector<double> node;
            grid.node_coords(f, node);
            const double lo = std::max(0.0, bs.lower_plane(node));
            const double hi = std::max(0.0, bs.upper_plane(node));
            flagged[f] = 0;
            if (hi <= lo + 1e-12) {
                new_values[f] = hi;
                proposal_gap[f] = 0.0;
                return;
            }
            thread_local NodeScan scan;  // reused across the worker's nodes
            build_scan(spec, engine.block(), engine.time_grid(), prev, node, scan, m_eff);
            bool pinned = false;
            const double root =
                solve_node(scan, prev.values[f], lo, hi, y_tol, polish, pinned);
            if (pinned) flagged[f] = 1;
            proposal_gap[f] = std::fabs(root - prev.values[f]);
            new_values[f] = (1.0 - omega) * prev.values[f] + omega * root;
        });

        grid.values = new_values;
        grid.project_monotone();
        // exact sandwich: clamp into the analytic planes
        for (size_t f = 0; f < n_nodes; ++f) {
            grid.node_coords(f, coords_buf);
            grid.values[f] =
                std::clamp(grid.values[f], bs.lower(coords_buf), bs.upper(coords_buf));
        }

        double sup = 0.0;
        double gap = 0.0;
        double dot = 0.0, norm_new = 0.0, norm_old = 0.0;
        for (size_t f = 0; f < n_nodes; ++f) {
            const double step = grid.values[f] - prev.values[f];
            sup = std::max(sup, std::fabs(step));
            gap = std::max(gap, proposal_gap[f]);
            dot += step * prev_step[f];
            norm_new += step * step;
            norm_old += prev_step[f] * prev_step[f];
            prev_step[f] = step;
        }
        report.sup_change.push_back(sup);
        report.fixed_point_gap.push_back(gap);
        ++report.iterations;
        if (std::getenv("QDET_TRACE"))
            std::fprintf(stderr, "    sweep %d: nodes=%zu m_eff=%d gap=%.5f sup=%.5f om=%.3f\n",
                         report.iterations, n_nodes, m_eff == 0 ? -1 : m_eff, gap, sup, omega);
        // the undamped proposal gap is the substitution map's own residual
        if (gap < tol && sweep >= 1) {
            report.converged = true;
            break;
        }
        // oscillation control: consecutive steps anti-aligned means the
        // substitution map overshoots; shrink the relaxation
        if (sweep >= 1 && norm_new > 0.0 && norm_old > 0.0) {
            const double cosine = dot / std::sqrt(norm_new * norm_old);
            if (cosine < -0.3)
                omega = std::max(0.05, 0.5 * omega);
            else if (cosine > 0.8)
                omega = std::min(std::clamp(cfg.damping, 0.05, 1.0), 1.2 * omega);
        }
    }
    report.damping = omega;
    report.flagged_nodes = 0;
    for (size_t f = 0; f < n_nodes; ++f) report.flagged_nodes += flagged[f];
}

// Insert midpoints where the piecewise-linear chord sags beyond sag_tol
// against the estimated curvature. Returns the number of inserted nodes.
int refine_axes(BoundaryGrid& grid, double sag_tol) {
    const int D = grid.dims();
    int inserted = 0;
    for (int d = 0; d < D; ++d) {
        const auto& ax = grid.axes[d];
        const size_t len = ax.size();
        if (len < 3) continue;
        size_t stride = 1;
        for (int e = d + 1; e < D; ++e) stride *= grid.axes[e].size();
        const size_t lines = grid.node_count() / len;
        // curvature per interior node, maximised over all grid lines
        std::vector<double> curv(len, 0.0);
        for (size_t l = 0; l < lines; ++l) {
            const size_t block = stride * len;
            const size_t base = (l / stride) * block + (l % stride);
            for (size_t k = 1; k + 1 < len; ++k) {
                const double h0 = ax[k] - ax[k - 1];
                const double h1 = ax[k + 1] - ax[k];
                const double s0 = (grid.values[base + k * stride] -
                                   grid.values[base + (k - 1) * stride]) / h0;
                const double s1 = (grid.values[base + (k + 1) * stride] -
                                   grid.values[base + k * stride]) / h1;
                curv[k] = std::max(curv[k], 2.0 * std::fabs(s1 - s0) / (h0 + h1));
            }
        }
        // smallest surface value over the cell's lines: curvature needing
        // resolution concentrates where the surface approaches its floor
        std::vector<double> vmin(len, 1e300);
        for (size_t l = 0; l < lines; ++l) {
            const size_t block = stride * len;
            const size_t base = (l / stride) * block + (l % stride);
            for (size_t k = 0; k < len; ++k)
                vmin[k] = std::min(vmin[k], grid.values[base + k * stride]);
        }
        const double band = 0.25 * grid.phi_star.back();
        std::vector<double> extra;
        for (size_t k = 0; k + 1 < len && extra.size() < 24; ++k) {
            if (std::min(vmin[k], vmin[k + 1]) > band) continue;
            const double h = ax[k + 1] - ax[k];
            const double sag = 0.125 * h * h * std::max(curv[k], curv[k + 1]);
            if (sag > sag_tol) {
                const int pieces =
                    std::min(4, static_cast<int>(std::ceil(std::sqrt(sag / sag_tol))));
                for (int p = 1; p < pieces; ++p) extra.push_back(ax[k] + h * p / pieces);
            }
        }
        if (extra.empty()) continue;
        inserted += static_cast<int>(extra.size());
        auto merged = ax;
        merged.insert(merged.end(), extra.begin(), extra.end());
        std::sort(merged.begin(), merged.end());
        grid.axes[d] = std::move(merged);
    }
    return inserted;
}

}  // namespace

std::pair<BoundaryGrid, SolveReport> picard_solve(const ProblemSpec& spec,
                                                  const PicardConfig& cfg, const McConfig& mc,
                                                  const QuadConfig& quad) {
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = cfg.workers > 0 ? cfg.workers : default_workers();

    FredholmEngine engine(spec, quad, mc, workers);
    const auto& phi_star = engine.phi_star();

    BoundSurfaces bs;
    bs.p = spec.family.probs;
    bs.phi_star = phi_star;
    bs.lambda = spec.lambda;
    bs.c = spec.c;

    BoundaryGrid grid = make_boundary_grid(spec, cfg.nodes_per_axis, phi_star, cfg.margin);
    grid.spec_hash = hex64(fnv1a64(spec.canonical_string()));
    grid.seed = mc.seed;
    grid.kernel_samples = mc.samples;

    std::vector<double> coords_buf;
    for (size_t f = 0; f < grid.node_count(); ++f) {
        grid.node_coords(f, coords_buf);
        grid.values[f] = bs.upper(coords_buf);
    }
    grid.project_monotone();

    const double phi_star_max = *std::max_element(phi_star.begin(), phi_star.end());
    const double tol = cfg.tol_sup > 0.0 ? cfg.tol_sup : 2e-3 * phi_star_max;
    const double y_tol = std::max(1e-9, 0.25 * tol);
    const double sag_tol =
        cfg.sag_tol > 0.0 ? cfg.sag_tol : 2.5e-5 * phi_star[spec.N() - 1];

    SolveReport report;
    report.kernel_samples = mc.samples;

    for (int phase = 0; ; ++phase) {
        run_sweeps(spec, engine, bs, grid, cfg, tol, y_tol, workers, report);
        if (phase >= cfg.refine_passes || grid.dims() == 0) break;

        BoundaryGrid refined = grid;
        const int added = refine_axes(refined, sag_tol);
        if (added == 0) break;
        report.inserted_nodes += added;
        // warm start: interpolate the previous surface onto the new nodes
        refined.values.assign(refined.node_count(), 0.0);
        refined.residual.assign(refined.node_count(), 0.0);
        refined.stderr_.assign(refined.node_count(), 0.0);
        refined.value_se.assign(refined.node_count(), 0.0);
        for (size_t f = 0; f < refined.node_count(); ++f) {
            refined.node_coords(f, coords_buf);
            const double v = grid.eval(coords_buf);
            refined.values[f] = std::clamp(v, bs.lower(coords_buf), bs.upper(coords_buf));
        }
        refined.project_monotone();
        grid = std::move(refined);
    }

    const size_t s = report.sup_change.size();
    if (s >= 3) {
        report.sup_change_monotone = report.sup_change[s - 1] <= report.sup_change[s - 2] &&
                                     report.sup_change[s - 2] <= report.sup_change[s - 3];
    }

    grid.iterations = report.iterations;

    // final diagnostics on a fresh sample block
    McConfig fresh = mc;
    fresh.seed = mix_seed(mc.seed, 0x52455349ULL);
    ResidualSummary rs = residual_report(spec, grid, fresh, quad, workers);
    report.residual_max = rs.max_abs;
    report.residual_mean = rs.mean_abs;
    report.stderr_max = rs.stderr_max;
    report.stderr_mean = rs.stderr_mean;

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(grid), report};
}

ResidualSummary residual_report(const ProblemSpec& spec, BoundaryGrid& grid, const McConfig& mc,
                                const QuadConfig& quad, int workers) {
    if (workers <= 0) workers = default_workers();
    std::vector<double> phi_star = grid.phi_star;
    if (static_cast<int>(phi_star.size()) != spec.N()) phi_star = phi_star_all(spec);
    FredholmEngine engine(spec, quad, mc, phi_star, workers);

    const size_t n_nodes = grid.node_count();
    grid.residual.assign(n_nodes, 0.0);
    grid.stderr_.assign(n_nodes, 0.0);
    grid.value_se.assign(n_nodes, 0.0);

    const double delta = 0.02 * (*std::max_element(phi_star.begin(), phi_star.end()));
    parallel_for(static_cast<int>(n_nodes), workers, [&](int fi) {
        const size_t f = static_cast<size_t>(fi);
        std::vector<double> node;
        grid.node_coords(f, node);
        const double y = grid.values[f];
        thread_local NodeScan scan;
        build_scan(spec, engine.block(), engine.time_grid(), grid, node, scan);
        double mean, se;
        std::vector<double> vpath;
        scan.eval_se(y, mean, se, vpath);
        // slope from the increasing branch below y (F is flat above the root)
        const double slope = (scan.eval(y) - scan.eval(std::max(0.0, y - delta))) /
                             (y - std::max(0.0, y - delta) + 1e-300);
        grid.residual[f] = mean;
        grid.stderr_[f] = se;
        grid.value_se[f] = se / std::max(std::fabs(slope), 1e-12);
    });

    ResidualSummary out;
    for (size_t f = 0; f < n_nodes; ++f) {
        out.max_abs = std::max(out.max_abs, std::fabs(grid.residual[f]));
        out.mean_abs += std::fabs(grid.residual[f]);
        out.stderr_max = std::max(out.stderr_max, grid.stderr_[f]);
        out.stderr_mean += grid.stderr_[f];
    }
    out.mean_abs /= static_cast<double>(n_nodes);
    out.stderr_mean /= static_cast<double>(n_nodes);
    return out;
}

ValueEstimate value_initial(const FredholmEngine& engine, const BoundaryGrid& b, double pi) {
    if (pi < 0.0 || pi > 1.0) throw DomainError("value_initial: pi must lie in [0,1]");
    if (pi >= 1.0 - 1e-12) return {0.0, 0.0};
    const double ratio = pi / (1.0 - pi);
    std::vector<double> diag(engine.spec().N(), ratio);
    const ValueEstimate v = engine.value_hat(b, diag);
    const double c = engine.spec().c;
    return {(1.0 - pi) * (1.0 + c * v.value), (1.0 - pi) * c * v.se};
}

}  // namespace qdet
