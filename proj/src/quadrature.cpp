#include "qdet/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace qdet {

namespace {

// (G7,K15) node/weight table on [0,1] halves; first entry is the center.
// Columns: |node|, Gauss-7 weight, Kronrod-15 weight.
const double kGK[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

struct PanelEstimate {
    double value;
    double error;
    double roundoff;  // attainable floor from round-off on this panel
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    fv[0] = f(mid);
    double g7 = kGK[0][1] * fv[0];
    double k15 = kGK[0][2] * fv[0];
    double resabs = kGK[0][2] * std::fabs(fv[0]);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGK[i][0];
        fv[2 * i - 1] = f(mid + dx);
        fv[2 * i] = f(mid - dx);
        const double yi = fv[2 * i - 1] + fv[2 * i];
        g7 += kGK[i][1] * yi;
        k15 += kGK[i][2] * yi;
        resabs += kGK[i][2] * (std::fabs(fv[2 * i - 1]) + std::fabs(fv[2 * i]));
    }
    // scale of |f - mean| for the error model
    const double mean = k15 * 0.5;
    double resasc = kGK[0][2] * std::fabs(fv[0] - mean);
    for (int i = 1; i < 8; ++i)
        resasc += kGK[i][2] * (std::fabs(fv[2 * i - 1] - mean) + std::fabs(fv[2 * i] - mean));
    resasc *= std::fabs(half);
    resabs *= std::fabs(half);
    g7 *= half;
    k15 *= half;

    double err = std::fabs(g7 - k15);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return {k15, err, 50.0 * 2.22e-16 * resabs};
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts) {
    if (a == b) return 0.0;

    struct Interval {
        double a, b, value, error, roundoff;
    };
    std::vector<Interval> heap;
    PanelEstimate e0 = gk15(f, a, b);
    heap.push_back({a, b, e0.value, e0.error, e0.roundoff});

    double total_value = e0.value;
    double total_error = e0.error;
    double total_roundoff = e0.roundoff;
    int used = 1;

    // terminate at the requested tolerance or at the attainable round-off floor
    while (total_error > std::max(opts.abs_tol, total_roundoff)) {
        if (used >= opts.max_intervals)
            throw QuadratureError("adaptive quadrature: interval budget exhausted");
        size_t worst = 0;
        for (size_t i = 1; i < heap.size(); ++i)
            if (heap[i].error > heap[worst].error) worst = i;
        Interval iv = heap[worst];
        heap.erase(heap.begin() + static_cast<long>(worst));
        const double mid = 0.5 * (iv.a + iv.b);
        PanelEstimate l = gk15(f, iv.a, mid);
        PanelEstimate r = gk15(f, mid, iv.b);
        total_value += l.value + r.value - iv.value;
        total_error += l.error + r.error - iv.error;
        total_roundoff += l.roundoff + r.roundoff - iv.roundoff;
        heap.push_back({iv.a, mid, l.value, l.error, l.roundoff});
        heap.push_back({mid, iv.b, r.value, r.error, r.roundoff});
        ++used;
    }
    return total_value;
}

const double GaussLegendre8::nodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363,
};
const double GaussLegendre8::weights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763,
};

double integrate_gl8(const std::function<double(double)>& f, double a, double b, int panels) {
    double sum = 0.0;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        const double mid = lo + 0.5 * w;
        for (int i = 0; i < 8; ++i)
            sum += GaussLegendre8::weights[i] * f(mid + 0.5 * w * GaussLegendre8::nodes[i]);
    }
    return sum * 0.5 * w;
}

std::vector<double> geometric_edges(double total, int count, double ratio) {
    std::vector<double> edges(count + 1);
    double scale = 0.0;
    double w = 1.0;
    for (int i = 0; i < count; ++i) {
        scale += w;
        w *= ratio;
    }
    edges[0] = 0.0;
    w = total / scale;
    for (int i = 0; i < count; ++i) {
        edges[i + 1] = edges[i] + w;
        w *= ratio;
    }
    edges[count] = total;  // guard against rounding drift
    return edges;
}

}  // namespace qdet
