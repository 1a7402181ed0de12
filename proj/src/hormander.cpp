#include "qdet/hormander.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace qdet {

namespace {

// Row-echelon accumulator over exact rationals. add() returns true when the
// vector enlarges the span; pivot columns are tracked for reachability.
class RatEchelon {
  public:
    explicit RatEchelon(int dim) : dim_(dim) {}

    int rank() const { return static_cast<int>(rows_.size()); }

    const std::vector<int>& pivots() const { return pivots_; }

    bool add(std::vector<Rat> v) {
        reduce(v);
        int p = first_nonzero(v);
        if (p < 0) return false;
        Rat inv = Rat(1) / v[p];
        for (auto& x : v) x *= inv;
        // keep rows ordered by pivot so reduction stays a single pass
        size_t pos = 0;
        while (pos < rows_.size() && pivots_[pos] < p) ++pos;
        rows_.insert(rows_.begin() + pos, std::move(v));
        pivots_.insert(pivots_.begin() + pos, p);
        return true;
    }

    bool in_span(std::vector<Rat> v) const {
        reduce(v);
        return first_nonzero(v) < 0;
    }

  private:
    int dim_;
    std::vector<std::vector<Rat>> rows_;
    std::vector<int> pivots_;

    void reduce(std::vector<Rat>& v) const {
        for (size_t r = 0; r < rows_.size(); ++r) {
            const Rat& coef = v[pivots_[r]];
            if (coef.is_zero()) continue;
            Rat c = coef;
            for (int j = pivots_[r]; j < dim_; ++j)
                if (!rows_[r][j].is_zero()) v[j] -= c * rows_[r][j];
        }
    }

    int first_nonzero(const std::vector<Rat>& v) const {
        for (int j = 0; j < dim_; ++j)
            if (!v[j].is_zero()) return j;
        return -1;
    }
};

std::vector<Rat> flatten(const AffineField& f) {
    std::vector<Rat> v;
    v.reserve(f.A.size() + f.d.size());
    v.insert(v.end(), f.A.begin(), f.A.end());
    v.insert(v.end(), f.d.begin(), f.d.end());
    return v;
}

struct Generators {
    std::vector<AffineField> fields;  // index 0 = drift, 1..n = diffusion
};

// Closure of left-nested bracket words up to the depth cap, pruned by the
// span of the fields themselves: a word whose field is dependent on fields
// already kept contributes nothing new to later brackets (bilinearity).
struct ClosureResult {
    std::vector<AffineField> basis;
    std::vector<BracketWord> words;
};

ClosureResult bracket_closure(const Generators& gens, int depth_cap, bool full_tree) {
    const int dim = gens.fields.front().dim;
    RatEchelon field_span(dim * dim + dim);
    ClosureResult out;

    struct Item {
        size_t basis_idx;
        int depth;
    };
    std::deque<Item> pending;

    for (int g = 0; g < static_cast<int>(gens.fields.size()); ++g) {
        const auto& f = gens.fields[g];
        if (f.is_zero()) continue;
        if (field_span.add(flatten(f))) {
            out.basis.push_back(f);
            out.words.push_back({g});
            pending.push_back({out.basis.size() - 1, 1});
        }
    }

    while (!pending.empty()) {
        Item it = pending.front();
        pending.pop_front();
        if (it.depth >= depth_cap) continue;
        const size_t extend_count =
            full_tree ? out.basis.size() : gens.fields.size();
        for (size_t e = 0; e < extend_count; ++e) {
            const AffineField& rhs = full_tree ? out.basis[e] : gens.fields[e];
            AffineField f = lie_bracket(out.basis[it.basis_idx], rhs);
            if (f.is_zero()) continue;
            if (!field_span.add(flatten(f))) continue;
            BracketWord w = out.words[it.basis_idx];
            if (full_tree) {
                // composite right operand: word not representable as a flat
                // left-nested sequence, keep indices of the generator case only
                w.push_back(-1);
            } else {
                w.push_back(static_cast<int>(e));
            }
            out.basis.push_back(std::move(f));
            out.words.push_back(std::move(w));
            pending.push_back({out.basis.size() - 1, it.depth + 1});
        }
    }
    return out;
}

// Iterated left-nested bracket of the given word.
AffineField word_field(const Generators& gens, const BracketWord& w) {
    AffineField f = gens.fields[w.front()];
    for (size_t i = 1; i < w.size(); ++i) f = lie_bracket(f, gens.fields[w[i]]);
    return f;
}

// Witness construction following the iterated-bracket pattern: subsets are
// processed by size descending, and each candidate vector is reduced modulo
// the unit directions already certified before testing proportionality.
void attach_witnesses(const ProblemSpec& spec, const Generators& gens,
                      const std::vector<Rat>& point, int time_offset,
                      RankCertificate& cert) {
    const int N = spec.N();
    cert.witnesses.assign(static_cast<size_t>(N) + (time_offset ? 1 : 0), std::nullopt);

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return spec.family.subset_size(a) > spec.family.subset_size(b);
    });

    std::vector<bool> covered(point.size(), false);
    for (int j : order) {
        BracketWord w{0};
        for (int coord : spec.family.subsets[j]) w.push_back(coord);
        AffineField f = word_field(gens, w);
        std::vector<Rat> v = f.eval(point);
        for (size_t q = 0; q < v.size(); ++q)
            if (covered[q]) v[q] = Rat(0);
        // proportional to the unit direction of coordinate j?
        const size_t jj = static_cast<size_t>(j + time_offset);
        bool ok = !v[jj].is_zero();
        for (size_t q = 0; q < v.size() && ok; ++q)
            if (q != jj && !v[q].is_zero()) ok = false;
        if (ok) {
            cert.witnesses[jj] = w;
            covered[jj] = true;
        }
    }

    if (time_offset) {
        // time direction: the drift generator itself, reduced by the spatial units
        std::vector<Rat> v = gens.fields[0].eval(point);
        for (size_t q = 1; q < v.size(); ++q)
            if (covered[q]) v[q] = Rat(0);
        bool ok = !v[0].is_zero();
        for (size_t q = 1; q < v.size() && ok; ++q)
            if (!v[q].is_zero()) ok = false;
        if (ok) {
            cert.witnesses[0] = BracketWord{0};
            covered[0] = true;
        }
    }
}

RankCertificate run_check(const ProblemSpec& spec, const Generators& gens,
                          const std::vector<Rat>& point, int time_offset,
                          const HormanderOptions& opts) {
    int max_k = 1;
    for (int i = 0; i < spec.N(); ++i) max_k = std::max(max_k, spec.family.subset_size(i));
    const int depth = opts.depth > 0 ? opts.depth : max_k + 2;
    const int dim = static_cast<int>(point.size());

    ClosureResult clo = bracket_closure(gens, depth, opts.full_tree);

    RankCertificate cert;
    cert.N = dim;
    RatEchelon span(dim);
    for (const auto& f : clo.basis) span.add(f.eval(point));
    cert.rank = span.rank();
    for (int j = 0; j < dim; ++j)
        if (std::find(span.pivots().begin(), span.pivots().end(), j) == span.pivots().end())
            cert.unreached.push_back(j);

    attach_witnesses(spec, gens, point, time_offset, cert);
    return cert;
}

}  // namespace

std::string word_str(const BracketWord& w) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) os << ",";
        if (w[i] < 0)
            os << "*";
        else
            os << "D" << w[i];
    }
    os << "]";
    return os.str();
}

AffineField drift_field(const ProblemSpec& spec) {
    const int N = spec.N();
    AffineField f(N);
    const Rat lam = Rat::from_double(spec.lambda);
    const Rat mu2 = Rat::from_double(spec.mu * spec.mu);  // mu^2 is the rationalized input
    for (int i = 0; i < N; ++i) {
        const Rat a = lam - Rat(spec.family.subset_size(i), 2) * mu2;
        f.a(i, i) = a;
        f.d[i] = lam;
    }
    return f;
}

std::vector<AffineField> diffusion_fields(const ProblemSpec& spec) {
    const int N = spec.N();
    std::vector<AffineField> out;
    out.reserve(spec.n);
    for (int j = 1; j <= spec.n; ++j) {
        AffineField f(N);
        for (int i = 0; i < N; ++i)
            if (spec.family.contains(i, j)) f.a(i, i) = Rat(1);
        out.push_back(std::move(f));
    }
    return out;
}

RankCertificate check_hormander(const ProblemSpec& spec, const std::vector<Rat>& point,
                                const HormanderOptions& opts) {
    if (static_cast<int>(point.size()) != spec.N())
        throw DimensionError("check point must have dimension N");
    Generators gens;
    gens.fields.push_back(drift_field(spec));
    for (auto& f : diffusion_fields(spec)) gens.fields.push_back(std::move(f));
    return run_check(spec, gens, point, 0, opts);
}

RankCertificate check_parabolic(const ProblemSpec& spec, const std::vector<Rat>& point,
                                const HormanderOptions& opts) {
    if (static_cast<int>(point.size()) != spec.N())
        throw DimensionError("check point must have dimension N");
    const int N = spec.N();

    auto lift = [N](const AffineField& f, const Rat& time_component) {
        AffineField out(N + 1);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) out.a(i + 1, j + 1) = f.a(i, j);
            out.d[i + 1] = f.d[i];
        }
        out.d[0] = time_component;
        return out;
    };

    Generators gens;
    gens.fields.push_back(lift(drift_field(spec), Rat(-1)));
    for (auto& f : diffusion_fields(spec)) gens.fields.push_back(lift(f, Rat(0)));

    std::vector<Rat> lifted_point;
    lifted_point.reserve(N + 1);
    lifted_point.push_back(Rat(1));  // time coordinate; never enters any coefficient
    lifted_point.insert(lifted_point.end(), point.begin(), point.end());

    return run_check(spec, gens, lifted_point, 1, opts);
}

std::vector<std::vector<Rat>> default_check_points(int N, int extra, uint64_t seed) {
    std::vector<std::vector<Rat>> pts;
    pts.emplace_back(N, Rat(1));
    uint64_t s = seed;
    auto next = [&s]() {
        s += 0x9e3779b97f4a7c15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    for (int e = 0; e < extra; ++e) {
        std::vector<Rat> p(N);
        for (int i = 0; i < N; ++i) {
            long long num = 1 + static_cast<long long>(next() % 12);
            long long den = 1 + static_cast<long long>(next() % 5);
            p[i] = Rat(num, den);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace qdet
