#include "qdet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qdet {

namespace {

constexpr double kProbSumTol = 1e-12;

void check_subset(int n, const std::vector<int>& s) {
    if (s.empty()) throw InvalidK("empty subset");
    for (size_t j = 0; j < s.size(); ++j) {
        if (s[j] < 1 || s[j] > n) throw IndexError("subset member out of range");
        if (j > 0 && s[j] <= s[j - 1]) throw InvalidK("subset members must be strictly increasing");
    }
}

// (size, lexicographic) order shared by every module
bool subset_less(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

IndexFamily finalize(int n, std::vector<std::pair<std::vector<int>, double>> kept) {
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return subset_less(a.first, b.first); });
    IndexFamily fam;
    fam.n = n;
    double sum = 0.0;
    for (auto& [s, p] : kept) {
        fam.subsets.push_back(s);
        fam.probs.push_back(p);
        sum += p;
    }
    // renormalize the kept entries so they sum to one exactly
    for (double& p : fam.probs) p /= sum;
    fam.incidence.assign(fam.size(), std::vector<std::uint8_t>(n, 0));
    for (int i = 0; i < fam.size(); ++i)
        for (int coord : fam.subsets[i]) fam.incidence[i][coord - 1] = 1;
    return fam;
}

}  // namespace

int IndexFamily::subset_size(int i) const {
    if (i < 0 || i >= size()) throw IndexError("family index out of range");
    return static_cast<int>(subsets[i].size());
}

int IndexFamily::overlap(int i, int j) const {
    if (i < 0 || i >= size() || j < 0 || j >= size())
        throw IndexError("family index out of range");
    int cnt = 0;
    for (int p = 0; p < n; ++p) cnt += incidence[i][p] & incidence[j][p];
    return cnt;
}

bool IndexFamily::contains(int i, int coord) const {
    if (i < 0 || i >= size()) throw IndexError("family index out of range");
    if (coord < 1 || coord > n) throw IndexError("coordinate out of range");
    return incidence[i][coord - 1] != 0;
}

std::string IndexFamily::subset_str(int i) const {
    std::ostringstream os;
    os << "(";
    for (size_t j = 0; j < subsets[i].size(); ++j) {
        if (j) os << ",";
        os << subsets[i][j];
    }
    os << ")";
    return os.str();
}

uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
    return r;
}

IndexFamily build_family(int n, int k, std::span<const double> probs) {
    if (n < 2) throw InvalidK("need n >= 2 for the exact-k family");
    if (k < 1) throw InvalidK("need k >= 1");
    if (k >= n) throw InvalidK("k = n reduces to the one-dimensional case; use k < n");

    const uint64_t count = binomial(n, k);
    if (probs.size() != count) throw InvalidProbabilities("probs length must equal C(n,k)");

    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw InvalidProbabilities("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw InvalidProbabilities("probabilities must sum to 1 within 1e-12");

    // lexicographic enumeration of all size-k subsets of {1..n}
    std::vector<std::pair<std::vector<int>, double>> kept;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i + 1;
    size_t idx = 0;
    while (true) {
        if (probs[idx] > 0.0) kept.emplace_back(cur, probs[idx]);
        ++idx;
        int pos = k - 1;
        while (pos >= 0 && cur[pos] == n - (k - 1 - pos)) --pos;
        if (pos < 0) break;
        ++cur[pos];
        for (int j = pos + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    if (kept.empty()) throw EmptyFamily("all probabilities are zero");
    return finalize(n, std::move(kept));
}

IndexFamily build_general_family(
    int n, const std::vector<std::pair<std::vector<int>, double>>& entries) {
    if (n < 1) throw InvalidK("need n >= 1");
    double sum = 0.0;
    std::vector<std::pair<std::vector<int>, double>> kept;
    std::vector<std::vector<int>> seen;
    for (const auto& [s, p] : entries) {
        check_subset(n, s);
        if (std::find(seen.begin(), seen.end(), s) != seen.end())
            throw DuplicateSubset("duplicate subset in family");
        seen.push_back(s);
        if (p < 0.0) throw InvalidProbabilities("negative probability");
        sum += p;
        if (p > 0.0) kept.emplace_back(s, p);
    }
    if (kept.empty()) throw EmptyFamily("all probabilities are zero");
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw InvalidProbabilities("probabilities must sum to 1 within 1e-12");
    return finalize(n, std::move(kept));
}

ProblemSpec::ProblemSpec(int n_, double mu_, double lambda_, double c_, double pi0_,
                         IndexFamily fam)
    : n(n_), mu(mu_), lambda(lambda_), c(c_), pi0(pi0_), family(std::move(fam)) {
    if (n < 1) throw InvalidK("need n >= 1");
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (!(c > 0.0)) throw DomainError("c must be > 0");
    if (mu == 0.0) throw DomainError("mu must be nonzero");
    if (!(pi0 >= 0.0 && pi0 < 1.0)) throw DomainError("pi0 must lie in [0,1)");
    if (family.n != n) throw DimensionError("family built for a different n");
    if (family.size() < 1) throw EmptyFamily("empty family");
}

double ProblemSpec::kappa(int i) const {
    return 2.0 * lambda / mu2_eff(i);
}

double ProblemSpec::mu2_eff(int i) const {
    return static_cast<double>(family.subset_size(i)) * mu * mu;
}

std::string ProblemSpec::canonical_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << n << ";mu=" << mu << ";lambda=" << lambda << ";c=" << c << ";pi0=" << pi0
       << ";family=";
    for (int i = 0; i < family.size(); ++i)
        os << family.subset_str(i) << ":" << family.probs[i] << ";";
    return os.str();
}

}  // namespace qdet
