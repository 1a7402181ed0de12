#pragma once

#include "qdet/errors.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qdet {

/// Ordered family of tagged coordinate subsets with their probabilities.
///
/// Subsets are 1-based strictly increasing tuples within {1..n}, ordered
/// first by size group and lexicographically within a size. Zero-probability
/// entries are trimmed by the builders, so every stored prob is > 0 and the
/// probs sum to one. The incidence matrix holds one row per subset with a 1
/// at each member coordinate; row i dotted with row j is the overlap count.
struct IndexFamily {
    int n = 0;
    std::vector<std::vector<int>> subsets;   // 1-based member lists
    std::vector<double> probs;
    std::vector<std::vector<std::uint8_t>> incidence;  // N x n

    int size() const { return static_cast<int>(subsets.size()); }
    int subset_size(int i) const;
    int overlap(int i, int j) const;
    bool contains(int i, int coord) const;  // coord is 1-based

    std::string subset_str(int i) const;
};

/// Exact-k family over C(n,k); rejects k = n (classic one-dimensional case)
/// and trims zero-probability subsets. `probs` must enumerate all C(n,k)
/// lexicographically ordered subsets.
IndexFamily build_family(int n, int k, std::span<const double> probs);

/// General mixed-size family from explicit (subset, prob) entries. Entries
/// with zero probability are dropped; the rest are ordered by (size, lex).
/// Unlike build_family, full-size subsets are allowed here.
IndexFamily build_general_family(int n,
                                 const std::vector<std::pair<std::vector<int>, double>>& entries);

/// Problem instance: all scalar parameters plus the subset family.
/// Immutable after construction; shared freely across workers.
struct ProblemSpec {
    int n = 0;
    double mu = 0.0;       // drift magnitude, per unit time
    double lambda = 0.0;   // change rate, > 0
    double c = 0.0;        // delay cost, > 0
    double pi0 = 0.0;      // prior change probability in [0,1)
    IndexFamily family;

    ProblemSpec() = default;
    ProblemSpec(int n_, double mu_, double lambda_, double c_, double pi0_, IndexFamily fam);

    int N() const { return family.size(); }

    /// kappa_i = 2*lambda / (k_i mu^2), the dimensionless Shiryaev parameter
    /// of coordinate i under the k-scaled effective drift.
    double kappa(int i) const;

    /// Effective squared drift k_i mu^2 of coordinate i.
    double mu2_eff(int i) const;

    std::string canonical_string() const;  // deterministic serialization for hashing
};

uint64_t binomial(int n, int k);

}  // namespace qdet
