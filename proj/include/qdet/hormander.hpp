#pragma once

#include "qdet/affine_field.hpp"
#include "qdet/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qdet {

/// A bracket word is a sequence of generator indices read left-nested:
/// (w0, w1, ..., wm) stands for [[..[D_{w0}, D_{w1}], ...], D_{wm}].
/// Index 0 is the drift generator, indices 1..n the diffusion generators.
using BracketWord = std::vector<int>;

std::string word_str(const BracketWord& w);

/// Result of a rank computation at a point: the achieved rank, and for each
/// state coordinate (when found) a bracket word whose iterated bracket is
/// proportional to that unit direction, possibly after removing directions
/// already certified (the larger-size groups are certified first, so the
/// reduction is well founded for trimmed mixed-size families).
struct RankCertificate {
    int rank = 0;
    int N = 0;
    bool full_rank() const { return rank == N; }
    std::vector<std::optional<BracketWord>> witnesses;
    std::vector<int> unreached;  // coordinates without a pivot when rank < N
};

struct HormanderOptions {
    int depth = 0;        // 0 = default: max subset size + 2
    bool full_tree = false;  // bracket basis x basis instead of basis x generators
};

/// Drift generator D_0 of the sum-of-squares decomposition: component i is
/// a_i*phi_i + lambda with a_i = lambda - k_i*mu^2/2.
AffineField drift_field(const ProblemSpec& spec);

/// Diffusion generators D_1..D_n in scale-free form: field j has diagonal
/// linear part diag(I_{.j}) and zero constant part. The mu/sqrt(2) factor
/// is dropped since spans and brackets are invariant under nonzero scaling.
std::vector<AffineField> diffusion_fields(const ProblemSpec& spec);

/// Rank of the Lie algebra generated by {D_0..D_n} evaluated at `point`,
/// an interior point of (0,inf)^N given as exact rationals.
RankCertificate check_hormander(const ProblemSpec& spec, const std::vector<Rat>& point,
                                const HormanderOptions& opts = {});

/// Parabolic variant: rank in dimension N+1 with the time direction
/// prepended; expected rank N+1. The evaluation point is spatial (length N).
RankCertificate check_parabolic(const ProblemSpec& spec, const std::vector<Rat>& point,
                                const HormanderOptions& opts = {});

/// Deterministic interior rational points used for spot checks: (1,...,1)
/// followed by `extra` pseudo-random points with small denominators.
std::vector<std::vector<Rat>> default_check_points(int N, int extra, uint64_t seed);

}  // namespace qdet
