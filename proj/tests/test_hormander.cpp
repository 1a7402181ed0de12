#include "qdet/hormander.hpp"

#include <doctest.h>

#include <cmath>

using namespace qdet;

namespace {

ProblemSpec make_exact(int n, int k, double mu, double lambda) {
    const auto count = binomial(n, k);
    std::vector<double> probs(count, 1.0 / static_cast<double>(count));
    return ProblemSpec(n, mu, lambda, 1.0, 0.0, build_family(n, k, probs));
}

AffineField random_field(int dim, uint64_t& state) {
    auto next = [&state]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<long long>((state >> 33) % 7) - 3;
    };
    AffineField f(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) f.a(i, j) = Rat(next(), 1 + (next() & 1));
        f.d[i] = Rat(next(), 2);
    }
    return f;
}

}  // namespace

TEST_CASE("drift field coefficients a_i = lambda - k_i mu^2 / 2") {
    // n=2, k=1, lambda=1, mu^2=2: a = 0, constant field (1,1)
    std::vector<double> half(2, 0.5);
    const ProblemSpec degenerate(2, std::sqrt(2.0), 1.0, 1.0, 0.0, build_family(2, 1, half));
    const AffineField d0 = drift_field(degenerate);
    CHECK(d0.a(0, 0).is_zero());
    CHECK(d0.a(1, 1).is_zero());
    CHECK(d0.d[0] == Rat(1));
    CHECK(d0.d[1] == Rat(1));

    // n=3, k=2, lambda=mu=1: a_i = 1 - 2/2 = 0 for all i
    const ProblemSpec fig1 = make_exact(3, 2, 1.0, 1.0);
    const AffineField d0f = drift_field(fig1);
    for (int i = 0; i < 3; ++i) CHECK(d0f.a(i, i).is_zero());

    // mixed sizes {(1), (1,2)}: a = (1/2, 0)
    const ProblemSpec mixed(3, 1.0, 1.0, 1.0, 0.0,
                            build_general_family(3, {{{1}, 0.5}, {{1, 2}, 0.5}}));
    const AffineField d0m = drift_field(mixed);
    CHECK(d0m.a(0, 0) == Rat(1, 2));
    CHECK(d0m.a(1, 1).is_zero());
}

TEST_CASE("diffusion fields read the incidence columns") {
    const ProblemSpec fig1 = make_exact(3, 2, 1.0, 1.0);
    const auto fields = diffusion_fields(fig1);
    REQUIRE(fields.size() == 3);
    // coordinate 1 belongs to subsets (1,2) and (1,3) but not (2,3)
    CHECK(fields[0].a(0, 0) == Rat(1));
    CHECK(fields[0].a(1, 1) == Rat(1));
    CHECK(fields[0].a(2, 2).is_zero());

    const ProblemSpec two = make_exact(2, 1, 1.0, 1.0);
    const auto f2 = diffusion_fields(two);
    CHECK(f2[1].a(0, 0).is_zero());
    CHECK(f2[1].a(1, 1) == Rat(1));

    // diagonal fields commute
    for (size_t i = 0; i < fields.size(); ++i)
        for (size_t j = 0; j < fields.size(); ++j)
            CHECK(lie_bracket(fields[i], fields[j]).is_zero());
}

TEST_CASE("bracket identities hold exactly on random rational fields") {
    uint64_t state = 12345;
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = 2 + (trial % 4);
        const AffineField x = random_field(dim, state);
        const AffineField y = random_field(dim, state);
        const AffineField z = random_field(dim, state);

        CHECK(lie_bracket(x, x).is_zero());

        // antisymmetry
        const AffineField xy = lie_bracket(x, y);
        const AffineField yx = lie_bracket(y, x);
        for (size_t t = 0; t < xy.A.size(); ++t) CHECK(xy.A[t] == -yx.A[t]);
        for (size_t t = 0; t < xy.d.size(); ++t) CHECK(xy.d[t] == -yx.d[t]);

        // Jacobi identity
        AffineField sum(dim);
        const AffineField a = lie_bracket(x, lie_bracket(y, z));
        const AffineField b = lie_bracket(y, lie_bracket(z, x));
        const AffineField c = lie_bracket(z, lie_bracket(x, y));
        for (size_t t = 0; t < sum.A.size(); ++t) sum.A[t] = a.A[t] + b.A[t] + c.A[t];
        for (size_t t = 0; t < sum.d.size(); ++t) sum.d[t] = a.d[t] + b.d[t] + c.d[t];
        CHECK(sum.is_zero());
    }
    CHECK_THROWS_AS(lie_bracket(AffineField(2), AffineField(3)), DimensionError);
}

TEST_CASE("[D0, Dj] is proportional to the incidence direction") {
    // n=2, k=1, a != 0: [D_0, D_1] ~ e_1
    std::vector<double> half(2, 0.5);
    const ProblemSpec spec(2, 1.0, 1.0, 1.0, 0.0, build_family(2, 1, half));
    const AffineField d0 = drift_field(spec);
    const auto diff = diffusion_fields(spec);
    const AffineField br = lie_bracket(d0, diff[0]);
    for (size_t t = 0; t < br.A.size(); ++t) CHECK(br.A[t].is_zero());
    CHECK(!br.d[0].is_zero());
    CHECK(br.d[1].is_zero());

    // n=3, k=2: [[D_0, D_1], D_2] ~ unit direction of subset (1,2)
    const ProblemSpec fig1 = make_exact(3, 2, 1.0, 1.0);
    const AffineField nested =
        lie_bracket(lie_bracket(drift_field(fig1), diffusion_fields(fig1)[0]),
                    diffusion_fields(fig1)[1]);
    CHECK(!nested.d[0].is_zero());  // subset (1,2) is index 0
    CHECK(nested.d[1].is_zero());
    CHECK(nested.d[2].is_zero());
    for (size_t t = 0; t < nested.A.size(); ++t) CHECK(nested.A[t].is_zero());
}

TEST_CASE("full rank with witnesses for exact families") {
    const ProblemSpec fig1 = make_exact(3, 2, 1.0, 1.0);
    const auto pts = default_check_points(3, 0, 1);
    const RankCertificate cert = check_hormander(fig1, pts[0]);
    CHECK(cert.rank == 3);
    CHECK(cert.full_rank());
    REQUIRE(cert.witnesses.size() == 3);
    for (int j = 0; j < 3; ++j) {
        REQUIRE(cert.witnesses[j].has_value());
        // witness shape: [[D0, D_{n1}], D_{n2}] for subset j
        const BracketWord& w = *cert.witnesses[j];
        REQUIRE(w.size() == 3);
        CHECK(w[0] == 0);
        CHECK(w[1] == fig1.family.subsets[j][0]);
        CHECK(w[2] == fig1.family.subsets[j][1]);
    }

    const ProblemSpec big = make_exact(4, 2, 1.0, 1.0);
    CHECK(check_hormander(big, default_check_points(6, 0, 1)[0]).rank == 6);
}

TEST_CASE("general trimmed family reaches full rank by backward induction") {
    const ProblemSpec mixed(3, 1.0, 1.0, 1.0, 0.0,
                            build_general_family(3, {{{1}, 0.4}, {{1, 2}, 0.3}, {{1, 2, 3}, 0.3}}));
    const RankCertificate cert = check_hormander(mixed, default_check_points(3, 0, 1)[0]);
    CHECK(cert.rank == 3);
    for (int j = 0; j < 3; ++j) CHECK(cert.witnesses[j].has_value());
}

TEST_CASE("parabolic variant gains exactly the time direction") {
    const ProblemSpec fig1 = make_exact(3, 2, 1.0, 1.0);
    const RankCertificate cert = check_parabolic(fig1, default_check_points(3, 0, 1)[0]);
    CHECK(cert.rank == 4);
    CHECK(cert.N == 4);

    const ProblemSpec two = make_exact(2, 1, 1.0, 1.0);
    CHECK(check_parabolic(two, default_check_points(2, 0, 1)[0]).rank == 3);
}

TEST_CASE("rank is invariant under rescaling of mu") {
    for (double mu : {0.5, 1.0, 3.0}) {
        const ProblemSpec spec = make_exact(4, 2, mu, 1.0);
        for (const auto& pt : default_check_points(spec.N(), 2, 7)) {
            CHECK(check_hormander(spec, pt).rank == spec.N());
        }
    }
}

TEST_CASE("degenerate a = 0 parameterisation still has full rank") {
    for (int n = 2; n <= 5; ++n) {
        for (int k = 1; k < n; ++k) {
            // lambda = k mu^2 / 2 with mu = 1
            const auto count = binomial(n, k);
            std::vector<double> probs(count, 1.0 / static_cast<double>(count));
            const ProblemSpec spec(n, 1.0, 0.5 * k, 1.0, 0.0, build_family(n, k, probs));
            const RankCertificate cert =
                check_hormander(spec, default_check_points(spec.N(), 0, 1)[0]);
            CHECK(cert.rank == spec.N());
        }
    }
}
