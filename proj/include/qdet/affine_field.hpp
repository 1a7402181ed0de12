#pragma once

#include "qdet/errors.hpp"
#include "qdet/rational.hpp"

#include <vector>

namespace qdet {

/// Vector field of the form x -> A*x + d with exact rational coefficients.
///
/// The class is closed under the Lie bracket: for affine X and Y,
/// [X,Y] has linear part A_Y*A_X - A_X*A_Y and constant part
/// A_Y*d_X - A_X*d_Y, so bracket chains never leave the class.
struct AffineField {
    int dim = 0;
    std::vector<Rat> A;  // dim x dim, row-major
    std::vector<Rat> d;  // dim

    AffineField() = default;
    explicit AffineField(int n) : dim(n), A(static_cast<size_t>(n) * n), d(n) {}

    Rat& a(int i, int j) { return A[static_cast<size_t>(i) * dim + j]; }
    const Rat& a(int i, int j) const { return A[static_cast<size_t>(i) * dim + j]; }

    bool is_zero() const {
        for (const auto& v : A)
            if (!v.is_zero()) return false;
        for (const auto& v : d)
            if (!v.is_zero()) return false;
        return true;
    }

    std::vector<Rat> eval(const std::vector<Rat>& x) const {
        if (static_cast<int>(x.size()) != dim) throw DimensionError("evaluation point dimension");
        std::vector<Rat> out(d);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (!a(i, j).is_zero()) out[i] += a(i, j) * x[j];
        return out;
    }
};

inline AffineField lie_bracket(const AffineField& X, const AffineField& Y) {
    if (X.dim != Y.dim) throw DimensionError("lie_bracket dimension mismatch");
    const int n = X.dim;
    AffineField out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Rat s;
            for (int k = 0; k < n; ++k) {
                if (!Y.a(i, k).is_zero() && !X.a(k, j).is_zero()) s += Y.a(i, k) * X.a(k, j);
                if (!X.a(i, k).is_zero() && !Y.a(k, j).is_zero()) s -= X.a(i, k) * Y.a(k, j);
            }
            out.a(i, j) = s;
        }
        Rat t;
        for (int k = 0; k < n; ++k) {
            if (!Y.a(i, k).is_zero() && !X.d[k].is_zero()) t += Y.a(i, k) * X.d[k];
            if (!X.a(i, k).is_zero() && !Y.d[k].is_zero()) t -= X.a(i, k) * Y.d[k];
        }
        out.d[i] = t;
    }
    return out;
}

}  // namespace qdet
