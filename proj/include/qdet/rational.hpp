#pragma once

#include "qdet/errors.hpp"

#include <cstdint>
#include <numeric>
#include <string>

namespace qdet {

/// Exact rational arithmetic on 128-bit integers.
///
/// Rank decisions in the bracket computations must not depend on
/// floating-point pivoting, so all field coefficients are kept exact.
/// Overflow is detected and reported rather than wrapped: the magnitudes
/// seen in practice (inputs with denominator <= 1e9, bracket depth <= 8)
/// stay far below the 128-bit range once fractions are kept reduced.
class Rat {
  public:
    Rat() : num_(0), den_(1) {}
    Rat(long long n) : num_(n), den_(1) {}
    Rat(long long n, long long d) : num_(n), den_(d) { normalize(); }

    static Rat from_parts(__int128 n, __int128 d) {
        Rat r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    /// Nearest rational with denominator dividing `max_den` (used to take
    /// user-supplied doubles into exact arithmetic).
    static Rat from_double(double x, long long max_den = 1000000000LL) {
        bool neg = x < 0;
        double ax = neg ? -x : x;
        __int128 n = static_cast<__int128>(ax * static_cast<double>(max_den) + 0.5);
        return from_parts(neg ? -n : n, max_den);
    }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    Rat operator-() const { return raw(-num_, den_); }

    friend Rat operator+(const Rat& a, const Rat& b) {
        __int128 g = gcd128(a.den_, b.den_);
        __int128 da = a.den_ / g;
        __int128 db = b.den_ / g;
        return Rat::from_parts(add_checked(mul_checked(a.num_, db), mul_checked(b.num_, da)),
                               mul_checked(a.den_, db));
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        // cross-reduce before multiplying to keep magnitudes small
        __int128 g1 = gcd128(abs128(a.num_), b.den_);
        __int128 g2 = gcd128(abs128(b.num_), a.den_);
        return Rat::raw(mul_checked(a.num_ / g1, b.num_ / g2),
                        mul_checked(a.den_ / g2, b.den_ / g1));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw DomainError("rational division by zero");
        Rat inv = Rat::raw(b.den_, b.num_);
        if (inv.den_ < 0) {
            inv.num_ = -inv.num_;
            inv.den_ = -inv.den_;
        }
        return a * inv;
    }

    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    std::string str() const {
        std::string s = i128_str(num_);
        if (den_ != 1) s += "/" + i128_str(den_);
        return s;
    }

  private:
    __int128 num_;
    __int128 den_;  // > 0 always

    static Rat raw(__int128 n, __int128 d) {
        Rat r;
        r.num_ = n;
        r.den_ = d;
        return r;
    }

    static __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

    static __int128 gcd128(__int128 a, __int128 b) {
        a = abs128(a);
        b = abs128(b);
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static __int128 mul_checked(__int128 a, __int128 b) {
        if (a == 0 || b == 0) return 0;
        __int128 r = a * b;
        if (r / b != a) throw OverflowError("rational overflow in multiply");
        return r;
    }

    static __int128 add_checked(__int128 a, __int128 b) {
        __int128 r = a + b;
        if ((a > 0 && b > 0 && r < 0) || (a < 0 && b < 0 && r > 0))
            throw OverflowError("rational overflow in add");
        return r;
    }

    static std::string i128_str(__int128 v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        std::string s;
        __int128 a = neg ? -v : v;
        while (a > 0) {
            s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(a % 10)));
            a /= 10;
        }
        return neg ? "-" + s : s;
    }

    void normalize() {
        if (den_ == 0) throw DomainError("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        __int128 g = gcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }
};

}  // namespace qdet
