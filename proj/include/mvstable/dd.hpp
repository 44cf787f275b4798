#pragma once

// Double-double arithmetic: an unevaluated sum of two doubles giving ~31
// significant decimal digits.  Used by the series evaluators, whose terms can
// exceed the final sum by many orders of magnitude.  Requires that the
// compiler not contract or reassociate floating point expressions
// (-ffp-contract=off; never -ffast-math).

#include <cmath>
#include <cstdint>
#include <limits>

namespace mvstable {

struct dd {
    double hi = 0.0;
    double lo = 0.0;

    constexpr dd() = default;
    constexpr dd(double h) : hi(h), lo(0.0) {}
    constexpr dd(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi; }
};

namespace detail {

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

// Dekker split against 2^27+1; valid for |a| < 2^996.
inline void split(double a, double& hi, double& lo) {
    double t = 134217729.0 * a;
    hi = t - (t - a);
    lo = a - hi;
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    double ah, al, bh, bl;
    split(a, ah, al);
    split(b, bh, bl);
    double e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    return {p, e};
}

} // namespace detail

inline dd operator+(dd a, dd b) {
    dd s = detail::two_sum(a.hi, b.hi);
    dd t = detail::two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = detail::quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }

inline dd operator*(dd a, dd b) {
    dd p = detail::two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
    double q1 = a.hi / b.hi;
    dd r = a - dd(q1) * b;
    double q2 = r.hi / b.hi;
    r = r - dd(q2) * b;
    double q3 = r.hi / b.hi;
    dd q = detail::quick_two_sum(q1, q2);
    return q + dd(q3);
}

inline dd& operator+=(dd& a, dd b) { a = a + b; return a; }
inline dd& operator-=(dd& a, dd b) { a = a - b; return a; }
inline dd& operator*=(dd& a, dd b) { a = a * b; return a; }
inline dd& operator/=(dd& a, dd b) { a = a / b; return a; }

inline bool operator<(dd a, dd b)  { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(dd a, dd b)  { return b < a; }
inline bool operator<=(dd a, dd b) { return !(b < a); }
inline bool operator>=(dd a, dd b) { return !(a < b); }
inline bool operator==(dd a, dd b) { return a.hi == b.hi && a.lo == b.lo; }

inline dd fabs(dd a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline dd ldexp(dd a, int n) { return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)}; }

inline dd sqr(dd a) { return a * a; }

inline dd sqrt(dd a) {
    if (a.hi == 0.0) return dd(0.0);
    double x = 1.0 / std::sqrt(a.hi);
    double ax = a.hi * x;
    return dd(ax) + (a - sqr(dd(ax))) * dd(x * 0.5);
}

namespace ddc_const {
inline constexpr dd pi      {3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr dd two_pi  {6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr dd half_pi {1.570796326794896558e+00, 6.123233995736766036e-17};
inline constexpr dd ln2     {6.931471805599452862e-01, 2.319046813846299558e-17};
} // namespace ddc_const

inline dd exp(dd a) {
    using namespace ddc_const;
    if (a.hi > 709.0) return dd(std::numeric_limits<double>::infinity());
    if (a.hi < -709.0) return dd(0.0);
    double k = std::round(a.hi / ln2.hi);
    dd r = a - dd(k) * ln2;
    r = ldexp(r, -5);
    // Taylor on |r| <= ln2/64
    dd s = dd(1.0) + r;
    dd p = r * r;
    double fact = 2.0;
    for (int i = 2; i <= 16; ++i) {
        s += p / dd(fact);
        p *= r;
        fact *= double(i + 1);
    }
    for (int i = 0; i < 5; ++i) s = sqr(s);
    return ldexp(s, int(k));
}

inline dd log(dd a) {
    dd y(std::log(a.hi));
    // Newton: y <- y + a*exp(-y) - 1, doubles the correct digits
    y = y + a * exp(-y) - dd(1.0);
    y = y + a * exp(-y) - dd(1.0);
    return y;
}

inline dd pow(dd a, dd b) { return exp(b * log(a)); }

inline dd powi(dd a, long n) {
    if (n == 0) return dd(1.0);
    bool inv = n < 0;
    unsigned long m = inv ? -(unsigned long)n : (unsigned long)n;
    dd r(1.0), base = a;
    while (m) {
        if (m & 1UL) r *= base;
        base = sqr(base);
        m >>= 1;
    }
    return inv ? dd(1.0) / r : r;
}

namespace detail {

// Taylor kernels on |r| <= pi/4.
inline dd sin_taylor(dd r) {
    dd r2 = sqr(r), s = r, t = r;
    for (int i = 1; i <= 15; ++i) {
        t *= r2 / dd(double(2 * i) * double(2 * i + 1));
        s += (i & 1) ? -t : t;
    }
    return s;
}

inline dd cos_taylor(dd r) {
    dd r2 = sqr(r), s(1.0), t(1.0);
    for (int i = 1; i <= 15; ++i) {
        t *= r2 / dd(double(2 * i - 1) * double(2 * i));
        s += (i & 1) ? -t : t;
    }
    return s;
}

} // namespace detail

// Accurate for |a| up to ~1e8 (reduction against a two-term 2*pi).
inline void sincos(dd a, dd& s, dd& c) {
    using namespace ddc_const;
    double q = std::round(a.hi / two_pi.hi);
    dd r = a - dd(q) * two_pi;
    double qq = std::round(r.hi / half_pi.hi);
    r = r - dd(qq) * half_pi;
    int quadrant = ((int(qq) % 4) + 4) % 4;
    dd sr = detail::sin_taylor(r), cr = detail::cos_taylor(r);
    switch (quadrant) {
        case 0: s = sr;  c = cr;  break;
        case 1: s = cr;  c = -sr; break;
        case 2: s = -sr; c = -cr; break;
        default: s = -cr; c = sr; break;
    }
}

inline dd sin(dd a) { dd s, c; sincos(a, s, c); return s; }
inline dd cos(dd a) { dd s, c; sincos(a, s, c); return c; }

// log Gamma for x > 0: argument shift to >= 30, then the Stirling series.
// Bernoulli coefficients B_{2n}/(2n(2n-1)) as exact double ratios.
inline dd lgamma(dd x) {
    struct Coef { double num, den; };
    static constexpr Coef bern[] = {
        {1.0, 6.0},            {-1.0, 30.0},          {1.0, 42.0},
        {-1.0, 30.0},          {5.0, 66.0},           {-691.0, 2730.0},
        {7.0, 6.0},            {-3617.0, 510.0},      {43867.0, 798.0},
        {-174611.0, 330.0},    {854513.0, 138.0},     {-236364091.0, 2730.0},
        {8553103.0, 6.0},      {-23749461029.0, 870.0},
        {8615841276005.0, 14322.0}, {-7709321041217.0, 510.0},
        {2577687858367.0, 6.0},
    };
    dd shift(1.0);
    while (x.hi < 30.0) {
        shift *= x;
        x += dd(1.0);
    }
    dd z = x;
    dd lz = log(z);
    static const dd half_ln_two_pi = dd(0.5) * log(ddc_const::two_pi);
    dd res = (z - dd(0.5)) * lz - z + half_ln_two_pi;
    dd z2 = sqr(z), zp = z;
    for (int n = 1; n <= 17; ++n) {
        const Coef& c = bern[n - 1];
        res += dd(c.num) / (dd(c.den) * dd(double(2 * n) * double(2 * n - 1)) * zp);
        zp *= z2;
    }
    if (shift.hi != 1.0 || shift.lo != 0.0) res -= log(shift);
    return res;
}

// 1/Gamma(x); exact zero at nonpositive integers.
inline dd recip_gamma(dd x) {
    if (x.hi > 0.0) return exp(-lgamma(x));
    if (std::fabs(x.hi - std::round(x.hi)) < 1e-13 && std::fabs(x.lo) < 1e-13)
        return dd(0.0);
    return sin(ddc_const::pi * x) * exp(lgamma(dd(1.0) - x)) / ddc_const::pi;
}

// Gamma(a)/Gamma(b); b may be <= 0 (reflection), a must be > 0.
inline dd gamma_ratio(dd a, dd b) {
    if (b.hi > 0.0) return exp(lgamma(a) - lgamma(b));
    // 1/Gamma(b) = sin(pi b) Gamma(1-b) / pi
    dd s = sin(ddc_const::pi * b);
    return exp(lgamma(a) + lgamma(dd(1.0) - b)) * s / ddc_const::pi;
}

inline dd atan2(dd y, dd x) {
    dd th(std::atan2(y.hi, x.hi));
    // Newton on f(th) = sin(th) x - cos(th) y
    for (int it = 0; it < 2; ++it) {
        dd s, c;
        sincos(th, s, c);
        th -= (s * x - c * y) / (c * x + s * y);
    }
    return th;
}

// Complex number with double-double components.
struct ddc {
    dd re, im;
    ddc() = default;
    ddc(dd r) : re(r), im(0.0) {}
    ddc(dd r, dd i) : re(r), im(i) {}
    ddc(double r, double i = 0.0) : re(r), im(i) {}
};

inline ddc operator+(ddc a, ddc b) { return {a.re + b.re, a.im + b.im}; }
inline ddc operator-(ddc a, ddc b) { return {a.re - b.re, a.im - b.im}; }
inline ddc operator*(ddc a, ddc b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline ddc operator*(dd a, ddc b) { return {a * b.re, a * b.im}; }
inline ddc operator*(ddc a, dd b) { return {a.re * b, a.im * b}; }
inline ddc& operator+=(ddc& a, ddc b) { a = a + b; return a; }
inline ddc& operator*=(ddc& a, ddc b) { a = a * b; return a; }
inline dd abs2(ddc a) { return sqr(a.re) + sqr(a.im); }

inline ddc log(ddc z) {
    return {dd(0.5) * log(abs2(z)), atan2(z.im, z.re)};
}

inline ddc exp(ddc z) {
    dd s, c;
    sincos(z.im, s, c);
    dd m = exp(z.re);
    return {m * c, m * s};
}

// z^p for real p; principal branch.
inline ddc pow(ddc z, dd p) {
    ddc l = log(z);
    return exp(ddc(p * l.re, p * l.im));
}

// Re((-i)^j z): the j-th harmonic coefficients below are real after this twist.
inline dd real_of_minus_i_pow(int j, ddc z) {
    switch (((j % 4) + 4) % 4) {
        case 0: return z.re;
        case 1: return z.im;
        case 2: return -z.re;
        default: return -z.im;
    }
}

} // namespace mvstable
