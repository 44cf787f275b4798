#pragma once

// Real special-function kernel: Gamma family, Pochhammer, normalized
// Gegenbauer (ultraspherical) polynomials, Bessel J of real order.
// Everything here is pure, reentrant and double precision.

#include <mvstable/dd.hpp>

namespace mvstable {

// ln Gamma(x), x > 0.  Throws std::domain_error otherwise.
double log_gamma(double x);

// 1/Gamma(x) as an entire function of x: exactly 0 at x = 0, -1, -2, ...
// (integers detected with tolerance 1e-12), finite for all finite x that do
// not overflow the double range.
double reciprocal_gamma(double x);

// Gamma(x) for x > 0.
double gamma_pos(double x);

// Gamma(a)/Gamma(b), a > 0, any real b; exact zero when b hits a pole.
double gamma_ratio(double a, double b);

// psi(x) = Gamma'(x)/Gamma(x), x > 0.
double digamma(double x);

// (z)_n = z (z+1) ... (z+n-1), with (z)_0 = 1.
double pochhammer(double z, int n);

struct GegenbauerParam {
    double b;   // ultraspherical index, (d-2)/2 >= 0
    int j;      // degree >= 0
};

// Normalized Gegenbauer polynomial: C^b_j(t)/C^b_j(1) for b > 0, the
// Chebyshev polynomial T_j(t) for b = 0.  |t| <= 1 required; |result| <= 1.
double gegenbauer_tilde(GegenbauerParam p, double t);

// One degree-recurrence step for the normalized polynomial: given values at
// degrees j-1 and j-2 returns the value at degree j (j >= 2).  Used by the
// evaluators that sweep all degrees at fixed t.
double gegenbauer_tilde_step(double b, int j, double t, double prev, double prev2);
dd gegenbauer_tilde_step(double b, int j, dd t, dd prev, dd prev2);

// Bessel function of the first kind, order a >= -1/2, argument x >= 0.
double bessel_j(double a, double x);

// Power-series evaluation in double-double arithmetic; usable for x up to
// ~55 before cancellation exhausts the extra digits.  Exposed as the
// reference the regime switchovers are validated against.
dd bessel_j_series_dd(double a, double x);

} // namespace mvstable
