#include <mvstable/special.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mvstable {

namespace {

// sin(pi x) with exact zeros at integer x.
double sin_pi(double x) {
    double m = std::round(x);
    double f = x - m;
    double s = std::sin(M_PI * f);
    return (std::fmod(std::fabs(m), 2.0) == 1.0) ? -s : s;
}

} // namespace

double log_gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("log_gamma: requires x > 0");
    return double(lgamma(dd(x)));
}

double gamma_pos(double x) { return std::exp(log_gamma(x)); }

double reciprocal_gamma(double x) {
    if (x <= 0.0 && std::fabs(x - std::round(x)) <= 1e-12)
        return 0.0;
    if (x > 0.0) {
        double lg = log_gamma(x);
        return lg > 709.0 ? 0.0 : std::exp(-lg);
    }
    // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    double s = sin_pi(x) / M_PI;
    double lg = log_gamma(1.0 - x);
    if (lg > 700.0) {
        double v = std::copysign(std::numeric_limits<double>::max(), s);
        return lg + std::log(std::fabs(s)) > 709.0 ? v : s * std::exp(lg);
    }
    return s * std::exp(lg);
}

double gamma_ratio(double a, double b) {
    if (!(a > 0.0))
        throw std::domain_error("gamma_ratio: requires a > 0");
    if (b > 0.0)
        return std::exp(log_gamma(a) - log_gamma(b));
    if (std::fabs(b - std::round(b)) <= 1e-12)
        return 0.0;
    double s = sin_pi(b) / M_PI;
    return s * std::exp(log_gamma(a) + log_gamma(1.0 - b));
}

double digamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("digamma: requires x > 0");
    double acc = 0.0;
    while (x < 12.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // asymptotic series; B_{2n}/(2n) coefficients
    static const double c[] = {
        1.0 / 12.0,   -1.0 / 120.0,    1.0 / 252.0, -1.0 / 240.0,
        1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0,  -3617.0 / 8160.0,
    };
    double inv2 = 1.0 / (x * x);
    double res = std::log(x) - 0.5 / x;
    double p = inv2;
    for (double cn : c) {
        res -= cn * p;
        p *= inv2;
    }
    return res + acc;
}

double pochhammer(double z, int n) {
    if (n < 0)
        throw std::domain_error("pochhammer: requires n >= 0");
    double r = 1.0;
    for (int m = 0; m < n; ++m) r *= z + m;
    return r;
}

double gegenbauer_tilde_step(double b, int j, double t, double prev, double prev2) {
    return (2.0 * t * (j + b - 1.0) * prev - (j - 1.0) * prev2) / (j + 2.0 * b - 1.0);
}

dd gegenbauer_tilde_step(double b, int j, dd t, dd prev, dd prev2) {
    return (dd(2.0 * (j + b - 1.0)) * t * prev - dd(j - 1.0) * prev2) / dd(j + 2.0 * b - 1.0);
}

double gegenbauer_tilde(GegenbauerParam p, double t) {
    if (std::fabs(t) > 1.0 + 1e-12)
        throw std::domain_error("gegenbauer_tilde: requires |t| <= 1");
    t = std::clamp(t, -1.0, 1.0);
    if (p.b < 0.0 || p.j < 0)
        throw std::domain_error("gegenbauer_tilde: requires b >= 0, j >= 0");
    if (p.j == 0) return 1.0;
    if (p.j == 1) return t;
    double prev2 = 1.0, prev = t;
    for (int j = 2; j <= p.j; ++j) {
        double cur = gegenbauer_tilde_step(p.b, j, t, prev, prev2);
        prev2 = prev;
        prev = cur;
    }
    return prev;
}

namespace {

double bessel_series(double a, double x) {
    double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 400; ++k) {
        term *= -q / (k * (a + k));
        sum += term;
        if (std::fabs(term) < 1e-19 * (std::fabs(sum) + 1e-300)) break;
    }
    double lpre = a * std::log(0.5 * x) - log_gamma(a + 1.0);
    if (lpre < -745.0) return 0.0;
    return std::exp(lpre) * sum;
}

// Backward (Miller) recurrence normalized with
// (x/2)^f = sum_k (f+2k) Gamma(f+k)/k! J_{f+2k}(x), 0 <= f < 1.
double bessel_miller(double a, double x) {
    int n_down;
    double f;
    if (a >= 0.0) {
        n_down = int(std::floor(a));
        f = a - n_down;
    } else {
        n_down = -1;
        f = a + 1.0;
    }
    double top = std::max(x, a);
    int start = int(top) + int(10.0 * std::cbrt(top + 1.0)) + 36;
    // start order congruent to f mod 1, above both x and a
    double nu_hi = f + start;
    double jp = 0.0, jc = 1e-280;
    double result = 0.0;
    bool captured = false;
    double norm = 0.0;
    // weights for the normalization sum, built downward:
    // w_k = (f+2k) Gamma(f+k)/k!; maintained via w_{k-1} = w_k * k (f+2k-2) / ((f+k-1)(f+2k))
    // simpler: accumulate during the sweep using upward-computable ratio at each even offset.
    std::vector<double> vals;
    vals.reserve(start + 2);
    for (int m = start; m >= std::min(n_down, 0) - 1; --m) {
        // jc approximates J_{f+m}; step down to J_{f+m-1}
        double nu = f + m;
        double jm = (2.0 * nu / x) * jc - jp;
        vals.push_back(jc);
        if (m == n_down) {
            result = jc;
            captured = true;
        }
        jp = jc;
        jc = jm;
        if (std::fabs(jc) > 1e250) {
            for (auto& v : vals) v *= 1e-250;
            jp *= 1e-250;
            jc *= 1e-250;
            if (captured) result *= 1e-250;
        }
    }
    (void)nu_hi;

    double w = (f > 1e-12) ? f * std::exp(log_gamma(f)) : 1.0; // k = 0 weight
    for (int k = 0; 2 * k <= start; ++k) {
        norm += w * vals[size_t(start - 2 * k)]; // vals[i] holds J_{f+start-i}
        // w_{k+1}/w_k = (f+2k+2)(f+k)/((k+1)(f+2k))
        double num = (f + 2.0 * k + 2.0) * (f + k);
        double den = (k + 1.0) * (f + 2.0 * k);
        w *= (f > 1e-12 || k > 0) ? num / den : 2.0; // f=0, k=0: w_1 = 2
    }
    double scale = std::exp(f * std::log(0.5 * x)) / norm;
    return result * scale;
}

} // namespace

double bessel_j(double a, double x) {
    if (a < -0.5 || x < 0.0)
        throw std::domain_error("bessel_j: requires a >= -1/2 and x >= 0");
    if (x == 0.0) {
        if (a == 0.0) return 1.0;
        return a > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    // series while its terms do not grow (x^2/4 <= a+1) or stay small enough
    // for full accuracy; backward recurrence otherwise
    if (x <= 12.0 || x * x <= 4.0 * (a + 1.0))
        return bessel_series(a, x);
    return bessel_miller(a, x);
}

dd bessel_j_series_dd(double a, double x) {
    if (x == 0.0) return dd(a == 0.0 ? 1.0 : 0.0);
    dd q = dd(0.25) * dd(x) * dd(x);
    dd term(1.0), sum(1.0);
    for (int k = 1; k <= 2000; ++k) {
        term *= -(q / (dd(double(k)) * dd(a + double(k))));
        sum += term;
        if (std::fabs(term.hi) < 1e-36 * (std::fabs(sum.hi) + 1e-300) && k > x) break;
    }
    dd lpre = dd(a) * log(dd(0.5) * dd(x)) - lgamma(dd(a + 1.0));
    return exp(lpre) * sum;
}

} // namespace mvstable
