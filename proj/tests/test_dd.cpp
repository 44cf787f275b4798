#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mvstable/dd.hpp>

#include <cstdint>
#include <cstring>
#include <string>

using namespace mvstable;

namespace {

// Parse a decimal string into a dd; good to ~1 ulp of dd.
dd dd_from_string(const std::string& s) {
    dd v(0.0);
    int exp10 = 0;
    bool neg = false, seen_dot = false;
    size_t i = 0;
    if (s[i] == '-') { neg = true; ++i; }
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') { seen_dot = true; continue; }
        if (c == 'e' || c == 'E') {
            exp10 += std::stoi(s.substr(i + 1));
            break;
        }
        v = v * dd(10.0) + dd(double(c - '0'));
        if (seen_dot) --exp10;
    }
    dd p(1.0);
    for (int k = 0; k < (exp10 < 0 ? -exp10 : exp10); ++k) p *= dd(10.0);
    v = exp10 < 0 ? v / p : v * p;
    return neg ? -v : v;
}

double rel_err(dd got, dd want) {
    dd d = fabs(got - want);
    dd w = fabs(want);
    if (w.hi == 0.0) return std::fabs(d.hi);
    return (d / w).hi;
}

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double urand(uint64_t i) { return double(mix64(i) >> 11) * 0x1.0p-53; }

} // namespace

TEST_CASE("constants") {
    CHECK(rel_err(ddc_const::pi, dd_from_string("3.14159265358979323846264338327950288")) < 1e-31);
    CHECK(rel_err(ddc_const::two_pi, dd_from_string("6.28318530717958647692528676655900577")) < 1e-31);
    CHECK(rel_err(ddc_const::ln2, dd_from_string("0.693147180559945309417232121458176568")) < 1e-31);
}

TEST_CASE("elementary ops round-trip") {
    for (uint64_t i = 1; i <= 2000; ++i) {
        dd a = dd(urand(3 * i) * 2e3 + 1e-6) + dd(urand(3 * i + 1) * 1e-14);
        dd b = dd(urand(3 * i + 2) * 5.0 + 0.25);
        CHECK(rel_err((a * b) / b, a) < 1e-30);
        CHECK(rel_err((a + b) - b, a) < 1e-28);
        CHECK(rel_err(sqr(sqrt(a)), a) < 1e-30);
    }
}

TEST_CASE("exp and log") {
    CHECK(rel_err(exp(dd(1.0)), dd_from_string("2.71828182845904523536028747135266250")) < 1e-30);
    CHECK(rel_err(log(dd(2.0)), ddc_const::ln2) < 1e-30);
    for (uint64_t i = 1; i <= 300; ++i) {
        dd x = dd(urand(i) * 500.0 - 250.0);
        CHECK(rel_err(log(exp(x)), x) < 1e-29 * (1.0 + std::fabs(x.hi)));
        dd y = dd(urand(i + 7777) * 1e6 + 1e-8);
        CHECK(rel_err(exp(log(y)), y) < 1e-29);
    }
}

TEST_CASE("sin cos") {
    CHECK(rel_err(sin(dd(1.0)), dd_from_string("0.841470984807896506652502321630299")) < 1e-30);
    CHECK(rel_err(cos(dd(1.0)), dd_from_string("0.540302305868139717400936607442977")) < 1e-30);
    CHECK(std::fabs(sin(ddc_const::pi).hi) < 1e-31);
    for (uint64_t i = 1; i <= 300; ++i) {
        dd x = dd(urand(i) * 40.0 - 20.0);
        dd s, c;
        sincos(x, s, c);
        CHECK(rel_err(sqr(s) + sqr(c), dd(1.0)) < 1e-29);
    }
}

TEST_CASE("lgamma") {
    // ln Gamma(1/2) = ln sqrt(pi)
    CHECK(rel_err(lgamma(dd(0.5)),
                  dd_from_string("0.572364942924700087071713675676529356")) < 1e-29);
    CHECK(rel_err(lgamma(dd(0.25)),
                  dd_from_string("1.28802252469807745737061044021979426")) < 1e-29);
    // Gamma(10) = 362880
    CHECK(rel_err(exp(lgamma(dd(10.0))), dd(362880.0)) < 1e-29);
    CHECK(std::fabs(lgamma(dd(1.0)).hi) < 1e-29);
    CHECK(std::fabs(lgamma(dd(2.0)).hi) < 1e-29);
    // recurrence lgamma(x+1) = lgamma(x) + log(x)
    for (uint64_t i = 1; i <= 200; ++i) {
        dd x = dd(urand(i) * 40.0 + 0.05);
        CHECK(rel_err(lgamma(x + dd(1.0)), lgamma(x) + log(x)) < 1e-28);
    }
    // duplication: Gamma(z/2) Gamma((z+1)/2) = 2^(1-z) sqrt(pi) Gamma(z)
    for (uint64_t i = 1; i <= 100; ++i) {
        dd z = dd(urand(i + 31) * 25.0 + 0.3);
        dd lhs = lgamma(z * dd(0.5)) + lgamma((z + dd(1.0)) * dd(0.5));
        dd rhs = (dd(1.0) - z) * ddc_const::ln2 + dd(0.5) * log(ddc_const::pi) + lgamma(z);
        CHECK(rel_err(lhs, rhs) < 5e-27);
    }
}

TEST_CASE("gamma_ratio with nonpositive second argument") {
    CHECK(rel_err(gamma_ratio(dd(5.0), dd(3.0)), dd(12.0)) < 1e-29);
    // Gamma(2.5)/Gamma(-0.5) = (3/4)sqrt(pi) / (-2 sqrt(pi)) = -3/8
    CHECK(rel_err(gamma_ratio(dd(2.5), dd(-0.5)), dd(-0.375)) < 1e-28);
    // poles of 1/Gamma at nonpositive integers
    CHECK(std::fabs(gamma_ratio(dd(3.0), dd(0.0)).hi) < 1e-28);
    CHECK(std::fabs(gamma_ratio(dd(3.0), dd(-4.0)).hi) < 1e-26);
}

TEST_CASE("complex dd") {
    ddc z(dd(3.0), dd(4.0));
    CHECK(rel_err(abs2(z), dd(25.0)) < 1e-30);
    ddc w = z * z;
    CHECK(rel_err(w.re, dd(-7.0)) < 1e-30);
    CHECK(rel_err(w.im, dd(24.0)) < 1e-30);
    CHECK(real_of_minus_i_pow(0, z).hi == 3.0);
    CHECK(real_of_minus_i_pow(1, z).hi == 4.0);
    CHECK(real_of_minus_i_pow(2, z).hi == -3.0);
    CHECK(real_of_minus_i_pow(3, z).hi == -4.0);
}
