#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mvstable/special.hpp>
#include <mvstable/spectral.hpp>

#include <cmath>
#include <complex>

using namespace mvstable;

namespace {

SpherePoly linear_density(int d, double c, const std::vector<double>& theta) {
    SpherePoly p = SpherePoly::constant(d, c);
    for (int i = 0; i < d; ++i) {
        MultiIndex a(d, 0);
        a[i] = 1;
        if (theta[i] != 0.0) p.add_term(a, theta[i]);
    }
    return p;
}

// second closed form of the weight, evaluated on its own floating-point
// route (sin times Gamma), meaningful for j > alpha
double weight_w_second_form(double alpha, int j, int d) {
    double x = 0.5 * (j - alpha);
    double sg;
    if (x > 0.0) {
        double m = std::round(x);
        double f = x - m;
        double s = std::sin(M_PI * f) * (std::fmod(std::fabs(m), 2.0) == 1.0 ? -1.0 : 1.0);
        sg = s * std::exp(log_gamma(x));
    } else {
        // Gamma(x) through one recurrence step, x in (-1, 0)
        sg = std::sin(M_PI * x) * std::exp(log_gamma(x + 1.0)) / x;
    }
    return std::pow(M_PI, 0.5 * d - 1.0) * sg
         * std::exp(log_gamma(alpha + 1.0) - (alpha - 1.0) * M_LN2
                    - log_gamma(0.5 * (j + alpha + d)));
}

struct Kappas {
    double k0, k1, k2;
};

Kappas kappas(double alpha, int d, double c) {
    Kappas k;
    k.k0 = c / (gamma_pos(0.5 * (alpha + d)) * gamma_pos(0.5 * alpha + 1.0));
    k.k1 = -std::tan(0.5 * M_PI * alpha)
         / (gamma_pos(0.5 * (alpha + d + 1.0)) * gamma_pos(0.5 * (alpha + 1.0)));
    k.k2 = std::pow(M_PI, 0.5 * d) * gamma_pos(alpha + 1.0) / std::pow(2.0, alpha - 1.0);
    return k;
}

} // namespace

TEST_CASE("weight_w closed-form values") {
    for (int d = 2; d <= 6; ++d) {
        double want = std::pow(M_PI, 0.5 * d) / gamma_pos(0.5 * d + 1.0);
        CHECK(std::fabs(weight_w(1.0, 1, d) - want) < 1e-12 * want);
    }
    // exact zeros at alpha = 1 for odd j >= 3
    for (int j = 3; j <= 15; j += 2) CHECK(weight_w(1.0, j, 2) == 0.0);
    for (int j = 3; j <= 15; j += 2) CHECK(weight_w(1.0, j, 3) == 0.0);
}

TEST_CASE("weight_w two closed forms agree") {
    for (int d : {2, 3, 4})
        for (double alpha : {0.3, 0.5, 0.8, 1.2, 1.45, 1.7, 1.95})
            for (int j = 0; j <= 20; ++j) {
                double a = weight_w(alpha, j, d);
                double b = weight_w_second_form(alpha, j, d);
                CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)));
            }
}

TEST_CASE("weight_w double-double agrees with double") {
    for (int d : {2, 3})
        for (double alpha : {0.5, 0.7, 1.3, 1.5})
            for (int j = 0; j <= 12; ++j)
                CHECK(std::fabs(double(weight_w_dd(alpha, j, d)) - weight_w(alpha, j, d))
                      < 1e-13 * std::max(1.0, std::fabs(weight_w(alpha, j, d))));
}

TEST_CASE("weight_wstar") {
    CHECK(weight_wstar(1, 2) == doctest::Approx(M_PI * (0.5 - M_LN2)).epsilon(1e-13));
    CHECK(weight_wstar(3, 3) == doctest::Approx(4.0 * M_PI / 15.0).epsilon(1e-13));
    // sign pattern (-1)^{(j-3)/2}
    CHECK(weight_wstar(3, 2) > 0.0);
    CHECK(weight_wstar(5, 2) < 0.0);
    CHECK(weight_wstar(5, 2) == doctest::Approx(-M_PI / 12.0).epsilon(1e-13));
    CHECK_THROWS_AS(weight_wstar(2, 2), std::domain_error);
}

TEST_CASE("build_model isotropic") {
    double c = 0.8;
    for (double alpha : {0.6, 1.5}) {
        auto m = build_model(alpha, 2, SpherePoly::constant(2, c));
        double v0 = c * weight_w(alpha, 0, 2);
        CHECK(m.V.coeff({0, 0}).real() == doctest::Approx(v0).epsilon(1e-12));
        CHECK(std::fabs(m.V.coeff({0, 0}).imag()) < 1e-14);
        CHECK(m.inf_re_v == doctest::Approx(v0).epsilon(1e-9));
        CHECK(m.sup_abs_v == doctest::Approx(v0).epsilon(1e-9));
        CHECK(m.lambda_total == doctest::Approx(c * sphere_area(2)).epsilon(1e-12));
        CHECK(arg_bound_check(m) < 1e-8);
        auto phi = char_exponent(m, {1.0, 0.0});
        CHECK(phi.value.real() == doctest::Approx(v0).epsilon(1e-12));
        CHECK(std::fabs(phi.value.imag()) < 1e-13);
        auto zero = char_exponent(m, {0.0, 0.0});
        CHECK(zero.value == std::complex<double>(0.0, 0.0));
    }
}

TEST_CASE("build_model linear kappa structure") {
    for (int d : {2, 3})
        for (double alpha : {0.5, 0.7, 1.3, 1.5, 1.7}) {
            double c = 1.0;
            std::vector<double> theta(d, 0.0);
            theta[0] = 1.0;
            auto m = build_model(alpha, d, linear_density(d, c, theta));
            auto k = kappas(alpha, d, c);
            // V = k2 (k0 + i k1 <theta,u>)
            MultiIndex a0(d, 0), a1(d, 0);
            a1[0] = 1;
            CHECK(m.V.coeff(a0).real() == doctest::Approx(k.k2 * k.k0).epsilon(1e-12));
            CHECK(std::fabs(m.V.coeff(a0).imag()) < 1e-13);
            CHECK(m.V.coeff(a1).imag() == doctest::Approx(k.k2 * k.k1).epsilon(1e-12));
            CHECK(std::fabs(m.V.coeff(a1).real()) < 1e-13);
            CHECK(m.inf_re_v == doctest::Approx(k.k2 * k.k0).epsilon(1e-9));
            double sup_abs = k.k2 * std::sqrt(k.k0 * k.k0 + k.k1 * k.k1);
            CHECK(m.sup_abs_v == doctest::Approx(sup_abs).epsilon(1e-7));
            CHECK(m.sup_abs_v <= m.lambda_total / std::fabs(std::cos(0.5 * M_PI * alpha)) + 1e-9);
            if (alpha > 1.0) {
                double rho0 = k.k2 * (k.k0 * k.k0 + k.k1 * k.k1) / (2.0 * k.k0);
                CHECK(m.rho0 == doctest::Approx(rho0).epsilon(1e-7));
                CHECK(m.R == doctest::Approx(2.0 * rho0).epsilon(1e-7));
                CHECK(m.sup_abs_vstar < m.R);
                if (alpha >= 4.0 / 3.0) CHECK(m.w_inf_re_v_pow > 0.0);
            }
            double bound = 0.5 * M_PI * std::min(alpha, 2.0 - alpha);
            double sup_arg = arg_bound_check(m);
            CHECK(sup_arg < bound);
            if (alpha == 1.5) CHECK(sup_arg < 0.25 * M_PI);
        }
}

TEST_CASE("model invariants on the grid") {
    auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.8, -0.6}));
    double tanv = std::tan(0.75 * M_PI);
    for (const auto& u : sphere_point_set(2, 200, 5)) {
        auto v = m.V.eval(u);
        std::vector<double> mu{-u[0], -u[1]};
        auto vm = m.V.eval(mu);
        CHECK(std::abs(vm - std::conj(v)) < 1e-12);                // Hermitian symmetry
        CHECK(v.real() > std::fabs(v.imag() / tanv));              // strict spectral inequality
        auto vs = m.Vstar.eval(u);
        CHECK(std::abs(vs) < m.R);
    }
    // Phi(-z) = conj Phi(z)
    for (double t : {0.7, -0.7, 2.3, -2.3}) {
        auto a = char_exponent(m, {t * 0.6, t * 0.8});
        auto b = char_exponent(m, {-t * 0.6, -t * 0.8});
        CHECK(std::abs(a.value - std::conj(b.value)) < 1e-12);
    }
}

TEST_CASE("alpha = 1 branch") {
    int d = 2;
    auto m = build_model(1.0, d, linear_density(d, 1.0, {1.0, 0.0}));
    double beta2 = beta_d_constant(2);
    CHECK(beta2 == doctest::Approx(0.5 - M_LN2).epsilon(1e-14));
    for (double r : {0.5, 1.0, 3.0}) {
        auto phi = char_exponent(m, {r, 0.0});
        double re_want = 2.0 * r * std::pow(M_PI, 0.5 * (d - 1)) / gamma_pos(0.5 * (1 + d));
        double im_want = r * (2.0 / M_PI) * weight_wstar(1, d)
                       + r * std::log(r) * 2.0 * std::pow(M_PI, 0.5 * d - 1.0)
                             / gamma_pos(0.5 * d + 1.0);
        CHECK(phi.value.real() == doctest::Approx(re_want).epsilon(1e-12));
        CHECK(phi.value.imag() == doctest::Approx(im_want).epsilon(1e-12));
    }
    // beta_d in an odd dimension: d = 3 -> 1 - H_4 + H_2/2
    double h4 = 1.0 + 0.5 + 1.0 / 3.0 + 0.25, h2 = 1.5;
    CHECK(beta_d_constant(3) == doctest::Approx(1.0 - h4 + 0.5 * h2).epsilon(1e-14));
}

TEST_CASE("model rejections") {
    CHECK_THROWS_AS(build_model(1.0000001, 2, SpherePoly::constant(2, 1.0)), std::domain_error);
    CHECK_THROWS_AS(build_model(2.0, 2, SpherePoly::constant(2, 1.0)), std::domain_error);
    CHECK_THROWS_AS(build_model(0.5, 2, SpherePoly::constant(2, 0.0)), InvalidDensity);
    SpherePoly neg = SpherePoly::constant(2, 1.0);
    neg.add_term({1, 0}, -3.0); // 1 - 3 u1 dips negative
    CHECK_THROWS_AS(build_model(0.5, 2, neg), InvalidDensity);
    auto base = linear_density(2, 1.0, {1.0, 0.0});
    CHECK_THROWS_AS(build_model(1.5, 2, base, 0.01), std::domain_error);
}

TEST_CASE("harmonic coefficient table") {
    SUBCASE("isotropic: only the constant row survives") {
        double c = 1.3, alpha = 0.7;
        auto m = build_model(alpha, 3, SpherePoly::constant(3, c));
        auto t = harmonic_coeffs(m, CoeffKind::V, 5);
        double v0 = c * weight_w(alpha, 0, 3);
        for (int k = 1; k <= 5; ++k) {
            const SpherePoly* s = t.entry(0, k);
            REQUIRE(s != nullptr);
            CHECK(s->coeff({0, 0, 0}).real() == doctest::Approx(std::pow(v0, k)).epsilon(1e-11));
            for (int j = 1; j <= k; ++j) CHECK(t.entry(j, k) == nullptr);
            CHECK(t.moments[k].real()
                  == doctest::Approx(std::pow(v0, k) * sphere_area(3)).epsilon(1e-11));
        }
    }
    SUBCASE("first-power entries are the twisted harmonics of V") {
        auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.0, 1.0}));
        auto t = harmonic_coeffs(m, CoeffKind::V, 3);
        auto k = kappas(1.5, 2, 1.0);
        const SpherePoly* s0 = t.entry(0, 1);
        const SpherePoly* s1 = t.entry(1, 1);
        REQUIRE(s0 != nullptr);
        REQUIRE(s1 != nullptr);
        CHECK(s0->coeff({0, 0}).real() == doctest::Approx(k.k2 * k.k0).epsilon(1e-12));
        // (-i) * (i k2 k1) <theta,u> = k2 k1 <theta,u>
        CHECK(s1->coeff({0, 1}).real() == doctest::Approx(k.k2 * k.k1).epsilon(1e-12));
        CHECK(std::fabs(s1->coeff({0, 1}).imag()) < 1e-12);
    }
    SUBCASE("degree cap raises the budget error") {
        auto m = build_model(0.5, 2, linear_density(2, 1.0, {1.0, 0.0}));
        CHECK_THROWS_AS(harmonic_coeffs(m, CoeffKind::V, 100), BudgetExceeded);
    }
}

TEST_CASE("recovery diagnostic") {
    double c = 2.0, alpha = 0.7;
    auto iso = build_model(alpha, 2, SpherePoly::constant(2, c));
    CHECK(recovery_diagnostic(iso, 8) == 0.0);
    auto lin = build_model(alpha, 2, linear_density(2, 1.0, {1.0, 0.0}));
    double a1 = std::norm(spectral_aj(alpha, 1, 2));
    SpherePoly p1(2);
    p1.add_term({1, 0}, 1.0);
    double want = a1 * l2_norm_sq(p1);
    CHECK(recovery_diagnostic(lin, 1) == doctest::Approx(want).epsilon(1e-11));
    CHECK(recovery_diagnostic(lin, 1) == doctest::Approx(recovery_diagnostic(lin, 11)));
}

TEST_CASE("zonal direction function matches the polynomial") {
    for (int d : {2, 3})
        for (double alpha : {0.5, 0.7, 1.5}) {
            std::vector<double> theta(d, 0.0);
            theta[d - 1] = 1.0;
            auto m = build_model(alpha, d, linear_density(d, 1.0, theta));
            REQUIRE(m.zonal.has_value());
            auto zf = make_zonal_direction(m);
            for (double t : {-1.0, -0.4, 0.0, 0.3, 0.99}) {
                std::vector<double> u(d, 0.0);
                u[d - 1] = t;
                u[0] = std::sqrt(std::max(0.0, 1.0 - t * t));
                auto vp = m.V.eval(u);
                auto vz = zf.eval(dd(t));
                CHECK(std::fabs(double(vz.re) - vp.real()) < 1e-13 * (1.0 + std::abs(vp)));
                CHECK(std::fabs(double(vz.im) - vp.imag()) < 1e-13 * (1.0 + std::abs(vp)));
                if (alpha > 1.0) {
                    auto vs = m.Vstar.eval(u);
                    auto vzs = zf.eval_star(dd(t));
                    CHECK(std::fabs(double(vzs.re) - vs.real()) < 1e-12 * (1.0 + std::abs(vs)));
                    CHECK(std::fabs(double(vzs.im) - vs.imag()) < 1e-12 * (1.0 + std::abs(vs)));
                }
            }
        }
}
