#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mvstable/density.hpp>
#include <mvstable/oracle.hpp>
#include <mvstable/sampler.hpp>
#include <mvstable/special.hpp>

#include <cmath>

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

DensityQuery at(std::vector<double> x, double tol = 1e-10, int kmax = 900) {
    DensityQuery q;
    q.x = std::move(x);
    q.tolerance = tol;
    q.k_max = kmax;
    return q;
}

} // namespace

TEST_CASE("lt1: isotropic pointwise matches the oracle and stays radial") {
    double c = 1.0 / weight_w(0.6, 0, 2); // unit direction function
    auto m = build_model(0.6, 2, SpherePoly::constant(2, c));
    for (double r : {1.0, 2.0, 6.0}) {
        auto s = pdf_lt1(m, at({r, 0.0}));
        CHECK(s.converged);
        double o = oracle_pdf(m, {r, 0.0}, 1e-8);
        CHECK(std::fabs(s.value - o) < 2e-7 * std::fabs(o) + s.truncation_bound);
        auto s2 = pdf_lt1(m, at({r * 0.6, r * 0.8}));
        CHECK(std::fabs(s2.value - s.value) < 1e-10 * std::fabs(s.value) + 1e-18);
        CHECK(s.value >= -s.truncation_bound);
    }
}

TEST_CASE("lt1: linear model matches the oracle at friendly radii") {
    for (int d : {2, 3}) {
        std::vector<double> theta(d, 0.0);
        theta[0] = 1.0;
        auto m = build_model(0.7, d, linear_density(d, 1.0, theta));
        for (double r : {5.0, 9.0}) {
            for (double c : {1.0, -0.4}) {
                std::vector<double> x(d, 0.0);
                x[0] = c * r;
                if (d == 3) x[1] = 0.2 * r;
                auto s = pdf_lt1(m, at(x, 1e-11));
                double o = oracle_pdf(m, x, 1e-8);
                INFO("d=", d, " r=", r, " c=", c, " got=", s.value, " want=", o);
                CHECK(s.converged);
                CHECK(std::fabs(s.value - o) <= 1e-6 * std::fabs(o) + s.truncation_bound);
            }
        }
    }
}

TEST_CASE("lt1: zonal and grid engines agree") {
    // a negligible quadratic term defeats the zonal detection but leaves the
    // density effectively unchanged
    auto mz = build_model(0.6, 2, linear_density(2, 1.0, {0.8, 0.0}));
    SpherePoly p = linear_density(2, 1.0, {0.8, 0.0});
    p.add_term({2, 0}, 1e-13);
    auto mg = build_model(0.6, 2, p);
    REQUIRE(mz.zonal.has_value());
    REQUIRE(!mg.zonal.has_value());
    for (double r : {3.0, 7.0}) {
        auto a = pdf_lt1(mz, at({r, 0.1 * r}));
        auto b = pdf_lt1(mg, at({r, 0.1 * r}));
        CHECK(a.converged);
        CHECK(b.converged);
        CHECK(std::fabs(a.value - b.value) < 1e-9 * std::fabs(a.value) + 1e-16);
    }
}

TEST_CASE("lt1: tail leading term") {
    // r^{alpha+d} g(r u) -> 2 alpha Gamma(alpha) sin(pi alpha/2)/pi * P(u)
    auto m = build_model(0.6, 2, linear_density(2, 1.0, {0.5, 0.0}));
    double want_const = 2.0 * 0.6 * gamma_pos(0.6) * std::sin(0.3 * M_PI) / M_PI;
    for (double r : {50.0, 100.0}) {
        for (std::vector<double> u : {std::vector<double>{1.0, 0.0},
                                      std::vector<double>{-0.6, 0.8}}) {
            auto s = pdf_lt1(m, at({r * u[0], r * u[1]}, 1e-14, 1200));
            CHECK(s.converged);
            double pu = 1.0 + 0.5 * u[0];
            double got = std::pow(r, 0.6 + 2.0) * s.value / pu;
            CHECK(std::fabs(got - want_const) < 5.0 * std::pow(r, -0.6) * want_const);
        }
    }
}

TEST_CASE("lt1 radial: isotropic consistency with the pointwise series") {
    double c = 0.9;
    auto m = build_model(0.6, 2, SpherePoly::constant(2, c));
    for (double r : {2.0, 5.0}) {
        auto rad = pdf_lt1_radial(m, r, 1e-12, 900);
        auto pt = pdf_lt1(m, at({r, 0.0}, 1e-13));
        CHECK(rad.converged);
        double want = r * sphere_area(2) * pt.value;
        CHECK(std::fabs(rad.value - want) <= 1e-9 * std::fabs(want) + rad.truncation_bound
                                                 + r * sphere_area(2) * pt.truncation_bound);
    }
}

TEST_CASE("projected density components sum to the pointwise value") {
    auto m = build_model(0.6, 2, linear_density(2, 1.0, {1.0, 0.0}));
    double r = 6.0;
    auto pt = pdf_lt1(m, at({r, 0.0}, 1e-13));
    std::vector<double> e1{1.0, 0.0};
    double sum = 0.0, bounds = 0.0;
    for (int j = 0; j <= 10; ++j) {
        auto pj = proj_density_lt1(m, j, r, 1e-12, 60);
        sum += pj.component.eval(e1).real();
        bounds += pj.truncation_bound;
    }
    CHECK(std::fabs(sum - pt.value) <= 1e-8 * std::fabs(pt.value) + bounds + 1e-14);
}

TEST_CASE("origin expansion: center values") {
    SUBCASE("isotropic closed form, d = 2") {
        for (double alpha : {0.6, 0.8}) {
            double c = 1.7;
            auto m = build_model(alpha, 2, SpherePoly::constant(2, c));
            double v0 = c * weight_w(alpha, 0, 2);
            double want = gamma_pos(2.0 / alpha) * std::pow(v0, -2.0 / alpha)
                        / (2.0 * M_PI * alpha);
            CHECK(pdf_origin_expansion(m, {0.0, 0.0}, 0)
                  == doctest::Approx(want).epsilon(1e-10));
        }
    }
    SUBCASE("linear model center matches the oracle") {
        auto m = build_model(0.7, 2, linear_density(2, 1.0, {0.6, 0.0}));
        double want = oracle_pdf(m, {0.0, 0.0}, 1e-9);
        CHECK(pdf_origin_expansion(m, {0.0, 0.0}, 0)
              == doctest::Approx(want).epsilon(1e-7));
        for (int n : {0, 1, 2, 3}) {
            double g = pdf_origin_expansion(m, {0.03, 0.02}, n);
            double o = oracle_pdf(m, {0.03, 0.02}, 1e-9);
            CHECK(std::fabs(g - o)
                  < 1e-3 * std::fabs(o)
                        + 2.0 * pdf_origin_expansion_error(m, std::hypot(0.03, 0.02), n));
        }
    }
}

TEST_CASE("gt1 power series: center value and oracle agreement") {
    auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.7, 0.0}));
    SUBCASE("x = 0 equals the continued center formula") {
        auto s = pdf_gt1_power(m, at({0.0, 0.0}, 1e-12, 200));
        double o = oracle_pdf(m, {0.0, 0.0}, 1e-8);
        CHECK(s.converged);
        CHECK(s.value == doctest::Approx(o).epsilon(1e-7));
    }
    SUBCASE("pointwise vs oracle") {
        for (std::vector<double> x : {std::vector<double>{0.7, 0.3},
                                      std::vector<double>{-1.2, 0.4},
                                      std::vector<double>{2.0, 0.0}}) {
            auto s = pdf_gt1_power(m, at(x, 1e-12, 300));
            double o = oracle_pdf(m, x, 1e-8);
            INFO("x0=", x[0], " got=", s.value, " want=", o);
            CHECK(s.converged);
            CHECK(std::fabs(s.value - o) <= 1e-6 * std::fabs(o) + s.truncation_bound);
        }
    }
}

TEST_CASE("gt1: dual representations agree") {
    for (double alpha : {1.3, 1.5, 1.7}) {
        auto m = build_model(alpha, 2, linear_density(2, 1.0, {1.0, 0.0}));
        for (std::vector<double> x : {std::vector<double>{0.5, 0.2},
                                      std::vector<double>{-1.5, 1.0},
                                      std::vector<double>{2.4, -0.9}}) {
            auto a = pdf_gt1_power(m, at(x, 1e-12, 300));
            auto b = pdf_gt1_expanded(m, at(x, 1e-12, 300));
            INFO("alpha=", alpha, " x0=", x[0], " power=", a.value, " exp=", b.value);
            CHECK(a.converged);
            CHECK(b.converged);
            CHECK(std::fabs(a.value - b.value)
                  <= 1e-6 * std::fabs(a.value) + a.truncation_bound + b.truncation_bound);
        }
    }
}

TEST_CASE("gt1 in three dimensions against the oracle") {
    auto m = build_model(1.5, 3, linear_density(3, 1.0, {0.8, 0.0, 0.0}));
    for (std::vector<double> x : {std::vector<double>{0.6, 0.2, -0.1},
                                  std::vector<double>{-1.0, 0.5, 0.8}}) {
        auto s = pdf_gt1_expanded(m, at(x, 1e-11, 300));
        double o = oracle_pdf(m, x, 1e-7);
        CHECK(s.converged);
        CHECK(std::fabs(s.value - o) <= 2e-6 * std::fabs(o) + s.truncation_bound);
    }
}

TEST_CASE("gt1 radial representations") {
    auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.8, 0.0}));
    RngStream rng = RngStream::seeded(321);
    for (double r : {0.5, 1.0, 2.0}) {
        auto pw = pdf_gt1_radial(m, r, RadialRep::power, 1e-10, 400);
        auto ex = pdf_gt1_radial(m, r, RadialRep::expanded, 1e-10, 400);
        auto su = pdf_gt1_radial(m, r, RadialRep::subordination, 1e-3, 400, &rng, 400000);
        CHECK(pw.converged);
        CHECK(ex.converged);
        INFO("r=", r, " pow=", pw.value, " exp=", ex.value, " sub=", su.value);
        CHECK(std::fabs(pw.value - ex.value)
              <= 1e-8 * std::fabs(ex.value) + pw.truncation_bound + ex.truncation_bound);
        CHECK(std::fabs(su.value - ex.value)
              <= 1e-3 * std::fabs(ex.value) + su.truncation_bound);
    }
}

TEST_CASE("gt1 tail expansion") {
    auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.6, 0.0}));
    SUBCASE("k = 0 contribution cancels at the pole") {
        SpherePoly t0 = tail_expansion_gt1(m, 0, 10.0, 0);
        CHECK(t0.is_zero(1e-300));
    }
    SUBCASE("radial tail matches the first-order coefficients") {
        double alpha = 1.5;
        auto table = harmonic_coeffs(m, CoeffKind::V, 2);
        for (double r : {12.0, 20.0}) {
            double t1 = tail_radial_gt1(m, r, 1);
            double expect = -std::pow(2.0, alpha) / M_PI * std::pow(r, -alpha - 1.0)
                          * gamma_ratio(0.5 * (alpha + 2.0), -0.5 * alpha)
                          * table.moments[1].real();
            CHECK(t1 == doctest::Approx(expect).epsilon(1e-12));
            // universal tail constant: 2 alpha Gamma(alpha) sin(pi alpha/2)/pi
            double uni = 2.0 * alpha * gamma_pos(alpha) * std::sin(0.5 * M_PI * alpha)
                       / M_PI * m.lambda_total * std::pow(r, -alpha - 1.0);
            CHECK(t1 == doctest::Approx(uni).epsilon(1e-10));
        }
    }
    SUBCASE("degree-1 component shrinks at the expansion rate") {
        double r = 25.0;
        SpherePoly e1 = tail_expansion_gt1(m, 1, r, 1);
        SpherePoly e2 = tail_expansion_gt1(m, 1, r, 2);
        double diff = sphere_max_difference(e1, e2);
        CHECK(diff < 10.0 * std::pow(r, -2.0 * 1.5 - 2.0));
        CHECK(diff > 0.0);
    }
}

TEST_CASE("linear closed form vs generic machinery") {
    SUBCASE("alpha < 1") {
        auto m = build_model(0.6, 2, linear_density(2, 1.0, {1.0, 0.0}));
        for (std::vector<double> x : {std::vector<double>{5.0, 1.0},
                                      std::vector<double>{8.0, -3.0}}) {
            auto a = linear_model_pdf(1.0, {1.0, 0.0}, 0.6, x, 1e-12, 600);
            auto b = pdf_lt1(m, at(x, 1e-12));
            INFO("x0=", x[0], " closed=", a.value, " generic=", b.value);
            CHECK(a.converged);
            CHECK(std::fabs(a.value - b.value) <= 1e-6 * std::fabs(b.value));
        }
    }
    SUBCASE("alpha > 1") {
        auto m = build_model(1.5, 2, linear_density(2, 1.0, {1.0, 0.0}));
        for (std::vector<double> x : {std::vector<double>{0.8, 0.3},
                                      std::vector<double>{-1.4, 0.7}}) {
            auto a = linear_model_pdf(1.0, {1.0, 0.0}, 1.5, x, 1e-12, 600);
            auto b = pdf_gt1_expanded(m, at(x, 1e-12, 300));
            INFO("x0=", x[0], " closed=", a.value, " generic=", b.value);
            CHECK(a.converged);
            CHECK(std::fabs(a.value - b.value) <= 1e-6 * std::fabs(b.value));
        }
    }
    SUBCASE("rotation equivariance") {
        double ct = std::cos(0.7), st = std::sin(0.7);
        auto a = linear_model_pdf(1.0, {1.0, 0.0}, 1.5, {0.9, 0.4}, 1e-10, 400);
        auto b = linear_model_pdf(1.0, {ct, st}, 1.5,
                                  {0.9 * ct - 0.4 * st, 0.9 * st + 0.4 * ct}, 1e-10, 400);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
    }
}

TEST_CASE("radial cdf and normalization") {
    SUBCASE("alpha > 1 linear") {
        auto m = build_model(1.5, 2, linear_density(2, 1.0, {0.8, 0.0}));
        CHECK(radial_total_mass(m) == doctest::Approx(1.0).epsilon(1e-3));
        RadialCdf cdf(m);
        CHECK(cdf(0.3) > 0.0);
        CHECK(cdf(1.0) < cdf(3.0));
        CHECK(cdf(1e4) <= 1.02);
    }
    SUBCASE("alpha < 1 isotropic") {
        double c = 1.0 / weight_w(0.6, 0, 2);
        auto m = build_model(0.6, 2, SpherePoly::constant(2, c));
        CHECK(radial_total_mass(m) == doctest::Approx(1.0).epsilon(1e-3));
    }
}
