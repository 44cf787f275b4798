#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mvstable/sphere.hpp>
#include <mvstable/special.hpp>

#include <cmath>
#include <complex>

using namespace mvstable;

namespace {

SpherePoly coordinate(int d, int i, int power = 1) {
    MultiIndex a(d, 0);
    a[i] = power;
    return SpherePoly::monomial(d, a, 1.0);
}

// C~_j(<w, .>) as a polynomial in u.
SpherePoly zonal_poly(int d, int j, const std::vector<double>& w) {
    auto zc = zonal_coefficients(j, d);
    SpherePoly lin(d);
    for (int i = 0; i < d; ++i) {
        MultiIndex a(d, 0);
        a[i] = 1;
        lin.add_term(a, w[i]);
    }
    SpherePoly out = SpherePoly::constant(d, zc[0]);
    SpherePoly pw = SpherePoly::constant(d, 1.0);
    for (int p = 1; p < int(zc.size()); ++p) {
        pw = pw * lin;
        if (zc[p] != 0.0) {
            SpherePoly t = pw;
            t *= zc[p];
            out += t;
        }
    }
    return out;
}

// integral over v of <u,v>^k h(v), expanded into monomials; oracle for the
// Funk-Hecke eigenvalue identity.
std::complex<double> power_kernel_integral(const SpherePoly& h, int k,
                                           const std::vector<double>& u) {
    int d = h.dim();
    SpherePoly lin(d);
    for (int i = 0; i < d; ++i) {
        MultiIndex a(d, 0);
        a[i] = 1;
        lin.add_term(a, u[i]);
    }
    SpherePoly kern = SpherePoly::constant(d, 1.0);
    for (int t = 0; t < k; ++t) kern = kern * lin;
    return inner_product(kern * h, SpherePoly::constant(d, 1.0));
}

} // namespace

TEST_CASE("harmonic_dim") {
    CHECK(harmonic_dim(0, 2) == 1);
    CHECK(harmonic_dim(0, 5) == 1);
    CHECK(harmonic_dim(2, 3) == 5);
    CHECK(harmonic_dim(4, 2) == 2);
    CHECK(harmonic_dim(1, 4) == 4);
    CHECK(harmonic_dim(3, 3) == 7);
}

TEST_CASE("sphere_area") {
    CHECK(sphere_area(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-15));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-15));
    CHECK(sphere_area(4) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-15));
    CHECK(sphere_area(5) == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-15));
}

TEST_CASE("monomial integrals, exact values") {
    CHECK(monomial_integral({4, 0, 0}, 3) == (4.0 / 5.0) * M_PI);
    CHECK(monomial_integral({2, 0, 0}, 3) == (4.0 / 3.0) * M_PI);
    CHECK(monomial_integral({2, 2, 0}, 3) == (4.0 / 15.0) * M_PI);
    CHECK(monomial_integral({3, 1, 0}, 3) == 0.0);
    CHECK(monomial_integral({2, 1, 1}, 3) == 0.0);
    CHECK(monomial_integral({0, 0}, 2) == 2.0 * M_PI);
    CHECK(monomial_integral({2, 0}, 2) == M_PI);
    // cross-check against the Gamma-ratio formula in a higher dimension
    double direct = 2.0 * std::exp(2.0 * log_gamma(1.5) + 2.0 * log_gamma(0.5) - log_gamma(4.0));
    CHECK(monomial_integral({2, 2, 0, 0}, 4) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("inner products") {
    SpherePoly one = SpherePoly::constant(3, 1.0);
    CHECK(inner_product(one, one).real() == doctest::Approx(4.0 * M_PI));
    SpherePoly v1 = coordinate(3, 0), v2 = coordinate(3, 1);
    CHECK(std::abs(inner_product(v1, v2)) == 0.0);
    CHECK(inner_product(v1, v1).real() == doctest::Approx(4.0 * M_PI / 3.0));
}

TEST_CASE("projection worked example") {
    SpherePoly f = coordinate(3, 0, 2); // u1^2 on S^2
    SpherePoly p0 = project(f, 0);
    SpherePoly p1 = project(f, 1);
    SpherePoly p2 = project(f, 2);
    CHECK(p0.coeff({0, 0, 0}).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p1.is_zero(1e-14));
    // equal on the sphere to (2u1^2 - u2^2 - u3^2)/3
    SpherePoly want(3);
    want.add_term({2, 0, 0}, 2.0 / 3.0);
    want.add_term({0, 2, 0}, -1.0 / 3.0);
    want.add_term({0, 0, 2}, -1.0 / 3.0);
    CHECK(sphere_max_difference(p2, want) < 1e-12);
    // zero beyond the degree
    CHECK(project(f, 3).is_zero());
    CHECK(project(f, 4).is_zero());
    // sum of parts reproduces f on the sphere
    SpherePoly sum = p0 + p2;
    CHECK(sphere_max_difference(sum, f) < 1e-12);
}

TEST_CASE("decompose") {
    SpherePoly c = SpherePoly::constant(3, 2.5);
    auto h = decompose(c);
    REQUIRE(h.parts.size() == 1);
    CHECK(h.parts[0].first == 0);

    // c + <theta,u> splits into degrees 0 and 1 unchanged
    SpherePoly lin = SpherePoly::constant(3, 1.5);
    lin.add_term({1, 0, 0}, 0.3);
    lin.add_term({0, 1, 0}, -0.4);
    auto h2 = decompose(lin);
    REQUIRE(h2.parts.size() == 2);
    CHECK(h2.parts[0].second.coeff({0, 0, 0}).real() == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(h2.parts[1].second.coeff({1, 0, 0}).real() == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(h2.parts[1].second.coeff({0, 1, 0}).real() == doctest::Approx(-0.4).epsilon(1e-13));
}

TEST_CASE("projection operator properties") {
    // a mixed-degree polynomial in d = 3
    SpherePoly f(3);
    f.add_term({0, 0, 0}, 0.7);
    f.add_term({1, 0, 0}, -0.2);
    f.add_term({2, 1, 0}, 1.1);
    f.add_term({0, 2, 2}, -0.5);
    f.add_term({1, 1, 1}, 0.9);
    double norm2 = l2_norm_sq(f);

    std::vector<SpherePoly> parts;
    for (int j = 0; j <= f.degree(); ++j) parts.push_back(project(f, j));

    SUBCASE("idempotence, coefficient-wise") {
        for (int j = 0; j <= f.degree(); ++j) {
            SpherePoly pp = project(parts[j], j);
            SpherePoly diff = pp - parts[j];
            for (const auto& [a, cc] : diff.terms()) {
                (void)a;
                CHECK(std::abs(cc) < 1e-10);
            }
        }
    }
    SUBCASE("orthogonality") {
        for (int i = 0; i <= f.degree(); ++i)
            for (int j = i + 1; j <= f.degree(); ++j)
                CHECK(std::abs(inner_product(parts[i], parts[j])) < 1e-10 * norm2);
    }
    SUBCASE("Parseval") {
        double sum = 0.0;
        for (const auto& p : parts) sum += l2_norm_sq(p);
        CHECK(sum == doctest::Approx(norm2).epsilon(1e-9));
    }
    SUBCASE("pointwise reconstruction") {
        SpherePoly sum(3);
        for (const auto& p : parts) sum += p;
        CHECK(sphere_max_difference(sum, f) < 1e-9);
    }
    SUBCASE("sup-norm bound for harmonics") {
        for (int j = 1; j <= f.degree(); ++j) {
            if (parts[j].is_zero(1e-13)) continue;
            double bound = double(harmonic_dim(j, 3)) / sphere_area(3) * l2_norm_sq(parts[j]);
            for (const auto& u : sphere_point_set(3, 400))
                CHECK(std::norm(parts[j].eval(u)) <= bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("zonal membership") {
    std::vector<double> w{0.6, -0.64, 0.48};
    double n = 0.0;
    for (double x : w) n += x * x;
    for (auto& x : w) x /= std::sqrt(n);
    for (int d : {2, 3}) {
        std::vector<double> pole(w.begin(), w.begin() + d);
        double nn = 0.0;
        for (double x : pole) nn += x * x;
        for (auto& x : pole) x /= std::sqrt(nn);
        for (int j : {1, 2, 3, 4}) {
            SpherePoly z = zonal_poly(d, j, pole);
            SpherePoly pz = project(z, j);
            CHECK(sphere_max_difference(pz, z) < 1e-10);
        }
    }
}

TEST_CASE("Funk-Hecke eigenvalues for power kernels") {
    CHECK(funk_hecke_power_eigenvalue(2, 2, 3) == doctest::Approx(8.0 * M_PI / 15.0).epsilon(1e-13));
    CHECK(funk_hecke_power_eigenvalue(3, 2, 3) == 0.0);
    CHECK(funk_hecke_power_eigenvalue(1, 2, 3) == 0.0);
    CHECK(funk_hecke_power_eigenvalue(1, 1, 2) == doctest::Approx(M_PI).epsilon(1e-13));

    // identity: int <u,v>^k h(v) = lambda h(u), h a harmonic part
    SpherePoly g(3);
    g.add_term({2, 0, 0}, 1.0);
    g.add_term({1, 1, 0}, -0.7);
    g.add_term({0, 1, 1}, 0.4);
    for (int j : {1, 2}) {
        SpherePoly h = project(g, j);
        for (int k : {2, 3, 4, 5}) {
            double lam = funk_hecke_power_eigenvalue(k, j, 3);
            auto pts = sphere_point_set(3, 20, 321);
            for (const auto& u : pts) {
                auto lhs = power_kernel_integral(h, k, u);
                auto rhs = lam * h.eval(u);
                CHECK(std::abs(lhs - rhs) < 1e-9);
            }
        }
    }
}

TEST_CASE("degree cap") {
    SpherePoly f(2);
    CHECK_THROWS_AS(f.add_term({40, 30}, 1.0), std::domain_error);
    SpherePoly a = coordinate(2, 0, 33), b = coordinate(2, 1, 33);
    CHECK_THROWS_AS(a * b, std::domain_error);
}
