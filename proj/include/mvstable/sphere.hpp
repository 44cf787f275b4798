#pragma once

// Exact polynomial calculus on the unit sphere S^{d-1}: monomial integrals,
// L^2 inner products, harmonic subspace dimensions, and the degree-j
// projection of a polynomial through the zonal kernel.  All coefficients are
// exact rationals evaluated in double; no quadrature is involved.

#include <complex>
#include <map>
#include <vector>

namespace mvstable {

using MultiIndex = std::vector<int>;

int multi_index_degree(const MultiIndex& a);

class SpherePoly {
public:
    static constexpr int kMaxDegree = 64;

    explicit SpherePoly(int dim);
    SpherePoly(int dim, std::map<MultiIndex, std::complex<double>> terms);

    static SpherePoly constant(int dim, std::complex<double> c);
    static SpherePoly monomial(int dim, MultiIndex a, std::complex<double> c);

    int dim() const { return dim_; }
    int degree() const;           // -1 for the zero polynomial
    bool is_zero(double eps = 0.0) const;
    const std::map<MultiIndex, std::complex<double>>& terms() const { return terms_; }

    void add_term(const MultiIndex& a, std::complex<double> c);
    std::complex<double> coeff(const MultiIndex& a) const;

    std::complex<double> eval(const std::vector<double>& u) const;
    SpherePoly conjugate() const;
    SpherePoly real_part() const;
    double max_imag_coeff() const;

    SpherePoly& operator+=(const SpherePoly& o);
    SpherePoly& operator-=(const SpherePoly& o);
    SpherePoly& operator*=(std::complex<double> c);
    friend SpherePoly operator+(SpherePoly a, const SpherePoly& b) { return a += b; }
    friend SpherePoly operator-(SpherePoly a, const SpherePoly& b) { return a -= b; }
    friend SpherePoly operator*(SpherePoly a, std::complex<double> c) { return a *= c; }
    friend SpherePoly operator*(const SpherePoly& a, const SpherePoly& b);

private:
    void check_degree() const;
    int dim_;
    std::map<MultiIndex, std::complex<double>> terms_;
};

// dim H_{j,d}; exact.
long long harmonic_dim(int j, int d);

// Surface area of S^{d-1}.
double sphere_area(int d);

// Integral of v^a over S^{d-1}; 0 when any exponent is odd, otherwise the
// exact rational multiple of an integer power of pi.
double monomial_integral(const MultiIndex& a, int d);

// monomial_integral(a) / sphere_area(d); an exact rational.
double monomial_integral_over_area(const MultiIndex& a, int d);

// L^2(S^{d-1}) inner product <f, g> = int f conj(g) d omega; exact.
std::complex<double> inner_product(const SpherePoly& f, const SpherePoly& g);

double l2_norm_sq(const SpherePoly& f);

// Coefficients of the normalized Gegenbauer polynomial of degree j at index
// b = (d-2)/2, from constant to t^j (exact rationals; Chebyshev when d = 2).
std::vector<double> zonal_coefficients(int j, int d);

// j-th spherical harmonic of f; the zero polynomial when j > deg f.
SpherePoly project(const SpherePoly& f, int j);

struct HarmonicDecomp {
    std::vector<std::pair<int, SpherePoly>> parts; // (degree, component)
};

HarmonicDecomp decompose(const SpherePoly& f);

// Funk-Hecke eigenvalue of t -> t^k on H_{j,d}: nonzero only when k >= j and
// k - j is even.
double funk_hecke_power_eigenvalue(int k, int j, int d);

// Deterministic quasi-random point set on S^{d-1} (splitmix-fed normals).
std::vector<std::vector<double>> sphere_point_set(int d, int n, unsigned long long seed = 12345);

// max_u |f(u) - g(u)| over a deterministic point set of size
// >= 4 (deg+1)^2; the working notion of equality on the sphere.
double sphere_max_difference(const SpherePoly& f, const SpherePoly& g);
bool equal_on_sphere(const SpherePoly& f, const SpherePoly& g, double tol = 1e-9);

} // namespace mvstable
