#pragma once

// 1-D quadrature building blocks: Gauss-Legendre rules in double and
// double-double precision, Gauss-Chebyshev nodes, and an adaptive
// Gauss-Kronrod integrator.

#include <mvstable/dd.hpp>

#include <functional>
#include <vector>

namespace mvstable {

struct GaussRule {
    std::vector<double> x, w; // nodes and weights on [-1, 1]
};

struct GaussRuleDD {
    std::vector<dd> x, w;
};

// n-point Gauss-Legendre rule; exact for polynomials of degree <= 2n-1.
const GaussRule& gauss_legendre(int n);
const GaussRuleDD& gauss_legendre_dd(int n);

// n-point Gauss-Chebyshev rule for the weight (1-t^2)^{-1/2} on [-1,1];
// exact for polynomials of degree <= 2n-1 against that weight.
const GaussRuleDD& gauss_chebyshev_dd(int n);

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]; absolute/relative tolerance mix.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol = 1e-12, int max_depth = 48);

} // namespace mvstable
