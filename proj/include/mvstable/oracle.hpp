#pragma once

// Slow, independent ground truth: direct quadrature of the characteristic
// exponent integral and of the Fourier inversion integral, plus the KS test
// helper.  Used by tests and the `verify` command only.

#include <mvstable/spectral.hpp>

#include <complex>
#include <functional>
#include <vector>

namespace mvstable {

struct AccuracyNotMet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Direct quadrature of the spherical integral defining Phi(z), both alpha
// branches (the alpha = 1 kernel carries the t ln|t| term).  d in {2,3}.
std::complex<double> oracle_char_exponent(const StableModel& m, const std::vector<double>& z);

// Fourier-inversion density by zonal reduction: spherical quadrature of
// exp(-s^alpha V) against zonal kernels, then a 1-D Bessel-weighted radial
// integral split at the oscillation scale.  d in {2,3}.
double oracle_pdf(const StableModel& m, const std::vector<double>& x, double rel_tol = 1e-6);

struct OraclePdfOptions {
    int angular_n = 0;      // 0: defaults per dimension
    double refine = 1.0;    // >1: denser radial subdivision (self-consistency checks)
    int j_max = 48;
};

double oracle_pdf(const StableModel& m, const std::vector<double>& x, double rel_tol,
                  const OraclePdfOptions& opt);

// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
std::pair<double, double> ks_statistic(const std::vector<double>& sorted_samples,
                                       const std::function<double(double)>& cdf);

// Numeric zonal projection of the plane wave v -> exp(-i r <u,v>) evaluated
// at w; pins the harmonic twist convention (negative control flips it).
std::complex<double> plane_wave_projection(int d, int j, double r,
                                           const std::vector<double>& u,
                                           const std::vector<double>& w);
std::complex<double> plane_wave_projection_reference(int d, int j, double r,
                                                     const std::vector<double>& u,
                                                     const std::vector<double>& w,
                                                     bool flip_sign_convention = false);

} // namespace mvstable
