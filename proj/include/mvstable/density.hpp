#pragma once

// Density evaluation: the inverse-power harmonic series for alpha < 1, the
// two dual series for alpha > 1, radial densities, origin and tail
// expansions, and the fully explicit closed forms for a linear spectral
// density.  Every series evaluator reports its value together with a
// truncation-plus-roundoff bound.

#include <mvstable/spectral.hpp>

#include <functional>
#include <memory>
#include <vector>

namespace mvstable {

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeriesResult {
    double value = 0.0;
    double truncation_bound = 0.0; // analytic tail majorant + precision floor
    int terms_used = 0;
    bool converged = false;
};

struct DensityQuery {
    std::vector<double> x;
    double tolerance = 1e-8; // absolute
    int k_max = 200;
};

// --- alpha in (0,1) ---------------------------------------------------------

// Pointwise density by the inverse-power harmonic series; |x| > 0 required.
SeriesResult pdf_lt1(const StableModel& m, const DensityQuery& q);

// Density of |X|.
SeriesResult pdf_lt1_radial(const StableModel& m, double r, double tolerance,
                            int k_max = 400);

struct ProjSeriesResult {
    SpherePoly component;
    double truncation_bound = 0.0;
    int terms_used = 0;
    bool converged = false;
};

// Degree-j harmonic of the density on the sphere of radius r, as a
// polynomial in the direction.
ProjSeriesResult proj_density_lt1(const StableModel& m, int j, double r,
                                  double tolerance, int k_max = 200);

// Taylor-type expansion of the density at the origin, truncated at degree n;
// exact value of g(0) at x = 0.
double pdf_origin_expansion(const StableModel& m, const std::vector<double>& x, int n);

// Estimated magnitude of the first omitted origin-expansion term; serves as
// the working accuracy measure of pdf_origin_expansion.
double pdf_origin_expansion_error(const StableModel& m, double r, int n);

// --- alpha in (1,2) ---------------------------------------------------------

// Positive-power series with numerically projected negative powers of V.
SeriesResult pdf_gt1_power(const StableModel& m, const DensityQuery& q);

// Recentered series: all harmonic coefficients in closed form through
// powers of R - V.
SeriesResult pdf_gt1_expanded(const StableModel& m, const DensityQuery& q);

enum class RadialRep { power, expanded, subordination };

struct RngStream; // sampler.hpp

SeriesResult pdf_gt1_radial(const StableModel& m, double r, RadialRep rep,
                            double tolerance, int k_max = 400,
                            RngStream* rng = nullptr, long mc_budget = 1000000);

// n-term large-radius expansion of the degree-j harmonic of the density on
// the sphere of radius r (a polynomial in the direction).
SpherePoly tail_expansion_gt1(const StableModel& m, int j, double r, int n);

// Radial version: r^{d-1} A(S^{d-1}) times the degree-0 expansion.
double tail_radial_gt1(const StableModel& m, double r, int n);

// Magnitude of the first omitted term of tail_radial_gt1.
double tail_radial_gt1_error(const StableModel& m, double r, int n);

// --- linear spectral density, independent closed-form route -----------------

SeriesResult linear_model_pdf(double c, const std::vector<double>& theta, double alpha,
                              const std::vector<double>& x, double tolerance,
                              int k_max = 2000);

// --- radial distribution (used by verification and KS tests) ----------------

// Piecewise radial CDF: origin expansion near 0, series in the bulk, tail
// expansion beyond; usable for both alpha branches (alpha != 1).
class RadialCdf {
public:
    RadialCdf(const StableModel& m, double tolerance = 1e-5);
    double operator()(double r) const;
    double pdf(double r) const;
    double bulk_upper() const { return r_hi_; }

private:
    double interp(double r) const;
    std::vector<double> grid_r_, grid_cdf_, grid_pdf_;
    double r_hi_ = 0.0;
    std::vector<std::pair<double, double>> tail_terms_; // (coef, exponent) of pdf tail
    double cdf_hi_ = 0.0;
};

// Normalization check: integral of the radial density over (0, inf).
double radial_total_mass(const StableModel& m, double tolerance = 1e-4);

// --- incremental term streams (series-method sampling) ----------------------

// Partial sums with certified remainder bounds, advanced one term at a time.
class TermStream {
public:
    virtual ~TermStream() = default;
    virtual void advance() = 0;
    virtual double partial() const = 0;
    virtual double remainder_bound() const = 0;
    virtual bool exhausted() const { return false; }
};

// Stream of the alpha < 1 pointwise series at x (used by the sampler).
std::unique_ptr<TermStream> lt1_series_stream(const StableModel& m,
                                              const std::vector<double>& x);

// Stream of the alpha > 1 radial recentered series at r.
std::unique_ptr<TermStream> gt1_radial_stream(const StableModel& m, double r);

// Stream of the direction-stage series at fixed radius (alpha > 1): the
// conditional density of the direction against the uniform measure, up to a
// constant factor, evaluated at u.
std::unique_ptr<TermStream> gt1_direction_stream(const StableModel& m, double r,
                                                 const std::vector<double>& u);

// Constant dominating bound for the direction stage at radius r.
double gt1_direction_envelope(const StableModel& m, double r);

} // namespace mvstable
