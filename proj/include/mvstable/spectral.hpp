#pragma once

// The distribution model: Funk-Hecke weights, the direction function V with
// Phi(z) = |z|^alpha V(u_z), harmonic coefficient tables of powers of V, and
// the nondegeneracy / argument diagnostics.

#include <mvstable/dd.hpp>
#include <mvstable/sphere.hpp>

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mvstable {

struct NondegenerateViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidDensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// w_j(alpha): Funk-Hecke eigenvalue of t -> |t|^alpha sgn(t)^{j mod 2} on
// H_{j,d}; exact zero at the Gamma poles (alpha = 1, odd j >= 3).
double weight_w(double alpha, int j, int d);
dd weight_w_dd(double alpha, int j, int d);

// Companion weight for the t ln|t| kernel at alpha = 1; odd j only.
double weight_wstar(int j, int d);

// Harmonic-sum constant in weight_wstar(1, d).
double beta_d_constant(int d);

// Coefficient a_j multiplying proj_j P in V.
std::complex<double> spectral_aj(double alpha, int j, int d);

struct CharExponentValue {
    std::complex<double> value;
    std::vector<double> z;
};

// P expressed as sum_l f[l] <theta, u>^l when that structure exists; enables
// the extended-precision 1-D evaluators.
struct ZonalStructure {
    std::vector<double> theta;   // unit pole
    std::vector<double> fcoef;   // f[l] coefficients in t = <theta,u>
};

class StableModel {
public:
    double alpha = 0.0;
    int d = 0;
    SpherePoly P;
    std::vector<SpherePoly> Pj;   // harmonic components, index = degree
    SpherePoly V;                 // complex direction function (alpha != 1)
    SpherePoly Vstar;             // R - V (alpha > 1)

    double lambda_total = 0.0;    // integral of P over the sphere
    double inf_re_v = 0.0;
    double sup_abs_v = 0.0;
    double inf_abs_v = 0.0;
    double arg_sup = 0.0;
    double rho0 = 0.0;            // alpha > 1
    double R = 0.0;               // alpha > 1: expansion center, default 2*rho0
    double sup_abs_vstar = 0.0;   // alpha > 1
    double w_inf_re_v_pow = 0.0;  // inf Re(V^{-2/alpha}), alpha > 1

    std::optional<ZonalStructure> zonal;

    bool symmetric(double tol = 1e-12) const; // all odd-degree P_j vanish

    StableModel() : P(2), V(2), Vstar(2) {}
};

// Validates P (real, nonnegative on a grid, not 0), assembles V and the
// model diagnostics.  alpha in (0,2); values within 1e-6 of 1 other than 1
// itself are rejected.
StableModel build_model(double alpha, int d, const SpherePoly& P,
                        std::optional<double> R_override = std::nullopt);

CharExponentValue char_exponent(const StableModel& m, const std::vector<double>& z);

enum class CoeffKind { V, Vstar };

// (j,k) -> S_{j,k} = Re[(-i)^j proj_j(V^k)] as exact polynomials, together
// with the sphere integrals of V^k.
struct HarmonicCoeffTable {
    CoeffKind kind = CoeffKind::V;
    int k_max = 0;
    int q = 0; // degree of P
    std::map<std::pair<int, int>, SpherePoly> S;
    std::vector<std::complex<double>> moments; // integral of V^k, k = 0..k_max

    const SpherePoly* entry(int j, int k) const {
        auto it = S.find({j, k});
        return it == S.end() ? nullptr : &it->second;
    }
};

HarmonicCoeffTable harmonic_coeffs(const StableModel& m, CoeffKind kind, int k_max);

// sup |arg V| over the validation grid; throws if the spectral inequality
// (pi/2) min(alpha, 2-alpha) is violated.
double arg_bound_check(const StableModel& m);

// Partial sum  sum_{j<=J} j^{2 alpha + d} ||proj_j V||^2; stabilizes at
// J >= deg P.
double recovery_diagnostic(const StableModel& m, int J);

// Deterministic evaluation grid on S^{d-1} used for inf/sup diagnostics.
std::vector<std::vector<double>> model_grid(int d, int degree);

// --- extended-precision zonal evaluation -----------------------------------

// For zonal models V is a function of t = <theta,u>; this object evaluates
// V(t) (and R - V(t)) in double-double precision through the Gegenbauer series.
struct ZonalDirectionFunction {
    int d = 0;
    double alpha = 0.0;
    std::vector<ddc> cheb_coeffs; // coefficients of C~_j(t), j = 0..deg
    dd R{0.0};

    ddc eval(dd t) const;          // V(t)
    ddc eval_star(dd t) const;     // R - V(t)
};

// Builds the dd zonal evaluator; requires m.zonal.
ZonalDirectionFunction make_zonal_direction(const StableModel& m);

} // namespace mvstable
