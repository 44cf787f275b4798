#include <mvstable/spectral.hpp>
#include <mvstable/special.hpp>

#include <cmath>
#include <cstdint>
#include <functional>

namespace mvstable {

namespace {


} // namespace

double weight_w(double alpha, int j, int d) {
    if (alpha <= 0.0 || d < 2 || j < 0)
        throw std::domain_error("weight_w: bad arguments");
    double lg = log_gamma(alpha + 1.0) + 0.5 * d * std::log(M_PI)
              - (alpha - 1.0) * M_LN2 - log_gamma((j + alpha + d) / 2.0);
    return std::exp(lg) * reciprocal_gamma((alpha - j) / 2.0 + 1.0);
}

dd weight_w_dd(double alpha, int j, int d) {
    dd a(alpha);
    dd lg = lgamma(a + dd(1.0)) + dd(0.5 * d) * log(ddc_const::pi)
          - (a - dd(1.0)) * ddc_const::ln2 - lgamma((dd(double(j)) + a + dd(double(d))) * dd(0.5));
    return exp(lg) * recip_gamma((a - dd(double(j))) * dd(0.5) + dd(1.0));
}

double beta_d_constant(int d) {
    auto s = [](int n) {
        double v = 0.0;
        for (int i = 1; i <= n; ++i) v += 1.0 / i;
        return v;
    };
    if (d % 2 == 0) return 1.0 - M_LN2 - 0.5 * s(d / 2);
    return 1.0 - s(d + 1) + 0.5 * s((d + 1) / 2);
}

double weight_wstar(int j, int d) {
    if (j < 1 || j % 2 == 0)
        throw std::domain_error("weight_wstar: requires odd j >= 1");
    if (d < 2) throw std::domain_error("weight_wstar: requires d >= 2");
    double pid2 = std::pow(M_PI, 0.5 * d);
    if (j == 1) return pid2 / gamma_pos(0.5 * d + 1.0) * beta_d_constant(d);
    double sign = ((j - 3) / 2) % 2 == 0 ? 1.0 : -1.0;
    return sign * pid2 * gamma_pos((j - 1) / 2.0) / (2.0 * gamma_pos((d + 1.0 + j) / 2.0));
}

std::complex<double> spectral_aj(double alpha, int j, int d) {
    double w = weight_w(alpha, j, d);
    if (j % 2 == 0) return w;
    return std::complex<double>(0.0, -std::tan(0.5 * M_PI * alpha) * w);
}

bool StableModel::symmetric(double tol) const {
    for (size_t j = 1; j < Pj.size(); j += 2)
        if (!Pj[j].is_zero(tol)) return false;
    return true;
}

std::vector<std::vector<double>> model_grid(int d, int degree) {
    int dp = std::min(d, 3);
    long n = std::max(4096L, long(100.0 * std::pow(degree + 1.0, dp)));
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    if (d == 2) {
        for (long i = 0; i < n; ++i) {
            double th = 2.0 * M_PI * i / double(n);
            pts.push_back({std::cos(th), std::sin(th)});
        }
    } else if (d == 3) {
        // Fibonacci spiral
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (long i = 0; i < n; ++i) {
            double z = 1.0 - (2.0 * i + 1.0) / double(n);
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = ga * i;
            pts.push_back({r * std::cos(th), r * std::sin(th), z});
        }
    } else {
        pts = sphere_point_set(d, n, 777);
    }
    return pts;
}

namespace {

// Projected Newton refinement (finite differences) of a scalar function on
// the sphere, from a starting point.
std::vector<double> polish_extremum(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> u, bool maximize, int iters = 20) {
    int d = int(u.size());
    const double h = 1e-5;
    auto normalize = [&](std::vector<double>& v) {
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        for (double& x : v) x /= n;
    };
    double sign = maximize ? 1.0 : -1.0;
    for (int it = 0; it < iters; ++it) {
        // tangent basis by Gram-Schmidt of coordinate directions
        std::vector<std::vector<double>> basis;
        for (int i = 0; i < d && int(basis.size()) < d - 1; ++i) {
            std::vector<double> e(d, 0.0);
            e[i] = 1.0;
            double du = 0.0;
            for (int k = 0; k < d; ++k) du += e[k] * u[k];
            for (int k = 0; k < d; ++k) e[k] -= du * u[k];
            for (const auto& b : basis) {
                double dot = 0.0;
                for (int k = 0; k < d; ++k) dot += e[k] * b[k];
                for (int k = 0; k < d; ++k) e[k] -= dot * b[k];
            }
            double nn = 0.0;
            for (double x : e) nn += x * x;
            if (nn < 1e-12) continue;
            nn = std::sqrt(nn);
            for (double& x : e) x /= nn;
            basis.push_back(e);
        }
        int m = int(basis.size());
        auto at = [&](const std::vector<double>& delta) {
            std::vector<double> v = u;
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < d; ++k) v[k] += delta[i] * basis[i][k];
            normalize(v);
            return sign * f(v);
        };
        std::vector<double> g(m);
        std::vector<std::vector<double>> H(m, std::vector<double>(m));
        std::vector<double> zero(m, 0.0);
        double f0 = at(zero);
        for (int i = 0; i < m; ++i) {
            std::vector<double> dp = zero, dm = zero;
            dp[i] = h;
            dm[i] = -h;
            double fp = at(dp), fm = at(dm);
            g[i] = (fp - fm) / (2 * h);
            H[i][i] = (fp - 2 * f0 + fm) / (h * h);
        }
        for (int i = 0; i < m; ++i)
            for (int k = i + 1; k < m; ++k) {
                std::vector<double> dpp = zero, dpm = zero, dmp = zero, dmm = zero;
                dpp[i] = h; dpp[k] = h;
                dpm[i] = h; dpm[k] = -h;
                dmp[i] = -h; dmp[k] = h;
                dmm[i] = -h; dmm[k] = -h;
                H[i][k] = H[k][i] = (at(dpp) - at(dpm) - at(dmp) + at(dmm)) / (4 * h * h);
            }
        // Newton step on the negated (minimization) problem; fall back to
        // gradient ascent when the Hessian is not usable.
        std::vector<double> step(m, 0.0);
        bool solved = false;
        if (m == 1 && H[0][0] < -1e-12) {
            step[0] = -g[0] / H[0][0];
            solved = true;
        } else if (m == 2) {
            double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
            if (det > 1e-18 && H[0][0] < 0) { // negative definite
                step[0] = -(H[1][1] * g[0] - H[0][1] * g[1]) / det;
                step[1] = -(H[0][0] * g[1] - H[1][0] * g[0]) / det;
                solved = true;
            }
        }
        if (!solved)
            for (int i = 0; i < m; ++i) step[i] = 0.2 * g[i];
        double cap = 0.3;
        double sn = 0.0;
        for (double x : step) sn += x * x;
        sn = std::sqrt(sn);
        if (sn > cap)
            for (double& x : step) x *= cap / sn;
        double f1 = at(step);
        if (f1 <= f0) {
            for (double& x : step) x *= 0.25;
            f1 = at(step);
            if (f1 <= f0) continue;
        }
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < m; ++i) u[k] += step[i] * basis[i][k];
        normalize(u);
    }
    return u;
}

struct GridExtrema {
    double inf_re, sup_abs, inf_abs, arg_sup, rho_sup, w_inf;
};

GridExtrema scan_direction_function(const SpherePoly& V, double alpha, int d, int degree) {
    auto grid = model_grid(d, degree);
    auto eval = [&](const std::vector<double>& u) { return V.eval(u); };
    GridExtrema g{1e300, 0.0, 1e300, 0.0, 0.0, 1e300};
    std::vector<double> best_inf_re, best_sup_abs, best_arg, best_rho, best_w;
    for (const auto& u : grid) {
        auto v = eval(u);
        double re = v.real(), ab = std::abs(v), ar = std::fabs(std::arg(v));
        double rho = ab * ab / (2.0 * re);
        if (re < g.inf_re) { g.inf_re = re; best_inf_re = u; }
        if (ab > g.sup_abs) { g.sup_abs = ab; best_sup_abs = u; }
        g.inf_abs = std::min(g.inf_abs, ab);
        if (ar > g.arg_sup) { g.arg_sup = ar; best_arg = u; }
        if (re > 0 && rho > g.rho_sup) { g.rho_sup = rho; best_rho = u; }
        if (alpha > 1.0 && re > 0) {
            double w = std::pow(ab, -2.0 / alpha) * std::cos(2.0 / alpha * std::arg(v));
            if (w < g.w_inf) { g.w_inf = w; best_w = u; }
        }
    }
    auto re_f = [&](const std::vector<double>& u) { return eval(u).real(); };
    auto abs_f = [&](const std::vector<double>& u) { return std::abs(eval(u)); };
    auto arg_f = [&](const std::vector<double>& u) { return std::fabs(std::arg(eval(u))); };
    auto rho_f = [&](const std::vector<double>& u) {
        auto v = eval(u);
        return std::norm(v) / (2.0 * v.real());
    };
    if (!best_inf_re.empty()) g.inf_re = std::min(g.inf_re, re_f(polish_extremum(re_f, best_inf_re, false)));
    if (!best_sup_abs.empty()) g.sup_abs = std::max(g.sup_abs, abs_f(polish_extremum(abs_f, best_sup_abs, true)));
    if (!best_arg.empty()) g.arg_sup = std::max(g.arg_sup, arg_f(polish_extremum(arg_f, best_arg, true)));
    if (!best_rho.empty()) g.rho_sup = std::max(g.rho_sup, rho_f(polish_extremum(rho_f, best_rho, true)));
    if (alpha > 1.0 && !best_w.empty()) {
        auto w_f = [&](const std::vector<double>& u) {
            auto v = eval(u);
            return std::pow(std::abs(v), -2.0 / alpha) * std::cos(2.0 / alpha * std::arg(v));
        };
        g.w_inf = std::min(g.w_inf, w_f(polish_extremum(w_f, best_w, false)));
    }
    return g;
}

std::optional<ZonalStructure> detect_zonal(const SpherePoly& P) {
    int d = P.dim();
    if (P.degree() > 1) return std::nullopt;
    double c = P.coeff(MultiIndex(d, 0)).real();
    std::vector<double> t(d, 0.0);
    double norm = 0.0;
    for (int i = 0; i < d; ++i) {
        MultiIndex a(d, 0);
        a[i] = 1;
        t[i] = P.coeff(a).real();
        norm += t[i] * t[i];
    }
    norm = std::sqrt(norm);
    ZonalStructure z;
    if (norm < 1e-14) {
        z.theta.assign(d, 0.0);
        z.theta[0] = 1.0;
        z.fcoef = {c};
    } else {
        for (int i = 0; i < d; ++i) t[i] /= norm;
        z.theta = t;
        z.fcoef = {c, norm};
    }
    return z;
}

} // namespace

StableModel build_model(double alpha, int d, const SpherePoly& P,
                        std::optional<double> R_override) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::domain_error("build_model: requires alpha in (0,2)");
    if (alpha != 1.0 && std::fabs(alpha - 1.0) < 1e-6)
        throw std::domain_error("build_model: alpha too close to 1; use alpha = 1 exactly");
    if (P.dim() != d) throw std::domain_error("build_model: dimension mismatch");
    if (P.max_imag_coeff() > 1e-12) throw InvalidDensity("build_model: P must be real");
    if (P.is_zero(0.0)) throw InvalidDensity("build_model: P must not be 0");

    StableModel m;
    m.alpha = alpha;
    m.d = d;
    m.P = P.real_part();

    // density validation grid (>= 10 (deg+1)^2 points)
    {
        auto pts = sphere_point_set(d, std::max(256, 10 * (P.degree() + 1) * (P.degree() + 1)), 4242);
        for (const auto& u : pts)
            if (m.P.eval(u).real() < -1e-10)
                throw InvalidDensity("build_model: P negative on the sphere");
    }

    int q = m.P.degree();
    m.Pj.assign(q + 1, SpherePoly(d));
    for (int j = 0; j <= q; ++j) m.Pj[j] = project(m.P, j);
    m.lambda_total = inner_product(m.P, SpherePoly::constant(d, 1.0)).real();

    m.V = SpherePoly(d);
    if (alpha != 1.0) {
        for (int j = 0; j <= q; ++j) {
            if (m.Pj[j].is_zero(1e-15)) continue;
            SpherePoly t = m.Pj[j];
            t *= spectral_aj(alpha, j, d);
            m.V += t;
        }
        auto g = scan_direction_function(m.V, alpha, d, q);
        m.inf_re_v = g.inf_re;
        m.sup_abs_v = g.sup_abs;
        m.inf_abs_v = g.inf_abs;
        m.arg_sup = g.arg_sup;
        if (m.inf_re_v <= 1e-10)
            throw NondegenerateViolation("build_model: inf Re V <= 0 (degenerate)");
        if (alpha > 1.0) {
            m.rho0 = g.rho_sup;
            m.R = R_override.value_or(2.0 * m.rho0);
            if (m.R <= m.rho0)
                throw std::domain_error("build_model: R_override must exceed rho0");
            m.Vstar = SpherePoly::constant(d, m.R) - m.V;
            // sup |R - V| < R must hold for the expansion to converge
            double sup_star = 0.0;
            for (const auto& u : model_grid(d, q))
                sup_star = std::max(sup_star, std::abs(m.Vstar.eval(u)));
            m.sup_abs_vstar = sup_star;
            if (sup_star >= m.R)
                throw std::domain_error("build_model: sup|R - V| >= R");
            m.w_inf_re_v_pow = g.w_inf;
        }
    } else {
        // alpha = 1: real part uses w_j(1) on even degrees; imaginary part the
        // log-kernel weights.  Kept as two polys inside V: V = Ve + i*Vo with
        // Phi(z) = |z| [Ve(u) + (2/pi) i Vo(u)] + i |z| ln|z| kappa * P_1(u).
        for (int j = 0; j <= q; j += 2) {
            if (m.Pj[j].is_zero(1e-15)) continue;
            SpherePoly t = m.Pj[j];
            t *= std::complex<double>(weight_w(1.0, j, d), 0.0);
            m.V += t;
        }
        for (int j = 1; j <= q; j += 2) {
            if (m.Pj[j].is_zero(1e-15)) continue;
            SpherePoly t = m.Pj[j];
            t *= std::complex<double>(0.0, weight_wstar(j, d));
            m.V += t;
        }
        double inf_re = 1e300;
        for (const auto& u : model_grid(d, q))
            inf_re = std::min(inf_re, m.V.eval(u).real());
        m.inf_re_v = inf_re;
        if (inf_re <= 1e-10)
            throw NondegenerateViolation("build_model: degenerate at alpha = 1");
    }
    m.zonal = detect_zonal(m.P);
    return m;
}

CharExponentValue char_exponent(const StableModel& m, const std::vector<double>& z) {
    if (int(z.size()) != m.d) throw std::domain_error("char_exponent: dimension mismatch");
    double r2 = 0.0;
    for (double v : z) r2 += v * v;
    double r = std::sqrt(r2);
    CharExponentValue out;
    out.z = z;
    if (r == 0.0) {
        out.value = 0.0;
        return out;
    }
    std::vector<double> u(z);
    for (double& v : u) v /= r;
    if (m.alpha != 1.0) {
        out.value = std::pow(r, m.alpha) * m.V.eval(u);
        return out;
    }
    std::complex<double> ve = 0.0, vo = 0.0;
    for (size_t j = 0; j < m.Pj.size(); ++j) {
        if (m.Pj[j].is_zero(1e-15)) continue;
        if (j % 2 == 0)
            ve += weight_w(1.0, int(j), m.d) * m.Pj[j].eval(u);
        else
            vo += weight_wstar(int(j), m.d) * m.Pj[j].eval(u);
    }
    std::complex<double> p1 = m.Pj.size() > 1 ? m.Pj[1].eval(u) : 0.0;
    double kappa = 2.0 * std::pow(M_PI, 0.5 * m.d - 1.0) / gamma_pos(0.5 * m.d + 1.0);
    out.value = r * (ve + std::complex<double>(0.0, 2.0 / M_PI) * vo)
              + std::complex<double>(0.0, r * std::log(r) * kappa) * p1;
    return out;
}

HarmonicCoeffTable harmonic_coeffs(const StableModel& m, CoeffKind kind, int k_max) {
    if (m.alpha == 1.0)
        throw std::domain_error("harmonic_coeffs: requires alpha != 1");
    if (kind == CoeffKind::Vstar && !(m.alpha > 1.0))
        throw std::domain_error("harmonic_coeffs: Vstar requires alpha > 1");
    const SpherePoly& base = kind == CoeffKind::V ? m.V : m.Vstar;
    HarmonicCoeffTable t;
    t.kind = kind;
    t.k_max = k_max;
    t.q = std::max(m.P.degree(), 0);
    SpherePoly area_one = SpherePoly::constant(m.d, 1.0);
    SpherePoly pk = area_one;
    t.moments.push_back(inner_product(pk, area_one));
    auto grid = sphere_point_set(m.d, 128, 99);
    for (int k = 1; k <= k_max; ++k) {
        if (t.q * k > SpherePoly::kMaxDegree)
            throw BudgetExceeded("harmonic_coeffs: polynomial degree cap reached");
        pk = pk * base;
        if (int(pk.terms().size()) > 200000)
            throw BudgetExceeded("harmonic_coeffs: term budget exceeded");
        t.moments.push_back(inner_product(pk, area_one));
        for (int j = 0; j <= t.q * k; ++j) {
            SpherePoly pj = project(pk, j);
            if (pj.is_zero(1e-300)) continue;
            std::complex<double> tw(1.0, 0.0);
            switch (j % 4) {
                case 0: tw = {1.0, 0.0}; break;
                case 1: tw = {0.0, -1.0}; break;
                case 2: tw = {-1.0, 0.0}; break;
                default: tw = {0.0, 1.0}; break;
            }
            pj *= tw;
            // entries are real on the sphere
            double scale = 0.0;
            for (const auto& u : grid) {
                auto v = pj.eval(u);
                scale = std::max(scale, std::abs(v));
            }
            for (const auto& u : grid) {
                auto v = pj.eval(u);
                if (std::fabs(v.imag()) > 1e-8 * std::max(1.0, scale))
                    throw std::runtime_error("harmonic_coeffs: entry not real on the sphere");
            }
            t.S.emplace(std::make_pair(j, k), std::move(pj));
        }
    }
    return t;
}

double arg_bound_check(const StableModel& m) {
    if (m.alpha == 1.0)
        throw std::domain_error("arg_bound_check: requires alpha != 1");
    double bound = 0.5 * M_PI * std::min(m.alpha, 2.0 - m.alpha);
    if (m.arg_sup >= bound)
        throw std::runtime_error("arg_bound_check: |arg V| exceeds the spectral bound");
    return m.arg_sup;
}

double recovery_diagnostic(const StableModel& m, int J) {
    if (m.alpha == 1.0)
        throw std::domain_error("recovery_diagnostic: requires alpha != 1");
    double s = 0.0;
    for (int j = 1; j <= J && j < int(m.Pj.size()); ++j) {
        if (m.Pj[j].is_zero(1e-15)) continue;
        double aj2 = std::norm(spectral_aj(m.alpha, j, m.d));
        s += std::pow(double(j), 2.0 * m.alpha + m.d) * aj2 * l2_norm_sq(m.Pj[j]);
    }
    return s;
}

ddc ZonalDirectionFunction::eval(dd t) const {
    if (cheb_coeffs.empty()) return ddc(dd(0.0));
    ddc acc = cheb_coeffs[0];
    if (cheb_coeffs.size() == 1) return acc;
    dd prev2(1.0), prev = t;
    acc += cheb_coeffs[1] * prev;
    double b = 0.5 * (d - 2);
    for (size_t j = 2; j < cheb_coeffs.size(); ++j) {
        dd cur = gegenbauer_tilde_step(b, int(j), t, prev, prev2);
        acc += cheb_coeffs[j] * cur;
        prev2 = prev;
        prev = cur;
    }
    return acc;
}

ddc ZonalDirectionFunction::eval_star(dd t) const {
    ddc v = eval(t);
    return ddc(R - v.re, -v.im);
}

ZonalDirectionFunction make_zonal_direction(const StableModel& m) {
    if (!m.zonal) throw std::domain_error("make_zonal_direction: model is not zonal");
    if (m.alpha == 1.0) throw std::domain_error("make_zonal_direction: requires alpha != 1");
    const auto& z = *m.zonal;
    int d = m.d;
    int deg = int(z.fcoef.size()) - 1;
    ZonalDirectionFunction f;
    f.d = d;
    f.alpha = m.alpha;
    f.R = dd(m.R);
    f.cheb_coeffs.assign(deg + 1, ddc(dd(0.0)));
    dd area = dd(2.0) * exp(dd(0.5 * d) * log(ddc_const::pi) - lgamma(dd(0.5 * d)));
    dd tan_half = sin(ddc_const::half_pi * dd(m.alpha)) / cos(ddc_const::half_pi * dd(m.alpha));
    for (int j = 0; j <= deg; ++j) {
        // lambda_j = sum_l f_l w_j(l), nonzero for l >= j with matching parity
        dd lam(0.0);
        for (int l = j; l <= deg; l += 2) {
            if (z.fcoef[l] == 0.0) continue;
            // w_j(l) via the closed form with integer alpha = l
            dd lg = lgamma(dd(double(l) + 1.0)) + dd(0.5 * d) * log(ddc_const::pi)
                  - dd(double(l) - 1.0) * ddc_const::ln2
                  - lgamma(dd(0.5 * (l + j + d))) - lgamma(dd(0.5 * (l - j) + 1.0));
            lam += dd(z.fcoef[l]) * exp(lg);
        }
        if (lam.hi == 0.0) continue;
        dd wj = weight_w_dd(m.alpha, j, d);
        dd cjd(double(harmonic_dim(j, d)));
        dd mag = cjd * lam / area * wj;
        if (j % 2 == 0)
            f.cheb_coeffs[j] = ddc(mag);
        else
            f.cheb_coeffs[j] = ddc(dd(0.0), -tan_half * mag);
    }
    return f;
}

} // namespace mvstable
