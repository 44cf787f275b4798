#include <mvstable/oracle.hpp>
#include <mvstable/quadrature.hpp>
#include <mvstable/special.hpp>

#include <algorithm>
#include <cmath>

namespace mvstable {

namespace {

using cplx = std::complex<double>;

std::vector<double> unit_of(const std::vector<double>& z, double& r) {
    r = 0.0;
    for (double v : z) r += v * v;
    r = std::sqrt(r);
    std::vector<double> u = z;
    if (r > 0.0)
        for (double& v : u) v /= r;
    return u;
}

// orthonormal completion of a unit vector in R^3
void frame3(const std::vector<double>& u, std::vector<double>& e, std::vector<double>& f) {
    std::vector<double> w = std::fabs(u[0]) < 0.9 ? std::vector<double>{1.0, 0.0, 0.0}
                                                  : std::vector<double>{0.0, 1.0, 0.0};
    double du = w[0] * u[0] + w[1] * u[1] + w[2] * u[2];
    e = {w[0] - du * u[0], w[1] - du * u[1], w[2] - du * u[2]};
    double n = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    for (double& x : e) x /= n;
    f = {u[1] * e[2] - u[2] * e[1], u[2] * e[0] - u[0] * e[2], u[0] * e[1] - u[1] * e[0]};
}

cplx integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                       double abs_tol) {
    double re = integrate_adaptive([&](double t) { return f(t).real(); }, a, b, abs_tol);
    double im = integrate_adaptive([&](double t) { return f(t).imag(); }, a, b, abs_tol);
    return {re, im};
}

} // namespace

std::complex<double> oracle_char_exponent(const StableModel& m, const std::vector<double>& z) {
    double r;
    auto uz = unit_of(z, r);
    if (r == 0.0) return 0.0;
    double alpha = m.alpha;
    double tn = std::tan(0.5 * M_PI * alpha);
    if (m.d == 2) {
        double phi_z = std::atan2(uz[1], uz[0]);
        auto kern = [&](double phi) -> cplx {
            std::vector<double> v{std::cos(phi), std::sin(phi)};
            double t = r * (uz[0] * v[0] + uz[1] * v[1]);
            double p = m.P.eval(v).real();
            if (alpha != 1.0) {
                double a = std::pow(std::fabs(t), alpha);
                return cplx(a, -tn * a * (t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0)) * p;
            }
            double lg = t == 0.0 ? 0.0 : t * std::log(std::fabs(t));
            return cplx(std::fabs(t), 2.0 / M_PI * lg) * p;
        };
        // kinks where <z,v> = 0
        double tol = 1e-12 * std::pow(r, alpha) * std::max(1.0, m.lambda_total);
        double a1 = phi_z + 0.5 * M_PI, a2 = phi_z + 1.5 * M_PI;
        return integrate_complex(kern, a1, a2, tol)
             + integrate_complex(kern, a2, a1 + 2.0 * M_PI, tol);
    }
    if (m.d != 3) throw std::domain_error("oracle_char_exponent: d in {2,3}");
    std::vector<double> e, f;
    frame3(uz, e, f);
    int q = std::max(m.P.degree(), 0);
    int nphi = std::max(16, 4 * (q + 1));
    // phi-average of P at fixed polar angle; trapezoid is exact for it
    auto p_avg = [&](double ct, double st) {
        double acc = 0.0;
        for (int i = 0; i < nphi; ++i) {
            double ph = 2.0 * M_PI * i / nphi;
            std::vector<double> v(3);
            for (int k = 0; k < 3; ++k)
                v[k] = st * (std::cos(ph) * e[k] + std::sin(ph) * f[k]) + ct * uz[k];
            acc += m.P.eval(v).real();
        }
        return acc * (2.0 * M_PI / nphi);
    };
    auto kern = [&](double th) -> cplx {
        double ct = std::cos(th), st = std::sin(th);
        double t = r * ct;
        double pa = p_avg(ct, st);
        if (alpha != 1.0) {
            double a = std::pow(std::fabs(t), alpha);
            return cplx(a, -tn * a * (t > 0 ? 1.0 : t < 0 ? -1.0 : 0.0)) * pa * st;
        }
        double lg = t == 0.0 ? 0.0 : t * std::log(std::fabs(t));
        return cplx(std::fabs(t), 2.0 / M_PI * lg) * pa * st;
    };
    double tol = 1e-12 * std::pow(r, alpha) * std::max(1.0, m.lambda_total);
    return integrate_complex(kern, 0.0, 0.5 * M_PI, tol)
         + integrate_complex(kern, 0.5 * M_PI, M_PI, tol);
}

namespace {

// Angular stage of the inversion oracle: projections of exp(-s^alpha V)
// onto degrees j = 0..jmax at a fixed direction u.
struct AngularProjector {
    int d;
    int jmax;
    std::vector<double> phis;          // d = 2
    double phi_u = 0.0;
    std::vector<double> ct, st, gw;    // d = 3: Gauss-Legendre in cos(theta)
    int nphi = 0;
    std::vector<std::vector<cplx>> vgrid;
    std::vector<cplx> v_on_circle;
    std::vector<double> cjd_over_area;

    AngularProjector(const StableModel& m, const std::vector<double>& u, int jmax_, int ang_n) {
        d = m.d;
        jmax = jmax_;
        cjd_over_area.resize(jmax + 1);
        for (int j = 0; j <= jmax; ++j)
            cjd_over_area[j] = double(harmonic_dim(j, d)) / sphere_area(d);
        if (d == 2) {
            int n = ang_n > 0 ? ang_n : 256;
            phis.resize(n);
            v_on_circle.resize(n);
            for (int i = 0; i < n; ++i) {
                phis[i] = 2.0 * M_PI * i / n;
                std::vector<double> v{std::cos(phis[i]), std::sin(phis[i])};
                v_on_circle[i] = m.V.eval(v);
            }
            phi_u = std::atan2(u[1], u[0]);
        } else {
            int nt = ang_n > 0 ? ang_n : 48;
            nphi = 2 * nt;
            const auto& gl = gauss_legendre(nt);
            ct = gl.x;
            gw = gl.w;
            st.resize(nt);
            std::vector<double> e, f;
            frame3(u, e, f);
            vgrid.assign(nt, std::vector<cplx>(nphi));
            for (int i = 0; i < nt; ++i) {
                st[i] = std::sqrt(std::max(0.0, 1.0 - ct[i] * ct[i]));
                for (int p = 0; p < nphi; ++p) {
                    double ph = 2.0 * M_PI * p / nphi;
                    std::vector<double> v(3);
                    for (int k = 0; k < 3; ++k)
                        v[k] = st[i] * (std::cos(ph) * e[k] + std::sin(ph) * f[k]) + ct[i] * u[k];
                    vgrid[i][p] = m.V.eval(v);
                }
            }
        }
    }

    void project(double salpha, std::vector<cplx>& out) const {
        out.assign(jmax + 1, cplx(0.0));
        if (d == 2) {
            int n = int(phis.size());
            std::vector<cplx> fv(n);
            for (int i = 0; i < n; ++i) fv[i] = std::exp(-salpha * v_on_circle[i]);
            for (int j = 0; j <= jmax; ++j) {
                cplx acc = 0.0;
                for (int i = 0; i < n; ++i)
                    acc += fv[i] * std::cos(j * (phi_u - phis[i]));
                acc *= 2.0 * M_PI / n;
                out[j] = (j == 0 ? acc / (2.0 * M_PI) : acc / M_PI);
            }
        } else {
            int nt = int(ct.size());
            std::vector<cplx> favg(nt, cplx(0.0));
            for (int i = 0; i < nt; ++i) {
                cplx acc = 0.0;
                for (int p = 0; p < nphi; ++p) acc += std::exp(-salpha * vgrid[i][p]);
                favg[i] = acc * (2.0 * M_PI / nphi);
            }
            std::vector<double> prev2(nt, 1.0), prev(nt), cur(nt);
            for (int i = 0; i < nt; ++i) prev[i] = ct[i];
            for (int j = 0; j <= jmax; ++j) {
                const std::vector<double>* zj;
                if (j == 0)
                    zj = &prev2;
                else if (j == 1)
                    zj = &prev;
                else {
                    for (int i = 0; i < nt; ++i)
                        cur[i] = gegenbauer_tilde_step(0.5, j, ct[i], prev[i], prev2[i]);
                    prev2.swap(prev);
                    prev.swap(cur);
                    zj = &prev;
                }
                cplx acc = 0.0;
                for (int i = 0; i < nt; ++i) acc += gw[i] * (*zj)[i] * favg[i];
                out[j] = cjd_over_area[j] * acc;
            }
        }
    }
};

} // namespace

double oracle_pdf(const StableModel& m, const std::vector<double>& x, double rel_tol) {
    return oracle_pdf(m, x, rel_tol, OraclePdfOptions{});
}

double oracle_pdf(const StableModel& m, const std::vector<double>& x, double rel_tol,
                  const OraclePdfOptions& opt) {
    if (m.alpha == 1.0)
        throw std::domain_error("oracle_pdf: alpha != 1 required");
    if (m.d != 2 && m.d != 3)
        throw std::domain_error("oracle_pdf: d in {2,3}");
    double r;
    auto u = unit_of(x, r);
    double alpha = m.alpha;
    double b = 0.5 * m.d - 1.0;

    double s_max = std::pow(38.0 / m.inf_re_v, 1.0 / alpha);

    if (r == 0.0) {
        auto grid = model_grid(m.d, std::max(m.P.degree(), 0));
        std::vector<cplx> vg(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) vg[i] = m.V.eval(grid[i]);
        auto f = [&](double s) {
            double sa = std::pow(s, alpha);
            cplx acc = 0.0;
            for (const auto& v : vg) acc += std::exp(-sa * v);
            return std::pow(s, m.d - 1.0) * (acc.real() / double(vg.size()));
        };
        double integral = integrate_adaptive(f, 0.0, s_max, 1e-14, 1e-11);
        return integral * sphere_area(m.d) * std::pow(2.0 * M_PI, -m.d);
    }

    int jmax = opt.j_max;
    AngularProjector proj(m, u, jmax, opt.angular_n);

    double panel = std::min(M_PI / r, s_max / 48.0) / opt.refine;
    long n_panels = long(std::ceil(s_max / panel));
    if (n_panels > 40000)
        throw AccuracyNotMet("oracle_pdf: oscillation budget exceeded; |x| too large");

    // geometric refinement of the first panel (s^alpha cusp at s = 0)
    std::vector<std::pair<double, double>> panels;
    {
        double prev = 0.0;
        for (int i = 23; i >= 0; --i) {
            double hi = panel / std::pow(2.0, i);
            panels.emplace_back(prev, hi);
            prev = hi;
        }
        for (long i = 1; i < n_panels; ++i)
            panels.emplace_back(i * panel, std::min((i + 1) * panel, s_max));
    }

    static const double xk[15] = {
        -0.991455371120813, -0.949107912342759, -0.864864423359769,
        -0.741531185599394, -0.586087235467691, -0.405845151377397,
        -0.207784955007898, 0.0,                0.207784955007898,
        0.405845151377397,  0.586087235467691,  0.741531185599394,
        0.864864423359769,  0.949107912342759,  0.991455371120813};
    static const double wk[15] = {
        0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715526, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728, 0.204432940075298,
        0.190350578064785, 0.169004726639267, 0.140653259715526,
        0.104790010322250, 0.063092092629979, 0.022935322010529};
    static const double wg7[15] = {
        0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
        0.381830050505119, 0.0, 0.417959183673469, 0.0,
        0.381830050505119, 0.0, 0.279705391489277, 0.0,
        0.129484966168870, 0.0};

    std::vector<cplx> acc_j(jmax + 1, cplx(0.0));
    std::vector<cplx> err_j(jmax + 1, cplx(0.0));
    std::vector<std::vector<cplx>> node_c(15);
    std::vector<double> node_s(15);
    for (const auto& [a, bb] : panels) {
        double c = 0.5 * (a + bb), h = 0.5 * (bb - a);
        for (int i = 0; i < 15; ++i) {
            double s = c + h * xk[i];
            node_s[i] = s;
            proj.project(std::pow(s, alpha), node_c[i]);
        }
        for (int j = 0; j <= jmax; ++j) {
            cplx k15 = 0.0, g7 = 0.0;
            for (int i = 0; i < 15; ++i) {
                double s = node_s[i];
                double w = std::pow(s, 0.5 * m.d) * bessel_j(j + b, r * s);
                cplx f = w * node_c[i][j];
                k15 += wk[i] * f;
                g7 += wg7[i] * f;
            }
            acc_j[j] += h * k15;
            err_j[j] += h * (k15 - g7);
        }
    }

    cplx g = 0.0;
    double err = 0.0;
    double pref_base = std::pow(2.0 * M_PI, -0.5 * m.d) * std::pow(r, -b);
    for (int j = 0; j <= jmax; ++j) {
        cplx tw;
        switch (j % 4) {
            case 0: tw = {1.0, 0.0}; break;
            case 1: tw = {0.0, -1.0}; break;
            case 2: tw = {-1.0, 0.0}; break;
            default: tw = {0.0, 1.0}; break;
        }
        g += pref_base * tw * acc_j[j];
        err += pref_base * std::abs(err_j[j]);
    }
    double val = g.real();
    double scale = std::max(std::fabs(val), 1e-300);
    if (err > 0.3 * rel_tol * scale + 1e-305)
        throw AccuracyNotMet("oracle_pdf: radial quadrature self-estimate too large");
    if (std::fabs(g.imag()) > 10.0 * rel_tol * scale + 1e-305)
        throw AccuracyNotMet("oracle_pdf: imaginary part did not cancel");
    return val;
}

std::pair<double, double> ks_statistic(const std::vector<double>& sorted_samples,
                                       const std::function<double(double)>& cdf) {
    size_t n = sorted_samples.size();
    if (n < 100) throw std::domain_error("ks_statistic: need n >= 100");
    double dmax = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double fx = cdf(sorted_samples[i]);
        dmax = std::max(dmax, std::fabs(double(i + 1) / n - fx));
        dmax = std::max(dmax, std::fabs(double(i) / n - fx));
    }
    double sq = std::sqrt(double(n));
    double lam = (sq + 0.12 + 0.11 / sq) * dmax;
    double p = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    p = std::clamp(p, 0.0, 1.0);
    return {dmax, p};
}

std::complex<double> plane_wave_projection(int d, int j, double r,
                                           const std::vector<double>& u,
                                           const std::vector<double>& w) {
    cplx acc = 0.0;
    if (d == 2) {
        int n = 4096;
        double phi_w = std::atan2(w[1], w[0]);
        for (int i = 0; i < n; ++i) {
            double ph = 2.0 * M_PI * i / n;
            std::vector<double> v{std::cos(ph), std::sin(ph)};
            double uv = u[0] * v[0] + u[1] * v[1];
            acc += std::exp(cplx(0.0, -r * uv)) * std::cos(double(j) * (ph - phi_w));
        }
        acc *= 2.0 * M_PI / n;
        return acc * double(harmonic_dim(j, 2)) / sphere_area(2);
    }
    if (d == 3) {
        const auto& gl = gauss_legendre(256);
        int nphi = 512;
        std::vector<double> e, f;
        frame3(w, e, f);
        for (size_t i = 0; i < gl.x.size(); ++i) {
            double ctv = gl.x[i], stv = std::sqrt(std::max(0.0, 1.0 - ctv * ctv));
            cplx inner = 0.0;
            for (int p = 0; p < nphi; ++p) {
                double ph = 2.0 * M_PI * p / nphi;
                std::vector<double> v(3);
                for (int k = 0; k < 3; ++k)
                    v[k] = stv * (std::cos(ph) * e[k] + std::sin(ph) * f[k]) + ctv * w[k];
                double uv = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                inner += std::exp(cplx(0.0, -r * uv));
            }
            inner *= 2.0 * M_PI / nphi;
            acc += gl.w[i] * gegenbauer_tilde({0.5, j}, ctv) * inner;
        }
        return acc * double(harmonic_dim(j, 3)) / sphere_area(3);
    }
    throw std::domain_error("plane_wave_projection: d in {2,3}");
}

std::complex<double> plane_wave_projection_reference(int d, int j, double r,
                                                     const std::vector<double>& u,
                                                     const std::vector<double>& w,
                                                     bool flip_sign_convention) {
    double b = 0.5 * d - 1.0;
    double uw = 0.0;
    for (int k = 0; k < d; ++k) uw += u[k] * w[k];
    cplx tw;
    switch (j % 4) {
        case 0: tw = {1.0, 0.0}; break;
        case 1: tw = {0.0, -1.0}; break;
        case 2: tw = {-1.0, 0.0}; break;
        default: tw = {0.0, 1.0}; break;
    }
    if (flip_sign_convention) tw = std::conj(tw);
    double pref = std::pow(2.0 * M_PI, 0.5 * d) / sphere_area(d) * double(harmonic_dim(j, d));
    return pref * tw * gegenbauer_tilde({0.5 * (d - 2.0), j}, uw) * bessel_j(j + b, r)
         / std::pow(r, b);
}

} // namespace mvstable
