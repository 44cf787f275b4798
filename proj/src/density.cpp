#include <mvstable/density.hpp>
#include <mvstable/quadrature.hpp>
#include <mvstable/sampler.hpp>
#include <mvstable/special.hpp>

#include "series_detail.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>

namespace mvstable {

namespace {

using cplx = std::complex<double>;

double vec_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

std::vector<double> vec_unit(const std::vector<double>& x, double r) {
    std::vector<double> u = x;
    if (r > 0.0)
        for (double& v : u) v /= r;
    return u;
}

int quantize_nodes(int need) {
    int n = 64;
    while (n < need) n *= 2;
    return std::min(n, 4096);
}

// ---------------------------------------------------------------------------
// Zonal evaluation context.  For models whose spectral density is a function
// of t = <theta,u>, every harmonic coefficient reduces to a 1-D integral
// against the normalized Gegenbauer polynomials.  Carried in double-double;
// the rules are exact for polynomials within the node budget.
// ---------------------------------------------------------------------------

struct ZonalEngine {
    int d = 0;
    double alpha = 0.0;
    int q = 1;
    double R = 0.0;

    std::vector<dd> t, w; // w includes the A(S^{d-2}) surface factor
    std::vector<ddc> V, Vs;
    dd area;
    std::vector<dd> cjd_over_area;

    // lam[k][j] = A(S^{d-2}) sum_i w_i V(t_i)^k C~_j(t_i)
    std::vector<std::vector<ddc>> lam, lam_star;
    std::vector<double> ln_mabs, ln_mabs_star;
    std::vector<ddc> moments, moments_star;
    std::vector<ddc> vk, vsk;

    int kcap = 0;

    ZonalDirectionFunction zf;

    ZonalEngine(const StableModel& m, int kcap_) {
        d = m.d;
        alpha = m.alpha;
        q = std::max(m.P.degree(), 1);
        R = m.R;
        kcap = kcap_;
        zf = make_zonal_direction(m);
        area = dd(2.0) * exp(dd(0.5 * d) * log(ddc_const::pi) - lgamma(dd(0.5 * d)));
        set_nodes(quantize_nodes(std::min(kcap, 64) * q + 32));
        lam.push_back({});
        lam_star.push_back({});
        ln_mabs.push_back(std::log(double(area.hi)));
        ln_mabs_star.push_back(std::log(double(area.hi)));
        moments.push_back(ddc(area));
        moments_star.push_back(ddc(area));
    }

    static ddc powi_c(ddc z, int n) {
        ddc r(dd(1.0));
        while (n) {
            if (n & 1) r = r * z;
            z = z * z;
            n >>= 1;
        }
        return r;
    }

    void set_nodes(int n) {
        if (d == 2) {
            const auto& rule = gauss_chebyshev_dd(n);
            t = rule.x;
            w.resize(n);
            for (int i = 0; i < n; ++i) w[i] = rule.w[i] * dd(2.0); // A(S^0)
        } else {
            const auto& rule = gauss_legendre_dd(n);
            t = rule.x;
            w.resize(n);
            for (int i = 0; i < n; ++i) w[i] = rule.w[i] * ddc_const::two_pi; // A(S^1)
        }
        V.resize(n);
        for (int i = 0; i < n; ++i) V[i] = zf.eval(t[i]);
        int kv = std::max(int(lam.size()) - 1, 0);
        vk.resize(n);
        for (int i = 0; i < n; ++i) vk[i] = powi_c(V[i], kv);
        if (alpha > 1.0) {
            Vs.resize(n);
            for (int i = 0; i < n; ++i) Vs[i] = zf.eval_star(t[i]);
            int kvs = std::max(int(lam_star.size()) - 1, 0);
            vsk.resize(n);
            for (int i = 0; i < n; ++i) vsk[i] = powi_c(Vs[i], kvs);
        } else {
            vsk.assign(n, ddc(dd(1.0)));
        }
    }

    int max_degree() const { return 2 * int(t.size()) - 2; }

    void ensure_cheb(int j) {
        int have = int(cjd_over_area.size());
        for (int jj = have; jj <= j; ++jj)
            cjd_over_area.push_back(dd(double(harmonic_dim(jj, d))) / area);
    }

    void ensure_k(int k, bool star) {
        auto extend = [&](std::vector<std::vector<ddc>>& lambda, std::vector<ddc>& pw,
                          const std::vector<ddc>& base, std::vector<double>& lnm,
                          std::vector<ddc>& mom) {
            while (int(lambda.size()) <= k) {
                int kk = int(lambda.size());
                // quadrature must stay exact for degree kk q + j <= 2 kk q
                while (2 * kk * q > max_degree() && int(t.size()) < 4096)
                    set_nodes(quantize_nodes(2 * int(t.size())));
                int n = int(t.size());
                for (int i = 0; i < n; ++i) pw[i] = pw[i] * base[i];
                int jtop = std::min(kk * q, max_degree());
                ensure_cheb(jtop);
                std::vector<ddc> row;
                row.reserve(jtop + 1);
                std::vector<dd> prev2(n, dd(1.0)), prev(n), cur(n);
                for (int i = 0; i < n; ++i) prev[i] = t[i];
                double lm = 0.0;
                for (int i = 0; i < n; ++i)
                    lm += std::sqrt(std::max(double(abs2(pw[i]).hi), 0.0)) * double(w[i].hi);
                lnm.push_back(std::log(std::max(lm, 1e-300)));
                double b = 0.5 * (d - 2);
                // rows stop once the coefficients are negligible relative to
                // the absolute moment: the Gamma-weighted contribution of the
                // dropped degrees is bounded by that same relative size
                double floor2 = std::exp(2.0 * (lnm.back() - 92.0));
                int tiny_run = 0;
                for (int j = 0; j <= jtop; ++j) {
                    const std::vector<dd>* zj;
                    if (j == 0)
                        zj = &prev2;
                    else if (j == 1)
                        zj = &prev;
                    else {
                        for (int i = 0; i < n; ++i)
                            cur[i] = gegenbauer_tilde_step(b, j, t[i], prev[i], prev2[i]);
                        prev2.swap(prev);
                        prev.swap(cur);
                        zj = &prev;
                    }
                    ddc acc;
                    for (int i = 0; i < n; ++i) acc += (*zj)[i] * w[i] * pw[i];
                    row.push_back(acc);
                    if (double(abs2(acc).hi) < floor2)
                        ++tiny_run;
                    else
                        tiny_run = 0;
                    if (tiny_run >= 24 && j >= 2) break;
                }
                mom.push_back(row[0]);
                lambda.push_back(std::move(row));
            }
        };
        if (!star)
            extend(lam, vk, V, ln_mabs, moments);
        else
            extend(lam_star, vsk, Vs, ln_mabs_star, moments_star);
    }

    // projections of V^{-p} for real p > 0
    std::vector<ddc> lambda_neg_power(double p, int jtop) const {
        int n = int(t.size());
        std::vector<ddc> pw(n);
        dd mp(-p);
        for (int i = 0; i < n; ++i) pw[i] = pow(V[i], mp);
        std::vector<ddc> row(jtop + 1);
        std::vector<dd> prev2(n, dd(1.0)), prev(n), cur(n);
        for (int i = 0; i < n; ++i) prev[i] = t[i];
        double b = 0.5 * (d - 2);
        for (int j = 0; j <= jtop; ++j) {
            const std::vector<dd>* zj;
            if (j == 0)
                zj = &prev2;
            else if (j == 1)
                zj = &prev;
            else {
                for (int i = 0; i < n; ++i)
                    cur[i] = gegenbauer_tilde_step(b, j, t[i], prev[i], prev2[i]);
                prev2.swap(prev);
                prev.swap(cur);
                zj = &prev;
            }
            ddc acc;
            for (int i = 0; i < n; ++i) acc += (*zj)[i] * w[i] * pw[i];
            row[j] = acc;
        }
        return row;
    }

    double abs_moment_neg_power(double p) const {
        double acc = 0.0;
        for (size_t i = 0; i < t.size(); ++i)
            acc += std::pow(double(sqrt(abs2(V[i])).hi), -p) * double(w[i].hi);
        return acc;
    }
};

std::shared_ptr<ZonalEngine> zonal_engine(const StableModel& m, int kcap) {
    static std::map<const void*, std::shared_ptr<ZonalEngine>> cache;
    const void* key = &m;
    auto it = cache.find(key);
    if (it != cache.end() && it->second->kcap >= kcap && it->second->alpha == m.alpha)
        return it->second;
    auto sp = std::make_shared<ZonalEngine>(m, kcap);
    cache[key] = sp;
    if (cache.size() > 64) cache.clear(); // bounded memory across many models
    return sp;
}

std::vector<dd> cheb_values(int d, double t, int jmax) {
    std::vector<dd> out(size_t(jmax) + 1);
    out[0] = dd(1.0);
    if (jmax >= 1) out[1] = dd(t);
    double b = 0.5 * (d - 2);
    for (int j = 2; j <= jmax; ++j)
        out[j] = gegenbauer_tilde_step(b, j, dd(t), out[j - 1], out[j - 2]);
    return out;
}

// ---------------------------------------------------------------------------
// Generic sphere-grid context (double) for non-zonal models.
// ---------------------------------------------------------------------------

struct GridEngine {
    int d;
    double alpha;
    int q;
    std::vector<std::vector<double>> pts;
    std::vector<double> wts;
    std::vector<cplx> V, Vs;
    double area;
    int max_deg;

    explicit GridEngine(const StableModel& m) {
        d = m.d;
        alpha = m.alpha;
        q = std::max(m.P.degree(), 1);
        area = sphere_area(d);
        if (d == 2) {
            int n = 2048;
            max_deg = n - 2;
            for (int i = 0; i < n; ++i) {
                double ph = 2.0 * M_PI * i / n;
                pts.push_back({std::cos(ph), std::sin(ph)});
                wts.push_back(2.0 * M_PI / n);
            }
        } else if (d == 3) {
            int nt = 128, nphi = 256;
            max_deg = 2 * nt - 2;
            const auto& gl = gauss_legendre(nt);
            for (int i = 0; i < nt; ++i) {
                double ct = gl.x[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                for (int p = 0; p < nphi; ++p) {
                    double ph = 2.0 * M_PI * p / nphi;
                    pts.push_back({st * std::cos(ph), st * std::sin(ph), ct});
                    wts.push_back(gl.w[i] * 2.0 * M_PI / nphi);
                }
            }
        } else {
            throw std::domain_error("density: numerical projections need d in {2,3}");
        }
        V.resize(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) V[i] = m.V.eval(pts[i]);
        if (m.alpha > 1.0) {
            Vs.resize(pts.size());
            for (size_t i = 0; i < pts.size(); ++i) Vs[i] = m.Vstar.eval(pts[i]);
        }
    }

    // lam_out[j] = (c_j / area) * sum_i w_i pw_i C~_j(<u, v_i>)
    void project_at(const std::vector<cplx>& pw, const std::vector<double>& u, int jtop,
                    std::vector<cplx>& lam_out) const {
        size_t n = pts.size();
        std::vector<double> tv(n);
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int kk = 0; kk < d; ++kk) s += u[kk] * pts[i][kk];
            tv[i] = std::clamp(s, -1.0, 1.0);
        }
        lam_out.assign(size_t(jtop) + 1, 0.0);
        std::vector<double> prev2(n, 1.0), prev(n), cur(n);
        for (size_t i = 0; i < n; ++i) prev[i] = tv[i];
        double b = 0.5 * (d - 2);
        for (int j = 0; j <= jtop; ++j) {
            const std::vector<double>* zj;
            if (j == 0)
                zj = &prev2;
            else if (j == 1)
                zj = &prev;
            else {
                for (size_t i = 0; i < n; ++i)
                    cur[i] = gegenbauer_tilde_step(b, j, tv[i], prev[i], prev2[i]);
                prev2.swap(prev);
                prev.swap(cur);
                zj = &prev;
            }
            cplx acc = 0.0;
            for (size_t i = 0; i < n; ++i) acc += (*zj)[i] * wts[i] * pw[i];
            lam_out[j] = acc * (double(harmonic_dim(j, d)) / area);
        }
    }
};

double real_of_minus_i_pow_d(int j, cplx z) {
    switch (((j % 4) + 4) % 4) {
        case 0: return z.real();
        case 1: return z.imag();
        case 2: return -z.real();
        default: return -z.imag();
    }
}

// ---------------------------------------------------------------------------
// alpha < 1 pointwise series streams
// ---------------------------------------------------------------------------

struct Lt1Common {
    int d = 0, qdeg = 1;
    double alpha = 0.0, r = 0.0, ln_r = 0.0;
    std::vector<double> u;
    std::vector<double> ln_cjd;
    double ln_area = 0.0;
    double lnV_sup = 0.0;

    dd sum{0.0};
    double abs_sum = 0.0;
    int k = 0;
    dd ln_pref; // ln of 2^{alpha k} / (k! r^{k alpha + d} pi^{d/2})
    bool dead = false;
    mutable detail_series::MajorantLadder ladder;

    void init(const StableModel& m, const std::vector<double>& x, int kcap, int jcap) {
        d = m.d;
        qdeg = std::max(m.P.degree(), 1);
        alpha = m.alpha;
        r = vec_norm(x);
        if (r <= 0.0) throw std::domain_error("pdf_lt1: |x| > 0 required");
        ln_r = std::log(r);
        u = vec_unit(x, r);
        ln_area = std::log(sphere_area(d));
        lnV_sup = std::log(m.sup_abs_v);
        ln_pref = -dd(double(d)) * dd(ln_r) - dd(0.5 * d) * log(ddc_const::pi);
        ladder.kcap = kcap;
    }
};

class Lt1ZonalStream final : public TermStream {
public:
    Lt1ZonalStream(const StableModel& m, const std::vector<double>& x, int kcap)
        : kcap_(kcap) {
        ze_ = zonal_engine(m, kcap);
        st_.init(m, x, kcap, 4094);
        double tx = 0.0;
        for (int i = 0; i < m.d; ++i) tx += (*m.zonal).theta[i] * st_.u[i];
        tx_ = std::clamp(tx, -1.0, 1.0);
        // per-term majorant through the exactly computed projection rows
        auto ze = ze_;
        double lp0 = -st_.d * st_.ln_r - 0.5 * st_.d * std::log(M_PI);
        double step = st_.alpha * M_LN2 - st_.alpha * st_.ln_r;
        double al = st_.alpha;
        int dd_ = st_.d, q_ = st_.qdeg;
        st_.ladder.ln_term_majorant = [ze, lp0, step, al, dd_, q_](int kk) {
            ze->ensure_k(kk, false);
            const auto& row = ze->lam[kk];
            int jtop = std::min<int>(kk * q_, int(row.size()) - 1);
            ze->ensure_cheb(jtop);
            double lp = lp0 + kk * step - detail_series::lgamma_fast(kk + 1.0);
            return lp + detail_series::ln_abs_row_sum(
                kk * al, dd_, jtop,
                [&](int j) {
                    return double(sqrt(abs2(row[j])).hi) * double(ze->cjd_over_area[j].hi);
                });
        };
    }

    void advance() override {
        if (st_.dead) return;
        int k = ++st_.k;
        if (k > kcap_) { st_.dead = true; return; }
        auto& ze = *ze_;
        ze.ensure_k(k, false);
        st_.ln_pref += dd(st_.alpha) * ddc_const::ln2 - log(dd(double(k)))
                     - dd(st_.alpha) * dd(st_.ln_r);

        const auto& lamk = ze.lam[k];
        int jtop = std::min<int>(k * st_.qdeg, int(lamk.size()) - 1);
        if (int(chebx_.size()) <= jtop) chebx_ = cheb_values(st_.d, tx_, jtop + 2);
        ze.ensure_cheb(jtop);

        dd term(0.0);
        double abs_term = 0.0;
        for (int parity = 0; parity < 2; ++parity) {
            int jt = std::min(k * st_.qdeg, ze.max_degree());
            while (jt >= 0 && (jt % 2) != parity) --jt;
            if (jt < 0) continue;
            dd ka = dd(double(k)) * dd(st_.alpha);
            dd A = (dd(double(jt)) + ka + dd(double(st_.d))) * dd(0.5);
            dd B = (dd(double(jt)) - ka) * dd(0.5);
            dd chain;
            double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            if (B.hi > 0.0) {
                chain = exp(st_.ln_pref + lgamma(A) - lgamma(B));
            } else {
                if (std::fabs(B.hi - std::round(B.hi)) < 1e-13 && std::fabs(B.lo) < 1e-12)
                    continue; // exact pole: the whole parity chain vanishes
                dd s = sin(ddc_const::pi * B);
                sgn *= s.hi > 0 ? 1.0 : -1.0;
                chain = exp(st_.ln_pref + lgamma(A) + log(fabs(s)) - log(ddc_const::pi)
                            + lgamma(dd(1.0) - B));
            }
            chain = chain * dd(sgn);
            for (int j = jt; j >= 0; j -= 2) {
                if (j <= jtop) {
                    dd s_core = real_of_minus_i_pow(j, lamk[j]);
                    dd contrib = chain * ze.cjd_over_area[j] * s_core * chebx_[j];
                    term += contrib;
                    abs_term += std::fabs(double(contrib.hi));
                }
                if (j >= 2) {
                    dd Bm = (dd(double(j - 2)) - ka) * dd(0.5);
                    dd Am = (dd(double(j - 2)) + ka + dd(double(st_.d))) * dd(0.5);
                    chain = chain * Bm / Am;
                }
            }
        }
        if (!std::isfinite(double(term.hi))) { st_.dead = true; return; }
        st_.sum += term;
        st_.abs_sum += std::max(abs_term, std::fabs(double(term.hi)));
    }

    double partial() const override { return double(st_.sum); }
    double remainder_bound() const override {
        return st_.ladder.tail_after(st_.k) + 1e-27 * st_.abs_sum;
    }
    bool exhausted() const override { return st_.dead; }

private:
    std::shared_ptr<ZonalEngine> ze_;
    Lt1Common st_;
    std::vector<dd> chebx_;
    double tx_ = 0.0;
    int kcap_;
};

class Lt1GridStream final : public TermStream {
public:
    Lt1GridStream(const StableModel& m, const std::vector<double>& x, int kcap)
        : kcap_(kcap) {
        ge_ = std::make_shared<GridEngine>(m);
        st_.init(m, x, kcap, ge_->max_deg);
        pw_.assign(ge_->pts.size(), 1.0);
        auto rows = rows_;
        auto ge = ge_;
        auto u = st_.u;
        auto pw_bound = std::make_shared<std::vector<cplx>>(ge_->pts.size(), cplx(1.0));
        double lp0 = -st_.d * st_.ln_r - 0.5 * st_.d * std::log(M_PI);
        double step = st_.alpha * M_LN2 - st_.alpha * st_.ln_r;
        double al = st_.alpha;
        int dd_ = st_.d, q_ = st_.qdeg;
        st_.ladder.ln_term_majorant = [rows, ge, u, pw_bound, lp0, step, al, dd_,
                                       q_](int kk) {
            while (int(rows->size()) <= kk) {
                int k2 = int(rows->size());
                if (k2 >= 1)
                    for (size_t i = 0; i < ge->V.size(); ++i)
                        (*pw_bound)[i] *= ge->V[i];
                std::vector<cplx> lamk;
                int jt = std::min(k2 * q_, ge->max_deg);
                ge->project_at(*pw_bound, u, jt, lamk);
                rows->push_back(std::move(lamk));
            }
            const auto& row = (*rows)[kk];
            int jtop = int(row.size()) - 1;
            double lp = lp0 + kk * step - detail_series::lgamma_fast(kk + 1.0);
            return lp + detail_series::ln_abs_row_sum(
                kk * al, dd_, jtop, [&](int j) { return std::abs(row[j]); });
        };
    }

    void advance() override {
        if (st_.dead) return;
        int k = ++st_.k;
        if (k > kcap_) { st_.dead = true; return; }
        auto& ge = *ge_;
        // guard the grid power range
        if (k * st_.lnV_sup > 640.0) { st_.dead = true; return; }
        (void)ge;
        st_.ln_pref += dd(st_.alpha) * ddc_const::ln2 - log(dd(double(k)))
                     - dd(st_.alpha) * dd(st_.ln_r);

        st_.ladder.tail_after(k); // fills the shared row cache through k
        const auto& lamk = (*rows_)[k];
        int jtop = int(lamk.size()) - 1;
        double term = 0.0, comp = 0.0, abs_term = 0.0;
        double lp = double(st_.ln_pref);
        for (int parity = 0; parity < 2; ++parity) {
            int jt = jtop;
            while (jt >= 0 && (jt % 2) != parity) --jt;
            if (jt < 0) continue;
            double ka = k * st_.alpha;
            double A = 0.5 * (jt + ka + st_.d);
            double B = 0.5 * (jt - ka);
            double chain, sgn = (k % 2 == 0) ? 1.0 : -1.0;
            if (B > 0.0) {
                chain = std::exp(lp + log_gamma(A) - log_gamma(B));
            } else {
                double ls, ss;
                if (!detail_series::log_abs_sin_pi(B, ls, ss)) continue;
                chain = std::exp(lp + log_gamma(A) + ls - std::log(M_PI)
                                 + log_gamma(1.0 - B));
                sgn *= ss;
            }
            chain *= sgn;
            for (int j = jt; j >= 0; j -= 2) {
                double contrib = chain * real_of_minus_i_pow_d(j, lamk[j]);
                double tsum = term + contrib;
                if (std::fabs(term) >= std::fabs(contrib))
                    comp += (term - tsum) + contrib;
                else
                    comp += (contrib - tsum) + term;
                term = tsum;
                abs_term += std::fabs(contrib);
                if (j >= 2) chain *= (0.5 * (j - 2 - ka)) / (0.5 * (j - 2 + ka + st_.d));
            }
        }
        term += comp;
        if (!std::isfinite(term)) { st_.dead = true; return; }
        st_.sum += dd(term);
        st_.abs_sum += std::max(abs_term, std::fabs(term));
    }

    double partial() const override { return double(st_.sum); }
    double remainder_bound() const override {
        return st_.ladder.tail_after(st_.k) + 1e-14 * st_.abs_sum;
    }
    bool exhausted() const override { return st_.dead; }

private:
    std::shared_ptr<GridEngine> ge_;
    Lt1Common st_;
    std::vector<cplx> pw_;
    std::shared_ptr<std::vector<std::vector<cplx>>> rows_ =
        std::make_shared<std::vector<std::vector<cplx>>>(
            1, std::vector<cplx>{cplx(1.0)});
    int kcap_;
};

std::unique_ptr<TermStream> make_lt1_stream(const StableModel& m,
                                            const std::vector<double>& x, int kcap) {
    if (m.zonal && (m.d == 2 || m.d == 3))
        return std::make_unique<Lt1ZonalStream>(m, x, kcap);
    return std::make_unique<Lt1GridStream>(m, x, kcap);
}

SeriesResult run_stream(TermStream& s, double tol, int kmax) {
    SeriesResult res;
    int k = 0;
    double best = 1e300;
    int no_gain = 0;
    for (; k < kmax; ++k) {
        s.advance();
        if (s.exhausted()) break;
        double b = s.remainder_bound();
        if (b <= tol) {
            res.value = s.partial();
            res.truncation_bound = b;
            res.terms_used = k + 1;
            res.converged = true;
            return res;
        }
        if (b < 0.99 * best)
            no_gain = 0;
        else if (b < 1e200 && ++no_gain > 30)
            break; // the bound has flattened above the tolerance
        best = std::min(best, b);
        if (k > 400 && b > 1e140 && best > 1e140) break; // hopeless blowup
    }
    res.value = s.partial();
    res.truncation_bound = s.remainder_bound();
    res.terms_used = k;
    res.converged = false;
    return res;
}

} // namespace

SeriesResult pdf_lt1(const StableModel& m, const DensityQuery& q) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("pdf_lt1: requires alpha in (0,1)");
    if (vec_norm(q.x) <= 0.0)
        throw std::domain_error("pdf_lt1: requires |x| > 0");
    auto s = make_lt1_stream(m, q.x, q.k_max);
    return run_stream(*s, q.tolerance, q.k_max);
}

std::unique_ptr<TermStream> lt1_series_stream(const StableModel& m,
                                              const std::vector<double>& x) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("lt1_series_stream: requires alpha in (0,1)");
    return make_lt1_stream(m, x, 1800);
}

// ---------------------------------------------------------------------------
// radial density, alpha < 1
// ---------------------------------------------------------------------------

namespace {

struct MomentSource {
    std::shared_ptr<ZonalEngine> ze;
    std::shared_ptr<GridEngine> ge;
    std::vector<cplx> pw;
    std::vector<ddc> mom{ddc(dd(1.0))};
    std::vector<double> lnm{0.0};
    bool star = false;

    MomentSource(const StableModel& m, int kcap, bool star_) : star(star_) {
        if (m.zonal && (m.d == 2 || m.d == 3)) {
            ze = zonal_engine(m, kcap);
        } else {
            ge = std::make_shared<GridEngine>(m);
            pw.assign(ge->pts.size(), 1.0);
        }
        mom[0] = ddc(dd(sphere_area(m.d)));
        lnm[0] = std::log(sphere_area(m.d));
    }

    void ensure_k(int k) {
        if (ze) {
            ze->ensure_k(k, star);
            return;
        }
        const auto& base = star ? ge->Vs : ge->V;
        while (int(mom.size()) <= k) {
            cplx acc = 0.0;
            double mabs = 0.0;
            for (size_t i = 0; i < base.size(); ++i) {
                pw[i] *= base[i];
                acc += pw[i] * ge->wts[i];
                mabs += std::abs(pw[i]) * ge->wts[i];
            }
            mom.push_back(ddc(dd(acc.real()), dd(acc.imag())));
            lnm.push_back(std::log(std::max(mabs, 1e-300)));
        }
    }

    ddc moment(int k) const {
        if (ze) return star ? ze->moments_star[k] : ze->moments[k];
        return mom[k];
    }
    double lnmabs(int k) const {
        if (ze) return star ? ze->ln_mabs_star[k] : ze->ln_mabs[k];
        return lnm[k];
    }
};

class RadialLt1Stream final : public TermStream {
public:
    RadialLt1Stream(const StableModel& m, double r, int kcap)
        : eng_(m, kcap, false), r_(r), kcap_(kcap) {
        alpha_ = m.alpha;
        d_ = m.d;
        ln_pref_ = -dd(std::log(r)) - dd(0.5 * d_) * log(ddc_const::pi);
        ladder_.kcap = kcap;
        double lp0 = -std::log(r) - 0.5 * d_ * std::log(M_PI);
        double step = alpha_ * M_LN2 - alpha_ * std::log(r);
        double al = alpha_;
        int dd_ = d_;
        auto eng = &eng_;
        ladder_.ln_term_majorant = [lp0, step, al, dd_, eng](int kk) {
            double ka = kk * al;
            double rg = std::fabs(reciprocal_gamma(-0.5 * ka));
            if (rg == 0.0) return -1e300;
            eng->ensure_k(kk);
            double lm = std::log(std::sqrt(double(abs2(eng->moment(kk)).hi)) + 1e-300);
            return lp0 + kk * step - detail_series::lgamma_fast(kk + 1.0)
                 + detail_series::lgamma_fast(0.5 * (ka + dd_)) + std::log(rg) + lm;
        };
    }

    void advance() override {
        if (dead_) return;
        int k = ++k_;
        if (k > kcap_) { dead_ = true; return; }
        eng_.ensure_k(k);
        ln_pref_ += dd(alpha_) * ddc_const::ln2 - log(dd(double(k)))
                  - dd(alpha_) * dd(std::log(r_));
        dd ka = dd(double(k)) * dd(alpha_);
        dd A = (ka + dd(double(d_))) * dd(0.5);
        dd B = -ka * dd(0.5);
        double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        bool pole = std::fabs(B.hi - std::round(B.hi)) < 1e-13 && std::fabs(B.lo) < 1e-12;
        if (!pole) {
            dd s = sin(ddc_const::pi * B);
            sgn *= s.hi > 0 ? 1.0 : -1.0;
            dd mag = exp(ln_pref_ + lgamma(A) + log(fabs(s)) - log(ddc_const::pi)
                         + lgamma(dd(1.0) - B));
            dd term = mag * dd(sgn) * eng_.moment(k).re;
            if (!std::isfinite(double(term.hi))) { dead_ = true; return; }
            sum_ += term;
            abs_sum_ += std::fabs(double(term.hi));
        }
    }

    double partial() const override { return double(sum_); }
    double remainder_bound() const override {
        return ladder_.tail_after(k_) + 1e-26 * abs_sum_;
    }
    bool exhausted() const override { return dead_; }

private:
    MomentSource eng_;
    double r_, alpha_;
    int d_;
    dd ln_pref_;
    dd sum_{0.0};
    double abs_sum_ = 0.0;
    mutable detail_series::MajorantLadder ladder_;
    int k_ = 0, kcap_;
    bool dead_ = false;
};

} // namespace

SeriesResult pdf_lt1_radial(const StableModel& m, double r, double tolerance, int k_max) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("pdf_lt1_radial: requires alpha in (0,1)");
    if (!(r > 0.0)) throw std::domain_error("pdf_lt1_radial: requires r > 0");
    RadialLt1Stream s(m, r, k_max);
    return run_stream(s, tolerance, k_max);
}

// ---------------------------------------------------------------------------
// degree-j harmonic of the density (polynomial valued), alpha < 1
// ---------------------------------------------------------------------------

ProjSeriesResult proj_density_lt1(const StableModel& m, int j, double r,
                                  double tolerance, int k_max) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("proj_density_lt1: requires alpha in (0,1)");
    if (!(r > 0.0)) throw std::domain_error("proj_density_lt1: requires r > 0");
    ProjSeriesResult out{SpherePoly(m.d), 0.0, 0, false};
    int q = std::max(m.P.degree(), 1);
    int kcap = std::min(k_max, SpherePoly::kMaxDegree / q);
    auto table = harmonic_coeffs(m, CoeffKind::V, kcap);
    double alpha = m.alpha;
    double ln_r = std::log(r);
    double lnpref = -m.d * ln_r - 0.5 * m.d * std::log(M_PI);
    double bound = 1e300;
    double lnV = std::log(m.sup_abs_v);
    bool conv = false;
    int k = 1;
    for (; k <= kcap; ++k) {
        lnpref += alpha * M_LN2 - std::log(double(k)) - alpha * ln_r;
        double ratio = gamma_ratio(0.5 * (j + k * alpha + m.d), 0.5 * (j - k * alpha));
        double coef = ((k % 2 == 0) ? 1.0 : -1.0) * std::exp(lnpref) * ratio;
        if (k * q >= j) {
            const SpherePoly* s = table.entry(j, k);
            if (s && coef != 0.0) {
                SpherePoly t = *s;
                t *= coef;
                out.component += t;
            }
        }
        // remainder via sup |S_{j,k+1}| <= sqrt(c_j) sup|V|^{k+1}
        double lb = lnpref + alpha * M_LN2 - std::log(k + 1.0) - alpha * ln_r
                  + std::log(std::fabs(gamma_ratio(0.5 * (j + (k + 1) * alpha + m.d),
                                                   0.5 * (j - (k + 1) * alpha))) + 1e-300)
                  + (k + 1) * lnV + 0.5 * std::log(double(harmonic_dim(j, m.d)));
        bound = 5.0 * std::exp(lb);
        if (k > 3 && bound < tolerance) {
            conv = true;
            ++k;
            break;
        }
    }
    out.terms_used = k - 1;
    out.truncation_bound = bound;
    out.converged = conv;
    return out;
}

// ---------------------------------------------------------------------------
// origin expansion (alpha < 1)
// ---------------------------------------------------------------------------

namespace {

double origin_expansion_impl(const StableModel& m, const std::vector<double>& x, int n,
                             double* next_term_mag) {
    int d = m.d;
    double alpha = m.alpha;
    double r = vec_norm(x);
    std::vector<double> u = r > 0.0 ? vec_unit(x, r) : std::vector<double>(d, 0.0);
    if (r == 0.0) u[0] = 1.0;

    bool zonal = m.zonal && (d == 2 || d == 3);
    std::shared_ptr<ZonalEngine> ze;
    std::shared_ptr<GridEngine> ge;
    double tx = 0.0;
    if (zonal) {
        ze = zonal_engine(m, 64);
        for (int i = 0; i < d; ++i) tx += (*m.zonal).theta[i] * u[i];
        tx = std::clamp(tx, -1.0, 1.0);
    } else {
        ge = std::make_shared<GridEngine>(m);
    }

    double pref = std::pow(2.0, 1.0 - d) * std::pow(M_PI, -0.5 * d) / alpha;
    double acc = 0.0, last_mag = 0.0;
    int ktop = (r == 0.0) ? 0 : n + 1;
    for (int k = 0; k <= ktop; ++k) {
        double p = (k + d) / alpha;
        double inner = 0.0;
        if (zonal) {
            auto lamrow = ze->lambda_neg_power(p, k);
            auto chebx = cheb_values(d, tx, k);
            for (int mm = 0; 2 * mm <= k; ++mm) {
                int j = k - 2 * mm;
                double s = double((dd(double(harmonic_dim(j, d))) / ze->area
                                   * real_of_minus_i_pow(j, lamrow[j]) * chebx[j]).hi);
                double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                           / (gamma_pos(mm + 1.0) * gamma_pos(k - mm + 0.5 * d));
                inner += wgt * s;
            }
        } else {
            std::vector<cplx> pw(ge->pts.size());
            for (size_t i = 0; i < pw.size(); ++i) pw[i] = std::pow(ge->V[i], -p);
            std::vector<cplx> lamrow;
            ge->project_at(pw, u, k, lamrow);
            for (int mm = 0; 2 * mm <= k; ++mm) {
                int j = k - 2 * mm;
                double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                           / (gamma_pos(mm + 1.0) * gamma_pos(k - mm + 0.5 * d));
                inner += wgt * real_of_minus_i_pow_d(j, lamrow[j]);
            }
        }
        double term = pref * gamma_pos(p) * std::pow(0.5 * r, k) * inner;
        if (k <= n)
            acc += term;
        else
            last_mag = std::fabs(term);
    }
    if (next_term_mag) *next_term_mag = last_mag;
    return acc;
}

} // namespace

double pdf_origin_expansion(const StableModel& m, const std::vector<double>& x, int n) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("pdf_origin_expansion: requires alpha in (0,1)");
    return origin_expansion_impl(m, x, n, nullptr);
}

double pdf_origin_expansion_error(const StableModel& m, double r, int n) {
    double mag = 0.0;
    std::vector<double> x(m.d, 0.0);
    x[0] = r;
    origin_expansion_impl(m, x, n, &mag);
    return mag;
}

// ---------------------------------------------------------------------------
// alpha > 1 series
// ---------------------------------------------------------------------------

SeriesResult pdf_gt1_power(const StableModel& m, const DensityQuery& q) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("pdf_gt1_power: requires alpha in (1,2)");
    int d = m.d;
    double alpha = m.alpha;
    double r = vec_norm(q.x);
    std::vector<double> u = r > 0.0 ? vec_unit(q.x, r) : std::vector<double>(d, 0.0);
    if (r == 0.0) u[0] = 1.0;

    bool zonal = m.zonal && (d == 2 || d == 3);
    std::shared_ptr<ZonalEngine> ze;
    std::shared_ptr<GridEngine> ge;
    double tx = 0.0;
    if (zonal) {
        ze = zonal_engine(m, 64);
        for (int i = 0; i < d; ++i) tx += (*m.zonal).theta[i] * u[i];
        tx = std::clamp(tx, -1.0, 1.0);
    } else {
        ge = std::make_shared<GridEngine>(m);
    }

    double pref = std::pow(2.0, 1.0 - d) * std::pow(M_PI, -0.5 * d) / alpha;
    dd acc(0.0);
    double abs_sum = 0.0, max_term = 0.0;
    double tail = 1e300, prev_next = -1.0;
    SeriesResult res;
    int n = 0;
    int nmax = (r == 0.0) ? 0 : q.k_max;
    for (; n <= nmax; ++n) {
        double p = (n + d) / alpha;
        double term;
        if (zonal) {
            auto lamrow = ze->lambda_neg_power(p, n);
            auto chebx = cheb_values(d, tx, n);
            dd t(0.0);
            for (int mm = 0; 2 * mm <= n; ++mm) {
                int j = n - 2 * mm;
                dd s = dd(double(harmonic_dim(j, d))) / ze->area
                     * real_of_minus_i_pow(j, lamrow[j]) * chebx[j];
                double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                           / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
                t += dd(wgt) * s;
            }
            term = double(t);
        } else {
            std::vector<cplx> pw(ge->pts.size());
            for (size_t i = 0; i < pw.size(); ++i) pw[i] = std::pow(ge->V[i], -p);
            std::vector<cplx> lamrow;
            ge->project_at(pw, u, n, lamrow);
            term = 0.0;
            for (int mm = 0; 2 * mm <= n; ++mm) {
                int j = n - 2 * mm;
                double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                           / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
                term += wgt * real_of_minus_i_pow_d(j, lamrow[j]);
            }
        }
        term *= pref * gamma_pos(p) * (n == 0 ? 1.0 : std::pow(0.5 * r, n));
        acc += dd(term);
        abs_sum += std::fabs(term);
        max_term = std::max(max_term, std::fabs(term));

        // majorant of the next term
        double pn = (n + 1 + d) / alpha;
        double mabs;
        if (zonal) {
            mabs = ze->abs_moment_neg_power(pn);
        } else {
            mabs = 0.0;
            for (size_t i = 0; i < ge->V.size(); ++i)
                mabs += std::pow(std::abs(ge->V[i]), -pn) * ge->wts[i];
        }
        double msum = 0.0;
        for (int mm = 0; 2 * mm <= n + 1; ++mm) {
            int j = n + 1 - 2 * mm;
            msum += double(harmonic_dim(j, d)) / sphere_area(d)
                  / (gamma_pos(mm + 1.0) * gamma_pos(n + 1 - mm + 0.5 * d));
        }
        double next = pref * gamma_pos(pn) * std::pow(0.5 * r, n + 1) * msum * mabs;
        if (r == 0.0) next = 0.0;
        if (prev_next > 0.0 && next < 0.65 * prev_next)
            tail = next / (1.0 - next / prev_next);
        else if (r == 0.0)
            tail = 0.0;
        else
            tail = 1e300;
        prev_next = next;
        if (tail < q.tolerance) {
            ++n;
            break;
        }
        if (max_term > 1e12 * q.tolerance) {
            // hopeless cancellation far out; the tail expansion is the tool
            ++n;
            break;
        }
    }
    res.value = double(acc);
    res.terms_used = n;
    res.truncation_bound = std::min(tail, 1e300) + 1e-15 * abs_sum;
    res.converged = res.truncation_bound <= q.tolerance;
    return res;
}

namespace {

// table of S*_{j,k}(u) values (or their radial moments) plus bound data
struct StarTable {
    std::vector<std::vector<double>> s;  // [j][k]
    int jmax = 0, kmax = 0;
    double lnD = 0.0; // ln sup |V*|
};

StarTable build_star_table(const StableModel& m, const std::vector<double>& u,
                           int jmax, int kmax) {
    StarTable st;
    st.jmax = jmax;
    st.kmax = kmax;
    st.lnD = std::log(m.sup_abs_vstar);
    st.s.assign(size_t(jmax) + 1, std::vector<double>(size_t(kmax) + 1, 0.0));
    bool zonal = m.zonal && (m.d == 2 || m.d == 3);
    if (zonal) {
        auto ze = zonal_engine(m, std::max(kmax, 8));
        ze->ensure_k(kmax, true);
        double tx = 0.0;
        for (int i = 0; i < m.d; ++i) tx += (*m.zonal).theta[i] * u[i];
        auto chebx = cheb_values(m.d, std::clamp(tx, -1.0, 1.0), jmax);
        ze->ensure_cheb(jmax);
        for (int k = 1; k <= kmax; ++k) {
            const auto& row = ze->lam_star[k];
            for (int j = 0; j <= std::min<int>(jmax, int(row.size()) - 1); ++j)
                st.s[j][k] = double((dd(double(harmonic_dim(j, m.d))) / ze->area
                                     * real_of_minus_i_pow(j, row[j]) * chebx[j]).hi);
        }
        st.s[0][0] = 1.0;
    } else {
        GridEngine ge(m);
        std::vector<cplx> pw(ge.pts.size(), 1.0);
        std::vector<cplx> lamrow;
        for (int k = 0; k <= kmax; ++k) {
            if (k > 0)
                for (size_t i = 0; i < pw.size(); ++i) pw[i] *= ge.Vs[i];
            ge.project_at(pw, u, std::min(jmax, k == 0 ? 0 : jmax), lamrow);
            for (int j = 0; j < int(lamrow.size()) && j <= jmax; ++j)
                st.s[j][k] = real_of_minus_i_pow_d(j, lamrow[j]);
        }
    }
    return st;
}

} // namespace

SeriesResult pdf_gt1_expanded(const StableModel& m, const DensityQuery& q) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("pdf_gt1_expanded: requires alpha in (1,2)");
    int d = m.d;
    double alpha = m.alpha, R = m.R, D = m.sup_abs_vstar;
    double r = vec_norm(q.x);
    std::vector<double> u = r > 0.0 ? vec_unit(q.x, r) : std::vector<double>(d, 0.0);
    if (r == 0.0) u[0] = 1.0;
    double pref = std::pow(2.0, 1.0 - d) * std::pow(M_PI, -0.5 * d) / alpha;

    // forward scan: how many n and k are needed
    double lnRD = std::log(R - D);
    int n_stop = q.k_max;
    {
        double tail_need = 0.25 * q.tolerance;
        double run = 0.0;
        std::vector<double> Bn;
        for (int n = 0; n <= q.k_max; ++n) {
            double p = (n + d) / alpha;
            double msum = 0.0;
            for (int mm = 0; 2 * mm <= n; ++mm) {
                int j = n - 2 * mm;
                msum += std::sqrt(double(harmonic_dim(j, d)))
                      / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
            }
            double lb = std::log(pref) + (n == 0 ? 0.0 : n * std::log(0.5 * r))
                      + log_gamma(p) - p * lnRD + std::log(msum);
            Bn.push_back(std::exp(std::min(lb, 700.0)));
            if (n >= 2 && Bn[n] < Bn[n - 1] && Bn[n - 1] < Bn[n - 2]) {
                double ratio = Bn[n] / Bn[n - 1];
                if (ratio < 0.9 && Bn[n] / (1.0 - ratio) < tail_need) {
                    n_stop = n;
                    run = Bn[n] / (1.0 - ratio);
                    break;
                }
            }
            if (n == q.k_max) run = 1e300;
        }
        if (n_stop == q.k_max && run > 1e200) {
            SeriesResult bad;
            bad.converged = false;
            bad.truncation_bound = 1e300;
            return bad;
        }
    }
    double n_tail;
    {
        // recompute the geometric bound at n_stop
        double p1 = (n_stop + 1 + d) / alpha, p2 = (n_stop + 2 + d) / alpha;
        auto bn = [&](int n, double p) {
            double msum = 0.0;
            for (int mm = 0; 2 * mm <= n; ++mm) {
                int j = n - 2 * mm;
                msum += std::sqrt(double(harmonic_dim(j, d)))
                      / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
            }
            return std::exp(std::log(pref) + n * std::log(0.5 * r) + log_gamma(p)
                            - p * lnRD + std::log(msum));
        };
        double b1 = bn(n_stop + 1, p1), b2 = bn(n_stop + 2, p2);
        double ratio = b2 > 0 && b1 > 0 ? std::min(b2 / b1, 0.95) : 0.5;
        n_tail = b1 / (1.0 - ratio);
    }

    // needed k range from the slowest-decaying inner series
    double p_max = (n_stop + d) / alpha;
    int k_need = 8;
    {
        double lt = log_gamma(p_max) - p_max * std::log(R);
        double lnDR = std::log(D / R);
        double cur = lt;
        double target = std::log(std::max(q.tolerance, 1e-300)) - 35.0;
        for (int k = 1; k <= 100000; ++k) {
            cur += std::log((k - 1 + p_max)) - std::log(double(k)) + lnDR;
            if (cur < target && k > p_max * (D / R) / (1.0 - D / R)) {
                k_need = k;
                break;
            }
            k_need = k;
        }
        k_need += 4;
    }

    StarTable st = build_star_table(m, u, n_stop, k_need);

    dd acc(0.0);
    double abs_sum = 0.0, k_slack = 0.0;
    for (int n = 0; n <= n_stop; ++n) {
        double p = (n + d) / alpha;
        dd nsum(0.0);
        for (int mm = 0; 2 * mm <= n; ++mm) {
            int j = n - 2 * mm;
            // inner k sum
            dd f = exp(lgamma(dd(p)) - dd(p) * log(dd(R)));
            dd ksum(0.0);
            for (int k = 0; k <= k_need; ++k) {
                if (k > 0) f = f * dd((k - 1 + p) / (double(k) * R));
                ksum += f * dd(st.s[j][k]);
            }
            // k tail bound: geometric from the last factor
            double lastf = double(f) * std::sqrt(double(harmonic_dim(j, d)));
            double ratio = (k_need + p) / (k_need + 1.0) * (D / R);
            if (ratio < 1.0)
                k_slack += std::fabs(lastf) * std::pow(D, k_need) * ratio / (1.0 - ratio);
            double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                       / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
            nsum += dd(wgt) * ksum;
        }
        dd term = dd(pref) * dd(n == 0 ? 1.0 : std::pow(0.5 * r, n)) * nsum;
        acc += term;
        abs_sum += std::fabs(double(term.hi));
    }

    SeriesResult res;
    res.value = double(acc);
    res.terms_used = n_stop + 1;
    res.truncation_bound = n_tail + k_slack + 1e-25 * abs_sum;
    res.converged = res.truncation_bound <= q.tolerance;
    return res;
}

SeriesResult pdf_gt1_radial(const StableModel& m, double r, RadialRep rep,
                            double tolerance, int k_max, RngStream* rng, long mc_budget) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("pdf_gt1_radial: requires alpha in (1,2)");
    if (!(r > 0.0)) throw std::domain_error("pdf_gt1_radial: requires r > 0");
    int d = m.d;
    double alpha = m.alpha;
    SeriesResult res;

    if (rep == RadialRep::power) {
        bool zonal = m.zonal && (d == 2 || d == 3);
        std::shared_ptr<ZonalEngine> ze;
        std::shared_ptr<GridEngine> ge;
        if (zonal)
            ze = zonal_engine(m, 8);
        else
            ge = std::make_shared<GridEngine>(m);
        auto mneg = [&](double p) {
            if (zonal) {
                auto row = ze->lambda_neg_power(p, 0);
                return double(row[0].re);
            }
            cplx acc = 0.0;
            for (size_t i = 0; i < ge->V.size(); ++i)
                acc += std::pow(ge->V[i], -p) * ge->wts[i];
            return acc.real();
        };
        auto mneg_abs = [&](double p) {
            if (zonal) return ze->abs_moment_neg_power(p);
            double acc = 0.0;
            for (size_t i = 0; i < ge->V.size(); ++i)
                acc += std::pow(std::abs(ge->V[i]), -p) * ge->wts[i];
            return acc;
        };
        dd acc(0.0);
        double abs_sum = 0.0, max_term = 0.0, tail = 1e300, prev_next = -1.0;
        double base = 1.0 / (std::pow(M_PI, 0.5 * d) * alpha);
        int n = 0;
        for (; n <= k_max; ++n) {
            double p = (2.0 * n + d) / alpha;
            double term = base * ((n % 2 == 0) ? 1.0 : -1.0)
                        * std::exp(log_gamma(p) - log_gamma(n + 1.0)
                                   - log_gamma(n + 0.5 * d)
                                   + (2.0 * n + d - 1.0) * std::log(0.5 * r))
                        * mneg(p);
            acc += dd(term);
            abs_sum += std::fabs(term);
            max_term = std::max(max_term, std::fabs(term));
            double pn = (2.0 * (n + 1) + d) / alpha;
            double next = base
                        * std::exp(log_gamma(pn) - log_gamma(n + 2.0)
                                   - log_gamma(n + 1 + 0.5 * d)
                                   + (2.0 * n + d + 1.0) * std::log(0.5 * r))
                        * mneg_abs(pn);
            if (prev_next > 0.0 && next < 0.65 * prev_next)
                tail = next / (1.0 - next / prev_next);
            else
                tail = 1e300;
            prev_next = next;
            if (tail < tolerance) { ++n; break; }
            if (max_term > 1e12 * tolerance) { ++n; break; }
        }
        res.value = double(acc);
        res.terms_used = n;
        res.truncation_bound = std::min(tail, 1e300) + 1e-15 * abs_sum;
        res.converged = res.truncation_bound <= tolerance;
        return res;
    }

    if (rep == RadialRep::expanded) {
        double R = m.R, D = m.sup_abs_vstar;
        MomentSource ms(m, std::max(32, k_max / 4), true);
        double base = std::pow(0.5 * r, d - 1.0) / (std::pow(M_PI, 0.5 * d) * alpha);
        double lnRD = std::log(R - D);
        dd acc(0.0);
        double abs_sum = 0.0, tail = 1e300, prev_b = -1.0;
        double area = sphere_area(d);
        int n = 0;
        double k_slack = 0.0;
        for (; n <= k_max; ++n) {
            double p = (2.0 * n + d) / alpha;
            // inner k sum over moments of V*^k
            dd f = exp(lgamma(dd(p)) - dd(p) * log(dd(R)));
            dd ksum(0.0);
            double dk = 1.0; // D^k alongside f, for the tail bound
            int k = 0;
            for (; k <= 100000; ++k) {
                if (k > 0) {
                    f = f * dd((k - 1 + p) / (double(k) * R));
                    dk *= D;
                }
                ms.ensure_k(k);
                ksum += f * ms.moment(k).re;
                double ratio = (k + 1 + p) / (k + 2.0) * (D / R);
                if (ratio < 0.92) {
                    double tnext = std::fabs(double(f.hi)) * (k + p) / (k + 1.0) / R
                                 * dk * D * area;
                    double rest = tnext / (1.0 - ratio);
                    if (rest < 0.01 * tolerance * std::max(1.0, std::fabs(double(ksum.hi))) ||
                        rest < 1e-18 * area) {
                        k_slack += rest;
                        break;
                    }
                }
            }
            double cn = ((n % 2 == 0) ? 1.0 : -1.0)
                      * std::exp(2.0 * n * std::log(0.5 * r) - log_gamma(n + 1.0)
                                 - log_gamma(n + 0.5 * d));
            dd term = dd(base * cn) * ksum;
            acc += term;
            abs_sum += std::fabs(double(term.hi));
            // majorant of the next n term
            double pn = (2.0 * (n + 1) + d) / alpha;
            double bnext = base
                         * std::exp(2.0 * (n + 1) * std::log(0.5 * r)
                                    - log_gamma(n + 2.0) - log_gamma(n + 1 + 0.5 * d)
                                    + log_gamma(pn) - pn * lnRD) * area;
            if (prev_b > 0.0 && bnext < 0.65 * prev_b)
                tail = bnext / (1.0 - bnext / prev_b);
            else
                tail = 1e300;
            prev_b = bnext;
            if (tail < tolerance) { ++n; break; }
        }
        res.value = double(acc);
        res.terms_used = n;
        res.truncation_bound = std::min(tail, 1e300) + k_slack + 1e-24 * abs_sum;
        res.converged = res.truncation_bound <= tolerance;
        return res;
    }

    // subordination: Monte Carlo over the subordinator plus angular quadrature
    if (!rng) throw std::domain_error("pdf_gt1_radial: subordination needs an RngStream");
    auto grid = model_grid(d, std::max(m.P.degree(), 0));
    size_t nang = std::min<size_t>(grid.size(), 96);
    size_t stride = grid.size() / nang;
    std::vector<cplx> vda, vd2a;
    for (size_t i = 0; i < nang; ++i) {
        cplx v = m.V.eval(grid[i * stride]);
        vda.push_back(std::pow(v, -double(d) / alpha));
        vd2a.push_back(std::pow(v, 2.0 / alpha));
    }
    long S = std::max(1000L, mc_budget);
    double mean = 0.0, msq = 0.0;
    for (long s = 1; s <= S; ++s) {
        double zeta = sample_positive_stable(0.5 * alpha, *rng);
        cplx avg = 0.0;
        for (size_t i = 0; i < nang; ++i)
            avg += vda[i] * std::exp(-r * r / (4.0 * zeta) / vd2a[i]);
        double y = std::pow(zeta, -0.5 * d) * avg.real() / double(nang);
        double delta = y - mean;
        mean += delta / double(s);
        msq += delta * (y - mean);
    }
    double se = std::sqrt(msq / double(S) / double(S - 1));
    double pref2 = std::pow(0.5 * r, d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d))
                 * sphere_area(d);
    res.value = pref2 * mean;
    res.truncation_bound = 3.0 * pref2 * se;
    res.terms_used = int(std::min<long>(S, 1000000000L));
    res.converged = res.truncation_bound <= tolerance;
    return res;
}

// ---------------------------------------------------------------------------
// tail expansions, alpha > 1
// ---------------------------------------------------------------------------

SpherePoly tail_expansion_gt1(const StableModel& m, int j, double r, int n) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("tail_expansion_gt1: requires alpha in (1,2)");
    SpherePoly out(m.d);
    if (n < 1) return out;
    auto table = harmonic_coeffs(m, CoeffKind::V, n);
    double alpha = m.alpha;
    double lnpref = -m.d * std::log(r) - 0.5 * m.d * std::log(M_PI);
    for (int k = 1; k <= n; ++k) {
        lnpref += alpha * M_LN2 - std::log(double(k)) - alpha * std::log(r);
        double ratio = gamma_ratio(0.5 * (j + k * alpha + m.d), 0.5 * (j - k * alpha));
        if (ratio == 0.0) continue;
        const SpherePoly* s = table.entry(j, k);
        if (!s) continue;
        SpherePoly t = *s;
        t *= ((k % 2 == 0) ? 1.0 : -1.0) * std::exp(lnpref) * ratio;
        out += t;
    }
    return out;
}

double tail_radial_gt1(const StableModel& m, double r, int n) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("tail_radial_gt1: requires alpha in (1,2)");
    auto table = harmonic_coeffs(m, CoeffKind::V, std::max(n, 1));
    double alpha = m.alpha;
    double lnpref = -std::log(r) - 0.5 * m.d * std::log(M_PI);
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        lnpref += alpha * M_LN2 - std::log(double(k)) - alpha * std::log(r);
        double ratio = gamma_ratio(0.5 * (k * alpha + m.d), -0.5 * k * alpha);
        acc += ((k % 2 == 0) ? 1.0 : -1.0) * std::exp(lnpref) * ratio
             * table.moments[k].real();
    }
    return acc;
}

double tail_radial_gt1_error(const StableModel& m, double r, int n) {
    double alpha = m.alpha;
    int k = n + 1;
    double lnpref = -std::log(r) - 0.5 * m.d * std::log(M_PI)
                  + k * (alpha * M_LN2 - alpha * std::log(r)) - log_gamma(k + 1.0);
    double ratio = std::fabs(gamma_ratio(0.5 * (k * alpha + m.d), -0.5 * k * alpha));
    return std::exp(lnpref) * ratio * sphere_area(m.d) * std::pow(m.sup_abs_v, k);
}

// ---------------------------------------------------------------------------
// linear-model closed forms (independent of the generic machinery)
// ---------------------------------------------------------------------------

namespace {

struct LinKappa {
    dd k0, k1, k2;
};

LinKappa linear_kappas(double alpha, int d, double c) {
    LinKappa k;
    dd a(alpha);
    dd dv{double(d)};
    k.k0 = dd(c) * exp(-lgamma((a + dv) * dd(0.5)) - lgamma(a * dd(0.5) + dd(1.0)));
    dd s, co;
    sincos(ddc_const::half_pi * a, s, co);
    k.k1 = -(s / co) * exp(-lgamma((a + dv + dd(1.0)) * dd(0.5))
                           - lgamma((a + dd(1.0)) * dd(0.5)));
    k.k2 = exp(dd(0.5 * d) * log(ddc_const::pi) + lgamma(a + dd(1.0))
               - (a - dd(1.0)) * ddc_const::ln2);
    return k;
}

// sum over m of k! / ((k-j-2m)! Gamma(j+m+d/2) m!) (-1)^m a^{k-j-2m} b^{j+2m} / 2^{j+2m}
dd kappa_m_sum(int k, int j, int d, dd a, dd b) {
    if (j > k) return dd(0.0);
    // m = 0 seed in log space
    dd ln_t0 = lgamma(dd(double(k) + 1.0)) - lgamma(dd(double(k - j) + 1.0))
             - lgamma(dd(double(j) + 0.5 * d));
    dd aa = fabs(a), bb = fabs(b);
    double sa = a.hi < 0 ? -1.0 : 1.0, sb = b.hi < 0 ? -1.0 : 1.0;
    ln_t0 += dd(double(k - j)) * log(aa) + dd(double(j)) * (log(bb) - ddc_const::ln2);
    double sgn0 = std::pow(sa, double((k - j) % 2)) * std::pow(sb, double(j % 2));
    dd t = exp(ln_t0) * dd(sgn0);
    dd acc = t;
    int mmax = (k - j) / 2;
    for (int mm = 1; mm <= mmax; ++mm) {
        // ratio t_m / t_{m-1} = -(k-j-2m+2)(k-j-2m+1) b^2 / (4 a^2 m (j+m-1+d/2))
        dd num = dd(double(k - j - 2 * mm + 2)) * dd(double(k - j - 2 * mm + 1)) * sqr(b);
        dd den = dd(4.0 * mm) * dd(double(j + mm - 1) + 0.5 * d) * sqr(a);
        t = t * (-(num / den));
        acc += t;
    }
    return acc;
}

} // namespace

SeriesResult linear_model_pdf(double c, const std::vector<double>& theta, double alpha,
                              const std::vector<double>& x, double tolerance, int k_max) {
    int d = int(theta.size());
    if (d < 2) throw std::domain_error("linear_model_pdf: d >= 2");
    if (!(c >= 1.0)) throw std::domain_error("linear_model_pdf: requires c >= 1");
    if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
        throw std::domain_error("linear_model_pdf: alpha in (0,1) or (1,2)");
    double r = vec_norm(x);
    if (!(r > 0.0)) throw std::domain_error("linear_model_pdf: |x| > 0 required");
    auto u = vec_unit(x, r);
    double tx = 0.0;
    for (int i = 0; i < d; ++i) tx += theta[i] * u[i];
    tx = std::clamp(tx, -1.0, 1.0);
    LinKappa kp = linear_kappas(alpha, d, c);

    SeriesResult res;
    if (alpha < 1.0) {
        // single series in k with zonal coefficients
        dd common = exp(lgamma(dd(0.5 * d)) - dd(0.5 * d) * log(ddc_const::pi));
        dd lnC = log(dd(2.0) * exp(lgamma(dd(alpha) + dd(1.0))
                                   + dd(0.5 * d) * log(ddc_const::pi)));
        dd ln_pref = dd(0.0);
        dd acc(0.0);
        double abs_sum = 0.0;
        int small_run = 0;
        int k = 1;
        std::vector<dd> chebs;
        double last_terms[3] = {1e300, 1e300, 1e300};
        for (; k <= k_max; ++k) {
            ln_pref += lnC - log(dd(double(k))) - dd(alpha) * dd(std::log(r));
            if (k == 1) ln_pref -= dd(double(d)) * dd(std::log(r));
            if (int(chebs.size()) <= k) chebs = cheb_values(d, tx, k + 2);
            dd term(0.0);
            for (int parity = 0; parity < 2; ++parity) {
                int jt = k - ((k % 2) == parity ? 1 : 0);
                if (jt < 0) continue;
                dd ka = dd(double(k)) * dd(alpha);
                dd A = (dd(double(jt)) + ka + dd(double(d))) * dd(0.5);
                dd B = (dd(double(jt)) - ka) * dd(0.5);
                dd chain;
                double sgn = (k % 2 == 0) ? 1.0 : -1.0;
                if (B.hi > 0.0) {
                    chain = exp(ln_pref + lgamma(A) - lgamma(B));
                } else {
                    if (std::fabs(B.hi - std::round(B.hi)) < 1e-13) continue;
                    dd s = sin(ddc_const::pi * B);
                    sgn *= s.hi > 0 ? 1.0 : -1.0;
                    chain = exp(ln_pref + lgamma(A) + log(fabs(s)) - log(ddc_const::pi)
                                + lgamma(dd(1.0) - B));
                }
                chain = chain * dd(sgn);
                for (int j = jt; j >= 0; j -= 2) {
                    dd msum = kappa_m_sum(k, j, d, kp.k0, kp.k1);
                    term += chain * dd(double(harmonic_dim(j, d))) * msum * chebs[j];
                    if (j >= 2) {
                        dd Bm = (dd(double(j - 2)) - dd(double(k)) * dd(alpha)) * dd(0.5);
                        dd Am = (dd(double(j - 2)) + dd(double(k)) * dd(alpha)
                                 + dd(double(d))) * dd(0.5);
                        chain = chain * Bm / Am;
                    }
                }
            }
            term = term * common;
            if (!std::isfinite(double(term.hi))) break;
            acc += term;
            abs_sum += std::fabs(double(term.hi));
            last_terms[k % 3] = std::fabs(double(term.hi));
            double mx = std::max({last_terms[0], last_terms[1], last_terms[2]});
            if (k > 8 && mx < 0.05 * tolerance) {
                small_run = 3;
                ++k;
                break;
            }
        }
        res.value = double(acc);
        res.terms_used = k - 1;
        double mx = std::max({last_terms[0], last_terms[1], last_terms[2]});
        res.truncation_bound = 10.0 * mx + 1e-26 * abs_sum;
        res.converged = small_run > 0 && res.truncation_bound <= tolerance;
        return res;
    }

    // alpha in (1,2): recentered closed form
    dd base = exp(dd(1.0 - d) * ddc_const::ln2 + lgamma(dd(0.5 * d))
                  - dd(0.5 * d) * log(ddc_const::pi)) / dd(alpha);
    dd denom = kp.k0 + sqr(kp.k1) / kp.k0; // k-sum base (without kappa2)
    dd a_star = sqr(kp.k1) / kp.k0;
    dd acc(0.0);
    double abs_sum = 0.0;
    double lastn[3] = {1e300, 1e300, 1e300};
    int n = 0;
    std::vector<dd> chebs = cheb_values(d, tx, 4);
    bool conv = false;
    for (; n <= std::min(k_max, 400); ++n) {
        double p = (n + d) / alpha;
        if (int(chebs.size()) <= n) chebs = cheb_values(d, tx, n + 4);
        dd nsum(0.0);
        for (int mm = 0; 2 * mm <= n; ++mm) {
            int j = n - 2 * mm;
            // the (-1)^{m+n} of the display combines with the (-1)^j carried
            // inside the m-sum to a net (-1)^m
            double wsgn = (mm % 2 == 0) ? 1.0 : -1.0;
            dd wgt = dd(wsgn * double(harmonic_dim(j, d)))
                   * exp(-lgamma(dd(double(mm) + 1.0)) - lgamma(dd(double(n - mm) + 0.5 * d)));
            // k sum of Gamma(k+p) / (k! denom^{k+p}) times the kappa m-sum
            dd f = exp(lgamma(dd(p)) - dd(p) * log(denom));
            dd ks(0.0);
            double ab_star = double(sqrt(sqr(a_star) + sqr(kp.k1)).hi);
            for (int k = 0; k <= 4000; ++k) {
                if (k > 0) f = f * dd(k - 1 + p) / (dd(double(k)) * denom);
                if (k >= j) {
                    dd msum = kappa_m_sum(k, j, d, a_star, -kp.k1);
                    dd tk = f * msum;
                    ks += tk;
                    double ratio = (k + p) / (k + 1.0) * ab_star / double(denom.hi);
                    if (k > j + 3 && std::fabs(double(tk.hi))
                                         < 1e-30 * (std::fabs(double(ks.hi)) + 1e-280)
                        && ratio < 1.0)
                        break;
                }
            }
            nsum += wgt * ks;
        }
        dd kap2pow = exp(-dd(p) * log(kp.k2));
        dd term = base * kap2pow * dd(n == 0 ? 1.0 : std::pow(0.5 * r, n)) * nsum;
        acc += term;
        abs_sum += std::fabs(double(term.hi));
        lastn[n % 3] = std::fabs(double(term.hi));
        double mx = std::max({lastn[0], lastn[1], lastn[2]});
        if (n > 6 && mx < 0.05 * tolerance) {
            conv = true;
            ++n;
            break;
        }
    }
    res.value = double(acc);
    res.terms_used = n;
    double mx = std::max({lastn[0], lastn[1], lastn[2]});
    res.truncation_bound = 10.0 * mx + 1e-25 * abs_sum;
    res.converged = conv && res.truncation_bound <= tolerance;
    return res;
}

// ---------------------------------------------------------------------------
// radial CDF and normalization
// ---------------------------------------------------------------------------

RadialCdf::RadialCdf(const StableModel& m, double tolerance) {
    if (m.alpha == 1.0) throw std::domain_error("RadialCdf: alpha != 1");
    int d = m.d;
    double alpha = m.alpha;
    double area = sphere_area(d);
    double scale = std::pow(m.sup_abs_v, 1.0 / alpha);

    // pointwise radial density with automatic representation choice
    std::function<double(double)> pdf_at;
    std::vector<double> oc; // radial origin-expansion coefficients (even orders)
    if (alpha < 1.0) {
        // c_{2m}: radial pdf near 0 is r^{d-1} sum_m oc[m] r^{2m}
        bool zonal = m.zonal && (d == 2 || d == 3);
        std::shared_ptr<ZonalEngine> ze;
        std::shared_ptr<GridEngine> ge;
        if (zonal)
            ze = zonal_engine(m, 8);
        else
            ge = std::make_shared<GridEngine>(m);
        double pref0 = area * std::pow(2.0, 1.0 - d) * std::pow(M_PI, -0.5 * d) / alpha;
        for (int mm = 0; mm <= 14; ++mm) {
            int k = 2 * mm;
            double p = (k + d) / alpha;
            double mneg;
            if (zonal) {
                auto row = ze->lambda_neg_power(p, 0);
                mneg = double(row[0].re) / area;
            } else {
                cplx accm = 0.0;
                for (size_t i = 0; i < ge->V.size(); ++i)
                    accm += std::pow(ge->V[i], -p) * ge->wts[i];
                mneg = accm.real() / area;
            }
            double c2m = pref0 * gamma_pos(p) * std::pow(0.5, k)
                       * ((mm % 2 == 0) ? 1.0 : -1.0)
                       / (gamma_pos(mm + 1.0) * gamma_pos(mm + 0.5 * d)) * mneg;
            oc.push_back(c2m);
        }
        pdf_at = [&m, d, oc, tolerance](double r) {
            if (r <= 0.0) return 0.0;
            auto sr = pdf_lt1_radial(m, r, 0.05 * tolerance, 900);
            double scale_g = std::fabs(sr.value) + 1e-300;
            if (sr.converged || sr.truncation_bound < 0.02 * scale_g)
                return sr.value;
            // origin side: optimally truncated even-order expansion
            double acc = 0.0, r2 = r * r, pw = 1.0;
            double prev = 1e300;
            for (size_t mm = 0; mm < oc.size(); ++mm) {
                double term = oc[mm] * pw;
                if (std::fabs(term) > prev) break; // past the optimal cut
                acc += term;
                prev = std::fabs(term);
                pw *= r2;
            }
            return acc * std::pow(r, d - 1.0);
        };
    } else {
        pdf_at = [&m, tolerance](double r) {
            if (r <= 0.0) return 0.0;
            auto sr = pdf_gt1_radial(m, r, RadialRep::expanded, 0.05 * tolerance, 600);
            double scale_g = std::fabs(sr.value) + 1e-300;
            if (sr.converged || sr.truncation_bound < 0.02 * scale_g) return sr.value;
            return tail_radial_gt1(m, r, 3);
        };
    }

    // choose the upper end of the dense grid
    double r_mid = std::max(4.0 * scale, 2.0);
    if (alpha > 1.0) {
        // keep the series representable; extend only while it converges
        while (r_mid > 2.0) {
            auto probe = pdf_gt1_radial(m, r_mid, RadialRep::expanded, 1e-9, 600);
            double err3 = tail_radial_gt1_error(m, r_mid, 3);
            if (probe.converged || err3 < tolerance * std::max(probe.value, 1e-12)) break;
            r_mid *= 0.85;
        }
        // make sure the tail expansion is trustworthy at r_mid
        while (tail_radial_gt1_error(m, r_mid, 3)
               > 0.5 * tolerance * std::max(std::fabs(tail_radial_gt1(m, r_mid, 3)), 1e-12))
            r_mid *= 1.3;
    }
    r_hi_ = r_mid;

    // cumulative integration on a blended grid
    int n_nodes = 700;
    grid_r_.resize(n_nodes + 1);
    grid_pdf_.resize(n_nodes + 1);
    grid_cdf_.resize(n_nodes + 1);
    for (int i = 0; i <= n_nodes; ++i) {
        double s = double(i) / n_nodes;
        grid_r_[i] = r_mid * s * s * (3.0 - 2.0 * s) * 0.5 + r_mid * 0.5 * s; // denser near 0
    }
    grid_r_[0] = 0.0;
    for (int i = 0; i <= n_nodes; ++i) grid_pdf_[i] = pdf_at(grid_r_[i]);
    grid_cdf_[0] = 0.0;
    for (int i = 1; i <= n_nodes; ++i) {
        double h = grid_r_[i] - grid_r_[i - 1];
        double rm = 0.5 * (grid_r_[i] + grid_r_[i - 1]);
        double pm = pdf_at(rm);
        grid_cdf_[i] = grid_cdf_[i - 1] + h / 6.0 * (grid_pdf_[i - 1] + 4.0 * pm + grid_pdf_[i]);
    }
    cdf_hi_ = grid_cdf_[n_nodes];

    // analytic tail integral terms: pdf(s) ~ sum_k coef_k s^{-k alpha - 1}
    int ntail = alpha < 1.0 ? 10 : 3;
    auto table = harmonic_coeffs(m, CoeffKind::V, std::min(ntail, 60 / std::max(m.P.degree(), 1)));
    double lnpref = -0.5 * d * std::log(M_PI);
    double fact = 1.0;
    for (int k = 1; k <= int(table.moments.size()) - 1 && k <= ntail; ++k) {
        fact *= k;
        double coef = ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(2.0, alpha * k) / fact
                    * std::exp(lnpref)
                    * gamma_ratio(0.5 * (k * alpha + d), -0.5 * k * alpha)
                    * table.moments[k].real();
        tail_terms_.emplace_back(coef, k * alpha);
    }
}

double RadialCdf::interp(double r) const {
    auto it = std::upper_bound(grid_r_.begin(), grid_r_.end(), r);
    size_t i = std::max<size_t>(1, it - grid_r_.begin());
    i = std::min(i, grid_r_.size() - 1);
    double r0 = grid_r_[i - 1], r1 = grid_r_[i];
    double t = r1 > r0 ? (r - r0) / (r1 - r0) : 0.0;
    // Hermite-ish with stored densities for smoothness
    double h = r1 - r0;
    double c0 = grid_cdf_[i - 1], c1 = grid_cdf_[i];
    double m0 = grid_pdf_[i - 1] * h, m1 = grid_pdf_[i] * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * c0 + (t3 - 2 * t2 + t) * m0
         + (-2 * t3 + 3 * t2) * c1 + (t3 - t2) * m1;
}

double RadialCdf::operator()(double r) const {
    if (r <= 0.0) return 0.0;
    if (r <= r_hi_) return interp(r);
    // tail integral of the expansion terms between r and infinity
    double above = 0.0;
    for (auto [coef, ka] : tail_terms_) above += coef * std::pow(r, -ka) / ka;
    double at_hi = 0.0;
    for (auto [coef, ka] : tail_terms_) at_hi += coef * std::pow(r_hi_, -ka) / ka;
    return cdf_hi_ + (at_hi - above);
}

double RadialCdf::pdf(double r) const {
    if (r <= 0.0) return 0.0;
    if (r <= r_hi_) {
        auto it = std::upper_bound(grid_r_.begin(), grid_r_.end(), r);
        size_t i = std::max<size_t>(1, it - grid_r_.begin());
        i = std::min(i, grid_r_.size() - 1);
        double t = (r - grid_r_[i - 1]) / std::max(grid_r_[i] - grid_r_[i - 1], 1e-300);
        return (1.0 - t) * grid_pdf_[i - 1] + t * grid_pdf_[i];
    }
    double v = 0.0;
    for (auto [coef, ka] : tail_terms_) v += coef * std::pow(r, -ka - 1.0);
    return v;
}

double radial_total_mass(const StableModel& m, double tolerance) {
    RadialCdf cdf(m, tolerance);
    double at_hi = 0.0;
    // total = cdf at the bulk edge plus the whole analytic tail
    double r_hi = cdf.bulk_upper();
    at_hi = cdf(r_hi);
    double tail = cdf(1e280) - at_hi; // effectively the full tail integral
    return at_hi + tail;
}

// ---------------------------------------------------------------------------
// streams for the alpha > 1 samplers
// ---------------------------------------------------------------------------

namespace {

class Gt1RadialStream final : public TermStream {
public:
    Gt1RadialStream(const StableModel& m, double r)
        : ms_(std::make_shared<MomentSource>(m, 64, true)), r_(r) {
        d_ = m.d;
        alpha_ = m.alpha;
        R_ = m.R;
        D_ = m.sup_abs_vstar;
        area_ = sphere_area(d_);
        base_ = std::pow(0.5 * r, d_ - 1.0) / (std::pow(M_PI, 0.5 * d_) * alpha_);
        lnRD_ = std::log(R_ - D_);
    }

    void advance() override {
        if (dead_) return;
        int n = n_++;
        double p = (2.0 * n + d_) / alpha_;
        dd f = exp(lgamma(dd(p)) - dd(p) * log(dd(R_)));
        dd ksum(0.0);
        double dk = 1.0;
        for (int k = 0; k <= 100000; ++k) {
            if (k > 0) {
                f = f * dd((k - 1 + p) / (double(k) * R_));
                dk *= D_;
            }
            ms_->ensure_k(k);
            ksum += f * ms_->moment(k).re;
            double ratio = (k + 1 + p) / (k + 2.0) * (D_ / R_);
            if (ratio < 0.92) {
                double tnext = std::fabs(double(f.hi)) * (k + p) / (k + 1.0) / R_
                             * dk * D_ * area_;
                double rest = tnext / (1.0 - ratio);
                if (rest < 1e-13 * (std::fabs(double(ksum.hi)) + 1e-250)) {
                    k_slack_ += rest * base_;
                    break;
                }
            }
            if (k > 20000) { dead_ = true; return; }
        }
        double cn = ((n % 2 == 0) ? 1.0 : -1.0)
                  * std::exp(2.0 * n * std::log(0.5 * r_) - log_gamma(n + 1.0)
                             - log_gamma(n + 0.5 * d_));
        dd term = dd(base_ * cn) * ksum;
        if (!std::isfinite(double(term.hi))) { dead_ = true; return; }
        sum_ += term;
        abs_sum_ += std::fabs(double(term.hi));
        // next-block majorant
        double pn = (2.0 * (n + 1) + d_) / alpha_;
        double bnext = base_
                     * std::exp(2.0 * (n + 1) * std::log(0.5 * r_) - log_gamma(n + 2.0)
                                - log_gamma(n + 1 + 0.5 * d_) + log_gamma(pn)
                                - pn * lnRD_) * area_;
        if (prev_b_ > 0.0 && bnext < 0.75 * prev_b_)
            tail_ = bnext / (1.0 - bnext / prev_b_);
        else
            tail_ = 1e300;
        prev_b_ = bnext;
    }

    double partial() const override { return double(sum_); }
    double remainder_bound() const override {
        return tail_ + k_slack_ + 1e-24 * abs_sum_;
    }
    bool exhausted() const override { return dead_ || n_ > 3000; }

private:
    std::shared_ptr<MomentSource> ms_;
    double r_, alpha_, R_, D_, area_, base_, lnRD_;
    int d_;
    dd sum_{0.0};
    double abs_sum_ = 0.0, tail_ = 1e300, k_slack_ = 0.0, prev_b_ = -1.0;
    int n_ = 0;
    bool dead_ = false;
};

class Gt1DirectionStream final : public TermStream {
public:
    Gt1DirectionStream(const StableModel& m, double r, const std::vector<double>& u)
        : r_(r) {
        d_ = m.d;
        alpha_ = m.alpha;
        R_ = m.R;
        D_ = m.sup_abs_vstar;
        lnRD_ = std::log(R_ - D_);
        // enough degrees/powers for the blocks we expect to visit
        int jmax = 48, kmax = 48;
        double lt = log_gamma((jmax + d_) / alpha_) - (jmax + d_) / alpha_ * std::log(R_);
        while (kmax < 4000) {
            lt += std::log(kmax + (jmax + d_) / alpha_) - std::log(double(kmax))
                + std::log(D_ / R_);
            if (lt < -80.0) break;
            ++kmax;
        }
        table_ = build_star_table(m, u, jmax, kmax);
        jmax_ = jmax;
        kmax_ = kmax;
    }

    void advance() override {
        if (dead_) return;
        int n = n_++;
        if (n > jmax_) { dead_ = true; return; }
        double p = (n + d_) / alpha_;
        dd nsum(0.0);
        for (int mm = 0; 2 * mm <= n; ++mm) {
            int j = n - 2 * mm;
            dd f = exp(lgamma(dd(p)) - dd(p) * log(dd(R_)));
            dd ks(0.0);
            double dk = 1.0;
            for (int k = 0; k <= kmax_; ++k) {
                if (k > 0) {
                    f = f * dd((k - 1 + p) / (double(k) * R_));
                    dk *= D_;
                }
                ks += f * dd(table_.s[j][k]);
            }
            double ratio = (kmax_ + 1 + p) / (kmax_ + 2.0) * (D_ / R_);
            if (ratio < 1.0)
                k_slack_ += std::fabs(double(f.hi)) * (kmax_ + p) / (kmax_ + 1.0) / R_
                          * dk * D_ * std::sqrt(double(harmonic_dim(j, d_)))
                          / (1.0 - ratio) * std::pow(0.5 * r_, n);
            double wgt = ((mm % 2 == 0) ? 1.0 : -1.0)
                       / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d_));
            nsum += dd(wgt) * ks;
        }
        dd term = dd(n == 0 ? 1.0 : std::pow(0.5 * r_, n)) * nsum;
        if (!std::isfinite(double(term.hi))) { dead_ = true; return; }
        sum_ += term;
        abs_sum_ += std::fabs(double(term.hi));
        double pn = (n + 1 + d_) / alpha_;
        double msum = 0.0;
        for (int mm = 0; 2 * mm <= n + 1; ++mm) {
            int j = n + 1 - 2 * mm;
            msum += std::sqrt(double(harmonic_dim(j, d_)))
                  / (gamma_pos(mm + 1.0) * gamma_pos(n + 1 - mm + 0.5 * d_));
        }
        double bnext = std::pow(0.5 * r_, n + 1) * std::exp(log_gamma(pn) - pn * lnRD_)
                     * msum;
        if (prev_b_ > 0.0 && bnext < 0.75 * prev_b_)
            tail_ = bnext / (1.0 - bnext / prev_b_);
        else
            tail_ = 1e300;
        prev_b_ = bnext;
    }

    double partial() const override { return double(sum_); }
    double remainder_bound() const override {
        return tail_ + k_slack_ + 1e-24 * abs_sum_;
    }
    bool exhausted() const override { return dead_; }

private:
    StarTable table_;
    double r_, alpha_, R_, D_, lnRD_;
    int d_, jmax_ = 0, kmax_ = 0, n_ = 0;
    dd sum_{0.0};
    double abs_sum_ = 0.0, tail_ = 1e300, k_slack_ = 0.0, prev_b_ = -1.0;
    bool dead_ = false;
};

} // namespace

std::unique_ptr<TermStream> gt1_radial_stream(const StableModel& m, double r) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("gt1_radial_stream: requires alpha in (1,2)");
    return std::make_unique<Gt1RadialStream>(m, r);
}

std::unique_ptr<TermStream> gt1_direction_stream(const StableModel& m, double r,
                                                 const std::vector<double>& u) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("gt1_direction_stream: requires alpha in (1,2)");
    return std::make_unique<Gt1DirectionStream>(m, r, u);
}

double gt1_direction_envelope(const StableModel& m, double r) {
    int d = m.d;
    double alpha = m.alpha, R = m.R, D = m.sup_abs_vstar;
    double lnRD = std::log(R - D);
    double acc = 0.0, prev = -1.0;
    for (int n = 0; n <= 4000; ++n) {
        double p = (n + d) / alpha;
        double msum = 0.0;
        for (int mm = 0; 2 * mm <= n; ++mm) {
            int j = n - 2 * mm;
            msum += std::sqrt(double(harmonic_dim(j, d)))
                  / (gamma_pos(mm + 1.0) * gamma_pos(n - mm + 0.5 * d));
        }
        double b = std::pow(0.5 * r, n) * std::exp(log_gamma(p) - p * lnRD) * msum;
        acc += b;
        if (prev > 0.0 && b < 0.5 * prev && b < 1e-12 * acc) break;
        prev = b;
    }
    return 1.02 * acc;
}

} // namespace mvstable
