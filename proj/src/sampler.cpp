#include <mvstable/sampler.hpp>
#include <mvstable/special.hpp>

#include "series_detail.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mvstable {

namespace {

uint64_t splitmix_fin(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace

uint64_t RngStream::next_u64() { return splitmix_fin(key + (++ctr) * kGolden); }

double RngStream::uniform() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    // polar rejection; no cached spare, so the state stays a pure counter
    for (;;) {
        double u = 2.0 * uniform() - 1.0;
        double v = 2.0 * uniform() - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

double RngStream::exponential() { return -std::log(uniform()); }

RngStream RngStream::split() { return RngStream{next_u64(), 0}; }

double sample_positive_stable(double a, RngStream& rng) {
    if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("sample_positive_stable: requires a in (0,1)");
    // Kanter's representation: V uniform on (0,pi), W exponential,
    //   Z = sin(aV) / sin(V)^{1/a} * [ sin((1-a)V) / W ]^{(1-a)/a}
    // has E exp(-t Z) = exp(-t^a).
    double v = M_PI * rng.uniform();
    double w = rng.exponential();
    double z = std::sin(a * v) * std::pow(std::sin(v), -1.0 / a)
             * std::pow(std::sin((1.0 - a) * v) / w, (1.0 - a) / a);
    return z;
}

double sample_symmetric_norm(const StableModel& m, RngStream& rng) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("sample_symmetric_norm: requires alpha in (1,2)");
    if (!m.symmetric(1e-12))
        throw SymmetryRequired("sample_symmetric_norm: odd harmonics present");
    int d = m.d;
    std::vector<double> z(d);
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
        z[i] = rng.normal();
        n2 += z[i] * z[i];
    }
    double nz = std::max(std::sqrt(n2), 1e-300);
    std::vector<double> u(d);
    for (int i = 0; i < d; ++i) u[i] = z[i] / nz;
    double v = m.V.eval(u).real();
    if (v <= 0.0) throw SymmetryRequired("sample_symmetric_norm: V not positive");
    double zeta = sample_positive_stable(0.5 * m.alpha, rng);
    return std::pow(v, 1.0 / m.alpha) * std::sqrt(2.0 * zeta) * nz;
}

// ---------------------------------------------------------------------------
// alpha < 1 sampler
// ---------------------------------------------------------------------------

Lt1Envelope lt1_envelope(const StableModel& m) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("lt1_envelope: requires alpha in (0,1)");
    Lt1Envelope env;
    int d = m.d;
    double alpha = m.alpha;
    env.C1 = gamma_pos(d / alpha) / (alpha * std::pow(2.0 * M_PI, double(d)))
           * std::pow(m.inf_re_v, -d / alpha);
    // C2 = pi^{-d/2} sum_k (2^alpha sup|V|)^k / k! sum_j sqrt(c_j) |Gamma ratio|
    int q = std::max(m.P.degree(), 1);
    double lnv = alpha * M_LN2 + std::log(m.sup_abs_v);
    std::vector<double> ln_half_cjd;
    double acc = 0.0, lnpref = -0.5 * d * std::log(M_PI);
    double prev = 1e300;
    for (int k = 1; k <= 4000; ++k) {
        lnpref += lnv - std::log(double(k));
        int jtop = k * q;
        while (int(ln_half_cjd.size()) <= jtop)
            ln_half_cjd.push_back(
                0.5 * std::log(double(harmonic_dim(int(ln_half_cjd.size()), d))));
        int je = jtop - (jtop % 2 != 0 ? 1 : 0);
        int jo = jtop - (jtop % 2 == 0 ? 1 : 0);
        double le = detail_series::ln_weighted_gamma_chain(k * alpha, d, je, 0.0,
                                                           ln_half_cjd);
        double lo = detail_series::ln_weighted_gamma_chain(k * alpha, d, jo, 0.0,
                                                           ln_half_cjd);
        double mx = std::max(le, lo);
        double term = std::exp(lnpref + mx)
                    * (std::exp(le - mx) + std::exp(lo - mx));
        acc += term;
        if (k > 4 && term < prev && term < 0.01 * acc / k) break; // ~1% tail rule
        prev = term;
    }
    env.C2 = acc;
    env.D1 = 1.01 * env.C1;
    env.D2 = 1.01 * env.C2;
    return env;
}

namespace {

// rigorous Taylor remainder of the inversion integral at the origin
double origin_remainder(const StableModel& m, double r, int n) {
    double alpha = m.alpha;
    double p = (n + 1.0 + m.d) / alpha;
    double lg = (n + 1.0) * std::log(r) - log_gamma(n + 2.0)
              - m.d * std::log(2.0 * M_PI) + std::log(sphere_area(m.d))
              + log_gamma(p) - std::log(alpha) - p * std::log(m.inf_re_v);
    return std::exp(lg);
}

class OriginStream final : public TermStream {
public:
    OriginStream(const StableModel& m, const std::vector<double>& x) : m_(m), x_(x) {
        r_ = 0.0;
        for (double v : x) r_ += v * v;
        r_ = std::sqrt(r_);
        sum_ = pdf_origin_expansion(m_, x_, 0);
        bound_ = origin_remainder(m_, r_, 0);
    }

    void advance() override {
        if (dead_) return;
        double nb = origin_remainder(m_, r_, n_ + 1);
        if (nb >= bound_ || n_ >= 40) {
            dead_ = true;
            return;
        }
        ++n_;
        sum_ = pdf_origin_expansion(m_, x_, n_);
        bound_ = nb;
    }

    double partial() const override { return sum_; }
    double remainder_bound() const override { return bound_; }
    bool exhausted() const override { return dead_; }

private:
    const StableModel& m_;
    std::vector<double> x_;
    double r_ = 0.0, sum_ = 0.0, bound_ = 1e300;
    int n_ = 0;
    bool dead_ = false;
};

class ConstStream final : public TermStream {
public:
    explicit ConstStream(double v) : v_(v) {}
    void advance() override {}
    double partial() const override { return v_; }
    double remainder_bound() const override { return 0.0; }
    bool exhausted() const override { return true; }

private:
    double v_;
};

class ValueStream final : public TermStream {
public:
    ValueStream(double v, double bound) : v_(v), b_(bound) {}
    void advance() override {}
    double partial() const override { return v_; }
    double remainder_bound() const override { return b_; }
    bool exhausted() const override { return true; }

private:
    double v_, b_;
};

class ScaledStream final : public TermStream {
public:
    ScaledStream(std::unique_ptr<TermStream> inner, double c)
        : inner_(std::move(inner)), c_(c) {}
    void advance() override { inner_->advance(); }
    double partial() const override { return c_ * inner_->partial(); }
    double remainder_bound() const override { return c_ * inner_->remainder_bound(); }
    bool exhausted() const override { return inner_->exhausted(); }

private:
    std::unique_ptr<TermStream> inner_;
    double c_;
};

std::vector<double> uniform_direction(int d, RngStream& rng) {
    std::vector<double> u(d);
    for (;;) {
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            u[i] = rng.normal();
            n2 += u[i] * u[i];
        }
        if (n2 > 1e-12) {
            double inv = 1.0 / std::sqrt(n2);
            for (double& v : u) v *= inv;
            return u;
        }
    }
}

} // namespace

std::vector<double> sample_lt1(const StableModel& m, RngStream& rng) {
    if (!(m.alpha > 0.0 && m.alpha < 1.0))
        throw std::domain_error("sample_lt1: requires alpha in (0,1)");
    int d = m.d;
    double alpha = m.alpha;
    Lt1Envelope env = lt1_envelope(m);
    double vol_ball = std::pow(M_PI, 0.5 * d) / gamma_pos(0.5 * d + 1.0);
    double w1 = env.D1 * vol_ball;
    double w2 = env.D2 * sphere_area(d) / alpha;
    double p_ball = w1 / (w1 + w2);

    // crossover radius: below it the origin expansion decides, above it the
    // series does
    double r_sw = 0.45 * std::pow(m.sup_abs_v, 1.0 / alpha);
    for (; r_sw > 1e-6; r_sw *= 0.8) {
        double best = 1e300;
        for (int n = 0; n <= 40; ++n) best = std::min(best, origin_remainder(m, r_sw, n));
        if (best < 1e-4 * env.C1) break;
    }

    SeriesMethodInput<std::vector<double>> in;
    in.propose = [=](RngStream& r) {
        auto u = uniform_direction(d, r);
        double radius;
        if (r.uniform() < p_ball)
            radius = std::pow(r.uniform(), 1.0 / d);
        else
            radius = std::pow(r.uniform(), -1.0 / alpha);
        for (auto& v : u) v *= radius;
        return u;
    };
    in.target = [&m, r_sw](const std::vector<double>& x) -> std::unique_ptr<TermStream> {
        double r = 0.0;
        for (double v : x) r += v * v;
        r = std::sqrt(r);
        if (r < r_sw) return std::make_unique<OriginStream>(m, x);
        return lt1_series_stream(m, x);
    };
    in.dominating = [env, alpha, d](const std::vector<double>& x) -> std::unique_ptr<TermStream> {
        double r = 0.0;
        for (double v : x) r += v * v;
        r = std::sqrt(r);
        double f = r <= 1.0 ? env.D1 : env.D2 * std::pow(r, -alpha - d);
        return std::make_unique<ConstStream>(f);
    };
    return series_method(in, rng);
}

// ---------------------------------------------------------------------------
// alpha > 1 sampler
// ---------------------------------------------------------------------------

namespace {

// direction-stage values in the large-radius regime, through the polynomial
// coefficient table
class TailDirectionValue {
public:
    TailDirectionValue(const StableModel& m, int nmax)
        : m_(m), table_(harmonic_coeffs(m, CoeffKind::V, nmax)), nmax_(nmax) {}

    double eval(double r, const std::vector<double>& u, double* bound) const {
        double alpha = m_.alpha;
        double lnpref = -m_.d * std::log(r) - 0.5 * m_.d * std::log(M_PI);
        double acc = 0.0;
        for (int k = 1; k <= nmax_; ++k) {
            lnpref += alpha * M_LN2 - std::log(double(k)) - alpha * std::log(r);
            double s = 0.0;
            for (int j = 0; j <= k * table_.q; ++j) {
                const SpherePoly* e = table_.entry(j, k);
                if (!e) continue;
                double ratio = gamma_ratio(0.5 * (j + k * alpha + m_.d),
                                           0.5 * (j - k * alpha));
                if (ratio == 0.0) continue;
                s += ratio * e->eval(u).real();
            }
            acc += ((k % 2 == 0) ? 1.0 : -1.0) * std::exp(lnpref) * s;
        }
        if (bound) {
            int k = nmax_ + 1;
            double lb = lnpref + alpha * M_LN2 - std::log(double(k)) - alpha * std::log(r)
                      + std::log(std::fabs(gamma_ratio(0.5 * (k * alpha + m_.d),
                                                       0.5 * (0.0 - k * alpha))) + 1e-300)
                      + k * std::log(m_.sup_abs_v)
                      + std::log(3.0 * (k * table_.q + 1.0));
            *bound = 3.0 * std::exp(lb);
        }
        return acc;
    }

private:
    const StableModel& m_;
    HarmonicCoeffTable table_;
    int nmax_;
};

} // namespace

std::vector<double> sample_gt1(const StableModel& m, RngStream& rng) {
    if (!(m.alpha > 1.0 && m.alpha < 2.0))
        throw std::domain_error("sample_gt1: requires alpha in (1,2)");
    int d = m.d;
    double alpha = m.alpha;
    double w = m.w_inf_re_v_pow;
    if (!(w > 1e-12))
        throw PreconditionFailed(
            "sample_gt1: inf Re(V^{-2/alpha}) <= 0; the norm-stage envelope requires it "
            "positive (guaranteed for alpha >= 4/3 with a polynomial spectral density)");
    double V0 = std::pow(w, -0.5 * alpha);
    double C = std::pow(V0 / m.inf_abs_v, d / alpha);

    double c0 = V0 / weight_w(alpha, 0, d);
    auto iso = std::make_shared<StableModel>(build_model(alpha, d, SpherePoly::constant(d, c0)));

    // where the series stop being decidable the tail expansion takes over
    double r_sw = 2.0 * std::pow(m.sup_abs_v, 1.0 / alpha);
    for (;; r_sw *= 1.2) {
        double val = tail_radial_gt1(m, r_sw, 3);
        double err = tail_radial_gt1_error(m, r_sw, 3);
        double vali = tail_radial_gt1(*iso, r_sw, 3);
        double erri = tail_radial_gt1_error(*iso, r_sw, 3);
        if (val > 0 && vali > 0 && err < 1e-5 * val && erri < 1e-5 * vali) break;
        if (r_sw > 1e6) throw PreconditionFailed("sample_gt1: no usable tail regime");
    }

    // stage 1: the norm
    SeriesMethodInput<double> in1;
    in1.propose = [V0, alpha, d](RngStream& r) {
        double n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            double z = r.normal();
            n2 += z * z;
        }
        double zeta = sample_positive_stable(0.5 * alpha, r);
        return std::pow(V0, 1.0 / alpha) * std::sqrt(2.0 * zeta) * std::sqrt(n2);
    };
    in1.target = [&m, r_sw](const double& r) -> std::unique_ptr<TermStream> {
        if (r < r_sw) return gt1_radial_stream(m, r);
        return std::make_unique<ValueStream>(tail_radial_gt1(m, r, 3),
                                             3.0 * tail_radial_gt1_error(m, r, 3));
    };
    in1.dominating = [iso, C, r_sw](const double& r) -> std::unique_ptr<TermStream> {
        if (r < r_sw)
            return std::make_unique<ScaledStream>(gt1_radial_stream(*iso, r), C);
        return std::make_unique<ValueStream>(C * tail_radial_gt1(*iso, r, 3),
                                             3.0 * C * tail_radial_gt1_error(*iso, r, 3));
    };
    double radius = series_method(in1, rng);

    // stage 2: the direction at fixed radius
    static std::map<const void*, std::shared_ptr<TailDirectionValue>> tcache;
    std::shared_ptr<TailDirectionValue> tdir;
    {
        auto it = tcache.find(&m);
        if (it == tcache.end()) {
            tdir = std::make_shared<TailDirectionValue>(m, 3);
            tcache[&m] = tdir;
            if (tcache.size() > 64) tcache.clear();
        } else {
            tdir = it->second;
        }
    }
    SeriesMethodInput<std::vector<double>> in2;
    in2.propose = [d](RngStream& r) { return uniform_direction(d, r); };
    if (radius < r_sw) {
        double env = gt1_direction_envelope(m, radius);
        in2.target = [&m, radius](const std::vector<double>& u) {
            return gt1_direction_stream(m, radius, u);
        };
        in2.dominating = [env](const std::vector<double>&) -> std::unique_ptr<TermStream> {
            return std::make_unique<ConstStream>(env);
        };
    } else {
        double env = 0.0;
        auto grid = sphere_point_set(d, 512, 31);
        for (const auto& uu : grid) {
            double b = 0.0;
            double v = tdir->eval(radius, uu, &b);
            env = std::max(env, v + b);
        }
        env *= 1.05;
        auto td = tdir;
        in2.target = [td, radius](const std::vector<double>& u) -> std::unique_ptr<TermStream> {
            double b = 0.0;
            double v = td->eval(radius, u, &b);
            return std::make_unique<ValueStream>(v, b);
        };
        in2.dominating = [env](const std::vector<double>&) -> std::unique_ptr<TermStream> {
            return std::make_unique<ConstStream>(env);
        };
    }
    auto u = series_method(in2, rng);
    for (auto& v : u) v *= radius;
    return u;
}

} // namespace mvstable
