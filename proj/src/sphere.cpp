#include <mvstable/sphere.hpp>
#include <mvstable/special.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace mvstable {

namespace {

// Exact rational with a double shadow; drops to the shadow on overflow.
// Invariant: |num|, den <= 2^62 whenever exact.
struct Rat {
    bool exact = true;
    long long num = 1, den = 1;
    double approx = 1.0;

    static long long gcd_ll(long long a, long long b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b) { long long t = a % b; a = b; b = t; }
        return a;
    }

    static Rat zero() { return Rat{true, 0, 1, 0.0}; }

    void mul_frac(long long p, long long q) {
        approx *= double(p) / double(q);
        if (!exact) return;
        if (q < 0) { q = -q; p = -p; }
        long long g1 = gcd_ll(p, den);
        p /= g1; long long d2 = den / g1;
        long long g2 = gcd_ll(num, q);
        long long n2 = num / g2; q /= g2;
        constexpr long long lim = 1LL << 62;
        if ((p != 0 && std::abs(n2) > lim / std::max(1LL, std::abs(p))) ||
            d2 > lim / std::max(1LL, q)) {
            exact = false;
            return;
        }
        num = n2 * p;
        den = d2 * q;
    }

    void add(const Rat& o) {
        approx += o.approx;
        if (!exact || !o.exact) { exact = false; return; }
        long long g = gcd_ll(den, o.den);
        long long da = den / g, db = o.den / g;
        constexpr long long lim = 1LL << 62;
        double mag = std::fabs(double(num)) * double(db) +
                     std::fabs(double(o.num)) * double(da);
        if (mag > double(lim) || double(da) * double(o.den) > double(lim)) {
            exact = false;
            return;
        }
        long long n = num * db + o.num * da;
        long long d2 = da * o.den;
        long long g2 = gcd_ll(n, d2);
        if (g2 > 1) { n /= g2; d2 /= g2; }
        num = n;
        den = d2;
    }

    double value() const { return exact ? double(num) / double(den) : approx; }
};

// multiply by (2m)!/(4^m m!) = prod_{t=1}^{m} (2t-1)/2
void mul_half_gamma(Rat& r, int m) {
    for (int t = 1; t <= m; ++t) r.mul_frac(2 * t - 1, 2);
}

unsigned long long mix64(unsigned long long x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

int multi_index_degree(const MultiIndex& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

SpherePoly::SpherePoly(int dim) : dim_(dim) {
    if (dim < 2) throw std::domain_error("SpherePoly: requires dim >= 2");
}

SpherePoly::SpherePoly(int dim, std::map<MultiIndex, std::complex<double>> terms)
    : dim_(dim), terms_(std::move(terms)) {
    if (dim < 2) throw std::domain_error("SpherePoly: requires dim >= 2");
    for (const auto& [a, c] : terms_) {
        (void)c;
        if (int(a.size()) != dim_) throw std::domain_error("SpherePoly: index length != dim");
        for (int v : a)
            if (v < 0) throw std::domain_error("SpherePoly: negative exponent");
    }
    check_degree();
}

SpherePoly SpherePoly::constant(int dim, std::complex<double> c) {
    SpherePoly p(dim);
    if (c != 0.0) p.terms_[MultiIndex(dim, 0)] = c;
    return p;
}

SpherePoly SpherePoly::monomial(int dim, MultiIndex a, std::complex<double> c) {
    SpherePoly p(dim);
    p.add_term(a, c);
    return p;
}

void SpherePoly::check_degree() const {
    if (degree() > kMaxDegree)
        throw std::domain_error("SpherePoly: degree cap exceeded");
}

int SpherePoly::degree() const {
    int deg = -1;
    for (const auto& [a, c] : terms_)
        if (c != 0.0) deg = std::max(deg, multi_index_degree(a));
    return deg;
}

bool SpherePoly::is_zero(double eps) const {
    for (const auto& [a, c] : terms_) {
        (void)a;
        if (std::abs(c) > eps) return false;
    }
    return true;
}

void SpherePoly::add_term(const MultiIndex& a, std::complex<double> c) {
    if (int(a.size()) != dim_) throw std::domain_error("SpherePoly: index length != dim");
    if (multi_index_degree(a) > kMaxDegree)
        throw std::domain_error("SpherePoly: degree cap exceeded");
    auto it = terms_.find(a);
    if (it == terms_.end()) {
        if (c != 0.0) terms_[a] = c;
    } else {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

std::complex<double> SpherePoly::coeff(const MultiIndex& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? std::complex<double>(0.0) : it->second;
}

std::complex<double> SpherePoly::eval(const std::vector<double>& u) const {
    std::complex<double> s = 0.0;
    for (const auto& [a, c] : terms_) {
        double m = 1.0;
        for (int i = 0; i < dim_; ++i)
            for (int t = 0; t < a[i]; ++t) m *= u[i];
        s += c * m;
    }
    return s;
}

SpherePoly SpherePoly::conjugate() const {
    SpherePoly p(dim_);
    for (const auto& [a, c] : terms_) p.terms_[a] = std::conj(c);
    return p;
}

SpherePoly SpherePoly::real_part() const {
    SpherePoly p(dim_);
    for (const auto& [a, c] : terms_)
        if (c.real() != 0.0) p.terms_[a] = c.real();
    return p;
}

double SpherePoly::max_imag_coeff() const {
    double m = 0.0;
    for (const auto& [a, c] : terms_) {
        (void)a;
        m = std::max(m, std::fabs(c.imag()));
    }
    return m;
}

SpherePoly& SpherePoly::operator+=(const SpherePoly& o) {
    if (o.dim_ != dim_) throw std::domain_error("SpherePoly: dimension mismatch");
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
}

SpherePoly& SpherePoly::operator-=(const SpherePoly& o) {
    if (o.dim_ != dim_) throw std::domain_error("SpherePoly: dimension mismatch");
    for (const auto& [a, c] : o.terms_) add_term(a, -c);
    return *this;
}

SpherePoly& SpherePoly::operator*=(std::complex<double> c) {
    if (c == 0.0) { terms_.clear(); return *this; }
    for (auto& [a, v] : terms_) {
        (void)a;
        v *= c;
    }
    return *this;
}

SpherePoly operator*(const SpherePoly& a, const SpherePoly& b) {
    if (a.dim_ != b.dim_) throw std::domain_error("SpherePoly: dimension mismatch");
    if (a.is_zero() || b.is_zero()) return SpherePoly(a.dim_);
    if (a.degree() + b.degree() > SpherePoly::kMaxDegree)
        throw std::domain_error("SpherePoly: degree cap exceeded");
    SpherePoly r(a.dim_);
    MultiIndex idx(a.dim_);
    for (const auto& [ia, ca] : a.terms_) {
        for (const auto& [ib, cb] : b.terms_) {
            for (int i = 0; i < a.dim_; ++i) idx[i] = ia[i] + ib[i];
            auto it = r.terms_.find(idx);
            if (it == r.terms_.end())
                r.terms_[idx] = ca * cb;
            else
                it->second += ca * cb;
        }
    }
    return r;
}

long long harmonic_dim(int j, int d) {
    if (d < 2 || j < 0) throw std::domain_error("harmonic_dim: requires d >= 2, j >= 0");
    if (j == 0) return 1;
    auto binom = [](long long n, long long k) {
        if (k < 0 || k > n) return 0LL;
        k = std::min(k, n - k);
        long long r = 1;
        for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    return binom(j + d - 2, d - 2) + binom(j + d - 3, d - 2);
}

namespace {

// value = rat * pi^pi_pow; false when an odd exponent kills the integral.
bool monomial_integral_parts(const MultiIndex& a, int d, Rat& rat, int& pi_pow) {
    for (int v : a)
        if (v % 2 != 0) return false;
    int M = multi_index_degree(a) / 2;
    rat = Rat{};
    rat.mul_frac(2, 1);
    for (int v : a) mul_half_gamma(rat, v / 2);
    if (d % 2 == 0) {
        int n = M + d / 2 - 1;
        for (int t = 2; t <= n; ++t) rat.mul_frac(1, t);
        pi_pow = d / 2;
    } else {
        int K = M + (d - 1) / 2;
        for (int t = 1; t <= K; ++t) rat.mul_frac(2, 2 * t - 1);
        pi_pow = (d - 1) / 2;
    }
    return true;
}

void sphere_area_parts(int d, Rat& rat, int& pi_pow) {
    rat = Rat{};
    rat.mul_frac(2, 1);
    if (d % 2 == 0) {
        for (int t = 2; t <= d / 2 - 1; ++t) rat.mul_frac(1, t);
        pi_pow = d / 2;
    } else {
        int K = (d - 1) / 2;
        for (int t = 1; t <= K; ++t) rat.mul_frac(2, 2 * t - 1);
        pi_pow = (d - 1) / 2;
    }
}

double pi_power(int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= M_PI;
    return r;
}

} // namespace

double sphere_area(int d) {
    if (d < 2) throw std::domain_error("sphere_area: requires d >= 2");
    Rat r;
    int p;
    sphere_area_parts(d, r, p);
    return r.value() * pi_power(p);
}

double monomial_integral(const MultiIndex& a, int d) {
    if (int(a.size()) != d) throw std::domain_error("monomial_integral: index length != d");
    Rat r;
    int p;
    if (!monomial_integral_parts(a, d, r, p)) return 0.0;
    return r.value() * pi_power(p);
}

double monomial_integral_over_area(const MultiIndex& a, int d) {
    if (int(a.size()) != d) throw std::domain_error("monomial_integral: index length != d");
    Rat r;
    int p;
    if (!monomial_integral_parts(a, d, r, p)) return 0.0;
    Rat ar;
    int ap;
    sphere_area_parts(d, ar, ap); // same pi power as the integral; stays exact
    r.mul_frac(ar.den, ar.num);
    (void)p;
    (void)ap;
    return r.value();
}

std::complex<double> inner_product(const SpherePoly& f, const SpherePoly& g) {
    if (f.dim() != g.dim()) throw std::domain_error("inner_product: dimension mismatch");
    int d = f.dim();
    std::complex<double> s = 0.0;
    MultiIndex idx(d);
    for (const auto& [a, ca] : f.terms()) {
        for (const auto& [b, cb] : g.terms()) {
            for (int i = 0; i < d; ++i) idx[i] = a[i] + b[i];
            double m = monomial_integral(idx, d);
            if (m != 0.0) s += ca * std::conj(cb) * m;
        }
    }
    return s;
}

double l2_norm_sq(const SpherePoly& f) { return inner_product(f, f).real(); }

std::vector<double> zonal_coefficients(int j, int d) {
    // P_j = [ (2j+d-4) t P_{j-1} - (j-1) P_{j-2} ] / (j+d-3), P_0 = 1, P_1 = t
    if (j == 0) return {1.0};
    std::vector<Rat> prev2{Rat{}};
    std::vector<Rat> prev{Rat::zero(), Rat{}};
    for (int n = 2; n <= j; ++n) {
        std::vector<Rat> cur(n + 1, Rat::zero());
        for (int p = 0; p < n; ++p) {
            Rat t = prev[p];
            t.mul_frac(2 * n + d - 4, n + d - 3);
            cur[p + 1].add(t);
        }
        for (int p = 0; p + 2 <= n; ++p) {
            Rat t = prev2[p];
            t.mul_frac(-(n - 1), n + d - 3);
            cur[p].add(t);
        }
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
    std::vector<double> out(prev.size());
    for (size_t i = 0; i < prev.size(); ++i) out[i] = prev[i].value();
    return out;
}

namespace {

void enumerate_indices(int d, MultiIndex& cur, int pos, int left,
                       const std::function<void(const MultiIndex&)>& fn) {
    if (pos == d - 1) {
        cur[pos] = left;
        fn(cur);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        cur[pos] = v;
        enumerate_indices(d, cur, pos + 1, left - v, fn);
    }
}

double multinomial(int n, const MultiIndex& beta) {
    if (n <= 25) {
        // prod over parts of C(running_total, part); each step stays integral
        unsigned long long acc = 1, used = 0;
        for (int b : beta)
            for (int i = 1; i <= b; ++i) {
                ++used;
                acc = acc * used / i;
            }
        return double(acc);
    }
    double lg = log_gamma(n + 1.0);
    for (int b : beta) lg -= log_gamma(b + 1.0);
    return std::round(std::exp(lg));
}

} // namespace

namespace {

SpherePoly project_raw(const SpherePoly& f, int j) {
    int d = f.dim();
    SpherePoly out(d);
    if (f.is_zero() || j > f.degree()) return out;
    std::vector<double> zc = zonal_coefficients(j, d);
    double cjd = double(harmonic_dim(j, d));
    MultiIndex beta(d), sum(d);
    for (int p = j % 2; p <= j; p += 2) {
        if (zc[p] == 0.0) continue;
        double zp = zc[p];
        std::function<void(const MultiIndex&)> handle = [&](const MultiIndex& b) {
            double mn = multinomial(p, b);
            std::complex<double> acc = 0.0;
            for (const auto& [a, ca] : f.terms()) {
                for (int i = 0; i < d; ++i) sum[i] = a[i] + b[i];
                double m = monomial_integral_over_area(sum, d);
                if (m != 0.0) acc += ca * m;
            }
            if (acc != 0.0) out.add_term(b, cjd * zp * mn * acc);
        };
        enumerate_indices(d, beta, 0, p, handle);
    }
    return out;
}

} // namespace

SpherePoly project(const SpherePoly& f, int j) {
    if (j < 0) throw std::domain_error("project: requires j >= 0");
    // The zonal integration depends only on the values of f on the sphere,
    // but the first pass reports a representative tied to f's monomials.  A
    // second pass maps any representative of a degree-j harmonic to the
    // homogeneous harmonic representative, a fixed point of the operator.
    SpherePoly raw = project_raw(f, j);
    if (raw.is_zero()) return raw;
    return project_raw(raw, j);
}

HarmonicDecomp decompose(const SpherePoly& f) {
    HarmonicDecomp h;
    int deg = f.degree();
    for (int j = 0; j <= deg; ++j) {
        SpherePoly pj = project(f, j);
        if (!pj.is_zero(1e-14)) h.parts.emplace_back(j, std::move(pj));
    }
    return h;
}

double funk_hecke_power_eigenvalue(int k, int j, int d) {
    if (d < 2 || k < 0 || j < 0)
        throw std::domain_error("funk_hecke_power_eigenvalue: bad arguments");
    if (j > k || (k - j) % 2 != 0) return 0.0;
    double lg = log_gamma(k + 1.0) - (k - 1.0) * std::log(2.0)
              - log_gamma((k + j + d) / 2.0) - log_gamma((k - j) / 2.0 + 1.0);
    return std::pow(M_PI, d / 2.0) * std::exp(lg);
}

std::vector<std::vector<double>> sphere_point_set(int d, int n, unsigned long long seed) {
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    unsigned long long ctr = seed;
    auto uniform = [&]() { return (double(mix64(ctr++) >> 11) + 0.5) * 0x1.0p-53; };
    while (int(pts.size()) < n) {
        std::vector<double> v(d);
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) {
            double u1 = uniform(), u2 = uniform();
            v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            norm2 += v[i] * v[i];
        }
        if (norm2 < 1e-12) continue;
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : v) x *= inv;
        pts.push_back(std::move(v));
    }
    return pts;
}

double sphere_max_difference(const SpherePoly& f, const SpherePoly& g) {
    if (f.dim() != g.dim()) throw std::domain_error("sphere_max_difference: dimension mismatch");
    int deg = std::max({f.degree(), g.degree(), 0});
    int n = std::max(64, 4 * (deg + 1) * (deg + 1));
    auto pts = sphere_point_set(f.dim(), n);
    double m = 0.0;
    for (const auto& u : pts) m = std::max(m, std::abs(f.eval(u) - g.eval(u)));
    return m;
}

bool equal_on_sphere(const SpherePoly& f, const SpherePoly& g, double tol) {
    return sphere_max_difference(f, g) <= tol;
}

} // namespace mvstable
