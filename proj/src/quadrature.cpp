#include <mvstable/quadrature.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mvstable {

namespace {

// Legendre P_n and derivative at x.
template <typename T>
void legendre_pd(int n, T x, T& p, T& dp) {
    T p0(1.0), p1 = x;
    for (int k = 2; k <= n; ++k) {
        T pk = (T(2.0 * k - 1.0) * x * p1 - T(double(k - 1)) * p0) / T(double(k));
        p0 = p1;
        p1 = pk;
    }
    p = p1;
    dp = T(double(n)) * (x * p1 - p0) / (x * x - T(1.0));
}

GaussRule make_gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n / 2 + n % 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p, dp;
        for (int it = 0; it < 100; ++it) {
            legendre_pd(n, x, p, dp);
            double dx = -p / dp;
            x += dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        legendre_pd(n, x, p, dp);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.w[i] = w;
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = w;
    }
    return r;
}

GaussRuleDD make_gauss_legendre_dd(int n) {
    GaussRuleDD r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n / 2 + n % 2; ++i) {
        dd x(std::cos(M_PI * (i + 0.75) / (n + 0.5)));
        dd p, dp;
        for (int it = 0; it < 8; ++it) {
            legendre_pd(n, x, p, dp);
            x -= p / dp;
        }
        legendre_pd(n, x, p, dp);
        dd w = dd(2.0) / ((dd(1.0) - sqr(x)) * sqr(dp));
        r.x[i] = -x;
        r.w[i] = w;
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = w;
    }
    return r;
}

GaussRuleDD make_gauss_chebyshev_dd(int n) {
    GaussRuleDD r;
    r.x.resize(n);
    r.w.resize(n);
    dd w = ddc_const::pi / dd(double(n));
    for (int i = 0; i < n; ++i) {
        dd angle = ddc_const::pi * dd(2.0 * i + 1.0) / dd(2.0 * n);
        r.x[i] = cos(angle);
        r.w[i] = w;
    }
    return r;
}

// Kronrod 15 / Gauss 7 nodes and weights (positive half; symmetric).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

void gk15(const std::function<double(double)>& f, double a, double b,
          double& result, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double fv = (i == 7) ? f(c) : f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
        resk += kWgk[i] * fv;
        if (i % 2 == 1) resg += kWg[i / 2] * fv;
    }
    result = resk * h;
    err = std::fabs((resk - resg) * h);
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

const GaussRuleDD& gauss_legendre_dd(int n) {
    static std::map<int, GaussRuleDD> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre_dd(n)).first;
    return it->second;
}

const GaussRuleDD& gauss_chebyshev_dd(int n) {
    static std::map<int, GaussRuleDD> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_chebyshev_dd(n)).first;
    return it->second;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_depth) {
    struct Seg { double a, b, val, err; int depth; };
    double v, e;
    gk15(f, a, b, v, e);
    std::vector<Seg> work{{a, b, v, e, 0}};
    double total = v, total_err = e;
    while (total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
        // split the worst segment
        size_t worst = 0;
        for (size_t i = 1; i < work.size(); ++i)
            if (work[i].err > work[worst].err) worst = i;
        Seg s = work[worst];
        if (s.depth >= max_depth) break;
        double m = 0.5 * (s.a + s.b);
        Seg l{s.a, m, 0, 0, s.depth + 1}, r{m, s.b, 0, 0, s.depth + 1};
        gk15(f, l.a, l.b, l.val, l.err);
        gk15(f, r.a, r.b, r.val, r.err);
        total += l.val + r.val - s.val;
        total_err += l.err + r.err - s.err;
        work[worst] = l;
        work.push_back(r);
        if (work.size() > 4000) break;
    }
    return total;
}

} // namespace mvstable
