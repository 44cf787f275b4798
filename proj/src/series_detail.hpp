#pragma once

// Internal helpers shared by the density and sampler translation units.

#include <mvstable/sphere.hpp>
#include <mvstable/special.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace mvstable {
namespace detail_series {

// double-only ln Gamma for bound sweeps (~1e-12 relative); x > 0
inline double lgamma_fast(double x) {
    double acc = 0.0;
    while (x < 10.0) {
        acc -= std::log(x);
        x += 1.0;
    }
    static const double c[] = {
        1.0 / 12.0,   -1.0 / 360.0,   1.0 / 1260.0, -1.0 / 1680.0,
        1.0 / 1188.0, -691.0 / 360360.0,
    };
    double inv = 1.0 / x, inv2 = inv * inv;
    double s = (x - 0.5) * std::log(x) - x + 0.91893853320467274178;
    double p = inv;
    for (double cn : c) {
        s += cn * p;
        p *= inv2;
    }
    return s + acc;
}

inline bool log_abs_sin_pi(double b, double& ln_abs, double& sign) {
    double mround = std::round(b);
    double f = b - mround;
    if (std::fabs(f) < 1e-13) return false;
    double s = std::sin(M_PI * f);
    if (std::fmod(std::fabs(mround), 2.0) == 1.0) s = -s;
    ln_abs = std::log(std::fabs(s));
    sign = s > 0 ? 1.0 : -1.0;
    return true;
}

// ln sum over one parity chain of (c_j/A) |Gamma((j+ka+d)/2) / Gamma((j-ka)/2)|
inline double ln_weighted_gamma_chain(double kalpha, int d, int jtop, double ln_area,
                                      std::vector<double>& ln_cjd) {
    if (jtop < 0) return -1e300;
    while (int(ln_cjd.size()) <= jtop)
        ln_cjd.push_back(std::log(double(harmonic_dim(int(ln_cjd.size()), d))));
    double A = 0.5 * (jtop + kalpha + d);
    double B = 0.5 * (jtop - kalpha);
    double lnratio;
    if (B > 0.0) {
        lnratio = lgamma_fast(A) - lgamma_fast(B);
    } else {
        double ls, sg;
        if (!log_abs_sin_pi(B, ls, sg)) return -1e300; // pole: chain vanishes
        lnratio = lgamma_fast(A) + ls - std::log(M_PI) + lgamma_fast(1.0 - B);
    }
    double mx = -1e300;
    std::vector<double> vals;
    vals.reserve(size_t(jtop / 2 + 2));
    double cur = lnratio;
    for (int j = jtop; j >= 0; j -= 2) {
        vals.push_back(cur + ln_cjd[j] - ln_area);
        mx = std::max(mx, vals.back());
        if (j >= 2) {
            double Bm = 0.5 * (j - 2 - kalpha);
            double Am = 0.5 * (j - 2 + kalpha + d);
            if (std::fabs(Bm) < 1e-13)
                cur = -1e300;
            else if (cur > -1e290)
                cur += std::log(std::fabs(Bm)) - std::log(Am);
        }
    }
    if (mx <= -1e290) return -1e300;
    double acc = 0.0;
    for (double v : vals) acc += std::exp(std::max(v - mx, -700.0));
    return mx + std::log(acc);
}

// ln of sum_j w(j) |Gamma((j+ka+d)/2) / Gamma((j-ka)/2)| over both parity
// chains, walked downward from jtop so the ratio recurrence never divides by
// a pole.
template <typename F>
double ln_abs_row_sum(double kalpha, int d, int jtop, F&& wfn) {
    std::vector<double> vals;
    double mx = -1e300;
    for (int parity = 0; parity < 2; ++parity) {
        int jt = jtop;
        while (jt >= 0 && (jt % 2) != parity) --jt;
        if (jt < 0) continue;
        double A = 0.5 * (jt + kalpha + d);
        double B = 0.5 * (jt - kalpha);
        double cur;
        if (B > 0.0) {
            cur = lgamma_fast(A) - lgamma_fast(B);
        } else {
            double ls, sg;
            if (!log_abs_sin_pi(B, ls, sg)) continue; // pole: chain vanishes
            cur = lgamma_fast(A) + ls - std::log(M_PI) + lgamma_fast(1.0 - B);
        }
        for (int j = jt; j >= 0; j -= 2) {
            double w = wfn(j);
            if (w > 0.0 && cur > -1e290) {
                vals.push_back(cur + std::log(w));
                mx = std::max(mx, vals.back());
            }
            if (j >= 2) {
                double Bm = 0.5 * (j - 2 - kalpha);
                double Am = 0.5 * (j - 2 + kalpha + d);
                if (std::fabs(Bm) < 1e-13)
                    cur = -1e300;
                else if (cur > -1e290)
                    cur += std::log(std::fabs(Bm)) - std::log(Am);
            }
        }
    }
    if (mx <= -1e290) return -1e300;
    double acc = 0.0;
    for (double v : vals) acc += std::exp(std::max(v - mx, -700.0));
    return mx + std::log(acc);
}

// Forward-built per-term majorants lnB[k] with suffix sums.  The dominant
// factor of the term ratio decays like k^{alpha-1}, so once the observed
// ratios stay below a threshold they keep falling; that certifies a
// geometric bound on everything past the built range.
struct MajorantLadder {
    std::vector<double> lnB{-1e300}; // index 0 unused
    std::vector<double> suffix;
    double beyond = 1e300;
    int kcap = 0;
    int streak = 0;
    std::function<double(int)> ln_term_majorant;

    void extend_to(int want) {
        want = std::min(want, kcap);
        bool grew = false;
        while (int(lnB.size()) - 1 < want) {
            int k = int(lnB.size());
            lnB.push_back(ln_term_majorant(k));
            grew = true;
            int n = int(lnB.size()) - 1;
            if (n >= 2 && ((lnB[n] < lnB[n - 1] - 0.105 && lnB[n] > -1e290)
                           || (lnB[n] <= -1e290 && n > 4)))
                ++streak;
            else
                streak = 0;
        }
        if (!grew && !suffix.empty()) return;
        int n = int(lnB.size()) - 1;
        // geometric extrapolation is valid once the majorants are in their
        // decaying regime (the step ratio keeps shrinking with k)
        if (streak >= 3) {
            if (lnB[n] <= -1e290)
                beyond = 0.0;
            else {
                double ratio = std::exp(lnB[n] - lnB[n - 1]);
                beyond = std::exp(std::min(lnB[n], 690.0)) * ratio / (1.0 - ratio);
            }
        } else {
            beyond = 1e300;
        }
        suffix.assign(n + 1, 0.0);
        double acc = beyond;
        suffix[n] = acc;
        for (int i = n - 1; i >= 0; --i) {
            acc += std::exp(std::min(lnB[i + 1], 700.0));
            suffix[i] = acc;
        }
    }

    // remaining-sum bound after the first k terms; keeps a lookahead margin
    // ahead of the consumer so the bound tightens while the sum advances
    double tail_after(int k) {
        extend_to(std::max(k + 16, (3 * k) / 2));
        if (k < int(suffix.size())) return suffix[k];
        return beyond;
    }
};

} // namespace detail_series
} // namespace mvstable
