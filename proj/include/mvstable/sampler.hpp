#pragma once

// Exact-distribution samplers: positive stable subordinator, symmetric-case
// norm sampler, and the series-method rejection samplers for both alpha
// branches.  All randomness flows through an explicit counter-based stream.

#include <mvstable/density.hpp>
#include <mvstable/spectral.hpp>

#include <cstdint>
#include <functional>
#include <memory>

namespace mvstable {

struct SymmetryRequired : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IterationCap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Counter-based stream (splitmix64 output function): the same (key, counter)
// always produces the same draws, and child streams are independent.
struct RngStream {
    uint64_t key = 0;
    uint64_t ctr = 0;

    static RngStream seeded(uint64_t seed) { return RngStream{seed, 0}; }

    uint64_t next_u64();
    double uniform();          // (0,1)
    double normal();           // standard normal (polar rejection)
    double exponential();      // rate 1
    RngStream split();
};

// One draw of the positive (alpha/2-type) subordinator normalized so that
// E exp(-t Z) = exp(-t^a), 0 < a < 1.
double sample_positive_stable(double a, RngStream& rng);

// |X| for symmetric models with alpha in (1,2), through the normal-variance
// mixture with a direction-dependent scale.
double sample_symmetric_norm(const StableModel& m, RngStream& rng);

// Series-method rejection sampling: propose X ~ f, evaluate target and
// dominating series lazily until the comparison is decided.
template <typename X>
struct SeriesMethodInput {
    std::function<X(RngStream&)> propose;
    std::function<std::unique_ptr<TermStream>(const X&)> target;     // g*
    std::function<std::unique_ptr<TermStream>(const X&)> dominating; // f* >= g*
    long proposal_cap = 1000000;
    int term_cap = 100000;
};

template <typename X>
X series_method(const SeriesMethodInput<X>& in, RngStream& rng, long* proposals_used = nullptr);

// Full-vector samplers.
std::vector<double> sample_lt1(const StableModel& m, RngStream& rng);
std::vector<double> sample_gt1(const StableModel& m, RngStream& rng);

// Envelope constants of the alpha < 1 dominating mixture (exposed for tests).
struct Lt1Envelope {
    double C1, C2;   // certified bounds
    double D1, D2;   // inflated envelope actually used
};
Lt1Envelope lt1_envelope(const StableModel& m);

// --- implementation of the template -----------------------------------------

template <typename X>
X series_method(const SeriesMethodInput<X>& in, RngStream& rng, long* proposals_used) {
    for (long trial = 0; trial < in.proposal_cap; ++trial) {
        X x = in.propose(rng);
        double u = rng.uniform();
        auto g = in.target(x);
        auto f = in.dominating(x);
        int decided = 0; // +1 accept, -1 reject
        for (int k = 0; k < in.term_cap; ++k) {
            double gk = g->partial(), ga = g->remainder_bound();
            double fk = f->partial(), fb = f->remainder_bound();
            if (std::fabs(gk - u * fk) > ga + u * fb) {
                decided = gk > u * fk ? 1 : -1;
                break;
            }
            bool can_g = !g->exhausted(), can_f = !f->exhausted();
            if (!can_g && !can_f)
                throw IterationCap("series_method: bounds stalled before a decision");
            if (can_g) g->advance();
            if (can_f) f->advance();
        }
        if (decided == 0)
            throw IterationCap("series_method: term budget exhausted before a decision");
        if (decided > 0) {
            if (proposals_used) *proposals_used = trial + 1;
            return x;
        }
    }
    throw IterationCap("series_method: proposal budget exhausted");
}

} // namespace mvstable
