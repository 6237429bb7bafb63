#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exclab/geometry.hpp"
#include "exclab/prng.hpp"

// Exchange-rate families for the dynamics and the variational solvers.  All
// families satisfy the standing assumptions: rates are bounded between 1 and
// lambda(), depend only on occupancies within sup-distance range() of the
// bond's lower endpoint, and never on the occupancies of the two endpoints
// themselves (so detailed balance holds for both Bernoulli and uniform
// sector measures).  Rates are affine in each occupancy they read, which is
// what makes mean-substitution an exact marginalisation of exterior sites.

namespace exclab {

struct RateModel {
    enum class Kind { ssep, speed_change, disordered };

    Kind kind = Kind::ssep;
    double a = 0.0;        // speed-change amplitude
    double a_max = 0.0;    // disorder amplitude bound
    std::uint64_t seed = 0;

    int range() const { return kind == Kind::ssep ? 0 : 2; }

    double lambda() const {
        switch (kind) {
            case Kind::ssep: return 1.0;
            case Kind::speed_change: return 1.0 + 2.0 * a;
            case Kind::disordered: return 1.0 + 2.0 * a_max;
        }
        return 1.0;
    }

    // Quenched per-bond amplitude: i.i.d. uniform [0, a_max], keyed by the
    // bond's absolute coordinates so one seed defines one environment.
    double amplitude(const Bond& b) const {
        std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
        for (int i = 0; i < kMaxDim; ++i)
            h = hash_combine(h, static_cast<std::uint64_t>(
                                    static_cast<std::int64_t>(b.a.c[static_cast<std::size_t>(i)])));
        h = hash_combine(h, static_cast<std::uint64_t>(b.dir));
        return a_max * u01(h);
    }

    // Sites whose occupancy the rate reads (excludes the endpoints).
    std::vector<Site> witnesses(const Bond& b) const {
        if (kind == Kind::ssep) return {};
        return {b.a - unit(b.dir), b.a + 2 * unit(b.dir)};
    }

    // occ: any callable Site -> double (0/1 occupancies, or means for
    // marginalised sites).
    template <class OccFn>
    double rate(const Bond& b, OccFn&& occ) const {
        switch (kind) {
            case Kind::ssep: return 1.0;
            case Kind::speed_change:
                return 1.0 + a * (occ(b.a - unit(b.dir)) + occ(b.a + 2 * unit(b.dir)));
            case Kind::disordered:
                return 1.0 +
                       amplitude(b) * (occ(b.a - unit(b.dir)) + occ(b.a + 2 * unit(b.dir)));
        }
        return 1.0;
    }

    std::string describe() const;
};

RateModel ssep();
RateModel speed_change(double a);
RateModel disordered(double a_max, std::uint64_t seed);

// Exhaustive validation of the standing assumptions on a model: bounds
// 1 <= c <= lambda over every window configuration, independence from the
// endpoint occupancies, locality (the rate is a function of its declared
// witnesses), and translation covariance for the homogeneous families.
// Reports the first counterexample found.
struct ValidationReport {
    bool ok = true;
    long long checked = 0;
    std::string failure;  // empty when ok
};

ValidationReport validate(const RateModel& rm, int dim);

}  // namespace exclab
