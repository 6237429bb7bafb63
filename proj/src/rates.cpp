#include "exclab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exclab {

RateModel ssep() { return RateModel{RateModel::Kind::ssep, 0.0, 0.0, 0}; }

RateModel speed_change(double a) {
    if (a < 0.0) throw std::invalid_argument("speed-change amplitude must be >= 0");
    return RateModel{RateModel::Kind::speed_change, a, 0.0, 0};
}

RateModel disordered(double a_max, std::uint64_t seed) {
    if (a_max < 0.0) throw std::invalid_argument("disorder bound must be >= 0");
    return RateModel{RateModel::Kind::disordered, 0.0, a_max, seed};
}

std::string RateModel::describe() const {
    switch (kind) {
        case Kind::ssep: return "ssep";
        case Kind::speed_change: return "speed_change(a=" + std::to_string(a) + ")";
        case Kind::disordered:
            return "disordered(a_max=" + std::to_string(a_max) +
                   ",seed=" + std::to_string(seed) + ")";
    }
    return "?";
}

namespace {

// Occupancy assignment over an explicit site list, everything else zero.
struct WindowOcc {
    const std::vector<Site>* sites;
    unsigned bits;

    double operator()(const Site& x) const {
        for (std::size_t i = 0; i < sites->size(); ++i)
            if ((*sites)[i] == x) return static_cast<double>((bits >> i) & 1u);
        return 0.0;
    }
};

}  // namespace

ValidationReport validate(const RateModel& rm, int dim) {
    ValidationReport rep;
    const double lam = rm.lambda();
    const int r = rm.range();

    std::vector<Bond> probes;
    for (int i = 0; i < dim; ++i) {
        probes.push_back(Bond{site(0), i});
        probes.push_back(Bond{site(3, i >= 1 ? -2 : 0, 0), i});  // off-origin probe
    }

    for (const Bond& b : probes) {
        // Base sites: the declared witnesses plus the endpoints.  Any other
        // site the rate could legally read lies in the sup-window of radius r
        // around the lower endpoint; each of those is probed one at a time on
        // top of every base assignment, which detects any dependence for
        // rates affine in each occupancy.
        std::vector<Site> base = rm.witnesses(b);
        for (const Site& ep : {b.a, b.b()})
            if (std::find(base.begin(), base.end(), ep) == base.end()) base.push_back(ep);

        std::vector<Site> window = sup_neighborhood({b.a}, r, dim);
        std::vector<Site> extras;
        for (const Site& x : window)
            if (std::find(base.begin(), base.end(), x) == base.end()) extras.push_back(x);
        extras.push_back(b.a + 3 * unit(b.dir));  // one site beyond the window

        const Bond origin{site(0), b.dir};
        const auto wit = rm.witnesses(b);
        for (std::size_t probe = 0; probe <= extras.size(); ++probe) {
            std::vector<Site> sites = base;
            if (probe > 0) sites.push_back(extras[probe - 1]);
            const std::size_t ns = sites.size();
            for (unsigned bits = 0; bits < (1u << ns); ++bits) {
                WindowOcc occ{&sites, bits};
                const double c = rm.rate(b, occ);
                ++rep.checked;
                if (!(c >= 1.0 && c <= lam)) {
                    rep.ok = false;
                    rep.failure = rm.describe() + ": rate " + std::to_string(c) +
                                  " outside [1," + std::to_string(lam) + "] at bond " +
                                  to_string(b);
                    return rep;
                }
                // Flipping any site that is not a declared witness (the
                // endpoints, or the probed extra site) must not change c.
                for (std::size_t i = 0; i < ns; ++i) {
                    if (std::find(wit.begin(), wit.end(), sites[i]) != wit.end()) continue;
                    WindowOcc flipped{&sites, bits ^ (1u << i)};
                    if (rm.rate(b, flipped) != c) {
                        rep.ok = false;
                        rep.failure = rm.describe() + ": rate depends on " +
                                      to_string(sites[i]) + " at bond " + to_string(b);
                        return rep;
                    }
                }
                // Translation covariance for the homogeneous families: the
                // rate at bond b equals the rate at the origin bond under the
                // pulled-back occupancies.
                if (rm.kind != RateModel::Kind::disordered) {
                    auto pulled = [&](const Site& x) { return occ(x + b.a); };
                    if (std::abs(rm.rate(origin, pulled) - c) != 0.0) {
                        rep.ok = false;
                        rep.failure = rm.describe() + ": not translation covariant at bond " +
                                      to_string(b);
                        return rep;
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace exclab
