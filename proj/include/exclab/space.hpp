#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "exclab/geometry.hpp"

// Dense enumeration of occupancy configurations over a finite carrier set.
// Bit i of a Config is the occupancy of carrier site i (the Domain's
// lexicographic rank).  Sites outside the carrier are resolved through an
// explicit frozen assignment, or — when `exterior_mean` is set — read as that
// mean value.  Reading an exterior site as its Bernoulli mean performs the
// exact marginalisation of that site for rates that are affine in each
// occupancy variable (all rate families here are), which keeps solve
// dimensions at 2^|carrier|.

namespace exclab {

using Config = std::uint32_t;

inline constexpr int kDefaultSiteCap = 24;

struct Space {
    Domain carrier;
    std::map<Site, int> frozen;   // deterministic exterior occupancies (0/1)
    double exterior_mean = -1.0;  // < 0: reading an unresolved site is an error

    std::size_t nconf() const { return std::size_t{1} << carrier.size(); }
    int bits() const { return carrier.size(); }

    static int occ_bit(Config m, int bit) { return static_cast<int>((m >> bit) & 1u); }

    // Occupancy of any site: carrier bit, frozen value, or exterior mean.
    double occ(Config m, const Site& x) const {
        int b = carrier.rank_of(x);
        if (b >= 0) return static_cast<double>(occ_bit(m, b));
        auto it = frozen.find(x);
        if (it != frozen.end()) return static_cast<double>(it->second);
        if (exterior_mean >= 0.0) return exterior_mean;
        throw std::out_of_range("site not resolved by space: " + to_string(x));
    }

    bool resolves(const Site& x) const {
        return carrier.contains(x) || frozen.count(x) || exterior_mean >= 0.0;
    }

    Config exchanged(Config m, int bi, int bj) const {
        const Config vi = (m >> bi) & 1u;
        const Config vj = (m >> bj) & 1u;
        if (vi == vj) return m;
        return m ^ ((Config{1} << bi) | (Config{1} << bj));
    }

    Config flipped(Config m, int bit) const { return m ^ (Config{1} << bit); }
};

Space make_space(Domain carrier, int site_cap = kDefaultSiteCap);

// Bit mask of the given carrier sites (throws when a site is not in the
// carrier).
Config subset_mask(const Space& sp, const std::vector<Site>& sites);

// A function on configurations, with its declared measurability support
// (empty = the whole carrier).  Dense storage of size nconf().
struct Field {
    std::vector<double> v;
    std::vector<Site> support;
};

Field make_field(const Space& sp, std::vector<Site> support = {});

// True when f is constant on every fiber of the non-support bits, i.e. f is
// measurable with respect to sigma(sites).
bool is_measurable(const Space& sp, const std::vector<double>& f,
                   const std::vector<Site>& sites);

// Configurations m with popcount(m & mask) == M, ascending.
std::vector<Config> sector_configs(const Space& sp, Config mask, int M);

}  // namespace exclab
