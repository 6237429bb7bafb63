#include "exclab/space.hpp"

#include <bit>
#include <string>

namespace exclab {

Space make_space(Domain carrier, int site_cap) {
    if (carrier.size() > site_cap)
        throw std::invalid_argument("carrier exceeds site cap (" +
                                    std::to_string(carrier.size()) + " > " +
                                    std::to_string(site_cap) + ")");
    Space sp;
    sp.carrier = std::move(carrier);
    return sp;
}

Config subset_mask(const Space& sp, const std::vector<Site>& sites) {
    Config mask = 0;
    for (const Site& x : sites) {
        int b = sp.carrier.rank_of(x);
        if (b < 0) throw std::invalid_argument("subset site not in carrier: " + to_string(x));
        mask |= Config{1} << b;
    }
    return mask;
}

Field make_field(const Space& sp, std::vector<Site> support) {
    Field f;
    f.v.assign(sp.nconf(), 0.0);
    f.support = std::move(support);
    return f;
}

bool is_measurable(const Space& sp, const std::vector<double>& f,
                   const std::vector<Site>& sites) {
    const Config mask = subset_mask(sp, sites);
    const std::size_t n = sp.nconf();
    for (int b = 0; b < sp.bits(); ++b) {
        if ((mask >> b) & 1u) continue;
        const Config flip = Config{1} << b;
        for (Config m = 0; m < n; ++m)
            if (f[m] != f[m ^ flip]) return false;
    }
    return true;
}

std::vector<Config> sector_configs(const Space& sp, Config mask, int M) {
    std::vector<Config> out;
    const std::size_t n = sp.nconf();
    for (Config m = 0; m < n; ++m)
        if (std::popcount(m & mask) == M) out.push_back(m);
    return out;
}

}  // namespace exclab
