#include "exclab/measure.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "exclab/kernels.hpp"

namespace exclab {

double Measure::total() const { return std::accumulate(w.begin(), w.end(), 0.0); }

Measure bernoulli_measure(const Space& sp, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in [0,1]");
    const int nb = sp.bits();
    const std::size_t n = sp.nconf();
    Measure mu;
    mu.w.resize(n);
    for (Config m = 0; m < n; ++m) {
        const int k = std::popcount(m);
        mu.w[m] = std::pow(rho, k) * std::pow(1.0 - rho, nb - k);
    }
    return mu;
}

Measure canonical_measure(const Space& sp, Config mask, int M) {
    const std::size_t n = sp.nconf();
    Measure mu;
    mu.w.assign(n, 0.0);
    std::size_t count = 0;
    for (Config m = 0; m < n; ++m)
        if (std::popcount(m & mask) == M && (m & ~mask) == 0) ++count;
    if (count == 0) throw std::invalid_argument("empty particle-number sector");
    const double wi = 1.0 / static_cast<double>(count);
    for (Config m = 0; m < n; ++m)
        if (std::popcount(m & mask) == M && (m & ~mask) == 0) mu.w[m] = wi;
    return mu;
}

double expect(const Measure& mu, const std::vector<double>& f) {
    return kernels::active().wsum(mu.w.data(), f.data(), f.size());
}

double covariance(const Measure& mu, const std::vector<double>& f,
                  const std::vector<double>& g) {
    const double ef = expect(mu, f);
    const double eg = expect(mu, g);
    return kernels::active().wdot(mu.w.data(), f.data(), g.data(), f.size()) - ef * eg;
}

double variance(const Measure& mu, const std::vector<double>& f) {
    return covariance(mu, f, f);
}

Projector::Projector(const Space& sp, const Measure& mu, const std::vector<Site>& sites,
                     bool mean_zero)
    : mu_(&mu), mean_zero_(mean_zero) {
    // Configurations sharing the masked bit pattern form one fiber of the
    // conditional expectation.
    const Config mask = subset_mask(sp, sites);
    const std::size_t n = sp.nconf();
    std::vector<std::uint64_t> keys(n);
    for (Config m = 0; m < n; ++m) keys[m] = m & mask;
    index_fibers(keys);
}

Projector::Projector(const Space& sp, const Measure& mu,
                     const std::vector<std::uint64_t>& fiber_key, bool mean_zero)
    : mu_(&mu), mean_zero_(mean_zero) {
    if (fiber_key.size() != sp.nconf())
        throw std::invalid_argument("fiber key table must cover every configuration");
    index_fibers(fiber_key);
}

void Projector::index_fibers(const std::vector<std::uint64_t>& keys) {
    const std::size_t n = keys.size();
    std::unordered_map<std::uint64_t, std::uint32_t> ids;
    fiber_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        auto [it, inserted] = ids.try_emplace(keys[m], static_cast<std::uint32_t>(ids.size()));
        fiber_[m] = it->second;
    }
    fiber_wsum_.assign(ids.size(), 0.0);
    for (std::size_t m = 0; m < n; ++m) fiber_wsum_[fiber_[m]] += mu_->w[m];
    fiber_acc_.assign(ids.size(), 0.0);
}

void Projector::apply(std::vector<double>& f) const {
    const std::size_t n = f.size();
    std::fill(fiber_acc_.begin(), fiber_acc_.end(), 0.0);
    for (std::size_t m = 0; m < n; ++m) fiber_acc_[fiber_[m]] += mu_->w[m] * f[m];
    double mean = 0.0;
    if (mean_zero_)
        for (std::size_t k = 0; k < fiber_acc_.size(); ++k) mean += fiber_acc_[k];
    for (std::size_t m = 0; m < n; ++m) {
        if (mu_->w[m] <= 0.0) {
            f[m] = 0.0;
        } else {
            const double ws = fiber_wsum_[fiber_[m]];
            f[m] = fiber_acc_[fiber_[m]] / ws - mean;
        }
    }
}

}  // namespace exclab
