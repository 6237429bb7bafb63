#pragma once

#include <vector>

#include "exclab/space.hpp"

// Probability measures on an enumerated Space, expectation/variance helpers,
// and the conditional-expectation projector used to confine conjugate
// gradient iterations to a measurability-and-mean-zero subspace.

namespace exclab {

struct Measure {
    std::vector<double> w;  // normalised weights, one per configuration

    double total() const;
};

// Product Bernoulli(rho) over the carrier (the frozen exterior is already
// conditioned on, so it does not enter the weights).
Measure bernoulli_measure(const Space& sp, double rho);

// Uniform measure on the particle-number sector {popcount(m & mask) == M};
// carrier bits outside the mask are pinned to zero.  mask = whole carrier
// gives the usual fixed-particle-number ensemble.
Measure canonical_measure(const Space& sp, Config mask, int M);

double expect(const Measure& mu, const std::vector<double>& f);
double covariance(const Measure& mu, const std::vector<double>& f,
                  const std::vector<double>& g);
double variance(const Measure& mu, const std::vector<double>& f);

// Orthogonal projector in L^2(mu) onto functions measurable with respect to
// sigma(sites), supported on {w > 0}, optionally mean-zero.  Passing the full
// carrier keeps the function (restricted to the support) and just recentres.
class Projector {
  public:
    Projector(const Space& sp, const Measure& mu, const std::vector<Site>& sites,
              bool mean_zero);

    // Conditional expectation with respect to an arbitrary partition: two
    // configurations belong to the same fiber iff their keys agree.  Used for
    // sigma-algebras that are not generated by a subset of sites, e.g. the one
    // generated by a particle count together with frozen exterior bits.
    Projector(const Space& sp, const Measure& mu, const std::vector<std::uint64_t>& fiber_key,
              bool mean_zero);

    void apply(std::vector<double>& f) const;
    std::vector<double> operator()(std::vector<double> f) const {
        apply(f);
        return f;
    }

  private:
    void index_fibers(const std::vector<std::uint64_t>& keys);

    const Measure* mu_;
    bool mean_zero_;
    // Dense fiber index per configuration and per-fiber weight totals.
    std::vector<std::uint32_t> fiber_;
    std::vector<double> fiber_wsum_;
    mutable std::vector<double> fiber_acc_;
};

}  // namespace exclab
