#pragma once

#include <functional>
#include <vector>

#include "exclab/geometry.hpp"
#include "exclab/measure.hpp"
#include "exclab/space.hpp"

// Independent-particle (free) configurations with truncated Poisson
// occupation numbers, the coarse-graining projection onto exclusion
// configurations, and exact checks of the identities tying the two systems
// together:
//
//   * the intensity alpha(rho) = -log(1 - rho) makes the coarsened free
//     measure a product Bernoulli(rho) measure;
//   * Mecke's identity <n_x F(n)> = alpha <F(n + delta_x)> for the Poisson
//     occupation numbers;
//   * its exclusion-side analogue: the mean of the tangent field equals a
//     difference of conditioned expectations, in both the product and the
//     fixed-particle-number ensembles;
//   * the gradient coupling: summed free-particle moves of a coarsened
//     function reduce to summed tangent-field means on the exclusion side;
//   * a weighted multiscale Poincare estimate probed on triadic boxes.
//
// Occupation numbers are truncated at K and the weights renormalized; the
// total-variation distance between the truncated and the true Poisson law is
// exactly the discarded tail mass, so every identity check reports that tail
// alongside its gap.

namespace exclab {

// alpha(rho) = -log(1 - rho): P[Poisson(alpha) >= 1] = rho.  rho in (0,1).
double couple_alpha(double rho);

// Poisson(alpha) restricted to {0,...,K} and renormalized.
struct PoissonTruncation {
    double alpha = 0.0;
    int K = 0;
    std::vector<double> w;  // size K+1, sums to 1
    double tail = 0.0;      // P[Poisson(alpha) > K] = TV distance to the true law
};

PoissonTruncation truncate_poisson(double alpha, int K);

// Smallest K whose tail is below the budget.
PoissonTruncation choose_truncation(double alpha, double budget = 1e-12);

// Free configurations: occupation counts in {0..K} on every carrier site,
// enumerated as a mixed-radix odometer with (K+1)^|carrier| states.
struct FreeSpace {
    Domain carrier;
    int K = 0;

    long long nstates() const;
};

// Guards the state count: at most `site_cap` carrier sites.
FreeSpace make_free_space(Domain carrier, int K, int site_cap = 6);

// Coarse projection [n]_x = 1{n_x >= 1} as a configuration bit mask in the
// carrier's site order.
Config coarse_config(const FreeSpace& fs, const std::vector<int>& counts);

// Visits every free state with its renormalized product weight and its
// coarse projection.  Counts are indexed by the carrier's site order.
void for_each_free(const FreeSpace& fs, const PoissonTruncation& pt,
                   const std::function<void(const std::vector<int>&, double, Config)>& visit);

struct GapReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;   // |lhs - rhs|
    double tail = 0.0;  // truncation tail carried by the computation
};

// <n_x F(n)>_alpha vs alpha <F(n + delta_x)>_alpha under the truncated
// product measure.  On the right-hand side F sees counts up to K+1 at x.
GapReport mecke_check(const FreeSpace& fs, const PoissonTruncation& pt, const Site& x,
                      const std::function<double(const std::vector<int>&)>& F);

// <u([n])>_{alpha(rho)} vs <u>_rho for u on a fully enumerated space (no
// frozen sites, no exterior mean).
GapReport lift_expectation_check(const Space& sp, const std::vector<double>& u, double rho,
                                 int K);

struct MeckeKawasaki {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

// <grad_{x,e_dir} u>_rho = 2 rho (<u | eta_{x+e}=1> - <u | eta_x=1>)_rho.
// Exact for rho in (0,1); rho = 0 returns the trivial zero identity, rho = 1
// is an error (conditioning on an empty event).
MeckeKawasaki mecke_kawasaki(const Space& sp, const std::vector<double>& u, const Site& x,
                             int dir, double rho);

// Fixed-particle-number version on the sites of `mask` with N particles
// (carrier bits outside the mask are pinned to zero by the sector measure):
// <grad u>_{mask,N} = (2N/V)(<u | eta_{x+e}=1> - <u | eta_x=1>)_{mask,N},
// where V = |mask| and P[eta_y = 1] = N/V for every masked site.  N = 0
// returns the trivial zero identity.
MeckeKawasaki mecke_kawasaki_canonical(const Space& sp, const std::vector<double>& u,
                                       const Site& x, int dir, Config mask, int N);

// sum_{x in lambda} <n_x (u([n - delta_x + delta_{x+e}]) - u([n]))>_alpha
//   = (alpha / (2 rho)) sum_{x in lambda} <grad_{x,e} u>_rho
// with alpha = alpha(rho).  Every x and x + e_dir must be a carrier site.
GapReport gradient_coupling(const Space& sp, const std::vector<double>& u,
                            const Domain& lambda, int dir, double rho, int K);

// Fixed-total-number version: M independent uniformly placed particles on
// Lambda^+ = lambda union its one-step translates.  The left-hand side sums
// <u([n] v delta_{x+e}) - u([n] v delta_x)> over lambda; the right-hand side
// mixes the exclusion sector identities with the occupied-site-count weights
// P[#occupied sites = N].  u must be measurable with respect to Lambda^+.
GapReport gradient_coupling_canonical(const Space& sp, const std::vector<double>& u,
                                      const Domain& lambda, int dir, int M);

// Weighted multiscale Poincare probe on the triadic box of side 3^m: with u
// recentred to <u | G> = 0 for G = sigma(total particle number on the
// enlarged box), compares
//   lhs = <u^2 / |box_m|>^{1/2}
// against
//   rhs = sum_{n=0}^{m} 3^n ( avg_z < w_z * |avg gradient over z+box_n,
//                              conditioned on G_{z+box_n^+}|^2 > )^{1/2},
// where w_z = |box_n^+| / (2 N*) with N* the number of particles (rho <= 1/2)
// or holes (rho > 1/2) in z+box_n^+, and the integrand is zero when N* = 0.
// The carrier must be exactly the enlargement of the triadic box.  The ratio
// lhs/rhs is what calibration runs record; it is 0 when lhs = 0.
struct PoincareProbe {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::vector<double> scale_terms;  // one summand per n = 0..m
};

PoincareProbe weighted_poincare_probe(const Space& sp, const std::vector<double>& u, int m,
                                      double rho);

}  // namespace exclab
