#pragma once

#include <vector>

#include "exclab/regularity.hpp"

// Spectral (Poincare-type) inequalities for the exclusion process on an
// enumerated space, evaluated as exact finite sums:
//
//   * flip (Glauber) estimate: Var_rho[f] <= chi(rho) sum_x <(pi_x f)^2>,
//     the Efron--Stein bound for independent Bernoulli coordinates;
//   * flip-site exchange: ||pi_x f|| <= ||pi_y f|| + (2 chi)^{-1/2} ||pi_{x,y} f||,
//     valid for any pair of distinct sites;
//   * exchange (Kawasaki) estimate: Var_rho[f] <= diam(Lambda)^2
//     sum_{b in Lambda*} <(pi_b f)^2> for f measurable with respect to the
//     interior of Lambda, obtained by routing each flip derivative to the
//     boundary along a path of exchanges;
//   * canonical sector estimate: Var_{Lambda,M}[f] <= C L^2 sum_{b} <(pi_b f)^2>
//     for SOME finite constant C.  Only the measured ratio is reported here;
//     callers compare it against a recorded calibration constant.

namespace exclab {

// Var_rho[f] <= chi(rho) sum_{x in support} <(pi_x f)^2>_rho; f must be
// measurable with respect to the given sites.
Inequality spectral_glauber_check(const Space& sp, const std::vector<double>& f,
                                  const std::vector<Site>& support, double rho);

// ||pi_x f||_2 <= ||pi_y f||_2 + (2 chi(rho))^{-1/2} ||pi_{x,y} f||_2 for any
// distinct carrier sites x, y (the pair exchange needs no adjacency).
Inequality glauber_exchange_check(const Space& sp, const std::vector<double>& f,
                                  const Site& x, const Site& y, double rho);

// Var_rho[f] <= diam(Lambda)^2 sum over Lambda's interior bonds of
// <(pi_b f)^2>_rho, for f measurable with respect to interior(Lambda).
// diam is the sup-norm diameter.
Inequality spectral_gradient_check(const Space& sp, const std::vector<double>& f,
                                   const Domain& lambda, double rho);

// Sup-norm diameter: the largest single-coordinate spread of the site set.
int domain_diameter(const Domain& lambda);

// Measured constant of the canonical sector estimate on Lambda with M
// particles (carrier bits outside Lambda are pinned to zero by the sector
// measure).  ratio = variance / (side^2 * bond sum) with side =
// diam(Lambda) + 1; a function that is constant on the sector gives 0/0,
// reported as ratio 0.
struct CanonicalGap {
    double variance = 0.0;
    double dirichlet = 0.0;  // sum over interior bonds of <(pi_b f)^2>
    int side = 0;
    double ratio = 0.0;
};

CanonicalGap canonical_gap_ratio(const Space& sp, const std::vector<double>& f,
                                 const Domain& lambda, int M);

}  // namespace exclab
