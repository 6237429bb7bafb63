#pragma once

#include <vector>

#include "exclab/measure.hpp"
#include "exclab/rates.hpp"
#include "exclab/space.hpp"

// Exchange (Kawasaki) and flip (Glauber) difference operators on enumerated
// spaces, Dirichlet forms, the symmetric generator, affine profiles, and
// translations.  pi_bond(f)(m) = f(m with the bond's endpoints exchanged)
// minus f(m); the generator applied here is (-L)u = sum_b c_b (u - u o swap_b),
// which is self-adjoint and positive semidefinite for any measure invariant
// under the exchanges with rates independent of the endpoint occupancies.

namespace exclab {

// Per-bond precomputation: the exchange permutation of configuration indices
// and the per-configuration rate (exterior witness sites resolved through the
// space: frozen values exactly, unfrozen ones by their Bernoulli mean, which
// is exact for rates affine in each occupancy).
struct BondOp {
    Bond bond;
    std::vector<std::uint32_t> swap;
    std::vector<double> c;
};

std::vector<BondOp> make_bond_ops(const Space& sp, const std::vector<Bond>& bonds,
                                  const RateModel& rm);

std::vector<std::uint32_t> swap_table(const Space& sp, const Bond& b);

std::vector<double> pi_bond(const Space& sp, const Bond& b, const std::vector<double>& f);
std::vector<double> pi_site(const Space& sp, const Site& x, const std::vector<double>& f);

// sum_{x in sites} (p . x) eta_x; p has the carrier's dimension.
std::vector<double> linear_profile(const Space& sp, const std::vector<double>& p,
                                   const std::vector<Site>& sites);

// (1/2) sum_b < c_b (pi_b u)(pi_b v) >_mu
double dirichlet_form(const Measure& mu, const std::vector<BondOp>& ops,
                      const std::vector<double>& u, const std::vector<double>& v);

// y = sum_b c_b (x - x o swap_b)   (i.e. y = (-L) x)
void neg_generator_apply(const std::vector<BondOp>& ops, const std::vector<double>& x,
                         std::vector<double>& y);

// (tau_z f)(eta) = f(tau_z eta) with (tau_z eta)_x = eta_{x+z}; f lives on
// src, the result on dst.  Every src carrier site y must have y+z resolved to
// a bit or frozen value of dst.
std::vector<double> translate_field(const Space& src, const std::vector<double>& f,
                                    const Site& z, const Space& dst);

// Tangent-field component (pi_b u)(pi_b ell_{e_dir}) for b = {x, x+e_dir}:
// equals (u o swap - u) * (eta_x - eta_{x+e_dir}).
std::vector<double> gradient_component(const Space& sp, const Site& x, int dir,
                                       const std::vector<double>& u);

}  // namespace exclab
