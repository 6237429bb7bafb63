#pragma once

#include <vector>

#include "exclab/variational.hpp"

// Density-regularity estimates for the finite-volume conductivity and its
// corrector, controlled through the one- and two-sided bias factors
//   Theta_{rho', rho} = max{ rho'/rho, (1-rho')/(1-rho) },
//   Theta~_{rho', rho} = max{ Theta_{rho', rho}, Theta_{rho, rho'} }.
// A change of density multiplies every Bernoulli weight on a carrier of V
// sites by at most Theta^V, which yields four quantitative consequences:
// a one-sided conductivity comparison, a symmetric conductivity difference
// bound, a bound on the corrector's mean under the shifted density, and a
// joint bound on the L^2 and Dirichlet distance between the correctors of
// two densities under a third.

namespace exclab {

double theta_bias(double rho_prime, double rho);      // one-sided
double theta_two_sided(double rho_prime, double rho);  // symmetric

struct Inequality {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double margin() const { return rhs - lhs; }
};

// |<f>_{rho'} - <f>_rho| <= (Theta^{|support|} - 1) <|f|>_rho for f measurable
// with respect to the given support sites.
Inequality bias_probability_check(const Space& sp, const std::vector<double>& f,
                                  const std::vector<Site>& support, double rho_prime,
                                  double rho);

struct RegularityReport {
    double theta = 0.0;        // Theta_{rho', rho}
    double theta_tilde = 0.0;  // Theta~_{rho', rho}
    double exponent = 0.0;     // (L + 2 r)^d carrier-volume exponent
    double cbar_rho = 0.0;        // xi . cbar(rho, Lambda_L) xi
    double cbar_rho_prime = 0.0;  // xi . cbar(rho', Lambda_L) xi
    double norm_rho = 0.0;        // Frobenius norms of the conductivities
    double norm_rho_prime = 0.0;
    double norm_rho_second = 0.0;
    Inequality conductivity_upper;  // cbar(rho') <= Theta^E cbar(rho), along xi
    Inequality conductivity_diff;   // |cbar(rho) - cbar(rho')| <= (Theta~^E - 1) max norm
    Inequality mean;                // corrector mean under the shifted density
    Inequality dirichlet_l2;        // corrector L^2 + Dirichlet distance
    bool l2_precondition = false;   // both two-sided factors^E <= 2
};

// Evaluates all four estimates on Lambda_L = cube(L, dim) with exact
// expectations (full carrier required).  The matrix inequalities are tested
// along the supplied direction xi; matrix norms are Frobenius.
RegularityReport regularity_suite(const RateModel& rm, int L, int dim, double rho,
                                  double rho_prime, double rho_second, const Vec3& xi,
                                  const SolveOptions& opt = {});

}  // namespace exclab
