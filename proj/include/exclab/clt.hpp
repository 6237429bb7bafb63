#pragma once

#include <map>
#include <vector>

#include "exclab/canonical.hpp"
#include "exclab/geometry.hpp"
#include "exclab/rates.hpp"
#include "exclab/space.hpp"
#include "exclab/variational.hpp"

// CLT variances for the gradient-replacement fields.  All functions act on
// the canonical carrier (Lambda enumerated, exterior condition frozen) and
// the localized generator runs over the interior bonds of Lambda.
//
// Special fields (components of the vector-valued observables):
//   gradient_field    A_i = -sum_{b in Lambda^*} pi_b ell_{e_i}
//   current_field     B_i = -L_{Lambda,zeta} ell_{e_i}    (microscopic current)
//   correction_field  H_i =  L_{Lambda,zeta} sum_{x} tau_x F_i, the sum over
//                     x in the cube of side L - r(F) - 1 so every translate
//                     stays inside Lambda.
//
// The CLT covariance of sector-centred f, g is
//   Delta[f,g] = < f, (-L_{Lambda,zeta})^{-1} g >_{Lambda,M,zeta},
// and the finite-volume identity
//   |Lambda|^{-1} Delta[q.A] = chi_hat q . Dhat_*^{-1}(Lambda,M,zeta) q
// ties it to the canonical dual diffusivity with no error term.

namespace exclab {

std::vector<double> gradient_field(const Space& sp, const Domain& lambda, int dir);

std::vector<double> current_field(const RateModel& rm, const Space& sp, const Domain& lambda,
                                  int dir);

std::vector<double> correction_field(const RateModel& rm, const Space& sp, const Domain& lambda,
                                     int dir, const Space& fsp, const std::vector<double>& F_i);

struct CltSolve {
    double value = 0.0;
    std::vector<double> resolvent;  // u = (-L)^{-1} g, centred on the sector
    double residual = 0.0;
    CGReport cg{};
};

CltSolve clt_covariance(const RateModel& rm, const Domain& lambda, int M,
                        const std::map<Site, int>& zeta, const std::vector<double>& f,
                        const std::vector<double>& g, const SolveOptions& opt = {});

struct CltIdentity {
    double delta_per_site = 0.0;  // |Lambda|^{-1} Delta[q.A]
    double reference = 0.0;       // chi_hat q . Dhat_*^{-1} q
    double gap = 0.0;
    double residual = 0.0;
};

CltIdentity clt_gradient_identity(const RateModel& rm, const Domain& lambda, int M,
                                  const std::map<Site, int>& zeta, const Vec3& q,
                                  const SolveOptions& opt = {});

}  // namespace exclab
