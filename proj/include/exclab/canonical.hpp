#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "exclab/cg.hpp"
#include "exclab/geometry.hpp"
#include "exclab/linalg.hpp"
#include "exclab/measure.hpp"
#include "exclab/rates.hpp"
#include "exclab/space.hpp"
#include "exclab/variational.hpp"

// Fixed-particle-number (canonical) cell problems.  The ensemble is the
// uniform measure on {configurations of Lambda with M particles} with a
// deterministic exterior condition zeta supplying the rate witnesses, and the
// Dirichlet sums run over the interior bond family Lambda^* — the bond set for
// which the localized generator with exterior condition is reversible for the
// sector measure and the dual value matches the CLT variance of the gradient
// field exactly at finite volume.

namespace exclab {

// Exterior sites whose occupancy the interior-bond rates read (sorted).
std::vector<Site> canonical_frozen_sites(const RateModel& rm, const Domain& lambda);

// Assignment for the given sites from the low bits of `bits` (site i gets
// bit i), e.g. for sweeping deterministic exterior conditions.
std::map<Site, int> zeta_from_bits(const std::vector<Site>& sites, std::uint64_t bits);

// Carrier = Lambda with zeta frozen; throws when zeta misses a needed site.
Space canonical_space(const RateModel& rm, const Domain& lambda,
                      const std::map<Site, int>& zeta, int site_cap = kDefaultSiteCap);

struct CanonicalSolve {
    double value = 0.0;             // (1/2) p.Dhat p  or  (1/2) q.Dhat*^{-1} q
    std::vector<double> optimizer;  // field on the canonical carrier
    double residual = 0.0;
    CGReport cg{};
};

CanonicalSolve solve_nu_hat(const RateModel& rm, const Domain& lambda, int M,
                            const std::map<Site, int>& zeta, const Vec3& p,
                            const SolveOptions& opt = {});

CanonicalSolve solve_nu_hat_star(const RateModel& rm, const Domain& lambda, int M,
                                 const std::map<Site, int>& zeta, const Vec3& q,
                                 const SolveOptions& opt = {});

struct CanonicalMatrices {
    Mat3 D{};       // primal
    Mat3 D_star{};  // dual
    Mat3 c{};       // 2 chi_hat D
    Mat3 c_star{};  // 2 chi_hat D_star
    double chi_hat = 0.0;
    double residual = 0.0;
};

CanonicalMatrices canonical_matrices(const RateModel& rm, const Domain& lambda, int M,
                                     const std::map<Site, int>& zeta,
                                     const SolveOptions& opt = {});

// Local equivalence of ensembles for an observable f on a carrier inside
// Lambda_ell, embedded in the canonical ensemble (Lambda_L, M).  Both
// expectations are exact (hypergeometric section weights); the two bounds are
// asserted only when their preconditions hold, and reported as "not
// guaranteed" (flags false) otherwise.
struct EnsembleComparison {
    double canonical = 0.0;  // <f>_{Lambda_L, M}
    double grand = 0.0;      // <f>_{rho_hat},  rho_hat = M / |Lambda_L|
    double abs_grand = 0.0;  // <|f|>_{rho_hat}
    double rho_hat = 0.0;
    bool sector_nonneg = false;  // <f>_{carrier, N} >= 0 for every N
    bool bound1_applies = false;  // 10 ell^2 <= L and sector_nonneg
    bool bound2_applies = false;  // 10 ell^{2d} <= eps L^d and M in M_eps
    double bound1_slack = 0.0;    // (1 + 4 (ell^2/L)^d) grand - canonical
    double bound2_slack = 0.0;    // (1/eps)(ell^2/L)^d <|f|> - |canonical - grand|
};

EnsembleComparison ensemble_equivalence(const Space& fsp, const std::vector<double>& f, int L,
                                        int ell, long long M, double eps);

}  // namespace exclab
