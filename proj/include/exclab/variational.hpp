#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "exclab/cg.hpp"
#include "exclab/geometry.hpp"
#include "exclab/linalg.hpp"
#include "exclab/measure.hpp"
#include "exclab/operators.hpp"
#include "exclab/rates.hpp"
#include "exclab/space.hpp"

// Finite-volume cell problems for the grand-canonical ensemble.
//
// Primal:  nu(rho, Lambda, p) = inf over v in ell_p + F_0(Lambda^-) of
//   (2 chi(rho) |Lambda|)^{-1} sum_{b in enlarged bonds} < (1/2) c_b (pi_b v)^2 >_rho,
// a quadratic form (1/2) p . D p in the slope p.
//
// Dual:  nu*(rho, Lambda, q) = sup over local v of
//   (2 chi(rho) |Lambda|)^{-1} sum_b < (pi_b ell_q)(pi_b v) - (1/2) c_b (pi_b v)^2 >_rho,
// a quadratic form (1/2) q . D_*^{-1} q.  Exchanges preserve both the particle
// number of Lambda^+ and the exterior rate witnesses, so the supremum splits
// over those sectors; the per-sector problems do not depend on rho and are
// solved once, then reweighted by the Bernoulli sector probabilities for any
// density.  This is also why a single glued maximizer works for every rho.
//
// Master quantity:  J(rho, Lambda, p, q) = nu + nu* - p.q >= 0, with the
// quadratic representation through the optimizer u - v recentred on the
// sector sigma-algebra.

namespace exclab {

inline double chi(double rho) { return rho * (1.0 - rho); }

using Vec3 = std::array<double, 3>;

struct SolveOptions {
    double rel_tol = 1e-10;
    std::size_t iter_cap_factor = 10;
    int site_cap = kDefaultSiteCap;
};

// Carrier holding Lambda^+ plus every rate witness of the enlarged bond
// family.  On this space all expectations are plain Bernoulli products and
// the dual sector decomposition is explicit.
struct CellGeometry {
    Structure st;
    Space space;            // full carrier (every witness is a bit)
    Config plus_mask = 0;   // bits of Lambda^+
    Config wit_mask = 0;    // bits of the exterior witness sites
    std::vector<Bond> bonds;  // enlarged bond family
};

CellGeometry make_cell_geometry(const RateModel& rm, const Domain& lambda,
                                const SolveOptions& opt = {});

// Carrier used by solve_nu: the full cell carrier when it fits the site cap,
// otherwise Lambda^+ with exterior witnesses read as their Bernoulli mean
// (exact marginalisation for rates affine in each occupancy).
Space primal_space(const RateModel& rm, double rho, const Domain& lambda,
                   const SolveOptions& opt = {});

struct NuResult {
    double value = 0.0;   // nu(rho, Lambda, p)
    double energy = 0.0;  // sum_b <(1/2) c_b (pi_b v)^2>_rho, unnormalised
    std::vector<double> minimizer;  // v = ell_p + phi on the carrier
    double residual = 0.0;          // stationarity defect relative to the load
    CGReport cg{};
};

// Primal solve.  When the full carrier would exceed opt.site_cap, the solve
// falls back to the Lambda^+ carrier with exterior witnesses read as their
// Bernoulli mean (exact for rates affine in each occupancy); the minimizer is
// then a field on that reduced space.
NuResult solve_nu(const RateModel& rm, double rho, const Domain& lambda, const Vec3& p,
                  const SolveOptions& opt = {});

// rho-independent per-sector optimum of the dual functional, as a quadratic
// form in q.  Sector = (particle number of Lambda^+, exterior witness bits).
struct DualSector {
    int particles = 0;
    Config zeta = 0;       // witness bits embedded in carrier positions
    int zeta_count = 0;    // popcount of the witness pattern
    long long size = 0;    // number of configurations in the sector
    Mat3 form{};           // q -> 2 chi |Lambda| nu*-contribution of the sector
};

struct DualCache {
    Domain lambda;
    int dim = 1;
    int plus_sites = 0;  // |Lambda^+|
    int wit_sites = 0;   // number of exterior witness sites
    std::vector<DualSector> sectors;
    double max_residual = 0.0;
};

DualCache build_dual_cache(const RateModel& rm, const Domain& lambda,
                           const SolveOptions& opt = {});

// Bernoulli weight of a sector at density rho.
double sector_probability(const DualCache& cache, const DualSector& s, double rho);

double nu_star_value(const DualCache& cache, double rho, const Vec3& q);

// q . D_*^{-1} q as a matrix, and D_* itself.
Mat3 dual_inverse_matrix(const DualCache& cache, double rho);
Mat3 dual_matrix(const DualCache& cache, double rho);

struct NuStarResult {
    double value = 0.0;
    std::vector<double> maximizer;  // glued across sectors, zero-mean in each
    double residual = 0.0;
};

// Dual solve with the maximizer assembled for this particular q.
NuStarResult solve_nu_star(const RateModel& rm, double rho, const Domain& lambda,
                           const Vec3& q, const SolveOptions& opt = {});

struct DiffusionMatrices {
    Mat3 D{};       // primal bulk diffusivity
    Mat3 D_star{};  // dual bulk diffusivity
    Mat3 c{};       // conductivity 2 chi D
    Mat3 c_star{};  // 2 chi D_star
    double residual = 0.0;
};

DiffusionMatrices diffusion_matrices(const RateModel& rm, double rho, const Domain& lambda,
                                     const SolveOptions& opt = {});

struct JResult {
    double value = 0.0;      // nu + nu* - p.q
    double nu = 0.0;
    double nu_star = 0.0;
    double quadratic = 0.0;  // (4 chi |Lambda|)^{-1} sum_b <c_b (pi_b vJ)^2>
    Vec3 slope{};            // (2 chi |Lambda|)^{-1} sum_{x in Lambda} <grad_x vJ>
    Vec3 slope_reference{};  // D_*^{-1} q - p
    std::vector<double> optimizer;  // vJ = u - v - E[u - v | sector]
    double residual = 0.0;
};

// Requires the full carrier (throws when it exceeds opt.site_cap).
JResult master_J(const RateModel& rm, double rho, const Domain& lambda, const Vec3& p,
                 const Vec3& q, const SolveOptions& opt = {});

// The functional maximised by J: value at an arbitrary trial function w on
// the cell carrier.  Restricted to harmonic w it satisfies the exact
// quadratic response against master_J's optimizer.
double j_functional(const RateModel& rm, double rho, const Domain& lambda, const Vec3& p,
                    const Vec3& q, const std::vector<double>& w,
                    const SolveOptions& opt = {});

}  // namespace exclab
