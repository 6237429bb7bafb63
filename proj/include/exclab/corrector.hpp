#pragma once

#include <vector>

#include "exclab/variational.hpp"

// Local correctors and the single-bond conductivity quadratic form.
//
// The finite-volume corrector is the non-affine part of the primal minimizer,
//   phi_{rho, Lambda, xi} = v(rho, Lambda, xi) - ell_xi,
// a mean-zero function measurable with respect to the interior sites.
//
// The infinite-volume conductivity acts on d-tuples F of local functions:
//   xi . c(rho; F) xi
//     = (1/2) sum_{|x|=1} < c_{0,x} ( xi . { x(eta_x - eta_0)
//         - pi_{0,x}( sum_y tau_y F ) } )^2 >_rho,
// where only the finitely many translates whose support meets the bond
// contribute to the inner sum.  Its infimum over F (the true conductivity) is
// not computable in finite volume; every quantity stated against it is
// reported relative to a finite reference box, with the substitution flagged.

namespace exclab {

// A local function tabulated over an explicit support: values[k] is the value
// of the function when bit i of k gives the occupancy of support[i].
struct LocalObservable {
    std::vector<Site> support;
    std::vector<double> values;  // size 2^|support|
};

// Make the table for phi restricted to its carrier sites; f must be
// measurable with respect to `sites` (checked).
LocalObservable tabulate(const Space& sp, const std::vector<double>& f,
                         const std::vector<Site>& sites);

struct Corrector {
    Domain lambda;
    Space space;                 // carrier of the primal solve
    std::vector<double> phi;     // v - ell on the carrier configurations
    std::vector<Site> carrier;   // interior sites (measurability support)
    double mean = 0.0;           // <phi>_rho, zero by the pinning
    double l2_per_site = 0.0;    // <phi^2>_rho / |Lambda|
    double sublinearity = 0.0;   // <phi^2>_rho / (|Lambda| L^2)
    double residual = 0.0;
};

Corrector corrector(const RateModel& rm, double rho, const Domain& lambda, const Vec3& xi,
                    const SolveOptions& opt = {});

// xi . c(rho; F) xi as a d x d matrix; F has one component per direction.
Mat3 conductivity_of(const RateModel& rm, double rho, const std::vector<LocalObservable>& F,
                     int dim, const SolveOptions& opt = {});

struct RReport {
    Mat3 c_of_F{};          // c(rho; F)
    Mat3 c_ref{};           // cbar(rho, Lambda_ref), the finite-box stand-in
    Mat3 R{};               // c(rho; F) - cbar(rho, Lambda_ref)
    int ref_param = 0;      // side of the reference box
    bool finite_box_reference = true;
    double residual = 0.0;
};

// R(rho; F) against the largest affordable reference box.
RReport R_of_F(const RateModel& rm, double rho, const std::vector<LocalObservable>& F,
               const Domain& lambda_ref, const SolveOptions& opt = {});

// The d-tuple Phi_L = (phi_{rho, Lambda, e_1}, ...) / |Lambda| feeding the
// identification chain cbar(rho, Lambda) <= c(rho; Phi_L).
std::vector<LocalObservable> corrector_tuple(const RateModel& rm, double rho,
                                             const Domain& lambda, const SolveOptions& opt = {});

// Density-free corrector on the triadic cube box_m: a sum over the interior
// sub-cube centers z (3^n-grid, farther than 3^n from the boundary) of the
// sub-box correctors evaluated at the truncated empirical density.  Sector
// form: on {sum_{x in box_m^-} eta_x = M} the density is the clamped
// (M v M_*) ^ M^* over |box_m^-|, where M_*, M^* bound the integer window
// with empirical density in [eps, 1 - eps] (when that window is empty, the
// density itself is clamped to [eps, 1 - eps] directly).
struct FreeCorrector {
    int m = 0, n = 0;
    double epsilon = 0.0;
    Domain box;                        // triadic_cube(m)
    Space space;                       // carrier for the box_m cell problem
    std::vector<double> phi_hat;       // on space configurations
    std::vector<Site> averaging_sites; // box_m^-: carrier of the empirical density
    std::vector<Site> centers;         // admitted sub-cube centers
    std::vector<double> clamped_density;  // per particle number M = 0..|box_m^-|
};

FreeCorrector density_free_corrector(const RateModel& rm, int m, int n, double epsilon,
                                     const Vec3& xi, int dim, const SolveOptions& opt = {});

// (1/|box_m|) sum_{b in enlarged bonds} <(1/2) c_b (pi_b(ell_xi + v))^2>_rho
// for a candidate v on the free corrector's carrier.
double cell_functional(const RateModel& rm, const FreeCorrector& fc, const Vec3& xi,
                       const std::vector<double>& v, double rho);

struct MuReport {
    double value = 0.0;            // min over candidates of the sup over the grid
    double value_at_free = 0.0;    // candidate v = phi_hat
    double value_at_affine = 0.0;  // candidate v = 0
    double argmax_rho = 0.0;       // grid density attaining the reported value
    int ref_param = 0;
    bool finite_box_reference = true;
    double grid_step = 0.0;
};

// Upper bound for mu(box_m, xi): the functional of eq-type
//   sup_rho { (1/|box_m|) Dirichlet(ell_xi + v)_rho - (1/2) xi . cbar_ref(rho) xi }
// evaluated over the density grid at the two candidates v = phi_hat and v = 0.
// cbar_ref is the conductivity of the reference box (finite-box stand-in for
// the unreachable limit).
MuReport mu_upper_bound(const RateModel& rm, const FreeCorrector& fc, const Vec3& xi,
                        const Domain& lambda_ref, const std::vector<double>& rho_grid,
                        const SolveOptions& opt = {});

// Uniform density grid of step 1/64 on [1/64, 63/64].
std::vector<double> default_density_grid();

}  // namespace exclab
