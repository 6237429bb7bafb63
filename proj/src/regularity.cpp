#include "exclab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exclab/corrector.hpp"

namespace exclab {

namespace {

Inequality make_ineq(double lhs, double rhs) {
    Inequality q;
    q.lhs = lhs;
    q.rhs = rhs;
    q.holds = lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs));
    return q;
}

Mat3 conductivity_matrix(const RateModel& rm, double rho, const Domain& lambda, int dim,
                         const SolveOptions& opt) {
    // cbar is an exact quadratic form in xi (the minimizer is linear in xi),
    // so polarization of xi -> 4 chi nu recovers the full matrix.
    return polarize(
        [&](const Vec3& v) { return 4.0 * chi(rho) * solve_nu(rm, rho, lambda, v, opt).value; },
        dim);
}

}  // namespace

double theta_bias(double rho_prime, double rho) {
    if (!(rho > 0.0 && rho < 1.0) || !(rho_prime > 0.0 && rho_prime < 1.0))
        throw std::invalid_argument("theta_bias: densities must lie strictly inside (0, 1)");
    return std::max(rho_prime / rho, (1.0 - rho_prime) / (1.0 - rho));
}

double theta_two_sided(double rho_prime, double rho) {
    return std::max(theta_bias(rho_prime, rho), theta_bias(rho, rho_prime));
}

Inequality bias_probability_check(const Space& sp, const std::vector<double>& f,
                                  const std::vector<Site>& support, double rho_prime,
                                  double rho) {
    if (!is_measurable(sp, f, support))
        throw std::invalid_argument(
            "bias_probability_check: f is not measurable on the given support");
    const Measure mu = bernoulli_measure(sp, rho);
    const Measure mu_prime = bernoulli_measure(sp, rho_prime);
    const double lhs = std::abs(expect(mu_prime, f) - expect(mu, f));
    std::vector<double> af(f.size());
    for (std::size_t m = 0; m < f.size(); ++m) af[m] = std::abs(f[m]);
    const double theta = theta_bias(rho_prime, rho);
    const double rhs =
        (std::pow(theta, static_cast<double>(support.size())) - 1.0) * expect(mu, af);
    return make_ineq(lhs, rhs);
}

RegularityReport regularity_suite(const RateModel& rm, int L, int dim, double rho,
                                  double rho_prime, double rho_second, const Vec3& xi,
                                  const SolveOptions& opt) {
    const Domain lambda = cube(L, dim);
    RegularityReport rep;
    rep.theta = theta_bias(rho_prime, rho);
    rep.theta_tilde = theta_two_sided(rho_prime, rho);
    // A density change rescales the weight of each of the (L+2r)^d carrier
    // sites by at most Theta, hence the exponent.
    const double E = std::pow(static_cast<double>(L + 2 * rm.range()), dim);
    rep.exponent = E;

    const Mat3 c_rho = conductivity_matrix(rm, rho, lambda, dim, opt);
    const Mat3 c_rho_prime = conductivity_matrix(rm, rho_prime, lambda, dim, opt);
    const Mat3 c_rho_second = conductivity_matrix(rm, rho_second, lambda, dim, opt);
    rep.cbar_rho = quad_form(c_rho, xi, dim);
    rep.cbar_rho_prime = quad_form(c_rho_prime, xi, dim);
    rep.norm_rho = mat_frobenius(c_rho, dim);
    rep.norm_rho_prime = mat_frobenius(c_rho_prime, dim);
    rep.norm_rho_second = mat_frobenius(c_rho_second, dim);

    rep.conductivity_upper =
        make_ineq(rep.cbar_rho_prime, std::pow(rep.theta, E) * rep.cbar_rho);
    rep.conductivity_diff =
        make_ineq(mat_frobenius(mat_add(c_rho, mat_scale(c_rho_prime, -1.0, dim), dim), dim),
                  (std::pow(rep.theta_tilde, E) - 1.0) *
                      std::max(rep.norm_rho, rep.norm_rho_prime));

    const Corrector co = corrector(rm, rho, lambda, xi, opt);
    const Corrector co_prime = corrector(rm, rho_prime, lambda, xi, opt);
    if (co.space.exterior_mean >= 0.0)
        throw std::invalid_argument(
            "regularity_suite: carrier exceeds the site cap; exact comparisons across "
            "densities need the full carrier");

    const double vol = static_cast<double>(lambda.size());
    const Measure mu_prime = bernoulli_measure(co.space, rho_prime);
    const double mean_shifted = expect(mu_prime, co.phi);
    rep.mean = make_ineq(mean_shifted * mean_shifted / vol,
                         static_cast<double>(L) * L * std::pow(std::pow(rep.theta, E) - 1.0, 2) *
                             rep.norm_rho);

    std::vector<double> delta = co_prime.phi;
    for (std::size_t m = 0; m < delta.size(); ++m) delta[m] -= co.phi[m];
    const Measure mu_second = bernoulli_measure(co.space, rho_second);
    double l2 = 0.0;
    for (std::size_t m = 0; m < delta.size(); ++m) l2 += mu_second.w[m] * delta[m] * delta[m];
    const Structure st = derive_structure(lambda);
    const auto ops = make_bond_ops(co.space, st.enlarged_bonds.bonds, rm);
    // The estimate's energy term carries no 1/2, hence twice the Dirichlet form.
    const double energy = 2.0 * dirichlet_form(mu_second, ops, delta, delta);
    const double theta_a = theta_two_sided(rho, rho_second);
    const double theta_b = theta_two_sided(rho_prime, rho_second);
    rep.l2_precondition = std::pow(theta_a, E) <= 2.0 && std::pow(theta_b, E) <= 2.0;
    rep.dirichlet_l2 = make_ineq(
        l2 / (static_cast<double>(L) * L * vol) + energy / vol,
        10.0 * (std::pow(std::max(theta_a, theta_b), E) - 1.0) *
            std::max({rep.norm_rho, rep.norm_rho_prime, rep.norm_rho_second}));
    return rep;
}

}  // namespace exclab
