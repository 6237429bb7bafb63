#include "exclab/inequalities.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "exclab/kernels.hpp"
#include "exclab/operators.hpp"

namespace exclab {

namespace {

Inequality make_ineq(double lhs, double rhs) {
    Inequality q;
    q.lhs = lhs;
    q.rhs = rhs;
    q.holds = lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs));
    return q;
}

double require_open(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("density must lie in (0,1)");
    return rho * (1.0 - rho);
}

// <(pi_b f)^2>_mu summed over the given bonds.
double bond_square_sum(const Space& sp, const Measure& mu, const std::vector<double>& f,
                       const std::vector<Bond>& bonds) {
    double s = 0.0;
    for (const Bond& b : bonds) {
        const std::vector<double> g = pi_bond(sp, b, f);
        s += kernels::active().wdot(mu.w.data(), g.data(), g.data(), g.size());
    }
    return s;
}

}  // namespace

Inequality spectral_glauber_check(const Space& sp, const std::vector<double>& f,
                                  const std::vector<Site>& support, double rho) {
    const double chi = require_open(rho);
    if (!is_measurable(sp, f, support))
        throw std::invalid_argument("function is not measurable on the given sites");
    const Measure mu = bernoulli_measure(sp, rho);
    double sum = 0.0;
    for (const Site& x : support) {
        const std::vector<double> g = pi_site(sp, x, f);
        sum += kernels::active().wdot(mu.w.data(), g.data(), g.data(), g.size());
    }
    return make_ineq(variance(mu, f), chi * sum);
}

Inequality glauber_exchange_check(const Space& sp, const std::vector<double>& f,
                                  const Site& x, const Site& y, double rho) {
    const double chi = require_open(rho);
    const int bx = sp.carrier.rank_of(x);
    const int by = sp.carrier.rank_of(y);
    if (bx < 0 || by < 0) throw std::invalid_argument("exchange sites must be carrier sites");
    if (bx == by) throw std::invalid_argument("exchange sites must be distinct");
    const Measure mu = bernoulli_measure(sp, rho);
    auto l2 = [&](const std::vector<double>& g) {
        return std::sqrt(kernels::active().wdot(mu.w.data(), g.data(), g.data(), g.size()));
    };
    std::vector<double> pxy(sp.nconf());
    for (Config m = 0; m < sp.nconf(); ++m) pxy[m] = f[sp.exchanged(m, bx, by)] - f[m];
    const double lhs = l2(pi_site(sp, x, f));
    const double rhs = l2(pi_site(sp, y, f)) + l2(pxy) / std::sqrt(2.0 * chi);
    return make_ineq(lhs, rhs);
}

int domain_diameter(const Domain& lambda) {
    int diam = 0;
    for (int i = 0; i < lambda.dim; ++i) {
        int lo = lambda.sites.front().c[static_cast<std::size_t>(i)];
        int hi = lo;
        for (const Site& x : lambda.sites) {
            lo = std::min(lo, x.c[static_cast<std::size_t>(i)]);
            hi = std::max(hi, x.c[static_cast<std::size_t>(i)]);
        }
        diam = std::max(diam, hi - lo);
    }
    return diam;
}

Inequality spectral_gradient_check(const Space& sp, const std::vector<double>& f,
                                   const Domain& lambda, double rho) {
    require_open(rho);
    const Structure st = derive_structure(lambda);
    if (!is_measurable(sp, f, st.interior))
        throw std::invalid_argument(
            "exchange spectral estimate needs an interior-measurable function");
    const Measure mu = bernoulli_measure(sp, rho);
    const double diam = static_cast<double>(domain_diameter(lambda));
    const double rhs = diam * diam * bond_square_sum(sp, mu, f, st.interior_bonds.bonds);
    return make_ineq(variance(mu, f), rhs);
}

CanonicalGap canonical_gap_ratio(const Space& sp, const std::vector<double>& f,
                                 const Domain& lambda, int M) {
    const Config mask = subset_mask(sp, lambda.sites);
    const Measure mu = canonical_measure(sp, mask, M);
    const Structure st = derive_structure(lambda);
    CanonicalGap g;
    g.variance = variance(mu, f);
    g.dirichlet = bond_square_sum(sp, mu, f, st.interior_bonds.bonds);
    g.side = domain_diameter(lambda) + 1;
    const double scale = static_cast<double>(g.side) * static_cast<double>(g.side);
    g.ratio = g.dirichlet > 0.0 ? g.variance / (scale * g.dirichlet) : 0.0;
    return g;
}

}  // namespace exclab
