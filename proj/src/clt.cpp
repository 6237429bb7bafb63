#include "exclab/clt.hpp"

#include <cmath>
#include <stdexcept>

#include "exclab/kernels.hpp"
#include "exclab/operators.hpp"

namespace exclab {

namespace {

std::vector<double> unit_profile(const Space& sp, const Domain& lambda, int dir) {
    std::vector<double> slope(lambda.dim, 0.0);
    slope[dir] = 1.0;
    return linear_profile(sp, slope, lambda.sites);
}

// Smallest r with carrier inside the open cube of side r.
int support_diameter(const Space& fsp) {
    int r = 1;
    for (const Site& x : fsp.carrier.sites) r = std::max(r, 2 * sup_norm(x) + 1);
    return r;
}

}  // namespace

std::vector<double> gradient_field(const Space& sp, const Domain& lambda, int dir) {
    const Structure st = derive_structure(lambda);
    const auto ell = unit_profile(sp, lambda, dir);
    const std::size_t n = sp.nconf();
    std::vector<double> a(n, 0.0);
    for (const Bond& b : st.interior_bonds.bonds) {
        const auto swap = swap_table(sp, b);
        for (std::size_t m = 0; m < n; ++m) a[m] += ell[m] - ell[swap[m]];
    }
    return a;
}

std::vector<double> current_field(const RateModel& rm, const Space& sp, const Domain& lambda,
                                  int dir) {
    const Structure st = derive_structure(lambda);
    const auto ops = make_bond_ops(sp, st.interior_bonds.bonds, rm);
    const auto ell = unit_profile(sp, lambda, dir);
    std::vector<double> b(sp.nconf(), 0.0);
    neg_generator_apply(ops, ell, b);
    return b;
}

std::vector<double> correction_field(const RateModel& rm, const Space& sp, const Domain& lambda,
                                     int dir, const Space& fsp, const std::vector<double>& F_i) {
    (void)dir;
    const Structure st = derive_structure(lambda);
    const int rF = support_diameter(fsp);
    const std::size_t n = sp.nconf();
    std::vector<double> h(n, 0.0);
    int side = 0;
    if (lambda.kind == DomainKind::cube) {
        side = lambda.param;
    } else if (lambda.kind == DomainKind::triadic_cube) {
        side = 1;
        for (int i = 0; i < lambda.param; ++i) side *= 3;
    } else {
        throw std::invalid_argument("correction field needs a cube domain");
    }
    const int inner = side - rF - 1;
    if (inner < 1) return h;

    std::vector<double> G(n, 0.0);
    for (const Site& x : cube(inner, lambda.dim).sites) {
        const auto t = translate_field(fsp, F_i, x, sp);
        for (std::size_t m = 0; m < n; ++m) G[m] += t[m];
    }
    const auto ops = make_bond_ops(sp, st.interior_bonds.bonds, rm);
    std::vector<double> negLG(n, 0.0);
    neg_generator_apply(ops, G, negLG);
    for (std::size_t m = 0; m < n; ++m) h[m] = -negLG[m];
    return h;
}

CltSolve clt_covariance(const RateModel& rm, const Domain& lambda, int M,
                        const std::map<Site, int>& zeta, const std::vector<double>& f,
                        const std::vector<double>& g, const SolveOptions& opt) {
    if (M <= 0 || M >= lambda.size())
        throw std::invalid_argument("CLT covariance needs 0 < M < |Lambda|");
    const Structure st = derive_structure(lambda);
    const Space sp = canonical_space(rm, lambda, zeta, opt.site_cap);
    const std::size_t n = sp.nconf();
    if (f.size() != n || g.size() != n) throw std::invalid_argument("field size mismatch");
    const Config all = static_cast<Config>((std::uint64_t{1} << sp.bits()) - 1);
    const Measure mu = canonical_measure(sp, all, M);
    const auto ops = make_bond_ops(sp, st.interior_bonds.bonds, rm);
    const auto& K = kernels::active();

    auto centre = [&](std::vector<double> v) {
        const double mean = K.wsum(mu.w.data(), v.data(), n);
        for (std::size_t m = 0; m < n; ++m) v[m] = mu.w[m] > 0.0 ? v[m] - mean : 0.0;
        return v;
    };
    const std::vector<double> fc = centre(f);
    const std::vector<double> gc = centre(g);

    CltSolve out;
    out.cg = cg_solve(
        mu.w,
        [&](const std::vector<double>& in, std::vector<double>& o) {
            neg_generator_apply(ops, in, o);
        },
        [&](std::vector<double>& v) {
            const double mean = K.wsum(mu.w.data(), v.data(), n);
            for (std::size_t m = 0; m < n; ++m) v[m] = mu.w[m] > 0.0 ? v[m] - mean : 0.0;
        },
        gc, out.resolvent, opt.rel_tol, opt.iter_cap_factor);
    out.residual = out.cg.rel_residual;
    out.value = K.wdot(mu.w.data(), fc.data(), out.resolvent.data(), n);
    return out;
}

CltIdentity clt_gradient_identity(const RateModel& rm, const Domain& lambda, int M,
                                  const std::map<Site, int>& zeta, const Vec3& q,
                                  const SolveOptions& opt) {
    const Space sp = canonical_space(rm, lambda, zeta, opt.site_cap);
    const std::size_t n = sp.nconf();
    std::vector<double> qa(n, 0.0);
    for (int i = 0; i < lambda.dim; ++i) {
        const auto ai = gradient_field(sp, lambda, i);
        for (std::size_t m = 0; m < n; ++m) qa[m] += q[i] * ai[m];
    }
    CltSolve cov = clt_covariance(rm, lambda, M, zeta, qa, qa, opt);

    CanonicalSolve dual = solve_nu_hat_star(rm, lambda, M, zeta, q, opt);
    const double chi_hat =
        chi(static_cast<double>(M) / static_cast<double>(lambda.size()));

    CltIdentity out;
    out.delta_per_site = cov.value / static_cast<double>(lambda.size());
    out.reference = chi_hat * 2.0 * dual.value;
    out.gap = std::abs(out.delta_per_site - out.reference);
    out.residual = std::max(cov.residual, dual.residual);
    return out;
}

}  // namespace exclab
