#include "exclab/corrector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace exclab {

namespace {

std::vector<double> slope_of(const Vec3& xi, int dim) {
    return std::vector<double>(xi.begin(), xi.begin() + dim);
}

int domain_side(const Domain& dom) {
    if (dom.kind == DomainKind::cube) return dom.param;
    if (dom.kind == DomainKind::triadic_cube) {
        int s = 1;
        for (int i = 0; i < dom.param; ++i) s *= 3;
        return s;
    }
    int side = 1;
    for (int i = 0; i < dom.dim; ++i) {
        int lo = dom.sites.front().c[static_cast<std::size_t>(i)];
        int hi = lo;
        for (const Site& x : dom.sites) {
            lo = std::min(lo, x.c[static_cast<std::size_t>(i)]);
            hi = std::max(hi, x.c[static_cast<std::size_t>(i)]);
        }
        side = std::max(side, hi - lo + 1);
    }
    return side;
}

// Table lookup with the support's carrier bit positions precomputed.
double eval_table(const LocalObservable& lo, Config m, const std::vector<int>& bit_cache) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < lo.support.size(); ++i)
        if (Space::occ_bit(m, bit_cache[i])) idx |= (std::size_t{1} << i);
    return lo.values[idx];
}

}  // namespace

LocalObservable tabulate(const Space& sp, const std::vector<double>& f,
                         const std::vector<Site>& sites) {
    if (!is_measurable(sp, f, sites))
        throw std::invalid_argument("tabulate: function is not measurable on the given sites");
    LocalObservable lo;
    lo.support = sites;
    lo.values.assign(std::size_t{1} << sites.size(), 0.0);
    std::vector<int> bits;
    bits.reserve(sites.size());
    for (const Site& x : sites) {
        const int b = sp.carrier.rank_of(x);
        if (b < 0) throw std::invalid_argument("tabulate: site outside the carrier");
        bits.push_back(b);
    }
    for (std::size_t k = 0; k < lo.values.size(); ++k) {
        Config m = 0;
        for (std::size_t i = 0; i < sites.size(); ++i)
            if (k & (std::size_t{1} << i)) m |= (Config{1} << bits[i]);
        lo.values[k] = f[m];
    }
    return lo;
}

Corrector corrector(const RateModel& rm, double rho, const Domain& lambda, const Vec3& xi,
                    const SolveOptions& opt) {
    NuResult nu = solve_nu(rm, rho, lambda, xi, opt);
    Corrector c;
    c.lambda = lambda;
    c.space = primal_space(rm, rho, lambda, opt);
    const Structure st = derive_structure(lambda);
    c.carrier = st.interior;

    const auto ell = linear_profile(c.space, slope_of(xi, lambda.dim), st.enlarged.sites);
    c.phi = std::move(nu.minimizer);
    for (std::size_t m = 0; m < c.phi.size(); ++m) c.phi[m] -= ell[m];

    // Subtracting the profile leaves per-fiber rounding jitter; re-project
    // onto the solver's constraint space (interior-measurable, mean zero) so
    // phi is exactly a function of the interior occupancies.
    const Measure mu = bernoulli_measure(c.space, rho);
    const Projector proj(c.space, mu, st.interior, /*mean_zero=*/true);
    proj.apply(c.phi);
    c.mean = expect(mu, c.phi);
    double l2 = 0.0;
    for (std::size_t m = 0; m < c.phi.size(); ++m) l2 += mu.w[m] * c.phi[m] * c.phi[m];
    const double vol = static_cast<double>(lambda.size());
    const double side = static_cast<double>(domain_side(lambda));
    c.l2_per_site = l2 / vol;
    c.sublinearity = l2 / (vol * side * side);
    c.residual = nu.residual;
    return c;
}

Mat3 conductivity_of(const RateModel& rm, double rho, const std::vector<LocalObservable>& F,
                     int dim, const SolveOptions& opt) {
    if (static_cast<int>(F.size()) != dim)
        throw std::invalid_argument("conductivity_of: F needs one component per direction");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("conductivity_of: density must lie in (0, 1)");

    Mat3 out = mat_zero();
    for (int k = 0; k < dim; ++k) {
        // The +/- direction pairs of the defining half-sum have equal
        // expectations under the translation-invariant product measure, so
        // only the positive directions are enumerated.
        const Bond b{site(0), k};

        // Translates whose support meets the bond endpoints, per component.
        std::vector<std::vector<Site>> shifts(static_cast<std::size_t>(dim));
        std::vector<Site> sites = {site(0), unit(k)};
        for (const Site& w : rm.witnesses(b)) sites.push_back(w);
        for (int i = 0; i < dim; ++i) {
            auto& sh = shifts[static_cast<std::size_t>(i)];
            for (const Site& s : F[static_cast<std::size_t>(i)].support) {
                sh.push_back(site(0) - s);
                sh.push_back(unit(k) - s);
            }
            std::sort(sh.begin(), sh.end());
            sh.erase(std::unique(sh.begin(), sh.end()), sh.end());
            for (const Site& y : sh)
                for (const Site& s : F[static_cast<std::size_t>(i)].support)
                    sites.push_back(y + s);
        }
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

        const Space sp = make_space(make_domain(dim, std::move(sites)), opt.site_cap);
        const Measure mu = bernoulli_measure(sp, rho);
        const int b0 = sp.carrier.rank_of(site(0));
        const int b1 = sp.carrier.rank_of(unit(k));

        // Carrier bit positions of every translated support, precomputed.
        std::vector<std::vector<std::vector<int>>> bits(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            for (const Site& y : shifts[static_cast<std::size_t>(i)]) {
                std::vector<int> row;
                for (const Site& s : F[static_cast<std::size_t>(i)].support)
                    row.push_back(sp.carrier.rank_of(y + s));
                bits[static_cast<std::size_t>(i)].push_back(std::move(row));
            }
        }

        for (Config m = 0; m < sp.nconf(); ++m) {
            const double cb = rm.rate(b, [&](const Site& x) { return sp.occ(m, x); });
            const Config ms = sp.exchanged(m, b0, b1);
            double G[3] = {0.0, 0.0, 0.0};
            G[k] = sp.occ(m, unit(k)) - sp.occ(m, site(0));
            for (int i = 0; i < dim; ++i) {
                const auto& sh = shifts[static_cast<std::size_t>(i)];
                for (std::size_t t = 0; t < sh.size(); ++t) {
                    const auto& row = bits[static_cast<std::size_t>(i)][t];
                    G[i] -= eval_table(F[static_cast<std::size_t>(i)], ms, row) -
                            eval_table(F[static_cast<std::size_t>(i)], m, row);
                }
            }
            const double w = mu.w[m] * cb;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        w * G[i] * G[j];
        }
    }
    return out;
}

RReport R_of_F(const RateModel& rm, double rho, const std::vector<LocalObservable>& F,
               const Domain& lambda_ref, const SolveOptions& opt) {
    RReport rep;
    rep.c_of_F = conductivity_of(rm, rho, F, lambda_ref.dim, opt);
    const DiffusionMatrices dm = diffusion_matrices(rm, rho, lambda_ref, opt);
    rep.c_ref = dm.c;
    rep.R = rep.c_of_F;
    for (int i = 0; i < lambda_ref.dim; ++i)
        for (int j = 0; j < lambda_ref.dim; ++j)
            rep.R[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                dm.c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    rep.ref_param = domain_side(lambda_ref);
    rep.finite_box_reference = true;
    rep.residual = dm.residual;
    return rep;
}

std::vector<LocalObservable> corrector_tuple(const RateModel& rm, double rho,
                                             const Domain& lambda, const SolveOptions& opt) {
    std::vector<LocalObservable> out;
    const double inv_vol = 1.0 / static_cast<double>(lambda.size());
    for (int i = 0; i < lambda.dim; ++i) {
        Vec3 xi{0.0, 0.0, 0.0};
        xi[static_cast<std::size_t>(i)] = 1.0;
        const Corrector c = corrector(rm, rho, lambda, xi, opt);
        LocalObservable lo = tabulate(c.space, c.phi, c.carrier);
        for (double& v : lo.values) v *= inv_vol;
        out.push_back(std::move(lo));
    }
    return out;
}

FreeCorrector density_free_corrector(const RateModel& rm, int m, int n, double epsilon,
                                     const Vec3& xi, int dim, const SolveOptions& opt) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("density_free_corrector: epsilon must lie in (0, 1)");
    if (n < 0 || n > m) throw std::invalid_argument("density_free_corrector: need 0 <= n <= m");

    FreeCorrector fc;
    fc.m = m;
    fc.n = n;
    fc.epsilon = epsilon;
    fc.box = triadic_cube(m, dim);
    const Structure st = derive_structure(fc.box);
    fc.averaging_sites = st.interior;
    const int vol_minus = static_cast<int>(fc.averaging_sites.size());

    // Integer window with empirical density in [eps, 1-eps]; when it is
    // empty the density itself is clamped instead.
    int m_lo = -1, m_hi = -1;
    for (int M = 1; M <= vol_minus; ++M) {
        const double r = static_cast<double>(M) / vol_minus;
        if (r >= epsilon && r <= 1.0 - epsilon) {
            if (m_lo < 0) m_lo = M;
            m_hi = M;
        }
    }
    fc.clamped_density.resize(static_cast<std::size_t>(vol_minus) + 1);
    for (int M = 0; M <= vol_minus; ++M) {
        double r;
        if (m_lo >= 0)
            r = static_cast<double>(std::clamp(M, m_lo, m_hi)) / vol_minus;
        else
            // (r v eps) ^ (1-eps), applied left to right; when eps >= 1/2 the
            // window is empty and every density collapses to 1 - eps.
            r = std::min(std::max(static_cast<double>(M) / vol_minus, epsilon), 1.0 - epsilon);
        fc.clamped_density[static_cast<std::size_t>(M)] = r;
    }

    // Sub-cube centers farther than 3^n from the boundary.
    int side_n = 1;
    for (int i = 0; i < n; ++i) side_n *= 3;
    for (const Site& z : triadic_centers(m, n, dim)) {
        int dist = std::numeric_limits<int>::max();
        for (const Site& w : st.boundary) dist = std::min(dist, sup_norm(z - w));
        if (dist > side_n) fc.centers.push_back(z);
    }

    const CellGeometry geo = make_cell_geometry(rm, fc.box, opt);
    fc.space = geo.space;
    const Config avg_mask = subset_mask(fc.space, fc.averaging_sites);

    // Sub-box corrector tables per (center, clamped particle number).
    std::vector<std::vector<LocalObservable>> tables;   // [center][M]
    std::vector<std::vector<std::vector<int>>> bit_rows;  // carrier bits per table
    for (const Site& z : fc.centers) {
        const Domain sub = translated(triadic_cube(n, dim), z);
        std::vector<LocalObservable> per_m(static_cast<std::size_t>(vol_minus) + 1);
        std::map<double, LocalObservable> cache;
        for (int M = 0; M <= vol_minus; ++M) {
            const double r = fc.clamped_density[static_cast<std::size_t>(M)];
            auto it = cache.find(r);
            if (it == cache.end()) {
                const Corrector c = corrector(rm, r, sub, xi, opt);
                it = cache.emplace(r, tabulate(c.space, c.phi, c.carrier)).first;
            }
            per_m[static_cast<std::size_t>(M)] = it->second;
        }
        std::vector<std::vector<int>> rows;
        for (const auto& lo : per_m) {
            std::vector<int> row;
            for (const Site& s : lo.support) {
                const int bit = fc.space.carrier.rank_of(s);
                if (bit < 0)
                    throw std::logic_error("density_free_corrector: carrier misses a sub-box site");
                row.push_back(bit);
            }
            rows.push_back(std::move(row));
        }
        tables.push_back(std::move(per_m));
        bit_rows.push_back(std::move(rows));
    }

    fc.phi_hat.assign(fc.space.nconf(), 0.0);
    for (Config mm = 0; mm < fc.space.nconf(); ++mm) {
        const int M = std::popcount(mm & avg_mask);
        double acc = 0.0;
        for (std::size_t zi = 0; zi < tables.size(); ++zi)
            acc += eval_table(tables[zi][static_cast<std::size_t>(M)], mm,
                              bit_rows[zi][static_cast<std::size_t>(M)]);
        fc.phi_hat[mm] = acc;
    }
    return fc;
}

double cell_functional(const RateModel& rm, const FreeCorrector& fc, const Vec3& xi,
                       const std::vector<double>& v, double rho) {
    const Structure st = derive_structure(fc.box);
    const auto ops = make_bond_ops(fc.space, st.enlarged_bonds.bonds, rm);
    auto w = linear_profile(fc.space, slope_of(xi, fc.box.dim), st.enlarged.sites);
    if (!v.empty()) {
        if (v.size() != w.size())
            throw std::invalid_argument("cell_functional: candidate on the wrong space");
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += v[i];
    }
    const Measure mu = bernoulli_measure(fc.space, rho);
    return dirichlet_form(mu, ops, w, w) / static_cast<double>(fc.box.size());
}

MuReport mu_upper_bound(const RateModel& rm, const FreeCorrector& fc, const Vec3& xi,
                        const Domain& lambda_ref, const std::vector<double>& rho_grid,
                        const SolveOptions& opt) {
    if (rho_grid.empty()) throw std::invalid_argument("mu_upper_bound: empty density grid");

    const Structure st = derive_structure(fc.box);
    const auto ops = make_bond_ops(fc.space, st.enlarged_bonds.bonds, rm);
    const auto ell = linear_profile(fc.space, slope_of(xi, fc.box.dim), st.enlarged.sites);
    std::vector<double> lifted = ell;
    for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] += fc.phi_hat[i];
    const double inv_vol = 1.0 / static_cast<double>(fc.box.size());

    MuReport rep;
    rep.value_at_free = -std::numeric_limits<double>::infinity();
    rep.value_at_affine = -std::numeric_limits<double>::infinity();
    double arg_free = rho_grid.front(), arg_affine = rho_grid.front();
    for (const double rho : rho_grid) {
        const NuResult ref = solve_nu(rm, rho, lambda_ref, xi, opt);
        const double half_c_ref = 2.0 * chi(rho) * ref.value;  // (1/2) xi . cbar_ref xi
        const Measure mu = bernoulli_measure(fc.space, rho);
        const double at_free = dirichlet_form(mu, ops, lifted, lifted) * inv_vol - half_c_ref;
        const double at_affine = dirichlet_form(mu, ops, ell, ell) * inv_vol - half_c_ref;
        if (at_free > rep.value_at_free) {
            rep.value_at_free = at_free;
            arg_free = rho;
        }
        if (at_affine > rep.value_at_affine) {
            rep.value_at_affine = at_affine;
            arg_affine = rho;
        }
    }
    if (rep.value_at_free <= rep.value_at_affine) {
        rep.value = rep.value_at_free;
        rep.argmax_rho = arg_free;
    } else {
        rep.value = rep.value_at_affine;
        rep.argmax_rho = arg_affine;
    }
    rep.ref_param = domain_side(lambda_ref);
    rep.finite_box_reference = true;
    rep.grid_step = rho_grid.size() > 1 ? rho_grid[1] - rho_grid[0] : 0.0;
    return rep;
}

std::vector<double> default_density_grid() {
    std::vector<double> g;
    for (int k = 1; k <= 63; ++k) g.push_back(static_cast<double>(k) / 64.0);
    return g;
}

}  // namespace exclab
