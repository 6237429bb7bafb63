#include <cmath>
#include <map>
#include <vector>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "exclab/canonical.hpp"
#include "exclab/operators.hpp"

using namespace exclab;

TEST_CASE("exterior witness sites of the interior bond family") {
    CHECK(canonical_frozen_sites(ssep(), cube(5, 1)).empty());
    CHECK(canonical_frozen_sites(speed_change(0.5), cube(3, 1)) ==
          std::vector<Site>{site(-2), site(2)});
    CHECK(canonical_frozen_sites(speed_change(0.5), cube(5, 1)) ==
          std::vector<Site>{site(-3), site(3)});

    auto z = zeta_from_bits({site(-2), site(2)}, 0b10);
    CHECK(z.at(site(-2)) == 0);
    CHECK(z.at(site(2)) == 1);

    // A missing witness is an error.
    CHECK_THROWS(canonical_space(speed_change(0.5), cube(3, 1), {}));
    CHECK_NOTHROW(canonical_space(ssep(), cube(3, 1), {}));
}

TEST_CASE("simple exclusion: canonical diffusivities are exactly one") {
    const RateModel rm = ssep();
    for (int L : {3, 5, 9}) {
        for (int M = 1; M < L; ++M) {
            CanonicalSolve nu = solve_nu_hat(rm, cube(L, 1), M, {}, {1, 0, 0});
            CHECK(nu.value == doctest::Approx(0.5).epsilon(1e-10));
            CanonicalSolve ns = solve_nu_hat_star(rm, cube(L, 1), M, {}, {1, 0, 0});
            CHECK(ns.value == doctest::Approx(0.5).epsilon(1e-10));
        }
        CanonicalMatrices cm = canonical_matrices(rm, cube(L, 1), L / 2 + 1, {});
        CHECK(cm.D[0][0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(cm.D_star[0][0] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("speed change: canonical ordering Id <= D* <= D <= lambda Id") {
    const RateModel rm = speed_change(0.5);
    const Domain lam = cube(5, 1);
    const auto wit = canonical_frozen_sites(rm, lam);
    for (std::uint64_t bits : {0ull, 1ull, 2ull, 3ull}) {
        const auto zeta = zeta_from_bits(wit, bits);
        for (int M : {1, 2, 4}) {
            CanonicalMatrices cm = canonical_matrices(rm, lam, M, zeta);
            CHECK(cm.D_star[0][0] >= 1.0 - 1e-9);
            CHECK(cm.D_star[0][0] <= cm.D[0][0] + 1e-9);
            CHECK(cm.D[0][0] <= rm.lambda() + 1e-9);
            const double rho_hat = double(M) / lam.size();
            CHECK(cm.chi_hat == doctest::Approx(rho_hat * (1 - rho_hat)).epsilon(1e-13));
            CHECK(cm.c[0][0] == doctest::Approx(2 * cm.chi_hat * cm.D[0][0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("canonical solves: dense stationarity certificates") {
    const RateModel rm = speed_change(0.5);
    const Domain lam = cube(5, 1);
    const int M = 2;
    const auto zeta = zeta_from_bits(canonical_frozen_sites(rm, lam), 0b01);
    const Space sp = canonical_space(rm, lam, zeta);
    const Structure st = derive_structure(lam);
    const auto& bonds = st.interior_bonds.bonds;
    const Measure mu = canonical_measure(sp, subset_mask(sp, lam.sites), M);

    // Dual: (-L)u = b pointwise on the sector, b = -sum_b pi_b ell_q.
    CanonicalSolve dual = solve_nu_hat_star(rm, lam, M, zeta, {1, 0, 0});
    auto ell = linear_profile(sp, {1.0}, lam.sites);
    std::vector<double> b(sp.nconf(), 0.0);
    for (const Bond& bo : bonds)
        for (Config m = 0; m < sp.nconf(); ++m)
            b[m] -= ell[testref::swap_config(sp, bo, m)] - ell[m];
    auto Au = testref::neg_generator(sp, rm, bonds, dual.optimizer);
    double worst = 0.0;
    for (Config m = 0; m < sp.nconf(); ++m)
        if (mu.w[m] > 0.0) worst = std::max(worst, std::abs(Au[m] - b[m]));
    CHECK(worst < 1e-8);

    double W = 0.0;
    for (Config m = 0; m < sp.nconf(); ++m) W += mu.w[m] * dual.optimizer[m] * b[m];
    const double rho_hat = double(M) / lam.size();
    const double chi_hat = rho_hat * (1 - rho_hat);
    CHECK(dual.value == doctest::Approx(W / (2 * chi_hat * lam.size())).epsilon(1e-10));

    // Primal: conditional expectation of (-L)v on the interior sites
    // vanishes under the sector measure.
    CanonicalSolve primal = solve_nu_hat(rm, lam, M, zeta, {1, 0, 0});
    auto g = testref::neg_generator(sp, rm, bonds, primal.optimizer);
    const Config inner = subset_mask(sp, st.interior);
    const double fib =
        testref::max_fiber_mean(sp, mu, g, [&](Config m) { return m & inner; });
    CHECK(fib < 1e-9);

    const double energy =
        0.5 * testref::pair_sum(sp, rm, bonds, mu, primal.optimizer, primal.optimizer, true);
    CHECK(primal.value == doctest::Approx(energy / (2 * chi_hat * lam.size())).epsilon(1e-10));
}

TEST_CASE("local equivalence of ensembles: exact moments and both bounds") {
    // f = eta_0 eta_1 inside Lambda_3, embedded in (Lambda_L, M).
    Space fsp = make_space(cube(3, 1));
    std::vector<double> f(fsp.nconf());
    for (Config m = 0; m < fsp.nconf(); ++m) f[m] = fsp.occ(m, site(0)) * fsp.occ(m, site(1));

    const int L = 1001;
    const long long M = 500;
    EnsembleComparison ec = ensemble_equivalence(fsp, f, L, 3, M, 0.25);

    const double V = L;
    CHECK(ec.canonical == doctest::Approx(double(M) * (M - 1) / (V * (V - 1))).epsilon(1e-11));
    CHECK(ec.rho_hat == doctest::Approx(double(M) / V));
    CHECK(ec.grand == doctest::Approx(ec.rho_hat * ec.rho_hat).epsilon(1e-12));
    CHECK(ec.sector_nonneg);
    CHECK(ec.bound1_applies);
    CHECK(ec.bound2_applies);
    CHECK(ec.bound1_slack >= 0.0);
    CHECK(ec.bound2_slack >= 0.0);

    // A signed observable loses the first bound but keeps the second.
    std::vector<double> g(fsp.nconf());
    for (Config m = 0; m < fsp.nconf(); ++m)
        g[m] = fsp.occ(m, site(0)) - 2 * fsp.occ(m, site(0)) * fsp.occ(m, site(1));
    EnsembleComparison ec2 = ensemble_equivalence(fsp, g, L, 3, M, 0.25);
    CHECK(!ec2.sector_nonneg);  // the full sector averages to -1
    CHECK(!ec2.bound1_applies);
    CHECK(ec2.bound2_applies);
    CHECK(ec2.bound2_slack >= 0.0);
    CHECK(ec2.canonical ==
          doctest::Approx(double(M) / V - 2 * double(M) * (M - 1) / (V * (V - 1)))
              .epsilon(1e-11));
}
