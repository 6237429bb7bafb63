#include "exclab/lifting.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "exclab/kernels.hpp"
#include "exclab/operators.hpp"

namespace exclab {

namespace {

void require_full_space(const Space& sp) {
    if (!sp.frozen.empty() || sp.exterior_mean >= 0.0)
        throw std::invalid_argument(
            "lifting identities need a fully enumerated space (no frozen sites, "
            "no exterior mean)");
}

double require_open_density(double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("density must lie in (0,1)");
    return rho;
}

// Depth-first odometer over occupation counts; weight accumulates the
// renormalized Poisson product, occ the coarse projection bit mask.
template <class Visit>
void enum_free(const PoissonTruncation& pt, std::vector<int>& counts, int i, double weight,
               Config occ, Visit&& visit) {
    if (i == static_cast<int>(counts.size())) {
        visit(counts, weight, occ);
        return;
    }
    const Config bit = Config{1} << i;
    for (int c = 0; c <= pt.K; ++c) {
        counts[static_cast<std::size_t>(i)] = c;
        enum_free(pt, counts, i + 1, weight * pt.w[static_cast<std::size_t>(c)],
                  c > 0 ? (occ | bit) : occ, visit);
    }
}

template <class Visit>
void run_free(const FreeSpace& fs, const PoissonTruncation& pt, Visit&& visit) {
    if (pt.K != fs.K)
        throw std::invalid_argument("truncation level and free space disagree");
    std::vector<int> counts(static_cast<std::size_t>(fs.carrier.size()), 0);
    enum_free(pt, counts, 0, 1.0, Config{0}, visit);
}

// sum_m w_m u_m eta_bit(m)
double weighted_bit_mean(const Measure& mu, const std::vector<double>& u, int bit) {
    double s = 0.0;
    for (Config m = 0; m < mu.w.size(); ++m)
        if ((m >> bit) & 1u) s += mu.w[m] * u[m];
    return s;
}

int carrier_rank(const Space& sp, const Site& x, const char* what) {
    const int b = sp.carrier.rank_of(x);
    if (b < 0) throw std::invalid_argument(std::string(what) + " must be a carrier site");
    return b;
}

}  // namespace

double couple_alpha(double rho) {
    require_open_density(rho);
    return -std::log1p(-rho);
}

PoissonTruncation truncate_poisson(double alpha, int K) {
    if (!(alpha > 0.0)) throw std::invalid_argument("intensity must be positive");
    if (K < 0) throw std::invalid_argument("truncation level must be nonnegative");
    PoissonTruncation pt;
    pt.alpha = alpha;
    pt.K = K;
    pt.w.resize(static_cast<std::size_t>(K) + 1);
    double p = std::exp(-alpha);
    double mass = 0.0;
    for (int j = 0; j <= K; ++j) {
        if (j > 0) p *= alpha / j;
        pt.w[static_cast<std::size_t>(j)] = p;
        mass += p;
    }
    // The discarded tail, summed forward until it no longer moves: this is
    // exactly the total-variation distance between the renormalized law and
    // the true Poisson law.
    double tail = 0.0;
    for (int j = K + 1; j <= K + 2000; ++j) {
        p *= alpha / j;
        tail += p;
        if (p <= tail * 1e-18) break;
    }
    pt.tail = tail;
    for (double& w : pt.w) w /= mass;
    return pt;
}

PoissonTruncation choose_truncation(double alpha, double budget) {
    if (!(budget > 0.0)) throw std::invalid_argument("tail budget must be positive");
    for (int K = 0; K <= 500; ++K) {
        PoissonTruncation pt = truncate_poisson(alpha, K);
        if (pt.tail < budget) return pt;
    }
    throw std::invalid_argument("no truncation level within the tail budget");
}

long long FreeSpace::nstates() const {
    long long n = 1;
    for (int i = 0; i < carrier.size(); ++i) n *= K + 1;
    return n;
}

FreeSpace make_free_space(Domain carrier, int K, int site_cap) {
    if (carrier.size() == 0) throw std::invalid_argument("free space needs a nonempty carrier");
    if (K < 0) throw std::invalid_argument("truncation level must be nonnegative");
    if (carrier.size() > site_cap)
        throw std::invalid_argument("free space exceeds the site cap");
    FreeSpace fs;
    fs.carrier = std::move(carrier);
    fs.K = K;
    return fs;
}

Config coarse_config(const FreeSpace& fs, const std::vector<int>& counts) {
    if (counts.size() != static_cast<std::size_t>(fs.carrier.size()))
        throw std::invalid_argument("counts must cover the carrier");
    Config occ = 0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] >= 1) occ |= Config{1} << i;
    return occ;
}

void for_each_free(const FreeSpace& fs, const PoissonTruncation& pt,
                   const std::function<void(const std::vector<int>&, double, Config)>& visit) {
    run_free(fs, pt, visit);
}

GapReport mecke_check(const FreeSpace& fs, const PoissonTruncation& pt, const Site& x,
                      const std::function<double(const std::vector<int>&)>& F) {
    const int ix = fs.carrier.rank_of(x);
    if (ix < 0) throw std::invalid_argument("site must belong to the free carrier");
    double lhs = 0.0;
    double rhs = 0.0;
    run_free(fs, pt, [&](std::vector<int>& counts, double w, Config) {
        const int c = counts[static_cast<std::size_t>(ix)];
        if (c > 0) lhs += w * c * F(counts);
        counts[static_cast<std::size_t>(ix)] = c + 1;
        rhs += w * F(counts);
        counts[static_cast<std::size_t>(ix)] = c;
    });
    GapReport r;
    r.lhs = lhs;
    r.rhs = pt.alpha * rhs;
    r.gap = std::abs(r.lhs - r.rhs);
    r.tail = pt.tail;
    return r;
}

GapReport lift_expectation_check(const Space& sp, const std::vector<double>& u, double rho,
                                 int K) {
    require_full_space(sp);
    const PoissonTruncation pt = truncate_poisson(couple_alpha(rho), K);
    const FreeSpace fs = make_free_space(sp.carrier, K);
    double lhs = 0.0;
    run_free(fs, pt,
             [&](const std::vector<int>&, double w, Config occ) { lhs += w * u[occ]; });
    GapReport r;
    r.lhs = lhs;
    r.rhs = expect(bernoulli_measure(sp, rho), u);
    r.gap = std::abs(r.lhs - r.rhs);
    r.tail = pt.tail;
    return r;
}

MeckeKawasaki mecke_kawasaki(const Space& sp, const std::vector<double>& u, const Site& x,
                             int dir, double rho) {
    const int bx = carrier_rank(sp, x, "site");
    const int bxe = carrier_rank(sp, x + unit(dir), "translated site");
    if (rho == 0.0) return {};
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("conditioning degenerates outside (0,1)");
    const Measure mu = bernoulli_measure(sp, rho);
    MeckeKawasaki r;
    r.lhs = expect(mu, gradient_component(sp, x, dir, u));
    const double cond_xe = weighted_bit_mean(mu, u, bxe) / rho;
    const double cond_x = weighted_bit_mean(mu, u, bx) / rho;
    r.rhs = 2.0 * rho * (cond_xe - cond_x);
    r.gap = std::abs(r.lhs - r.rhs);
    return r;
}

MeckeKawasaki mecke_kawasaki_canonical(const Space& sp, const std::vector<double>& u,
                                       const Site& x, int dir, Config mask, int N) {
    const int bx = carrier_rank(sp, x, "site");
    const int bxe = carrier_rank(sp, x + unit(dir), "translated site");
    if (!((mask >> bx) & 1u) || !((mask >> bxe) & 1u))
        throw std::invalid_argument("both exchange sites must carry sector bits");
    const int V = std::popcount(mask);
    if (N < 0 || N > V) throw std::invalid_argument("particle number outside the sector range");
    if (N == 0) return {};
    const Measure mu = canonical_measure(sp, mask, N);
    const double prob = static_cast<double>(N) / V;  // P[eta_y = 1] for masked y
    MeckeKawasaki r;
    r.lhs = expect(mu, gradient_component(sp, x, dir, u));
    const double cond_xe = weighted_bit_mean(mu, u, bxe) / prob;
    const double cond_x = weighted_bit_mean(mu, u, bx) / prob;
    r.rhs = 2.0 * prob * (cond_xe - cond_x);
    r.gap = std::abs(r.lhs - r.rhs);
    return r;
}

GapReport gradient_coupling(const Space& sp, const std::vector<double>& u,
                            const Domain& lambda, int dir, double rho, int K) {
    require_full_space(sp);
    const PoissonTruncation pt = truncate_poisson(couple_alpha(rho), K);
    const FreeSpace fs = make_free_space(sp.carrier, K);
    std::vector<std::pair<int, int>> pairs;  // (rank of x, rank of x + e_dir)
    pairs.reserve(static_cast<std::size_t>(lambda.size()));
    for (const Site& x : lambda.sites)
        pairs.emplace_back(carrier_rank(sp, x, "site"),
                           carrier_rank(sp, x + unit(dir), "translated site"));
    double lhs = 0.0;
    run_free(fs, pt, [&](const std::vector<int>& counts, double w, Config occ) {
        for (const auto& [bx, bxe] : pairs) {
            const int c = counts[static_cast<std::size_t>(bx)];
            if (c == 0) continue;
            const Config moved =
                (c == 1 ? occ & ~(Config{1} << bx) : occ) | (Config{1} << bxe);
            lhs += w * c * (u[moved] - u[occ]);
        }
    });
    const Measure mu = bernoulli_measure(sp, rho);
    double grad_sum = 0.0;
    for (const Site& x : lambda.sites)
        grad_sum += expect(mu, gradient_component(sp, x, dir, u));
    GapReport r;
    r.lhs = lhs;
    r.rhs = pt.alpha / (2.0 * rho) * grad_sum;
    r.gap = std::abs(r.lhs - r.rhs);
    r.tail = pt.tail;
    return r;
}

GapReport gradient_coupling_canonical(const Space& sp, const std::vector<double>& u,
                                      const Domain& lambda, int dir, int M) {
    if (M < 0) throw std::invalid_argument("particle number must be nonnegative");
    const Structure st = derive_structure(lambda);
    const Domain& plus = st.enlarged;
    if (!is_measurable(sp, u, plus.sites))
        throw std::invalid_argument(
            "function must be measurable with respect to the enlarged region");
    const int V = plus.size();
    std::vector<Config> bit(static_cast<std::size_t>(V));
    for (int j = 0; j < V; ++j)
        bit[static_cast<std::size_t>(j)] =
            Config{1} << carrier_rank(sp, plus.sites[static_cast<std::size_t>(j)],
                                      "enlarged-region site");
    std::vector<std::pair<Config, Config>> pairs;  // (bit of x, bit of x + e_dir)
    for (const Site& x : lambda.sites)
        pairs.emplace_back(Config{1} << carrier_rank(sp, x, "site"),
                           Config{1} << carrier_rank(sp, x + unit(dir), "translated site"));

    // M!, exact in double for the particle numbers enumerable here.
    double mfact = 1.0;
    for (int j = 2; j <= M; ++j) mfact *= j;
    const double vpow = std::pow(static_cast<double>(V), M);

    // Occupied-site-count weights: P_N[N] is the probability that the free
    // configuration occupies N - 1 sites besides a fixed reference site.
    std::vector<double> p_n(static_cast<std::size_t>(V) + 2, 0.0);
    double lhs = 0.0;
    std::vector<int> counts(static_cast<std::size_t>(V), 0);
    // Enumerates particle splits site by site; inv_fact carries 1/prod(c_j!).
    auto recurse = [&](auto&& self, int j, int remaining, double inv_fact) -> void {
        if (j == V - 1) {
            counts[static_cast<std::size_t>(j)] = remaining;
            double f = inv_fact;
            for (int t = 2; t <= remaining; ++t) f /= t;
            const double w = mfact * f / vpow;
            Config occ = 0;
            for (int t = 0; t < V; ++t)
                if (counts[static_cast<std::size_t>(t)] >= 1)
                    occ |= bit[static_cast<std::size_t>(t)];
            int occupied_wo_ref = 0;
            for (int t = 1; t < V; ++t)
                if (counts[static_cast<std::size_t>(t)] >= 1) ++occupied_wo_ref;
            p_n[static_cast<std::size_t>(occupied_wo_ref) + 1] += w;
            for (const auto& [bx, bxe] : pairs) lhs += w * (u[occ | bxe] - u[occ | bx]);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[static_cast<std::size_t>(j)] = c;
            double f = inv_fact;
            for (int t = 2; t <= c; ++t) f /= t;
            self(self, j + 1, remaining - c, f);
        }
    };
    recurse(recurse, 0, M, 1.0);

    Config plus_mask = 0;
    for (Config b : bit) plus_mask |= b;
    double rhs = 0.0;
    for (int N = 1; N <= std::min(M + 1, V); ++N) {
        const double p = p_n[static_cast<std::size_t>(N)];
        if (p == 0.0) continue;
        const Measure mu = canonical_measure(sp, plus_mask, N);
        double grad_sum = 0.0;
        for (const Site& x : lambda.sites)
            grad_sum += expect(mu, gradient_component(sp, x, dir, u));
        rhs += V * p / (2.0 * N) * grad_sum;
    }
    GapReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.gap = std::abs(lhs - rhs);
    r.tail = 0.0;  // both sides are exact finite sums
    return r;
}

PoincareProbe weighted_poincare_probe(const Space& sp, const std::vector<double>& u, int m,
                                      double rho) {
    require_full_space(sp);
    require_open_density(rho);
    if (m < 0) throw std::invalid_argument("scale must be nonnegative");
    const int dim = sp.carrier.dim;
    const Domain box = triadic_cube(m, dim);
    const Structure st = derive_structure(box);
    if (st.enlarged.sites != sp.carrier.sites)
        throw std::invalid_argument(
            "carrier must be the one-step enlargement of the triadic box");
    const Measure mu = bernoulli_measure(sp, rho);
    const std::size_t nconf = sp.nconf();

    // Recentre: subtract the expectation conditioned on the total particle
    // number of the enlarged box (the whole carrier here).
    std::vector<std::uint64_t> keys(nconf);
    for (Config c = 0; c < nconf; ++c) keys[c] = static_cast<std::uint64_t>(std::popcount(c));
    std::vector<double> centered = u;
    {
        std::vector<double> cond = u;
        Projector proj(sp, mu, keys, /*mean_zero=*/false);
        proj.apply(cond);
        for (std::size_t i = 0; i < nconf; ++i) centered[i] -= cond[i];
    }

    PoincareProbe pr;
    const double vol_m = std::pow(3.0, m * dim);
    pr.lhs = std::sqrt(
        kernels::active().wdot(mu.w.data(), centered.data(), centered.data(), nconf) / vol_m);

    const bool count_particles = rho <= 0.5;
    for (int n = 0; n <= m; ++n) {
        const std::vector<Site> centers = triadic_centers(m, n, dim);
        const double vol_n = std::pow(3.0, n * dim);
        double avg = 0.0;
        for (const Site& z : centers) {
            const Domain sub = translated(triadic_cube(n, dim), z);
            const Domain sub_plus = derive_structure(sub).enlarged;
            const Config mask = subset_mask(sp, sub_plus.sites);
            const int vplus = sub_plus.size();
            std::vector<std::uint64_t> zkeys(nconf);
            for (Config c = 0; c < nconf; ++c)
                zkeys[c] = (static_cast<std::uint64_t>(c & ~mask) << 5) |
                           static_cast<std::uint64_t>(std::popcount(c & mask));
            Projector pz(sp, mu, zkeys, /*mean_zero=*/false);
            std::vector<std::vector<double>> h(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                std::vector<double> g(nconf, 0.0);
                for (const Site& x : sub.sites) {
                    const std::vector<double> gx = gradient_component(sp, x, i, centered);
                    for (std::size_t c = 0; c < nconf; ++c) g[c] += gx[c];
                }
                for (double& v : g) v /= vol_n;
                pz.apply(g);
                h[static_cast<std::size_t>(i)] = std::move(g);
            }
            std::vector<double> integrand(nconf, 0.0);
            for (Config c = 0; c < nconf; ++c) {
                const int occupied = std::popcount(c & mask);
                const int nstar = count_particles ? occupied : vplus - occupied;
                if (nstar == 0) continue;
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    const double hi = h[static_cast<std::size_t>(i)][c];
                    s += hi * hi;
                }
                integrand[c] = vplus / (2.0 * nstar) * s;
            }
            avg += expect(mu, integrand);
        }
        avg /= static_cast<double>(centers.size());
        const double term = std::pow(3.0, n) * std::sqrt(std::max(0.0, avg));
        pr.scale_terms.push_back(term);
        pr.rhs += term;
    }
    pr.ratio = pr.lhs == 0.0 ? 0.0 : pr.lhs / pr.rhs;
    return pr;
}

}  // namespace exclab
