#include "exclab/operators.hpp"

#include <stdexcept>

#include "exclab/kernels.hpp"

namespace exclab {

std::vector<std::uint32_t> swap_table(const Space& sp, const Bond& b) {
    const int bi = sp.carrier.rank_of(b.a);
    const int bj = sp.carrier.rank_of(b.b());
    if (bi < 0 || bj < 0)
        throw std::invalid_argument("exchange bond endpoint outside carrier: " + to_string(b));
    const std::size_t n = sp.nconf();
    std::vector<std::uint32_t> s(n);
    for (Config m = 0; m < n; ++m) s[m] = sp.exchanged(m, bi, bj);
    return s;
}

std::vector<BondOp> make_bond_ops(const Space& sp, const std::vector<Bond>& bonds,
                                  const RateModel& rm) {
    std::vector<BondOp> ops;
    ops.reserve(bonds.size());
    const std::size_t n = sp.nconf();
    for (const Bond& b : bonds) {
        BondOp op;
        op.bond = b;
        op.swap = swap_table(sp, b);
        op.c.resize(n);
        for (Config m = 0; m < n; ++m)
            op.c[m] = rm.rate(b, [&](const Site& x) { return sp.occ(m, x); });
        ops.push_back(std::move(op));
    }
    return ops;
}

std::vector<double> pi_bond(const Space& sp, const Bond& b, const std::vector<double>& f) {
    const auto s = swap_table(sp, b);
    std::vector<double> out(f.size());
    for (std::size_t m = 0; m < f.size(); ++m) out[m] = f[s[m]] - f[m];
    return out;
}

std::vector<double> pi_site(const Space& sp, const Site& x, const std::vector<double>& f) {
    const int bi = sp.carrier.rank_of(x);
    if (bi < 0) throw std::invalid_argument("flip site outside carrier: " + to_string(x));
    std::vector<double> out(f.size());
    for (Config m = 0; m < f.size(); ++m) out[m] = f[sp.flipped(m, bi)] - f[m];
    return out;
}

std::vector<double> linear_profile(const Space& sp, const std::vector<double>& p,
                                   const std::vector<Site>& sites) {
    const int dim = sp.carrier.dim;
    if (static_cast<int>(p.size()) != dim)
        throw std::invalid_argument("profile slope has wrong dimension");
    const std::size_t n = sp.nconf();
    std::vector<double> out(n, 0.0);
    for (const Site& x : sites) {
        double px = 0.0;
        for (int i = 0; i < dim; ++i)
            px += p[static_cast<std::size_t>(i)] * x.c[static_cast<std::size_t>(i)];
        const int bi = sp.carrier.rank_of(x);
        if (bi >= 0) {
            for (Config m = 0; m < n; ++m)
                out[m] += px * static_cast<double>(Space::occ_bit(m, bi));
        } else {
            const double o = sp.occ(0, x);  // frozen or marginalised constant
            for (Config m = 0; m < n; ++m) out[m] += px * o;
        }
    }
    return out;
}

double dirichlet_form(const Measure& mu, const std::vector<BondOp>& ops,
                      const std::vector<double>& u, const std::vector<double>& v) {
    const auto& K = kernels::active();
    const std::size_t n = u.size();
    std::vector<double> wts(n);
    double acc = 0.0;
    for (const BondOp& op : ops) {
        for (std::size_t m = 0; m < n; ++m) wts[m] = 0.5 * mu.w[m] * op.c[m];
        acc += K.swap_diff_quad(wts.data(), u.data(), v.data(), op.swap.data(), n);
    }
    return acc;
}

void neg_generator_apply(const std::vector<BondOp>& ops, const std::vector<double>& x,
                         std::vector<double>& y) {
    const auto& K = kernels::active();
    const std::size_t n = x.size();
    y.assign(n, 0.0);
    for (const BondOp& op : ops)
        K.swap_apply(op.c.data(), x.data(), op.swap.data(), y.data(), n);
}

std::vector<double> translate_field(const Space& src, const std::vector<double>& f,
                                    const Site& z, const Space& dst) {
    const int nb = src.bits();
    // Map each src carrier bit to either a dst carrier bit or a constant.
    std::vector<int> bit_map(static_cast<std::size_t>(nb), -1);
    Config frozen_bits = 0;
    for (int i = 0; i < nb; ++i) {
        const Site y = src.carrier.sites[static_cast<std::size_t>(i)] + z;
        const int bj = dst.carrier.rank_of(y);
        if (bj >= 0) {
            bit_map[static_cast<std::size_t>(i)] = bj;
        } else {
            const double o = dst.occ(0, y);
            if (o != 0.0 && o != 1.0)
                throw std::invalid_argument("translate needs deterministic occupancy at " +
                                            to_string(y));
            if (o == 1.0) frozen_bits |= Config{1} << i;
        }
    }
    const std::size_t nd = dst.nconf();
    std::vector<double> out(nd);
    for (Config m = 0; m < nd; ++m) {
        Config srcm = frozen_bits;
        for (int i = 0; i < nb; ++i) {
            const int bj = bit_map[static_cast<std::size_t>(i)];
            if (bj >= 0 && ((m >> bj) & 1u)) srcm |= Config{1} << i;
        }
        out[m] = f[srcm];
    }
    return out;
}

std::vector<double> gradient_component(const Space& sp, const Site& x, int dir,
                                       const std::vector<double>& u) {
    const Bond b{x, dir};
    const auto s = swap_table(sp, b);
    const int bi = sp.carrier.rank_of(b.a);
    const int bj = sp.carrier.rank_of(b.b());
    const std::size_t n = u.size();
    std::vector<double> out(n);
    for (Config m = 0; m < n; ++m) {
        const double d = static_cast<double>(Space::occ_bit(m, bi)) -
                         static_cast<double>(Space::occ_bit(m, bj));
        out[m] = (u[s[m]] - u[m]) * d;
    }
    return out;
}

}  // namespace exclab
