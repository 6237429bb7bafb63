#include "exclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace exclab {

int sup_norm(const Site& x) {
    int m = 0;
    for (int v : x.c) m = std::max(m, std::abs(v));
    return m;
}

bool Domain::contains(const Site& x) const { return rank_of(x) >= 0; }

int Domain::rank_of(const Site& x) const {
    auto it = std::lower_bound(sites.begin(), sites.end(), x);
    if (it == sites.end() || *it != x) return -1;
    return static_cast<int>(it - sites.begin());
}

Domain make_domain(int dim, std::vector<Site> sites, DomainKind kind, int param) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("domain dim out of range");
    for (const Site& s : sites)
        for (int i = dim; i < kMaxDim; ++i)
            if (s.c[static_cast<std::size_t>(i)] != 0)
                throw std::invalid_argument("site coordinate beyond domain dim");
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    Domain d;
    d.dim = dim;
    d.kind = kind;
    d.param = param;
    d.sites = std::move(sites);
    return d;
}

namespace {

// Integer range of the open interval (-L/2, L/2): |2x| <= L - 1.
void cube_range(int L, int& lo, int& hi) {
    hi = (L - 1) / 2;
    lo = -hi;
}

}  // namespace

Domain cube(int L, int dim) {
    if (L < 1) throw std::invalid_argument("cube side must be >= 1");
    int lo, hi;
    cube_range(L, lo, hi);
    std::vector<Site> sites;
    Site s{};
    // Lexicographic order comes out of the loop nest directly.
    if (dim == 1) {
        for (int x = lo; x <= hi; ++x) sites.push_back(site(x));
    } else if (dim == 2) {
        for (int x = lo; x <= hi; ++x)
            for (int y = lo; y <= hi; ++y) sites.push_back(site(x, y));
    } else {
        for (int x = lo; x <= hi; ++x)
            for (int y = lo; y <= hi; ++y)
                for (int z = lo; z <= hi; ++z) sites.push_back(site(x, y, z));
    }
    Domain d = make_domain(dim, std::move(sites), DomainKind::cube, L);
    return d;
}

Domain triadic_cube(int m, int dim) {
    if (m < 0) throw std::invalid_argument("triadic index must be >= 0");
    int side = 1;
    for (int i = 0; i < m; ++i) side *= 3;
    Domain d = cube(side, dim);
    d.kind = DomainKind::triadic_cube;
    d.param = m;
    return d;
}

Domain translated(const Domain& dom, const Site& z) {
    std::vector<Site> sites;
    sites.reserve(dom.sites.size());
    for (const Site& s : dom.sites) sites.push_back(s + z);
    return make_domain(dom.dim, std::move(sites), DomainKind::general, 0);
}

std::vector<Site> sup_neighborhood(const std::vector<Site>& sites, int r, int dim) {
    if (r < 0) throw std::invalid_argument("neighbourhood radius must be >= 0");
    std::set<Site> out;
    for (const Site& s : sites) {
        if (dim == 1) {
            for (int x = -r; x <= r; ++x) out.insert(s + site(x));
        } else if (dim == 2) {
            for (int x = -r; x <= r; ++x)
                for (int y = -r; y <= r; ++y) out.insert(s + site(x, y));
        } else {
            for (int x = -r; x <= r; ++x)
                for (int y = -r; y <= r; ++y)
                    for (int z = -r; z <= r; ++z) out.insert(s + site(x, y, z));
        }
    }
    return {out.begin(), out.end()};
}

Structure derive_structure(const Domain& lambda) {
    Structure st;
    st.lambda = lambda;
    const int dim = lambda.dim;

    std::set<Site> enlarged(lambda.sites.begin(), lambda.sites.end());
    for (const Site& x : lambda.sites)
        for (int i = 0; i < dim; ++i) enlarged.insert(x + unit(i));

    for (const Site& x : lambda.sites) {
        bool on_boundary = false;
        for (int i = 0; i < dim && !on_boundary; ++i)
            on_boundary = !lambda.contains(x + unit(i)) || !lambda.contains(x - unit(i));
        (on_boundary ? st.boundary : st.interior).push_back(x);
    }

    st.enlarged = make_domain(dim, {enlarged.begin(), enlarged.end()});

    st.interior_bonds.flavor = BondFlavor::interior;
    st.enlarged_bonds.flavor = BondFlavor::enlarged;
    st.cut_bonds.flavor = BondFlavor::cut;
    for (const Site& x : lambda.sites) {
        for (int i = 0; i < dim; ++i) {
            st.enlarged_bonds.bonds.push_back(Bond{x, i});
            if (lambda.contains(x + unit(i)))
                st.interior_bonds.bonds.push_back(Bond{x, i});
            else
                st.cut_bonds.bonds.push_back(Bond{x, i});
            // Bonds reaching x from below are cut when x - e_i lies outside.
            if (!lambda.contains(x - unit(i)))
                st.cut_bonds.bonds.push_back(Bond{x - unit(i), i});
        }
    }
    auto& cb = st.cut_bonds.bonds;
    std::sort(cb.begin(), cb.end());
    cb.erase(std::unique(cb.begin(), cb.end()), cb.end());
    std::sort(st.interior_bonds.bonds.begin(), st.interior_bonds.bonds.end());
    std::sort(st.enlarged_bonds.bonds.begin(), st.enlarged_bonds.bonds.end());
    return st;
}

std::vector<Site> triadic_centers(int m, int n, int dim) {
    if (n < 0 || n > m) throw std::invalid_argument("triadic centers need 0 <= n <= m");
    int step = 1;
    for (int i = 0; i < n; ++i) step *= 3;
    Domain big = triadic_cube(m, dim);
    std::vector<Site> centers;
    for (const Site& s : big.sites) {
        bool on_grid = true;
        for (int i = 0; i < dim; ++i)
            on_grid = on_grid && (s.c[static_cast<std::size_t>(i)] % step == 0);
        if (on_grid) centers.push_back(s);
    }
    return centers;
}

std::string to_string(const Site& x) {
    std::string s = "(";
    for (int i = 0; i < kMaxDim; ++i) {
        if (i) s += ",";
        s += std::to_string(x.c[static_cast<std::size_t>(i)]);
    }
    s += ")";
    return s;
}

std::string to_string(const Bond& b) {
    return to_string(b.a) + "-" + to_string(b.b());
}

}  // namespace exclab
