#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

// Finite subsets of Z^d (d <= 3) with the derived objects used throughout:
// interior/boundary decompositions, the three bond families of a region, the
// one-step enlargement Lambda^+, sup-norm neighbourhoods, and triadic cubes
// with their block partitions.
//
// Conventions:
//   * cube(L): the open box (-L/2, L/2)^d intersected with Z^d.  Even and the
//     next-lower odd L give the same point set.
//   * boundary(Lambda): sites of Lambda with a nearest neighbour outside.
//     interior(Lambda) = Lambda minus its boundary.
//   * enlarged(Lambda) = Lambda union (Lambda + e_i) over directions i.
//   * interior bonds: nearest-neighbour pairs with both endpoints in Lambda.
//   * enlarged bonds: {x, x + e_i} for every x in Lambda (endpoints lie in
//     the enlarged region by construction).
//   * cut bonds: nearest-neighbour pairs with exactly one endpoint in Lambda.
//
// Site ordering is lexicographic in (x1, x2, x3); a Domain's site rank fixes
// the bit position used by the enumerated configuration spaces, so every
// module indexes occupancy identically.

namespace exclab {

inline constexpr int kMaxDim = 3;

struct Site {
    std::array<int, kMaxDim> c{};

    auto operator<=>(const Site&) const = default;
};

inline Site site(int x, int y = 0, int z = 0) { return Site{{x, y, z}}; }

inline Site unit(int dir) {
    Site e{};
    e.c[static_cast<std::size_t>(dir)] = 1;
    return e;
}

inline Site operator+(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.c[static_cast<std::size_t>(i)] += b.c[static_cast<std::size_t>(i)];
    return a;
}

inline Site operator-(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.c[static_cast<std::size_t>(i)] -= b.c[static_cast<std::size_t>(i)];
    return a;
}

inline Site operator*(int k, Site a) {
    for (auto& v : a.c) v *= k;
    return a;
}

// sup-norm |x|_inf
int sup_norm(const Site& x);

enum class DomainKind { cube, triadic_cube, general };

// An ordered finite set of sites.  `sites` is sorted lexicographically and
// deduplicated; `rank_of` is a binary search over it.
struct Domain {
    int dim = 1;
    DomainKind kind = DomainKind::general;
    int param = 0;  // L for cube, m for triadic_cube
    std::vector<Site> sites;

    int size() const { return static_cast<int>(sites.size()); }
    bool contains(const Site& x) const;
    // Rank in the sorted site list, or -1 when absent.
    int rank_of(const Site& x) const;
};

Domain make_domain(int dim, std::vector<Site> sites, DomainKind kind = DomainKind::general,
                   int param = 0);

// (-L/2, L/2)^d as described above; L >= 1.
Domain cube(int L, int dim);

// Triadic cube of side 3^m (m >= 0).
Domain triadic_cube(int m, int dim);

// Translate every site by z.
Domain translated(const Domain& dom, const Site& z);

// All sites within sup-distance r of the given set (r >= 0).
std::vector<Site> sup_neighborhood(const std::vector<Site>& sites, int r, int dim);

// A nearest-neighbour bond {a, a + e_dir}; a is the lexicographically smaller
// endpoint.
struct Bond {
    Site a;
    int dir = 0;

    Site b() const { return a + unit(dir); }
    auto operator<=>(const Bond&) const = default;
};

enum class BondFlavor { interior, enlarged, cut };

struct BondSet {
    BondFlavor flavor = BondFlavor::interior;
    std::vector<Bond> bonds;

    int size() const { return static_cast<int>(bonds.size()); }
};

// Interior/boundary split plus the three bond families of a region.
struct Structure {
    Domain lambda;
    std::vector<Site> interior;  // sites of lambda with all neighbours inside
    std::vector<Site> boundary;  // lambda minus interior
    Domain enlarged;             // lambda union its +e_i translates
    BondSet interior_bonds;      // both endpoints in lambda
    BondSet enlarged_bonds;      // {x, x+e_i}, x in lambda
    BondSet cut_bonds;           // exactly one endpoint in lambda
};

Structure derive_structure(const Domain& lambda);

// Block centers 3^n Z^d inside the triadic cube of side 3^m (0 <= n <= m).
// The translates z + triadic_cube(n) over these centers tile triadic_cube(m).
std::vector<Site> triadic_centers(int m, int n, int dim);

std::string to_string(const Site& x);
std::string to_string(const Bond& b);

}  // namespace exclab
