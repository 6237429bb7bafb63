#include <algorithm>
#include <map>
#include <vector>

#include "doctest.h"
#include "exclab/geometry.hpp"

using namespace exclab;

TEST_CASE("cube is the open box (-L/2, L/2) intersected with Z^d") {
    CHECK(cube(1, 1).sites == std::vector<Site>{site(0)});
    CHECK(cube(3, 1).sites == std::vector<Site>{site(-1), site(0), site(1)});
    // Even L adds nothing: |2x| <= L - 1 has the same solutions as for L - 1.
    CHECK(cube(4, 1).sites == cube(3, 1).sites);
    CHECK(cube(5, 1).size() == 5);
    CHECK(cube(9, 1).size() == 9);
    CHECK(cube(3, 2).size() == 9);
    CHECK(cube(3, 3).size() == 27);
    CHECK(cube(5, 2).size() == 25);

    const Domain d = cube(5, 1);
    CHECK(d.contains(site(-2)));
    CHECK(d.contains(site(2)));
    CHECK(!d.contains(site(3)));
    CHECK(d.rank_of(site(-2)) == 0);
    CHECK(d.rank_of(site(2)) == 4);
    CHECK(d.rank_of(site(9)) == -1);
}

TEST_CASE("triadic cubes and their block partitions") {
    CHECK(triadic_cube(0, 1).sites == std::vector<Site>{site(0)});
    CHECK(triadic_cube(1, 1).size() == 3);
    CHECK(triadic_cube(2, 1).size() == 9);
    CHECK(triadic_cube(2, 2).size() == 81);

    CHECK(triadic_centers(2, 1, 1) == std::vector<Site>{site(-3), site(0), site(3)});
    CHECK(triadic_centers(3, 1, 1).size() == 9);
    CHECK(triadic_centers(2, 1, 2).size() == 9);
    CHECK(triadic_centers(2, 2, 1) == std::vector<Site>{site(0)});

    // The translates z + cube_n tile cube_m: every site covered exactly once.
    for (int dim : {1, 2}) {
        const Domain big = triadic_cube(2, dim);
        const Domain block = triadic_cube(1, dim);
        std::map<Site, int> hits;
        for (const Site& z : triadic_centers(2, 1, dim))
            for (const Site& x : block.sites) hits[x + z] += 1;
        CHECK(hits.size() == static_cast<std::size_t>(big.size()));
        for (const auto& [x, n] : hits) {
            CHECK(big.contains(x));
            CHECK(n == 1);
        }
    }
}

TEST_CASE("structure of a 1d segment") {
    const Structure st = derive_structure(cube(3, 1));
    CHECK(st.interior == std::vector<Site>{site(0)});
    CHECK(st.boundary == std::vector<Site>{site(-1), site(1)});
    CHECK(st.enlarged.sites == std::vector<Site>{site(-1), site(0), site(1), site(2)});
    CHECK(st.interior_bonds.size() == 2);
    CHECK(st.enlarged_bonds.size() == 3);
    CHECK(st.cut_bonds.size() == 2);

    // Enlarged bonds are {x, x + e_1} for every x in Lambda.
    std::vector<Bond> expect = {{site(-1), 0}, {site(0), 0}, {site(1), 0}};
    CHECK(st.enlarged_bonds.bonds == expect);

    // A single site is all boundary.
    const Structure pt = derive_structure(cube(1, 1));
    CHECK(pt.interior.empty());
    CHECK(pt.boundary == std::vector<Site>{site(0)});
    CHECK(pt.interior_bonds.size() == 0);
    CHECK(pt.enlarged_bonds.size() == 1);
}

TEST_CASE("structure of the 3x3 square") {
    const Structure st = derive_structure(cube(3, 2));
    CHECK(st.interior == std::vector<Site>{site(0, 0)});
    CHECK(st.boundary.size() == 8);
    CHECK(st.enlarged.size() == 15);  // 9 + right column + top row
    CHECK(st.interior_bonds.size() == 12);
    CHECK(st.enlarged_bonds.size() == 18);
    CHECK(st.cut_bonds.size() == 12);

    for (const Bond& b : st.interior_bonds.bonds) {
        CHECK(st.lambda.contains(b.a));
        CHECK(st.lambda.contains(b.b()));
    }
    for (const Bond& b : st.cut_bonds.bonds)
        CHECK(st.lambda.contains(b.a) != st.lambda.contains(b.b()));
    for (const Bond& b : st.enlarged_bonds.bonds) {
        CHECK(st.lambda.contains(b.a));
        CHECK(st.enlarged.contains(b.b()));
    }
}

TEST_CASE("sup-norm neighbourhoods and translates") {
    CHECK(sup_norm(site(-3, 2)) == 3);
    CHECK(sup_neighborhood({site(0)}, 1, 2).size() == 9);
    CHECK(sup_neighborhood({site(0)}, 2, 1).size() == 5);
    auto n = sup_neighborhood({site(0), site(1)}, 1, 1);
    CHECK(n == std::vector<Site>{site(-1), site(0), site(1), site(2)});

    const Domain t = translated(cube(3, 1), site(5));
    CHECK(t.sites == std::vector<Site>{site(4), site(5), site(6)});
}
