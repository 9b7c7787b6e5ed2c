#include <doctest.h>

#include <msfem/error.hpp>
#include <msfem/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace msfem;

TEST_CASE("identity refinement in 1D")
{
    const PeriodicMesh mesh = build_mesh(1, 0.25, 0.25);
    CHECK(mesh.num_coarse_vertices() == 4);
    CHECK(mesh.coarse().num_elements() == 4);
    CHECK(mesh.num_fine_vertices() == 4);
    CHECK(mesh.refinement() == 1);
    for (Index e = 0; e < 4; ++e) {
        CHECK(mesh.parent(e) == e);
        CHECK(mesh.children(e).size() == 1);
    }
}

TEST_CASE("each coarse segment nests four fine segments")
{
    const PeriodicMesh mesh = build_mesh(1, 1.0 / 8, 1.0 / 32);
    CHECK(mesh.num_coarse_vertices() == 8);
    CHECK(mesh.fine().num_elements() == 32);
    for (Index k = 0; k < 8; ++k) {
        const auto kids = mesh.children(k);
        REQUIRE(kids.size() == 4);
        for (const Index e : kids) {
            CHECK(mesh.parent(e) == k);
            const auto xf = mesh.fine().element_coordinates(e);
            const auto xc = mesh.coarse().element_coordinates(k);
            CHECK(xf[0].x >= xc[0].x - 1e-14);
            CHECK(xf[1].x <= xc[1].x + 1e-14);
        }
    }
}

TEST_CASE("2x2 periodic square has four vertices and eight triangles")
{
    const PeriodicMesh mesh = build_mesh(2, 0.5, 0.5);
    CHECK(mesh.num_coarse_vertices() == 4);
    CHECK(mesh.coarse().num_elements() == 8);
}

TEST_CASE("inadmissible sizes are rejected")
{
    CHECK_THROWS_AS(build_mesh(1, 0.3, 0.1), InvalidDiscretization);
    CHECK_THROWS_AS(build_mesh(1, 0.25, 0.1), InvalidDiscretization);
    CHECK_THROWS_AS(build_mesh(1, 1.0 / 8, 1.0 / 4), InvalidDiscretization);
    CHECK_THROWS_AS(build_mesh(3, 0.5, 0.5), InvalidDiscretization);
    CHECK_THROWS_AS(build_mesh(1, 0.0, 0.1), InvalidDiscretization);
}

TEST_CASE("vertex count after periodic identification")
{
    for (int dim : {1, 2})
        for (int n : {2, 3, 8}) {
            const PeriodicMesh mesh(dim, n, 2 * n);
            CHECK(mesh.num_coarse_vertices() == static_cast<Index>(std::pow(n, dim)));
            CHECK(mesh.num_fine_vertices() == static_cast<Index>(std::pow(2 * n, dim)));
            CHECK(mesh.coarse().vertex_index(n, dim == 2 ? n : 0) == 0);
            CHECK(mesh.coarse().vertex_index(-1) == n - 1);
        }
}

TEST_CASE("2D triangles are counter-clockwise and tile the cell")
{
    const SimplexLattice lattice(2, 5);
    double area = 0.0;
    for (Index e = 0; e < lattice.num_elements(); ++e) {
        const auto p = lattice.element_coordinates(e);
        const double signed_area =
            0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
        CHECK(signed_area > 0.0);
        CHECK(signed_area == doctest::Approx(lattice.element_measure()).epsilon(1e-12));
        area += signed_area;
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nesting map partitions the fine elements")
{
    for (int dim : {1, 2}) {
        const PeriodicMesh mesh(dim, 4, 12);
        std::vector<int> hits(static_cast<std::size_t>(mesh.fine().num_elements()), 0);
        std::size_t total = 0;
        for (Index k = 0; k < mesh.coarse().num_elements(); ++k) {
            total += mesh.children(k).size();
            for (const Index e : mesh.children(k)) {
                ++hits[static_cast<std::size_t>(e)];
                CHECK(mesh.parent(e) == k);
            }
        }
        CHECK(total == static_cast<std::size_t>(mesh.fine().num_elements()));
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
}

TEST_CASE("hat function values")
{
    const PeriodicMesh mesh = build_mesh(1, 0.25, 0.25);
    CHECK(hat_function(mesh, 1, {0.25}) == doctest::Approx(1.0));
    CHECK(hat_function(mesh, 1, {0.375}) == doctest::Approx(0.5));
    CHECK(hat_function(mesh, 0, {0.875}) == doctest::Approx(0.5));
    CHECK(hat_function(mesh, 1, {0.5}) == doctest::Approx(0.0));
    CHECK(hat_function(mesh, 1, {0.75}) == doctest::Approx(0.0));
}

TEST_CASE("hat functions are nodal")
{
    for (int dim : {1, 2}) {
        const PeriodicMesh mesh(dim, 4, 8);
        for (Index i = 0; i < mesh.num_coarse_vertices(); ++i)
            for (Index j = 0; j < mesh.num_coarse_vertices(); ++j)
                CHECK(hat_function(mesh, j, mesh.coarse().vertex(i)) ==
                      doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    }
}

TEST_CASE("hat functions form a partition of unity")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int dim : {1, 2}) {
        const PeriodicMesh mesh(dim, 5, 10);
        for (int trial = 0; trial < 200; ++trial) {
            const Point x{u(rng), dim == 2 ? u(rng) : 0.0};
            double sum = 0.0;
            for (Index j = 0; j < mesh.num_coarse_vertices(); ++j) {
                const double value = hat_function(mesh, j, x);
                CHECK(value >= -1e-15);
                CHECK(value <= 1.0 + 1e-15);
                sum += value;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("1D nodal patches grow by one segment per side")
{
    const PeriodicMesh mesh = build_mesh(1, 1.0 / 8, 1.0 / 32);
    for (Index center : {0, 3, 7}) {
        CHECK(nodal_patch(mesh, center, 0).elements.size() == 2);
        CHECK(nodal_patch(mesh, center, 1).elements.size() == 4);
        CHECK(nodal_patch(mesh, center, 4).elements.size() == 8);
    }
    const NodalPatch p0 = nodal_patch(mesh, 0, 0);
    CHECK(p0.elements == std::vector<Index>{0, 7});
    CHECK(p0.coarse_vertices == std::vector<Index>{0, 1, 7});
    // interior fine dofs of [-1/8, 1/8]: 7 points, the two ends excluded
    CHECK(p0.fine_dofs.size() == 7);
    CHECK(saturation_level(mesh, 0) == 3);
}

TEST_CASE("level zero patch is the hat support")
{
    for (int dim : {1, 2}) {
        const PeriodicMesh mesh(dim, 6, 12);
        const Index center = mesh.num_coarse_vertices() / 2;
        const NodalPatch p = nodal_patch(mesh, center, 0);
        const auto star = mesh.coarse().elements_of_vertex(center);
        CHECK(p.elements == std::vector<Index>(star.begin(), star.end()));
        CHECK(p.elements.size() == (dim == 1 ? 2u : 6u));
    }
}

TEST_CASE("patches equal iterated one-ring growth and are monotone")
{
    for (int dim : {1, 2}) {
        const PeriodicMesh mesh(dim, 7, 7);
        for (Index center : {Index{0}, mesh.num_coarse_vertices() - 1}) {
            std::vector<Index> grown = nodal_patch(mesh, center, 0).elements;
            const int saturation = saturation_level(mesh, center);
            for (int level = 1; level <= saturation + 1; ++level) {
                const NodalPatch previous = nodal_patch(mesh, center, level - 1);
                grown = grow_patch(mesh.coarse(), grown);
                const NodalPatch patch = nodal_patch(mesh, center, level);
                CHECK(patch.elements == grown);
                CHECK(std::includes(patch.elements.begin(), patch.elements.end(), previous.elements.begin(),
                                    previous.elements.end()));
            }
            CHECK(nodal_patch(mesh, center, saturation).elements.size() ==
                  static_cast<std::size_t>(mesh.coarse().num_elements()));
            CHECK(nodal_patch(mesh, center, saturation - 1).elements.size() <
                  static_cast<std::size_t>(mesh.coarse().num_elements()));
        }
    }
}

TEST_CASE("patch fine dofs exclude the patch boundary")
{
    const PeriodicMesh mesh(2, 8, 16);
    const NodalPatch p = nodal_patch(mesh, 0, 1);
    const std::set<Index> dofs(p.fine_dofs.begin(), p.fine_dofs.end());
    // level 1 around (0,0) spans at most two cells in each direction
    const Index inside = mesh.fine().vertex_index(1, 1);
    const Index far = mesh.fine().vertex_index(8, 8);
    CHECK(dofs.count(mesh.fine_vertex_of(0)) == 1);
    CHECK(dofs.count(inside) == 1);
    CHECK(dofs.count(far) == 0);
    // periodic wrap-around: the patch reaches x < 0
    CHECK(dofs.count(mesh.fine().vertex_index(-1, -1)) == 1);
}

TEST_CASE("entry levels agree with patch membership")
{
    const PeriodicMesh mesh(2, 6, 6);
    const auto levels = patch_entry_levels(mesh, 8);
    for (int level = 0; level <= saturation_level(mesh, 8); ++level) {
        const NodalPatch p = nodal_patch(mesh, 8, level);
        for (Index k = 0; k < mesh.coarse().num_elements(); ++k) {
            const bool inside = std::binary_search(p.elements.begin(), p.elements.end(), k);
            CHECK(inside == (levels[static_cast<std::size_t>(k)] <= level));
        }
    }
}

TEST_CASE("locate returns consistent barycentric coordinates")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SimplexLattice lattice(2, 9);
    for (int trial = 0; trial < 100; ++trial) {
        const Point x{u(rng), u(rng)};
        std::array<double, 3> bary{};
        const Index e = lattice.locate(x, bary);
        const auto p = lattice.element_coordinates(e);
        double px = 0.0;
        double py = 0.0;
        for (int a = 0; a < 3; ++a) {
            CHECK(bary[static_cast<std::size_t>(a)] >= -1e-12);
            px += bary[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)].x;
            py += bary[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)].y;
        }
        CHECK(std::abs(px - x.x) <= 1e-12);
        CHECK(std::abs(py - x.y) <= 1e-12);
    }
}
