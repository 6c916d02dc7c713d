#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "flowlab/mesh.hpp"

using namespace flowlab;

namespace
{

const char *two_triangles = R"(tri-mesh v1
# unit square
vertices 4
0 0
1 0
1 1
0 1
cells 2
0 1 2
0 2 3
)";

double total_area(const Mesh &m)
{
    double a = 0.0;
    for (int c = 0; c < m.n_cells(); ++c)
        a += m.cell_area(c);
    return a;
}

} // namespace

TEST_CASE("two-triangle square has one interior facet")
{
    std::istringstream in(two_triangles);
    const Mesh m = read_mesh(in);
    const auto s = m.stats();
    CHECK(s.n_cells == 2);
    CHECK(s.n_facets == 5);
    CHECK(s.n_interior_facets == 1);
    CHECK(s.n_boundary_facets == 4);
    CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reversed cell orientation is rejected")
{
    std::string text = two_triangles;
    text.replace(text.find("0 2 3"), 5, "0 3 2");
    std::istringstream in(text);
    CHECK_THROWS_AS(read_mesh(in), TopologyError);
}

TEST_CASE("malformed files raise parse errors")
{
    std::istringstream bad_header("quad-mesh v1\n");
    CHECK_THROWS_AS(read_mesh(bad_header), ParseError);
    std::istringstream truncated("tri-mesh v1\nvertices 3\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(truncated), ParseError);
}

TEST_CASE("hanging node is a topology error")
{
    // Left cell uses the full edge (1,0)-(1,1); right side splits it at (1,0.5).
    std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {1, 0.5}, {2, 0.5}};
    std::vector<std::array<int, 3>> c{{0, 1, 2}, {1, 4, 3}, {3, 4, 2}};
    CHECK_THROWS_AS(Mesh(v, c), TopologyError);
}

TEST_CASE("structured 2x2 grid counts")
{
    const Mesh m = unit_square_mesh(2);
    const auto s = m.stats();
    CHECK(s.n_cells == 8);
    CHECK(s.n_facets == 16);
    CHECK(s.n_interior_facets == 8);
    CHECK(s.n_boundary_facets == 8);
}

TEST_CASE("facet normals follow the lower-index cell")
{
    const Mesh m = unit_square_mesh(3);
    for (int f = 0; f < m.n_facets(); ++f)
    {
        const auto &facet = m.facet(f);
        CHECK(std::abs(facet.normal.norm() - 1.0) < 1e-14);
        const auto &cell = m.cell(facet.cells[0]);
        const Point centroid = (m.vertex(cell[0]) + m.vertex(cell[1]) + m.vertex(cell[2])) / 3.0;
        const Point mid = 0.5 * (m.vertex(facet.vertices[0]) + m.vertex(facet.vertices[1]));
        CHECK(facet.normal.dot(mid - centroid) > 0.0);
        if (!facet.is_boundary())
            CHECK(facet.cells[0] < facet.cells[1]);
        for (int c : facet.cells)
            if (c >= 0)
                CHECK(facet.length <= m.cell_diameter(c) + 1e-15);
    }
}

TEST_CASE("periodic identification of the structured square")
{
    const Mesh m = make_periodic(unit_square_mesh(2), 1.0, 1.0);
    CHECK(m.periodic_pairs().size() == 4);
    CHECK(m.stats().n_interior_facets == 12);
    CHECK(m.stats().n_boundary_facets == 0);
    const Mesh again = make_periodic(m, 1.0, 1.0);
    CHECK(again.periodic_pairs() == m.periodic_pairs());
    // pairing is a bijection between disjoint master and slave sets
    std::vector<int> seen(m.n_facets(), 0);
    for (const auto &p : m.periodic_pairs())
    {
        ++seen[p.master];
        ++seen[p.slave];
        CHECK(p.master != p.slave);
    }
    for (int s : seen)
        CHECK(s <= 1);
}

TEST_CASE("unmatched boundary vertex is a periodicity error")
{
    std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0.3}};
    std::vector<std::array<int, 3>> c{{0, 1, 4}, {4, 1, 2}, {4, 2, 3}};
    CHECK_THROWS_AS(make_periodic(Mesh(v, c), 1.0, 1.0), PeriodicityError);
}

TEST_CASE("alfeld split")
{
    const Mesh tri({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    const Mesh s = alfeld_split(tri);
    CHECK(s.n_cells() == 3);
    CHECK(s.n_vertices() == 4);
    CHECK(s.stats().n_interior_facets == 3);
    CHECK((s.vertex(3) - Point(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
    CHECK(s.is_alfeld_split());

    const Mesh sq = alfeld_split(unit_square_mesh(1));
    CHECK(sq.n_cells() == 6);
    CHECK(sq.n_vertices() == 6);
    CHECK(sq.n_facets() == 11);
    CHECK(alfeld_split(sq).n_cells() == 18);

    const Mesh per = alfeld_split(make_periodic(unit_square_mesh(2), 1.0, 1.0));
    CHECK(per.periodic_pairs().size() == 4);
    CHECK(total_area(per) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform refinement")
{
    const Mesh m = unit_square_mesh(1);
    const Mesh r = uniform_refine(m);
    CHECK(r.n_cells() == 8);
    CHECK(r.stats().h_max == doctest::Approx(0.5 * m.stats().h_max).epsilon(1e-15));
    CHECK(std::abs(r.stats().min_angle - m.stats().min_angle) < 1e-14);
    CHECK(uniform_refine(uniform_refine(r)).n_cells() == 128);

    const Mesh p = uniform_refine(make_periodic(unit_square_mesh(2), 1.0, 1.0));
    CHECK(p.periodic_pairs().size() == 8);
    CHECK(p.stats().n_boundary_facets == 0);
}

TEST_CASE("mesh file round trip keeps markers and pairs")
{
    const Mesh m = make_periodic(unit_square_mesh(2), 1.0, 0.0);
    std::ostringstream out;
    write_mesh(out, m);
    std::istringstream in(out.str());
    const Mesh back = read_mesh(in);
    CHECK(back.n_cells() == m.n_cells());
    CHECK(back.periodic_pairs() == m.periodic_pairs());
    CHECK(back.stats().n_boundary_facets == m.stats().n_boundary_facets);
}

TEST_CASE("shipped meshes have the intended resolution")
{
    const Mesh coarse = mesh_from_id("coarse");
    CHECK(coarse.n_cells() >= 27);
    CHECK(coarse.n_cells() <= 41);
    CHECK(coarse.stats().h_max == doctest::Approx(0.25).epsilon(0.35));
    const Mesh fine = mesh_from_id("fine");
    CHECK(fine.n_cells() >= 722);
    CHECK(fine.n_cells() <= 1082);
    CHECK(total_area(fine) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh_from_id("coarse-periodic").stats().n_boundary_facets == 0);
    CHECK(mesh_from_id("fine-periodic").stats().n_boundary_facets == 0);
}
