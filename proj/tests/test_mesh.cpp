#include "slicefem/mesh.hpp"

#include <cmath>
#include <map>

#include "doctest.h"

using namespace slicefem;

namespace {
int count_kind(const std::vector<FacetRef>& fs, FacetKind k) {
  int c = 0;
  for (const auto& f : fs)
    if (f.kind == k) ++c;
  return c;
}
}  // namespace

TEST_CASE("smallest periodic mesh topology") {
  const auto m = ExtrudedMesh::build(2, 1, 2.0, 1.0, 0.0);
  CHECK(m.num_cells() == 2);
  CHECK(count_kind(m.interior_facets(), FacetKind::InteriorVertical) == 2);
  CHECK(count_kind(m.interior_facets(), FacetKind::InteriorHorizontal) == 0);
  CHECK(count_kind(m.boundary_facets(), FacetKind::BoundaryBottom) == 2);
  CHECK(count_kind(m.boundary_facets(), FacetKind::BoundaryTop) == 2);
}

TEST_CASE("gravity wave grid has 750 cells") {
  const auto m = ExtrudedMesh::build(150, 5, 3e5, 1e4, -1.5e5);
  CHECK(m.num_cells() == 750);
  CHECK(m.vertex_x(0) == doctest::Approx(-1.5e5));
}

TEST_CASE("3x2 facet counts by hand enumeration") {
  const auto m = ExtrudedMesh::build(3, 2, 3.0, 2.0, 0.0);
  CHECK(count_kind(m.interior_facets(), FacetKind::InteriorVertical) == 6);
  CHECK(count_kind(m.interior_facets(), FacetKind::InteriorHorizontal) == 3);
}

TEST_CASE("invalid mesh parameters rejected") {
  CHECK_THROWS(ExtrudedMesh::build(1, 1, 1.0, 1.0, 0.0));
  CHECK_THROWS(ExtrudedMesh::build(4, 0, 1.0, 1.0, 0.0));
  CHECK_THROWS(ExtrudedMesh::build(4, 2, -1.0, 1.0, 0.0));
}

TEST_CASE("terrain map moves vertices as z + z_s (H - z)/H") {
  const double H = 3e4;
  const auto flat = ExtrudedMesh::build(4, 2, 4e3, H, 0.0);
  const auto m = flat.deformed([](double) { return 250.0; });
  // top fixed, bottom lifted to the orography, midpoint interpolated
  CHECK(m.vertex_z(1, 2) == doctest::Approx(H));
  CHECK(m.vertex_z(1, 0) == doctest::Approx(250.0));
  CHECK(m.vertex_z(1, 1) == doctest::Approx(15125.0));

  CHECK_THROWS(flat.deformed([&](double) { return H; }));
  CHECK_THROWS(flat.deformed([&](double) { return -1.0; }));
}

TEST_CASE("affine cell geometry on an undeformed mesh") {
  const auto m = ExtrudedMesh::build(2, 2, 4.0, 2.0, 0.0);  // 2 m x 1 m cells
  const auto g = m.cell_geometry(0, {0.3, -0.7});
  CHECK(g.jacobian.xx == doctest::Approx(1.0));
  CHECK(g.jacobian.zz == doctest::Approx(0.5));
  CHECK(g.jacobian.zx == doctest::Approx(0.0));
  CHECK(g.det_jacobian == doctest::Approx(0.5));
}

TEST_CASE("jacobian matches finite differences of the coordinate map") {
  const auto m = ExtrudedMesh::build(6, 3, 6e3, 3e3, -3e3)
                     .deformed([](double x) { return 400.0 * std::exp(-x * x / 2.5e6); });
  const double eps = 1e-3;  // the map is affine per reference direction, so central differences are exact
  for (int cell : {0, 7, 10, 17}) {
    const CellCoords& c = m.coords(cell);
    for (const Vec2 p : {Vec2{0.2, -0.4}, Vec2{-0.9, 0.8}}) {
      const auto g = m.cell_geometry(cell, p);
      const Vec2 fx1 = c.map(p.x + eps, p.z), fx0 = c.map(p.x - eps, p.z);
      const Vec2 fz1 = c.map(p.x, p.z + eps), fz0 = c.map(p.x, p.z - eps);
      CHECK(g.jacobian.xx == doctest::Approx((fx1.x - fx0.x) / (2 * eps)).epsilon(1e-8));
      CHECK(g.jacobian.zx == doctest::Approx((fx1.z - fx0.z) / (2 * eps)).epsilon(1e-8));
      CHECK(g.jacobian.xz == doctest::Approx((fz1.x - fz0.x) / (2 * eps)).epsilon(1e-8));
      CHECK(g.jacobian.zz == doctest::Approx((fz1.z - fz0.z) / (2 * eps)).epsilon(1e-8));
      CHECK(g.det_jacobian > 0.0);
      // J * J^{-1} = I
      CHECK(g.jacobian.xx * g.inverse_jacobian.xx + g.jacobian.xz * g.inverse_jacobian.zx ==
            doctest::Approx(1.0).epsilon(1e-12));
      CHECK(g.jacobian.zx * g.inverse_jacobian.xz + g.jacobian.zz * g.inverse_jacobian.zz ==
            doctest::Approx(1.0).epsilon(1e-12));
      CHECK(g.jacobian.xx * g.inverse_jacobian.xz + g.jacobian.xz * g.inverse_jacobian.zz ==
            doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("facet meshscale on uniform grids equals the cell size") {
  const auto m = ExtrudedMesh::build(4, 3, 8000.0, 6000.0, 0.0);  // 2000x2000 cells
  for (const auto& f : m.interior_facets()) CHECK(m.facet_meshscale(f) == doctest::Approx(2000.0));
  const auto m2 = ExtrudedMesh::build(4, 4, 3200.0, 3200.0, 0.0);  // 800x800
  for (const auto& f : m2.interior_facets()) CHECK(m2.facet_meshscale(f) == doctest::Approx(800.0));
  CHECK_THROWS(m.facet_meshscale(m.boundary_facets().front()));
}

TEST_CASE("facet meshscale on trapezoidal neighbours: mean area over length") {
  // vertex orography 400, 200, 0, 0 on 1000 m columns under H = 2200 gives
  // adjacent areas 1.9e6 and 2.1e6 sharing a 2000 m facet
  const double zs[4] = {400.0, 200.0, 0.0, 0.0};
  const auto m = ExtrudedMesh::build(4, 1, 4000.0, 2200.0, 0.0).deformed([&](double x) {
    return zs[static_cast<int>(x / 1000.0 + 0.5)];
  });
  CHECK(m.cell_area(0) == doctest::Approx(1.9e6));
  CHECK(m.cell_area(1) == doctest::Approx(2.1e6));
  const FacetRef& f = m.interior_facets()[1];  // vertex column 1
  REQUIRE(f.kind == FacetKind::InteriorVertical);
  CHECK(f.plus_cell == 0);
  CHECK(f.minus_cell == 1);
  CHECK(f.area == doctest::Approx(2000.0));
  CHECK(m.facet_meshscale(f) == doctest::Approx(1000.0));
}

TEST_CASE("total area equals the column-trapezoid area of the deformed domain") {
  auto surf = [](double x) { return 250.0 * std::exp(-x * x / (2 * 1.2e7)); };
  const int n = 24, L = 6;
  const double Lx = 4.8e4, H = 3e4, x0 = -2.4e4;
  const auto m = ExtrudedMesh::build(n, L, Lx, H, x0).deformed(surf);
  // bilinear cells resolve the piecewise-linear interpolant of z_s exactly
  double exact = 0.0;
  const double dx = Lx / n;
  for (int i = 0; i < n; ++i) {
    const double xl = x0 + i * dx, xr = xl + dx;
    exact += dx * (H - 0.5 * (surf(xl) + surf(xr)));
  }
  CHECK(m.total_area() == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("every interior facet touches two cells, boundary one, seam matches uniform") {
  const auto m = ExtrudedMesh::build(5, 3, 10.0, 3.0, -5.0);
  std::map<int, int> touch;
  for (const auto& f : m.interior_facets()) {
    CHECK(f.plus_cell >= 0);
    CHECK(f.minus_cell >= 0);
    CHECK(f.plus_cell != f.minus_cell);
    touch[f.plus_cell]++;
    touch[f.minus_cell]++;
  }
  for (const auto& f : m.boundary_facets()) {
    CHECK(f.plus_cell >= 0);
    CHECK(f.minus_cell == -1);
  }
  // the seam facet (vertex column 0) joins the last column to column 0
  const FacetRef& seam = m.interior_facets()[0];
  CHECK(seam.plus_cell == m.cell_index(4, 0));
  CHECK(seam.minus_cell == m.cell_index(0, 0));
  CHECK(seam.normal.x == doctest::Approx(1.0));
  CHECK(seam.area == doctest::Approx(1.0));
  CHECK(m.facet_meshscale(seam) == doctest::Approx(2.0));
}
