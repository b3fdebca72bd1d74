#include "slicefem/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slicefem {

ExtrudedMesh ExtrudedMesh::build(int ncols, int nlayers, double Lx, double H, double x_offset) {
  if (ncols < 2) throw std::invalid_argument("mesh: ncols must be >= 2");
  if (nlayers < 1) throw std::invalid_argument("mesh: nlayers must be >= 1");
  if (!(Lx > 0.0) || !(H > 0.0)) throw std::invalid_argument("mesh: Lx and H must be positive");

  ExtrudedMesh m;
  m.ncols_ = ncols;
  m.nlayers_ = nlayers;
  m.Lx_ = Lx;
  m.H_ = H;
  m.x_offset_ = x_offset;
  m.vertex_x_.resize(ncols);
  m.vertex_z_.resize(ncols * (nlayers + 1));
  for (int i = 0; i < ncols; ++i) {
    m.vertex_x_[i] = x_offset + i * Lx / ncols;
    for (int k = 0; k <= nlayers; ++k) m.vertex_z_[i * (nlayers + 1) + k] = k * H / nlayers;
  }
  m.rebuild_derived();
  return m;
}

ExtrudedMesh ExtrudedMesh::deformed(const std::function<double(double)>& surface) const {
  ExtrudedMesh m = *this;
  for (int i = 0; i < ncols_; ++i) {
    const double zs = surface(m.vertex_x_[i]);
    if (!(zs >= 0.0) || zs >= H_)
      throw std::invalid_argument("terrain: need 0 <= z_s(x) < H at column " + std::to_string(i));
    for (int k = 0; k <= nlayers_; ++k) {
      double& z = m.vertex_z_[i * (nlayers_ + 1) + k];
      z = z + zs * (H_ - z) / H_;
    }
  }
  m.rebuild_derived();
  return m;
}

void ExtrudedMesh::rebuild_derived() {
  const int n = ncols_, L = nlayers_;
  cell_coords_.assign(n * L, {});
  for (int i = 0; i < n; ++i) {
    const int ir = (i + 1) % n;
    const double xl = vertex_x_[i];
    // the seam cell reaches the right edge of the periodic box
    const double xr = (ir == 0) ? x_offset_ + Lx_ : vertex_x_[ir];
    for (int k = 0; k < L; ++k) {
      const double z00 = vertex_z(i, k), z10 = vertex_z(ir, k);
      const double z01 = vertex_z(i, k + 1), z11 = vertex_z(ir, k + 1);
      CellCoords& c = cell_coords_[cell_index(i, k)];
      c.xm = 0.5 * (xl + xr);
      c.dx = xr - xl;
      c.z0 = 0.25 * (z00 + z10 + z01 + z11);
      c.z1 = 0.25 * (-z00 + z10 - z01 + z11);
      c.z2 = 0.25 * (-z00 - z10 + z01 + z11);
      c.z3 = 0.25 * (z00 - z10 - z01 + z11);
    }
  }

  interior_facets_.clear();
  boundary_facets_.clear();
  interior_facets_.reserve(n * L + n * (L - 1));
  boundary_facets_.reserve(2 * n);

  // vertical facets at vertex column j: left cell is column (j-1+n)%n, right is column j;
  // normal +x from left to right (the seam facet j=0 points from column n-1 into column 0)
  for (int j = 0; j < n; ++j) {
    const int cl = (j - 1 + n) % n;
    for (int k = 0; k < L; ++k) {
      FacetRef f;
      f.kind = FacetKind::InteriorVertical;
      f.plus_cell = cell_index(cl, k);
      f.minus_cell = cell_index(j, k);
      f.plus_local = kFacetRight;
      f.minus_local = kFacetLeft;
      f.normal = {1.0, 0.0};
      f.area = vertex_z(j, k + 1) - vertex_z(j, k);
      interior_facets_.push_back(f);
    }
  }
  // horizontal facets between layer l-1 and l; normal points upward (lower cell is plus)
  for (int i = 0; i < n; ++i) {
    for (int l = 1; l < L; ++l) {
      FacetRef f;
      f.kind = FacetKind::InteriorHorizontal;
      f.plus_cell = cell_index(i, l - 1);
      f.minus_cell = cell_index(i, l);
      f.plus_local = kFacetTop;
      f.minus_local = kFacetBottom;
      const CellCoords& c = cell_coords_[f.plus_cell];
      const double tx = c.dx, tz = 2.0 * (c.z1 + c.z3);  // top edge tangent
      const double len = std::hypot(tx, tz);
      f.normal = {-tz / len, tx / len};
      f.area = len;
      interior_facets_.push_back(f);
    }
  }
  for (int i = 0; i < n; ++i) {
    FacetRef f;
    f.kind = FacetKind::BoundaryBottom;
    f.plus_cell = cell_index(i, 0);
    f.plus_local = kFacetBottom;
    const CellCoords& c = cell_coords_[f.plus_cell];
    const double tx = c.dx, tz = 2.0 * (c.z1 - c.z3);  // bottom edge tangent
    const double len = std::hypot(tx, tz);
    f.normal = {tz / len, -tx / len};  // outward = downward
    f.area = len;
    boundary_facets_.push_back(f);
  }
  for (int i = 0; i < n; ++i) {
    FacetRef f;
    f.kind = FacetKind::BoundaryTop;
    f.plus_cell = cell_index(i, L - 1);
    f.plus_local = kFacetTop;
    const CellCoords& c = cell_coords_[f.plus_cell];
    const double tx = c.dx, tz = 2.0 * (c.z1 + c.z3);
    const double len = std::hypot(tx, tz);
    f.normal = {-tz / len, tx / len};  // outward = upward
    f.area = len;
    boundary_facets_.push_back(f);
  }
}

CellGeometry ExtrudedMesh::cell_geometry(int cell, Vec2 ref_point) const {
  const CellCoords& c = cell_coords_[cell];
  CellGeometry g;
  g.jacobian.xx = 0.5 * c.dx;
  g.jacobian.xz = 0.0;
  g.jacobian.zx = c.z1 + c.z3 * ref_point.z;
  g.jacobian.zz = c.z2 + c.z3 * ref_point.x;
  g.det_jacobian = g.jacobian.xx * g.jacobian.zz - g.jacobian.xz * g.jacobian.zx;
  if (!(g.det_jacobian > 0.0))
    throw std::runtime_error("mesh: degenerate cell " + std::to_string(cell) +
                             " (det J <= 0)");
  const double inv = 1.0 / g.det_jacobian;
  g.inverse_jacobian.xx = g.jacobian.zz * inv;
  g.inverse_jacobian.xz = -g.jacobian.xz * inv;
  g.inverse_jacobian.zx = -g.jacobian.zx * inv;
  g.inverse_jacobian.zz = g.jacobian.xx * inv;
  return g;
}

double ExtrudedMesh::cell_area(int cell) const {
  // integral of det J over [-1,1]^2; det J = 0.5*dx*(z2 + z3*xhat) integrates exactly
  const CellCoords& c = cell_coords_[cell];
  return 2.0 * c.dx * c.z2;
}

double ExtrudedMesh::total_area() const {
  double a = 0.0;
  for (int e = 0; e < num_cells(); ++e) a += cell_area(e);
  return a;
}

double ExtrudedMesh::facet_meshscale(const FacetRef& facet) const {
  if (facet.minus_cell < 0) throw std::invalid_argument("facet_meshscale: interior facets only");
  const double mean_area = 0.5 * (cell_area(facet.plus_cell) + cell_area(facet.minus_cell));
  return mean_area / facet.area;
}

}  // namespace slicefem
