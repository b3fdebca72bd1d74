#pragma once

#include <array>
#include <functional>
#include <vector>

namespace slicefem {

struct Vec2 {
  double x = 0.0, z = 0.0;
};

struct Mat2 {
  // row-major 2x2: [ [xx, xz], [zx, zz] ]
  double xx = 0.0, xz = 0.0, zx = 0.0, zz = 0.0;
};

struct CellGeometry {
  Mat2 jacobian;
  double det_jacobian = 0.0;
  Mat2 inverse_jacobian;
};

enum class FacetKind {
  InteriorVertical,
  InteriorHorizontal,
  BoundaryBottom,
  BoundaryTop,
};

// Local facet ids on the reference cell [-1,1]^2
enum LocalFacet { kFacetLeft = 0, kFacetRight = 1, kFacetBottom = 2, kFacetTop = 3 };

struct FacetRef {
  FacetKind kind;
  int plus_cell = -1;   // owner of the facet normal
  int minus_cell = -1;  // -1 for boundary facets
  int plus_local = -1;
  int minus_local = -1;
  Vec2 normal;  // unit, at the facet midpoint, pointing plus -> minus (outward on boundary)
  double area = 0.0;
};

// Bilinear coordinate data of one cell. x depends on xhat only (vertical cell
// edges stay vertical, also under terrain deformation), z is bilinear:
//   x(xhat)      = xm + 0.5*dx*xhat
//   z(xhat,zhat) = z0 + z1*xhat + z2*zhat + z3*xhat*zhat
struct CellCoords {
  double xm = 0.0, dx = 0.0;
  double z0 = 0.0, z1 = 0.0, z2 = 0.0, z3 = 0.0;

  Vec2 map(double xhat, double zhat) const {
    return {xm + 0.5 * dx * xhat, z0 + z1 * xhat + z2 * zhat + z3 * xhat * zhat};
  }
};

// Structured extruded quadrilateral mesh of a vertical slice, periodic in x.
// Cells are numbered column-major: cell = col*nlayers + layer. Interior
// facets are numbered all vertical ones first (vertex column major, layer
// minor), then all horizontal ones (column major, interface minor).
class ExtrudedMesh {
 public:
  static ExtrudedMesh build(int ncols, int nlayers, double Lx, double H, double x_offset);

  // Moves every vertex (x, z) to (x, z + z_s(x)*(H - z)/H). Requires
  // 0 <= z_s(x) < H at every vertex column.
  ExtrudedMesh deformed(const std::function<double(double)>& surface) const;

  int ncols() const { return ncols_; }
  int nlayers() const { return nlayers_; }
  double Lx() const { return Lx_; }
  double H() const { return H_; }
  double x_offset() const { return x_offset_; }
  bool periodic_x() const { return true; }

  int num_cells() const { return ncols_ * nlayers_; }
  int cell_index(int col, int layer) const { return col * nlayers_ + layer; }
  int cell_col(int cell) const { return cell / nlayers_; }
  int cell_layer(int cell) const { return cell % nlayers_; }

  double vertex_x(int col) const { return vertex_x_[col]; }
  double vertex_z(int col, int level) const { return vertex_z_[col * (nlayers_ + 1) + level]; }

  const CellCoords& coords(int cell) const { return cell_coords_[cell]; }
  CellGeometry cell_geometry(int cell, Vec2 ref_point) const;
  double cell_area(int cell) const;  // exact for the bilinear map
  double total_area() const;

  const std::vector<FacetRef>& interior_facets() const { return interior_facets_; }
  const std::vector<FacetRef>& boundary_facets() const { return boundary_facets_; }
  int num_interior_vertical() const { return ncols_ * nlayers_; }
  int num_interior_horizontal() const { return ncols_ * (nlayers_ - 1); }

  // {V_e}/A_f: mean adjacent cell area over facet length. Interior facets only.
  double facet_meshscale(const FacetRef& facet) const;

 private:
  int ncols_ = 0, nlayers_ = 0;
  double Lx_ = 0.0, H_ = 0.0, x_offset_ = 0.0;
  std::vector<double> vertex_x_;       // [ncols]
  std::vector<double> vertex_z_;       // [ncols * (nlayers+1)]
  std::vector<CellCoords> cell_coords_;
  std::vector<FacetRef> interior_facets_;
  std::vector<FacetRef> boundary_facets_;

  void rebuild_derived();
};

}  // namespace slicefem
