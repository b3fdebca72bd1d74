#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "slicefem/mesh.hpp"

namespace slicefem {

enum class SpaceTag { VelocityRT1, DensityDGQ1, ThetaSpace, YVelocityDGQ1 };

// --- quadrature ----------------------------------------------------------

struct QuadratureRule1D {
  std::vector<double> points;   // on [-1,1]
  std::vector<double> weights;  // sum to 2
};

struct QuadratureRule2D {
  std::vector<Vec2> points;     // on [-1,1]^2
  std::vector<double> weights;  // sum to 4
};

// Gauss-Legendre rules exact for polynomials of the given degree per direction.
QuadratureRule1D gauss_interval(int degree);
QuadratureRule2D gauss_square(int degree);

// --- reference bases ------------------------------------------------------

// Basis functions on the reference cell [-1,1]^2.
//
//   VelocityRT1   12 dofs: x-component quadratic in x / linear in z, z-component
//                 mirrored. Facet dofs are moments of the +x (vertical facets)
//                 or +z (horizontal facets) component against {1, t} along the
//                 facet; interior dofs are cell moments. Locals: 0,1 left;
//                 2,3 right; 4,5 bottom; 6,7 top; 8,9 interior-x; 10,11 interior-z.
//   DensityDGQ1   4 dofs, bilinear, nodal at corners (x-fastest ordering).
//   ThetaSpace    6 dofs, linear in x, quadratic in z, nodal at
//                 {-1,1} x {-1,0,1}, side-major ordering.
//   YVelocityDGQ1 same reference element as DensityDGQ1.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(SpaceTag tag);

  SpaceTag tag() const { return tag_; }
  int num_dofs() const { return ndofs_; }
  bool is_vector() const { return tag_ == SpaceTag::VelocityRT1; }

  // scalar spaces: values and reference gradients, arrays of length num_dofs()
  void eval_scalar(Vec2 p, double* val, double* gx, double* gz) const;
  // RT1: reference components and their reference gradients
  void eval_vector(Vec2 p, double* vx, double* vz, double* dxdx, double* dxdz,
                   double* dzdx, double* dzdz) const;

  // applies the dof functionals to a reference vector field (RT1 only);
  // out has length num_dofs(). Used by tests for unisolvency.
  void apply_functionals(const std::function<Vec2(Vec2)>& field, double* out) const;

 private:
  SpaceTag tag_;
  int ndofs_;
  // RT1 polynomial coefficients over the 6 family monomials, [mono][dof-in-family]
  double cx_[6][6] = {};
  double cz_[6][6] = {};
};

// Contravariant Piola transform u = J*uhat/det(J); scalar spaces map by identity.
Vec2 piola_map(const CellGeometry& geom, Vec2 ref_value);

// --- tabulations (reference values at fixed point sets) -------------------

struct ScalarTabulation {
  int ndofs = 0, npts = 0;
  std::vector<double> val, gx, gz;  // [p*ndofs + j]
};

struct VectorTabulation {
  int ndofs = 0, npts = 0;
  std::vector<double> vx, vz, dxx, dxz, dzx, dzz;  // [p*ndofs + j], ref quantities
};

ScalarTabulation tabulate(const ReferenceBasis& basis, std::span<const Vec2> pts);
VectorTabulation tabulate_vector(const ReferenceBasis& basis, std::span<const Vec2> pts);

// --- degree of freedom maps ------------------------------------------------

struct DofMap {
  SpaceTag tag;
  int num_global = 0;
  int dofs_per_cell = 0;
  std::vector<int> cell_to_global;       // [cell*dofs_per_cell + local]
  std::vector<signed char> orientation;  // matching shape; +1 throughout on this mesh family
  std::vector<uint8_t> is_constrained;   // [num_global]
  std::vector<int> constrained;          // sorted

  int operator()(int cell, int local) const {
    return cell_to_global[cell * dofs_per_cell + local];
  }
};

DofMap build_dofmap(SpaceTag tag, const ExtrudedMesh& mesh);

// --- fields ----------------------------------------------------------------

struct Field {
  SpaceTag tag;
  std::vector<double> coeffs;
};

// Offsets of the field blocks inside the monolithic solution vector,
// ordered velocity | y-velocity (if present) | density | theta.
struct SystemLayout {
  int u_offset = 0;
  int uy_offset = -1;
  int rho_offset = 0;
  int theta_offset = 0;
  int total = 0;
  bool has_uy() const { return uy_offset >= 0; }
};

struct PointLocation {
  int cell = -1;
  Vec2 ref;
  bool clamped = false;
};

// Bundles the mesh with the dofmaps of all prognostic spaces.
class FESystem {
 public:
  FESystem(const ExtrudedMesh& mesh, bool with_y_velocity, int quad_degree = 6);

  const ExtrudedMesh& mesh() const { return *mesh_; }
  bool has_y_velocity() const { return with_uy_; }
  int quad_degree() const { return quad_degree_; }

  const DofMap& velocity_map() const { return velocity_; }
  const DofMap& density_map() const { return density_; }
  const DofMap& theta_map() const { return theta_; }
  const DofMap& y_velocity_map() const { return yvelocity_; }
  const DofMap& map(SpaceTag tag) const;

  const ReferenceBasis& basis(SpaceTag tag) const;

  SystemLayout layout() const;

  Field zero_field(SpaceTag tag) const;

  // L2 projection of an analytic expression. Scalar spaces only here;
  // velocity projection lives below (it needs the global solver stack).
  Field project(SpaceTag tag, const std::function<double(Vec2)>& f,
                int quad_degree = -1) const;
  // L2 projection into RT1 with the u.n=0 top/bottom constraint applied
  // strongly (constrained coefficients forced to zero).
  Field project_velocity(const std::function<Vec2(Vec2)>& f, int quad_degree = -1,
                         bool apply_constraints = true) const;

  double eval_scalar(const Field& f, int cell, Vec2 ref) const;
  Vec2 eval_scalar_gradient(const Field& f, int cell, Vec2 ref) const;  // physical
  Vec2 eval_velocity(const Field& f, int cell, Vec2 ref) const;

  PointLocation locate(Vec2 xz) const;

  double l2_error(const Field& f, const std::function<double(Vec2)>& exact,
                  int quad_degree = -1) const;
  double integral(const Field& f, int quad_degree = -1) const;

 private:
  const ExtrudedMesh* mesh_;
  bool with_uy_;
  int quad_degree_;
  DofMap velocity_, density_, theta_, yvelocity_;
  std::shared_ptr<ReferenceBasis> rt1_, dg_, th_;
};

}  // namespace slicefem
