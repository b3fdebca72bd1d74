#include "slicefem/fe_space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicefem/linalg.hpp"

namespace slicefem {

namespace {

// 1D Lagrange helpers on [-1,1]
inline double lin(int i, double x) { return i == 0 ? 0.5 * (1.0 - x) : 0.5 * (1.0 + x); }
inline double dlin(int i) { return i == 0 ? -0.5 : 0.5; }
inline double quad1d(int j, double z) {
  switch (j) {
    case 0: return 0.5 * z * (z - 1.0);
    case 1: return 1.0 - z * z;
    default: return 0.5 * z * (z + 1.0);
  }
}
inline double dquad1d(int j, double z) {
  switch (j) {
    case 0: return z - 0.5;
    case 1: return -2.0 * z;
    default: return z + 0.5;
  }
}

// x-family monomials {1, x, x^2} (x) {1, z}; z-family mirrored
inline double mono_x(int k, double x, double z) {
  switch (k) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return x * x;
    case 3: return z;
    case 4: return x * z;
    default: return x * x * z;
  }
}
inline double mono_x_dx(int k, double x, double z) {
  switch (k) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 2.0 * x;
    case 3: return 0.0;
    case 4: return z;
    default: return 2.0 * x * z;
  }
}
inline double mono_x_dz(int k, double x, double) {
  switch (k) {
    case 0: return 0.0;
    case 1: return 0.0;
    case 2: return 0.0;
    case 3: return 1.0;
    case 4: return x;
    default: return x * x;
  }
}

// RT1 local dof -> (family, slot); family 0 holds the x component
struct FamilySlot {
  int family;
  int slot;
};
inline FamilySlot rt1_slot(int local) {
  static constexpr FamilySlot table[12] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 1},
                                           {1, 2}, {1, 3}, {0, 4}, {0, 5}, {1, 4}, {1, 5}};
  return table[local];
}

}  // namespace

QuadratureRule1D gauss_interval(int degree) {
  if (degree < 1) throw std::invalid_argument("gauss_interval: degree must be >= 1");
  const int n = (degree + 2) / 2;
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;  // ascending order
    rule.weights[i] = w;
    rule.points[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {  // centered node of odd rules is exactly zero
    rule.points[n / 2] = 0.0;
  }
  return rule;
}

QuadratureRule2D gauss_square(int degree) {
  const QuadratureRule1D line = gauss_interval(degree);
  QuadratureRule2D rule;
  const int n = static_cast<int>(line.points.size());
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({line.points[i], line.points[j]});
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  return rule;
}

ReferenceBasis::ReferenceBasis(SpaceTag tag) : tag_(tag) {
  switch (tag) {
    case SpaceTag::DensityDGQ1:
    case SpaceTag::YVelocityDGQ1: ndofs_ = 4; return;
    case SpaceTag::ThetaSpace: ndofs_ = 6; return;
    case SpaceTag::VelocityRT1: ndofs_ = 12; break;
  }

  // Invert the dof-functional matrix for one component family. Functionals:
  // 0,1 facet at coord=-1 with weights {1,t}; 2,3 at +1; 4,5 interior {1,t}.
  const QuadratureRule1D line = gauss_interval(7);
  Eigen::Matrix<double, 6, 6> V = Eigen::Matrix<double, 6, 6>::Zero();
  for (std::size_t q = 0; q < line.points.size(); ++q) {
    const double t = line.points[q], w = line.weights[q];
    for (int k = 0; k < 6; ++k) {
      V(0, k) += w * mono_x(k, -1.0, t);
      V(1, k) += w * mono_x(k, -1.0, t) * t;
      V(2, k) += w * mono_x(k, 1.0, t);
      V(3, k) += w * mono_x(k, 1.0, t) * t;
    }
    for (std::size_t q2 = 0; q2 < line.points.size(); ++q2) {
      const double s = line.points[q2], w2 = w * line.weights[q2];
      for (int k = 0; k < 6; ++k) {
        V(4, k) += w2 * mono_x(k, s, t);
        V(5, k) += w2 * mono_x(k, s, t) * t;
      }
    }
  }
  const Eigen::Matrix<double, 6, 6> C = V.inverse();
  // both families share the coefficient table thanks to the x<->z mirror
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 6; ++j) {
      cx_[k][j] = C(k, j);
      cz_[k][j] = C(k, j);
    }
}

void ReferenceBasis::eval_scalar(Vec2 p, double* val, double* gx, double* gz) const {
  if (tag_ == SpaceTag::ThetaSpace) {
    for (int side = 0; side < 2; ++side)
      for (int j = 0; j < 3; ++j) {
        const int a = side * 3 + j;
        val[a] = lin(side, p.x) * quad1d(j, p.z);
        gx[a] = dlin(side) * quad1d(j, p.z);
        gz[a] = lin(side, p.x) * dquad1d(j, p.z);
      }
    return;
  }
  assert(tag_ == SpaceTag::DensityDGQ1 || tag_ == SpaceTag::YVelocityDGQ1);
  for (int iz = 0; iz < 2; ++iz)
    for (int ix = 0; ix < 2; ++ix) {
      const int a = ix + 2 * iz;
      val[a] = lin(ix, p.x) * lin(iz, p.z);
      gx[a] = dlin(ix) * lin(iz, p.z);
      gz[a] = lin(ix, p.x) * dlin(iz);
    }
}

void ReferenceBasis::eval_vector(Vec2 p, double* vx, double* vz, double* dxdx, double* dxdz,
                                 double* dzdx, double* dzdz) const {
  assert(tag_ == SpaceTag::VelocityRT1);
  for (int a = 0; a < 12; ++a) {
    const FamilySlot fs = rt1_slot(a);
    double v = 0.0, ddx = 0.0, ddz = 0.0;
    if (fs.family == 0) {
      for (int k = 0; k < 6; ++k) {
        const double c = cx_[k][fs.slot];
        v += c * mono_x(k, p.x, p.z);
        ddx += c * mono_x_dx(k, p.x, p.z);
        ddz += c * mono_x_dz(k, p.x, p.z);
      }
      vx[a] = v;
      vz[a] = 0.0;
      dxdx[a] = ddx;
      dxdz[a] = ddz;
      dzdx[a] = 0.0;
      dzdz[a] = 0.0;
    } else {
      // mirrored monomials: swap the roles of x and z
      for (int k = 0; k < 6; ++k) {
        const double c = cz_[k][fs.slot];
        v += c * mono_x(k, p.z, p.x);
        ddz += c * mono_x_dx(k, p.z, p.x);
        ddx += c * mono_x_dz(k, p.z, p.x);
      }
      vx[a] = 0.0;
      vz[a] = v;
      dxdx[a] = 0.0;
      dxdz[a] = 0.0;
      dzdx[a] = ddx;
      dzdz[a] = ddz;
    }
  }
}

void ReferenceBasis::apply_functionals(const std::function<Vec2(Vec2)>& field, double* out) const {
  assert(tag_ == SpaceTag::VelocityRT1);
  const QuadratureRule1D line = gauss_interval(11);
  for (int a = 0; a < 12; ++a) out[a] = 0.0;
  for (std::size_t q = 0; q < line.points.size(); ++q) {
    const double t = line.points[q], w = line.weights[q];
    const Vec2 vl = field({-1.0, t}), vr = field({1.0, t});
    const Vec2 vb = field({t, -1.0}), vt = field({t, 1.0});
    out[0] += w * vl.x;
    out[1] += w * vl.x * t;
    out[2] += w * vr.x;
    out[3] += w * vr.x * t;
    out[4] += w * vb.z;
    out[5] += w * vb.z * t;
    out[6] += w * vt.z;
    out[7] += w * vt.z * t;
    for (std::size_t q2 = 0; q2 < line.points.size(); ++q2) {
      const double s = line.points[q2], w2 = w * line.weights[q2];
      const Vec2 v = field({s, t});
      out[8] += w2 * v.x;
      out[9] += w2 * v.x * t;
      out[10] += w2 * v.z;
      out[11] += w2 * v.z * s;
    }
  }
}

Vec2 piola_map(const CellGeometry& geom, Vec2 ref_value) {
  const double inv = 1.0 / geom.det_jacobian;
  return {(geom.jacobian.xx * ref_value.x + geom.jacobian.xz * ref_value.z) * inv,
          (geom.jacobian.zx * ref_value.x + geom.jacobian.zz * ref_value.z) * inv};
}

ScalarTabulation tabulate(const ReferenceBasis& basis, std::span<const Vec2> pts) {
  ScalarTabulation t;
  t.ndofs = basis.num_dofs();
  t.npts = static_cast<int>(pts.size());
  t.val.resize(t.ndofs * t.npts);
  t.gx.resize(t.ndofs * t.npts);
  t.gz.resize(t.ndofs * t.npts);
  for (int p = 0; p < t.npts; ++p)
    basis.eval_scalar(pts[p], &t.val[p * t.ndofs], &t.gx[p * t.ndofs], &t.gz[p * t.ndofs]);
  return t;
}

VectorTabulation tabulate_vector(const ReferenceBasis& basis, std::span<const Vec2> pts) {
  VectorTabulation t;
  t.ndofs = basis.num_dofs();
  t.npts = static_cast<int>(pts.size());
  const std::size_t sz = static_cast<std::size_t>(t.ndofs) * t.npts;
  t.vx.resize(sz);
  t.vz.resize(sz);
  t.dxx.resize(sz);
  t.dxz.resize(sz);
  t.dzx.resize(sz);
  t.dzz.resize(sz);
  for (int p = 0; p < t.npts; ++p)
    basis.eval_vector(pts[p], &t.vx[p * t.ndofs], &t.vz[p * t.ndofs], &t.dxx[p * t.ndofs],
                      &t.dxz[p * t.ndofs], &t.dzx[p * t.ndofs], &t.dzz[p * t.ndofs]);
  return t;
}

DofMap build_dofmap(SpaceTag tag, const ExtrudedMesh& mesh) {
  const int n = mesh.ncols(), L = mesh.nlayers();
  DofMap dm;
  dm.tag = tag;

  if (tag == SpaceTag::DensityDGQ1 || tag == SpaceTag::YVelocityDGQ1) {
    dm.dofs_per_cell = 4;
    dm.num_global = 4 * n * L;
    dm.cell_to_global.resize(dm.num_global);
    for (int e = 0; e < n * L; ++e)
      for (int a = 0; a < 4; ++a) dm.cell_to_global[e * 4 + a] = e * 4 + a;
  } else if (tag == SpaceTag::ThetaSpace) {
    // vertically continuous: each cell column owns 2 node lines of 2L+1 nodes
    dm.dofs_per_cell = 6;
    const int per_col = 2 * (2 * L + 1);
    dm.num_global = n * per_col;
    dm.cell_to_global.resize(n * L * 6);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < L; ++k) {
        const int e = mesh.cell_index(i, k);
        for (int side = 0; side < 2; ++side)
          for (int j = 0; j < 3; ++j)
            dm.cell_to_global[e * 6 + side * 3 + j] =
                i * per_col + side * (2 * L + 1) + (2 * k + j);
      }
  } else {
    // RT1: 2 dofs per facet plus 4 interior per cell; the periodic seam is
    // identified like any other interior vertical facet
    dm.dofs_per_cell = 12;
    const int nv = 2 * n * L, nh = 2 * n * (L + 1);
    dm.num_global = nv + nh + 4 * n * L;
    dm.cell_to_global.resize(n * L * 12);
    auto vdof = [&](int j, int k, int m) { return (j * L + k) * 2 + m; };
    auto hdof = [&](int i, int l, int m) { return nv + (i * (L + 1) + l) * 2 + m; };
    auto idof = [&](int e, int m) { return nv + nh + e * 4 + m; };
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < L; ++k) {
        const int e = mesh.cell_index(i, k);
        int* g = &dm.cell_to_global[e * 12];
        g[0] = vdof(i, k, 0);
        g[1] = vdof(i, k, 1);
        g[2] = vdof((i + 1) % n, k, 0);
        g[3] = vdof((i + 1) % n, k, 1);
        g[4] = hdof(i, k, 0);
        g[5] = hdof(i, k, 1);
        g[6] = hdof(i, k + 1, 0);
        g[7] = hdof(i, k + 1, 1);
        for (int m = 0; m < 4; ++m) g[8 + m] = idof(e, m);
      }
    dm.is_constrained.assign(dm.num_global, 0);
    for (int i = 0; i < n; ++i)
      for (int m = 0; m < 2; ++m) {
        dm.is_constrained[hdof(i, 0, m)] = 1;
        dm.is_constrained[hdof(i, L, m)] = 1;
      }
  }

  if (dm.is_constrained.empty()) dm.is_constrained.assign(dm.num_global, 0);
  dm.orientation.assign(dm.cell_to_global.size(), 1);
  for (int g = 0; g < dm.num_global; ++g)
    if (dm.is_constrained[g]) dm.constrained.push_back(g);
  return dm;
}

FESystem::FESystem(const ExtrudedMesh& mesh, bool with_y_velocity, int quad_degree)
    : mesh_(&mesh),
      with_uy_(with_y_velocity),
      quad_degree_(quad_degree),
      velocity_(build_dofmap(SpaceTag::VelocityRT1, mesh)),
      density_(build_dofmap(SpaceTag::DensityDGQ1, mesh)),
      theta_(build_dofmap(SpaceTag::ThetaSpace, mesh)),
      rt1_(std::make_shared<ReferenceBasis>(SpaceTag::VelocityRT1)),
      dg_(std::make_shared<ReferenceBasis>(SpaceTag::DensityDGQ1)),
      th_(std::make_shared<ReferenceBasis>(SpaceTag::ThetaSpace)) {
  if (with_uy_) yvelocity_ = build_dofmap(SpaceTag::YVelocityDGQ1, mesh);
}

const DofMap& FESystem::map(SpaceTag tag) const {
  switch (tag) {
    case SpaceTag::VelocityRT1: return velocity_;
    case SpaceTag::DensityDGQ1: return density_;
    case SpaceTag::ThetaSpace: return theta_;
    case SpaceTag::YVelocityDGQ1:
      if (!with_uy_) throw std::logic_error("y-velocity space not active");
      return yvelocity_;
  }
  throw std::logic_error("unknown space");
}

const ReferenceBasis& FESystem::basis(SpaceTag tag) const {
  switch (tag) {
    case SpaceTag::VelocityRT1: return *rt1_;
    case SpaceTag::ThetaSpace: return *th_;
    default: return *dg_;
  }
}

SystemLayout FESystem::layout() const {
  SystemLayout l;
  l.u_offset = 0;
  int at = velocity_.num_global;
  if (with_uy_) {
    l.uy_offset = at;
    at += yvelocity_.num_global;
  }
  l.rho_offset = at;
  at += density_.num_global;
  l.theta_offset = at;
  at += theta_.num_global;
  l.total = at;
  return l;
}

Field FESystem::zero_field(SpaceTag tag) const {
  return Field{tag, std::vector<double>(map(tag).num_global, 0.0)};
}

Field FESystem::project(SpaceTag tag, const std::function<double(Vec2)>& f,
                        int quad_degree) const {
  if (tag == SpaceTag::VelocityRT1)
    throw std::invalid_argument("project: use project_velocity for RT1");
  const int deg = quad_degree > 0 ? quad_degree : quad_degree_;
  const QuadratureRule2D quad = gauss_square(deg);
  const DofMap& dm = map(tag);
  const ReferenceBasis& rb = basis(tag);
  const ScalarTabulation tab = tabulate(rb, quad.points);
  const int nd = rb.num_dofs();
  const int nq = static_cast<int>(quad.points.size());
  Field out = zero_field(tag);

  auto cell_contrib = [&](int e, Eigen::MatrixXd& M, Eigen::VectorXd& b,
                          const std::vector<int>& gmap) {
    const CellCoords& cc = mesh_->coords(e);
    for (int q = 0; q < nq; ++q) {
      const Vec2 p = quad.points[q];
      const double det = 0.5 * cc.dx * (cc.z2 + cc.z3 * p.x);
      const double w = quad.weights[q] * det;
      const double fv = f(cc.map(p.x, p.z));
      const double* phi = &tab.val[q * nd];
      for (int a = 0; a < nd; ++a) {
        b[gmap[a]] += w * phi[a] * fv;
        for (int c = 0; c < nd; ++c) M(gmap[a], gmap[c]) += w * phi[a] * phi[c];
      }
    }
  };

  if (tag == SpaceTag::ThetaSpace) {
    const int L = mesh_->nlayers();
    const int m = 2 * (2 * L + 1);
    for (int col = 0; col < mesh_->ncols(); ++col) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
      const int base = col * m;
      for (int k = 0; k < L; ++k) {
        const int e = mesh_->cell_index(col, k);
        std::vector<int> gmap(nd);
        for (int a = 0; a < nd; ++a) gmap[a] = dm(e, a) - base;
        cell_contrib(e, M, b, gmap);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("project: singular theta mass block in column " +
                                 std::to_string(col));
      const Eigen::VectorXd c = ldlt.solve(b);
      for (int j = 0; j < m; ++j) out.coeffs[base + j] = c[j];
    }
    return out;
  }

  std::vector<int> gmap(nd);
  std::iota(gmap.begin(), gmap.end(), 0);
  for (int e = 0; e < mesh_->num_cells(); ++e) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nd);
    cell_contrib(e, M, b, gmap);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("project: singular mass block in cell " + std::to_string(e));
    const Eigen::VectorXd c = ldlt.solve(b);
    for (int a = 0; a < nd; ++a) out.coeffs[dm(e, a)] = c[a];
  }
  return out;
}

Field FESystem::project_velocity(const std::function<Vec2(Vec2)>& f, int quad_degree,
                                 bool apply_constraints) const {
  const int deg = quad_degree > 0 ? quad_degree : quad_degree_;
  const QuadratureRule2D quad = gauss_square(deg);
  const DofMap& dm = velocity_;
  const VectorTabulation tab = tabulate_vector(*rt1_, quad.points);
  const int nd = 12, nq = static_cast<int>(quad.points.size());
  const int N = dm.num_global;

  // sparsity: dofs couple within cells
  std::vector<std::vector<int>> pattern(N);
  for (int e = 0; e < mesh_->num_cells(); ++e)
    for (int a = 0; a < nd; ++a) {
      auto& row = pattern[dm(e, a)];
      for (int c = 0; c < nd; ++c) row.push_back(dm(e, c));
    }
  for (auto& row : pattern) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  CsrMatrix M = CsrMatrix::from_pattern(N, N, pattern);
  std::vector<double> rhs(N, 0.0);

  std::vector<double> px(nd), pz(nd);
  for (int e = 0; e < mesh_->num_cells(); ++e) {
    const CellCoords& cc = mesh_->coords(e);
    for (int q = 0; q < nq; ++q) {
      const Vec2 p = quad.points[q];
      const CellGeometry g = mesh_->cell_geometry(e, p);
      const double w = quad.weights[q] * g.det_jacobian;
      for (int a = 0; a < nd; ++a) {
        const Vec2 ref{tab.vx[q * nd + a], tab.vz[q * nd + a]};
        const Vec2 phys = piola_map(g, ref);
        px[a] = phys.x;
        pz[a] = phys.z;
      }
      const Vec2 fv = f(cc.map(p.x, p.z));
      for (int a = 0; a < nd; ++a) {
        const int ga = dm(e, a);
        rhs[ga] += w * (px[a] * fv.x + pz[a] * fv.z);
        for (int c = 0; c < nd; ++c)
          M.add(ga, dm(e, c), w * (px[a] * px[c] + pz[a] * pz[c]));
      }
    }
  }

  if (apply_constraints) {
    for (int g : dm.constrained) {
      rhs[g] = 0.0;
      for (int p = M.row_ptr[g]; p < M.row_ptr[g + 1]; ++p)
        M.values[p] = (M.col_idx[p] == g) ? 1.0 : 0.0;
    }
  }

  std::vector<double> diag(N, 1.0);
  for (int r = 0; r < N; ++r) {
    const int pos = M.find(r, r);
    if (pos >= 0 && M.values[pos] != 0.0) diag[r] = M.values[pos];
  }
  LinOp A = [&](std::span<const double> in, std::span<double> out) { M.matvec(in, out); };
  LinOp P = [&](std::span<const double> in, std::span<double> out) {
    for (int i = 0; i < N; ++i) out[i] = in[i] / diag[i];
  };
  Field out = zero_field(SpaceTag::VelocityRT1);
  GmresConfig cfg;
  cfg.rtol = 1e-13;
  cfg.restart = 100;
  cfg.max_iters = 4000;
  const GmresResult res = gmres(N, A, rhs, out.coeffs, P, cfg);
  if (!res.converged) throw std::runtime_error("project_velocity: mass solve did not converge");
  return out;
}

double FESystem::eval_scalar(const Field& f, int cell, Vec2 ref) const {
  const DofMap& dm = map(f.tag);
  const ReferenceBasis& rb = basis(f.tag);
  const int nd = rb.num_dofs();
  double val[6], gx[6], gz[6];
  rb.eval_scalar(ref, val, gx, gz);
  double s = 0.0;
  for (int a = 0; a < nd; ++a) s += f.coeffs[dm(cell, a)] * val[a];
  return s;
}

Vec2 FESystem::eval_scalar_gradient(const Field& f, int cell, Vec2 ref) const {
  const DofMap& dm = map(f.tag);
  const ReferenceBasis& rb = basis(f.tag);
  const int nd = rb.num_dofs();
  double val[6], gx[6], gz[6];
  rb.eval_scalar(ref, val, gx, gz);
  double rx = 0.0, rz = 0.0;
  for (int a = 0; a < nd; ++a) {
    rx += f.coeffs[dm(cell, a)] * gx[a];
    rz += f.coeffs[dm(cell, a)] * gz[a];
  }
  const CellGeometry g = mesh_->cell_geometry(cell, ref);
  // physical gradient = J^{-T} * reference gradient
  return {g.inverse_jacobian.xx * rx + g.inverse_jacobian.zx * rz,
          g.inverse_jacobian.xz * rx + g.inverse_jacobian.zz * rz};
}

Vec2 FESystem::eval_velocity(const Field& f, int cell, Vec2 ref) const {
  const DofMap& dm = velocity_;
  double vx[12], vz[12], d1[12], d2[12], d3[12], d4[12];
  rt1_->eval_vector(ref, vx, vz, d1, d2, d3, d4);
  Vec2 rv{0.0, 0.0};
  for (int a = 0; a < 12; ++a) {
    const double c = f.coeffs[dm(cell, a)];
    rv.x += c * vx[a];
    rv.z += c * vz[a];
  }
  return piola_map(mesh_->cell_geometry(cell, ref), rv);
}

PointLocation FESystem::locate(Vec2 xz) const {
  PointLocation loc;
  const int n = mesh_->ncols(), L = mesh_->nlayers();
  const double dxc = mesh_->Lx() / n;
  double xr = (xz.x - mesh_->x_offset()) / dxc;
  int col;
  if (xr < 0.0) {
    col = 0;
    loc.clamped = true;
  } else if (xr >= n) {
    col = n - 1;
    loc.clamped = xr > n + 1e-12;
  } else {
    col = static_cast<int>(xr);
  }

  auto zrange = [&](int k, double xhat, double& zb, double& zt) {
    const CellCoords& c = mesh_->coords(mesh_->cell_index(col, k));
    zb = c.z0 + c.z1 * xhat - c.z2 - c.z3 * xhat;
    zt = c.z0 + c.z1 * xhat + c.z2 + c.z3 * xhat;
  };
  const CellCoords& c0 = mesh_->coords(mesh_->cell_index(col, 0));
  double xhat = std::clamp(2.0 * (xz.x - c0.xm) / c0.dx, -1.0, 1.0);

  int lo = 0, hi = L - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    double zb, zt;
    zrange(mid, xhat, zb, zt);
    if (xz.z > zt)
      lo = mid + 1;
    else
      hi = mid;
  }
  double zb, zt;
  zrange(lo, xhat, zb, zt);
  double zhat = (2.0 * xz.z - (zt + zb)) / (zt - zb);
  if (zhat < -1.0 - 1e-12 || zhat > 1.0 + 1e-12) loc.clamped = true;
  loc.cell = mesh_->cell_index(col, lo);
  loc.ref = {xhat, std::clamp(zhat, -1.0, 1.0)};
  return loc;
}

double FESystem::l2_error(const Field& f, const std::function<double(Vec2)>& exact,
                          int quad_degree) const {
  const int deg = quad_degree > 0 ? quad_degree : quad_degree_;
  const QuadratureRule2D quad = gauss_square(deg);
  const ReferenceBasis& rb = basis(f.tag);
  const DofMap& dm = map(f.tag);
  const ScalarTabulation tab = tabulate(rb, quad.points);
  const int nd = rb.num_dofs();
  double err2 = 0.0;
  for (int e = 0; e < mesh_->num_cells(); ++e) {
    const CellCoords& cc = mesh_->coords(e);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Vec2 p = quad.points[q];
      const double det = 0.5 * cc.dx * (cc.z2 + cc.z3 * p.x);
      double s = 0.0;
      for (int a = 0; a < nd; ++a) s += f.coeffs[dm(e, a)] * tab.val[q * nd + a];
      const double d = s - exact(cc.map(p.x, p.z));
      err2 += quad.weights[q] * det * d * d;
    }
  }
  return std::sqrt(err2);
}

double FESystem::integral(const Field& f, int quad_degree) const {
  const int deg = quad_degree > 0 ? quad_degree : quad_degree_;
  const QuadratureRule2D quad = gauss_square(deg);
  const ReferenceBasis& rb = basis(f.tag);
  const DofMap& dm = map(f.tag);
  const ScalarTabulation tab = tabulate(rb, quad.points);
  const int nd = rb.num_dofs();
  double total = 0.0;
  for (int e = 0; e < mesh_->num_cells(); ++e) {
    const CellCoords& cc = mesh_->coords(e);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      const Vec2 p = quad.points[q];
      const double det = 0.5 * cc.dx * (cc.z2 + cc.z3 * p.x);
      double s = 0.0;
      for (int a = 0; a < nd; ++a) s += f.coeffs[dm(e, a)] * tab.val[q * nd + a];
      total += quad.weights[q] * det * s;
    }
  }
  return total;
}

}  // namespace slicefem
