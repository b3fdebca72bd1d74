#pragma once

#include <functional>
#include <span>
#include <vector>

namespace slicefem {

struct CsrMatrix {
  int nrows = 0;
  int ncols = 0;
  std::vector<int> row_ptr;   // size nrows+1
  std::vector<int> col_idx;   // sorted within each row
  std::vector<double> values;

  // rows[i] must be sorted and duplicate free
  static CsrMatrix from_pattern(int nrows, int ncols, const std::vector<std::vector<int>>& rows);

  void set_zero();
  // position of (r,c) in values, or -1 if not in the pattern
  int find(int r, int c) const;
  void add(int r, int c, double v);
  void matvec(std::span<const double> x, std::span<double> y, int threads = 1) const;
  int nnz() const { return static_cast<int>(col_idx.size()); }
};

// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern (the pattern
// is symmetrized internally). Start vertices are chosen by lowest degree with
// lowest index as the tie break, per connected component, so the result is
// deterministic. Returns p with p[new] = old.
std::vector<int> rcm_ordering(int n, std::span<const int> row_ptr, std::span<const int> col_idx);

int bandwidth(int n, std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const int> perm_old_of_new);

// Banded LU with partial pivoting (LAPACK dgbtrf storage and algorithm).
class BandedLU {
 public:
  BandedLU() = default;
  // entry(i,j) is consulted only for |i-j| <= max(kl,ku)
  static BandedLU factor(int n, int kl, int ku, const std::function<double(int, int)>& entry);
  void solve(std::span<double> rhs) const;
  bool singular() const { return singular_; }
  int size() const { return n_; }

 private:
  int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  bool singular_ = false;
};

using LinOp = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresConfig {
  double rtol = 1e-6;
  int restart = 50;
  int max_iters = 400;
};

struct GmresResult {
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
};

// Right-preconditioned restarted GMRES for A x = b; x carries the initial
// guess in and the solution out. Pass an empty LinOp for M = identity. With
// right preconditioning the monitored residual is the true residual.
GmresResult gmres(int n, const LinOp& A, std::span<const double> b, std::span<double> x,
                  const LinOp& M, const GmresConfig& cfg);

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace slicefem
