#include "slicefem/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slicefem/parallel.hpp"

namespace slicefem {

CsrMatrix CsrMatrix::from_pattern(int nrows, int ncols,
                                  const std::vector<std::vector<int>>& rows) {
  CsrMatrix m;
  m.nrows = nrows;
  m.ncols = ncols;
  m.row_ptr.resize(nrows + 1, 0);
  for (int r = 0; r < nrows; ++r) m.row_ptr[r + 1] = m.row_ptr[r] + static_cast<int>(rows[r].size());
  m.col_idx.reserve(m.row_ptr[nrows]);
  for (int r = 0; r < nrows; ++r) m.col_idx.insert(m.col_idx.end(), rows[r].begin(), rows[r].end());
  m.values.assign(m.col_idx.size(), 0.0);
  return m;
}

void CsrMatrix::set_zero() { std::fill(values.begin(), values.end(), 0.0); }

int CsrMatrix::find(int r, int c) const {
  const int lo = row_ptr[r], hi = row_ptr[r + 1];
  auto it = std::lower_bound(col_idx.begin() + lo, col_idx.begin() + hi, c);
  if (it == col_idx.begin() + hi || *it != c) return -1;
  return static_cast<int>(it - col_idx.begin());
}

void CsrMatrix::add(int r, int c, double v) {
  const int pos = find(r, c);
  assert(pos >= 0 && "entry outside sparsity pattern");
  values[pos] += v;
}

void CsrMatrix::matvec(std::span<const double> x, std::span<double> y, int threads) const {
  parallel_for(nrows, threads, [&](int r) {
    double s = 0.0;
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += values[p] * x[col_idx[p]];
    y[r] = s;
  });
}

std::vector<int> rcm_ordering(int n, std::span<const int> row_ptr, std::span<const int> col_idx) {
  // symmetrized adjacency without self loops
  std::vector<std::vector<int>> adj(n);
  for (int r = 0; r < n; ++r)
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const int c = col_idx[p];
      if (c == r) continue;
      adj[r].push_back(c);
      adj[c].push_back(r);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<int> degree(n);
  for (int i = 0; i < n; ++i) degree[i] = static_cast<int>(adj[i].size());

  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  auto by_degree = [&](int a, int b) {
    return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
  };

  for (;;) {
    int start = -1;
    for (int i = 0; i < n; ++i)
      if (!visited[i] && (start < 0 || by_degree(i, start))) start = i;
    if (start < 0) break;

    std::size_t head = order.size();
    order.push_back(start);
    visited[start] = 1;
    while (head < order.size()) {
      const int u = order[head++];
      std::vector<int> next;
      for (int v : adj[u])
        if (!visited[v]) next.push_back(v);
      std::sort(next.begin(), next.end(), by_degree);
      for (int v : next) {
        visited[v] = 1;
        order.push_back(v);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

int bandwidth(int n, std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const int> perm_old_of_new) {
  std::vector<int> new_of_old(n);
  for (int k = 0; k < n; ++k) new_of_old[perm_old_of_new[k]] = k;
  int bw = 0;
  for (int r = 0; r < n; ++r)
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      bw = std::max(bw, std::abs(new_of_old[r] - new_of_old[col_idx[p]]));
  return bw;
}

BandedLU BandedLU::factor(int n, int kl, int ku, const std::function<double(int, int)>& entry) {
  BandedLU f;
  f.n_ = n;
  f.kl_ = kl;
  f.ku_ = ku;
  f.ldab_ = 2 * kl + ku + 1;
  f.ab_.assign(static_cast<std::size_t>(f.ldab_) * n, 0.0);
  f.ipiv_.resize(n);
  auto ab = [&](int i, int j) -> double& {
    return f.ab_[static_cast<std::size_t>(j) * f.ldab_ + (kl + ku + i - j)];
  };
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i) ab(i, j) = entry(i, j);

  const int kt = kl + ku;  // effective upper bandwidth with pivot fill
  for (int j = 0; j < n; ++j) {
    int jp = j;
    double amax = std::abs(ab(j, j));
    for (int i = j + 1; i <= std::min(n - 1, j + kl); ++i) {
      const double a = std::abs(ab(i, j));
      if (a > amax) {
        amax = a;
        jp = i;
      }
    }
    f.ipiv_[j] = jp;
    if (amax == 0.0) {
      f.singular_ = true;
      return f;
    }
    const int jend = std::min(n - 1, j + kt);
    if (jp != j)
      for (int c = j; c <= jend; ++c) std::swap(ab(j, c), ab(jp, c));
    const double pivinv = 1.0 / ab(j, j);
    for (int i = j + 1; i <= std::min(n - 1, j + kl); ++i) {
      const double l = ab(i, j) * pivinv;
      ab(i, j) = l;
      for (int c = j + 1; c <= jend; ++c) ab(i, c) -= l * ab(j, c);
    }
  }
  return f;
}

void BandedLU::solve(std::span<double> rhs) const {
  auto ab = [&](int i, int j) -> double {
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  };
  const int n = n_;
  for (int j = 0; j < n; ++j) {
    const int jp = ipiv_[j];
    if (jp != j) std::swap(rhs[j], rhs[jp]);
    for (int i = j + 1; i <= std::min(n - 1, j + kl_); ++i) rhs[i] -= ab(i, j) * rhs[j];
  }
  const int kt = kl_ + ku_;
  for (int j = n - 1; j >= 0; --j) {
    rhs[j] /= ab(j, j);
    for (int i = std::max(0, j - kt); i < j; ++i) rhs[i] -= ab(i, j) * rhs[j];
  }
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

GmresResult gmres(int n, const LinOp& A, std::span<const double> b, std::span<double> x,
                  const LinOp& M, const GmresConfig& cfg) {
  GmresResult out;
  out.rhs_norm = norm2(b);
  const double tol = cfg.rtol * out.rhs_norm;
  if (out.rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    out.converged = true;
    return out;
  }

  const int m = cfg.restart;
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(m + 1), y(m), z(n), w(n), r(n);
  auto h = [&](int i, int j) -> double& { return H[static_cast<std::size_t>(j) * (m + 1) + i]; };
  auto precond = [&](std::span<const double> in, std::span<double> outv) {
    if (M)
      M(in, outv);
    else
      std::copy(in.begin(), in.end(), outv.begin());
  };

  A(x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double beta = norm2(r);
  out.residual_norm = beta;

  while (!out.converged && out.iterations < cfg.max_iters) {
    if (beta <= tol) {
      out.converged = true;
      break;
    }
    for (int i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    for (; j < m && out.iterations < cfg.max_iters; ++j) {
      precond(V[j], z);
      A(z, w);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        h(i, j) = dot(w, V[i]);
        for (int k2 = 0; k2 < n; ++k2) w[k2] -= h(i, j) * V[i][k2];
      }
      h(j + 1, j) = norm2(w);
      const double hsub = h(j + 1, j);
      if (hsub > 0.0)
        for (int k2 = 0; k2 < n; ++k2) V[j + 1][k2] = w[k2] / hsub;

      for (int i = 0; i < j; ++i) {  // previously accumulated rotations
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs[j] = h(j, j) / denom;
      sn[j] = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++out.iterations;
      out.residual_norm = std::abs(g[j + 1]);
      if (out.residual_norm <= tol || hsub == 0.0) {  // converged or lucky breakdown
        ++j;
        break;
      }
    }

    for (int i = j - 1; i >= 0; --i) {  // H y = g back substitution
      double s = g[i];
      for (int k2 = i + 1; k2 < j; ++k2) s -= h(i, k2) * y[k2];
      y[i] = s / h(i, i);
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int k2 = 0; k2 < j; ++k2)
      for (int i = 0; i < n; ++i) w[i] += y[k2] * V[k2][i];
    precond(w, z);
    for (int i = 0; i < n; ++i) x[i] += z[i];

    A(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    beta = norm2(r);
    out.residual_norm = beta;
    if (beta <= tol) out.converged = true;
  }
  return out;
}

}  // namespace slicefem
