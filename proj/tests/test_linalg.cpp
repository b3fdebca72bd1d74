#include "slicefem/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

using namespace slicefem;

namespace {
CsrMatrix dense_to_csr(const Eigen::MatrixXd& A) {
  std::vector<std::vector<int>> rows(A.rows());
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < A.cols(); ++c)
      if (A(r, c) != 0.0) rows[r].push_back(c);
  CsrMatrix m = CsrMatrix::from_pattern(static_cast<int>(A.rows()),
                                        static_cast<int>(A.cols()), rows);
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < A.cols(); ++c)
      if (A(r, c) != 0.0) m.add(r, c, A(r, c));
  return m;
}
}  // namespace

TEST_CASE("csr matvec against dense") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(20, 20);
  for (int k = 0; k < 120; ++k)
    A(rng() % 20, rng() % 20) = U(rng);
  const CsrMatrix m = dense_to_csr(A);
  Eigen::VectorXd x(20);
  for (int i = 0; i < 20; ++i) x[i] = U(rng);
  std::vector<double> y(20);
  m.matvec(std::span<const double>(x.data(), 20), y, 2);
  const Eigen::VectorXd yref = A * x;
  for (int i = 0; i < 20; ++i) CHECK(y[i] == doctest::Approx(yref[i]).epsilon(1e-14));
}

TEST_CASE("rcm: scrambled path graph gets bandwidth 1") {
  // path 0-1-2-3 presented as the scrambled labels 2-0-3-1
  // adjacency of labels: 2~0, 0~3, 3~1
  std::vector<std::vector<int>> rows = {{2, 3}, {3}, {0}, {0, 1}};
  for (auto& r : rows) std::sort(r.begin(), r.end());
  const CsrMatrix m = CsrMatrix::from_pattern(4, 4, rows);
  const auto perm = rcm_ordering(4, m.row_ptr, m.col_idx);
  CHECK(bandwidth(4, m.row_ptr, m.col_idx, perm) == 1);
}

TEST_CASE("rcm: tridiagonal pattern stays bandwidth 1") {
  const int n = 12;
  std::vector<std::vector<int>> rows(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) rows[i].push_back(i - 1);
    rows[i].push_back(i);
    if (i + 1 < n) rows[i].push_back(i + 1);
  }
  const CsrMatrix m = CsrMatrix::from_pattern(n, n, rows);
  const auto perm = rcm_ordering(n, m.row_ptr, m.col_idx);
  CHECK(bandwidth(n, m.row_ptr, m.col_idx, perm) == 1);
}

TEST_CASE("rcm: disconnected components stay contiguous") {
  // two path components: {0,1,2} and {3,4}
  std::vector<std::vector<int>> rows = {{1}, {0, 2}, {1}, {4}, {3}};
  const CsrMatrix m = CsrMatrix::from_pattern(5, 5, rows);
  const auto perm = rcm_ordering(5, m.row_ptr, m.col_idx);
  std::vector<int> pos(5);
  for (int k = 0; k < 5; ++k) pos[perm[k]] = k;
  auto contiguous = [&](std::vector<int> comp) {
    std::vector<int> p;
    for (int v : comp) p.push_back(pos[v]);
    std::sort(p.begin(), p.end());
    return p.back() - p.front() + 1 == static_cast<int>(p.size());
  };
  CHECK(contiguous({0, 1, 2}));
  CHECK(contiguous({3, 4}));
}

TEST_CASE("banded LU solves match Eigen dense LU") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto [n, kl, ku] : {std::tuple{12, 3, 2}, {30, 5, 5}, {7, 1, 4}}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
        A(i, j) = U(rng) + (i == j ? 3.0 : 0.0);
    const BandedLU lu = BandedLU::factor(n, kl, ku, [&](int i, int j) { return A(i, j); });
    REQUIRE(!lu.singular());
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = U(rng);
    std::vector<double> x(b.data(), b.data() + n);
    lu.solve(x);
    const Eigen::VectorXd xref = A.partialPivLu().solve(b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xref[i]).epsilon(1e-11));
  }
}

TEST_CASE("banded LU pivoting handles zero diagonals") {
  // [[0,1],[1,0]] needs the row swap
  const BandedLU lu = BandedLU::factor(2, 1, 1, [](int i, int j) { return i == j ? 0.0 : 1.0; });
  REQUIRE(!lu.singular());
  std::vector<double> x = {3.0, 5.0};
  lu.solve(x);
  CHECK(x[0] == doctest::Approx(5.0));
  CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("gmres: identity converges in one iteration") {
  const int n = 10;
  std::vector<double> b(n), x(n, 0.0);
  for (int i = 0; i < n; ++i) b[i] = i + 1.0;
  LinOp A = [](std::span<const double> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), out.begin());
  };
  const GmresResult r = gmres(n, A, b, x, nullptr, {});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("gmres matches a dense LU solution on a random well conditioned system") {
  const int n = 50;
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 5.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.5 * U(rng);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = U(rng);
  const CsrMatrix m = dense_to_csr(A);
  LinOp op = [&](std::span<const double> in, std::span<double> out) { m.matvec(in, out); };
  std::vector<double> x(n, 0.0);
  GmresConfig cfg;
  cfg.rtol = 1e-12;
  cfg.max_iters = 200;
  const GmresResult r = gmres(n, op, std::span<const double>(b.data(), n), x, nullptr, cfg);
  CHECK(r.converged);
  const Eigen::VectorXd xref = A.partialPivLu().solve(b);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xref[i]).epsilon(1e-8));
}

TEST_CASE("gmres with the exact inverse as right preconditioner needs <= 2 iterations") {
  const int n = 40;
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 3.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.3 * U(rng);
  const Eigen::MatrixXd Ainv = A.inverse();
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = U(rng);
  LinOp op = [&](std::span<const double> in, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> xi(in.data(), n);
    Eigen::Map<Eigen::VectorXd>(out.data(), n) = A * xi;
  };
  LinOp pre = [&](std::span<const double> in, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> xi(in.data(), n);
    Eigen::Map<Eigen::VectorXd>(out.data(), n) = Ainv * xi;
  };
  std::vector<double> x(n, 0.0);
  GmresConfig cfg;
  cfg.rtol = 1e-10;
  const GmresResult r = gmres(n, op, std::span<const double>(b.data(), n), x, pre, cfg);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
}

TEST_CASE("gmres residual is monotone within a restart cycle") {
  const int n = 60;
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 2.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.8 * U(rng);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = U(rng);
  LinOp op = [&](std::span<const double> in, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> xi(in.data(), n);
    Eigen::Map<Eigen::VectorXd>(out.data(), n) = A * xi;
  };
  // run with increasing iteration caps inside one cycle; the achieved
  // residual must be nonincreasing
  double prev = 1e300;
  for (int cap = 1; cap <= 25; cap += 3) {
    std::vector<double> x(n, 0.0);
    GmresConfig cfg;
    cfg.rtol = 1e-14;
    cfg.restart = 30;
    cfg.max_iters = cap;
    const GmresResult r = gmres(n, op, std::span<const double>(b.data(), n), x, nullptr, cfg);
    CHECK(r.residual_norm <= prev * (1.0 + 1e-12));
    prev = r.residual_norm;
  }
}
