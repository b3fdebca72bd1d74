#pragma once

#include <array>
#include <cmath>

namespace slicefem {

// Forward-mode first derivative scalar carrying N seed directions.
// Used to assemble exact element Jacobians from the residual kernels.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constants are intended

  static Dual seeded(double value, int slot) {
    Dual r(value);
    r.d[slot] = 1.0;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator+=(double o) {
    v += o;
    return *this;
  }
  Dual& operator-=(double o) {
    v -= o;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (int i = 0; i < N; ++i) d[i] *= s;
    return *this;
  }
};

template <int N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { a += b; return a; }
template <int N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { a -= b; return a; }
template <int N>
inline Dual<N> operator+(Dual<N> a, double b) { a.v += b; return a; }
template <int N>
inline Dual<N> operator+(double a, Dual<N> b) { b.v += a; return b; }
template <int N>
inline Dual<N> operator-(Dual<N> a, double b) { a.v -= b; return a; }
template <int N>
inline Dual<N> operator-(double a, const Dual<N>& b) {
  Dual<N> r;
  r.v = a - b.v;
  for (int i = 0; i < N; ++i) r.d[i] = -b.d[i];
  return r;
}
template <int N>
inline Dual<N> operator-(const Dual<N>& a) {
  Dual<N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}

template <int N>
inline Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <int N>
inline Dual<N> operator*(Dual<N> a, double s) { a *= s; return a; }
template <int N>
inline Dual<N> operator*(double s, Dual<N> a) { a *= s; return a; }

template <int N>
inline Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r;
  const double inv = 1.0 / b.v;
  r.v = a.v * inv;
  for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
  return r;
}
template <int N>
inline Dual<N> operator/(Dual<N> a, double s) { a *= 1.0 / s; return a; }
template <int N>
inline Dual<N> operator/(double a, const Dual<N>& b) {
  Dual<N> r;
  const double inv = 1.0 / b.v;
  r.v = a * inv;
  const double f = -r.v * inv;
  for (int i = 0; i < N; ++i) r.d[i] = f * b.d[i];
  return r;
}

// x^p for constant exponent p
template <int N>
inline Dual<N> pow(const Dual<N>& x, double p) {
  Dual<N> r;
  r.v = std::pow(x.v, p);
  const double f = p * std::pow(x.v, p - 1.0);
  for (int i = 0; i < N; ++i) r.d[i] = f * x.d[i];
  return r;
}

template <int N>
inline Dual<N> exp(const Dual<N>& x) {
  Dual<N> r;
  r.v = std::exp(x.v);
  for (int i = 0; i < N; ++i) r.d[i] = r.v * x.d[i];
  return r;
}

template <int N>
inline Dual<N> sqrt(const Dual<N>& x) {
  Dual<N> r;
  r.v = std::sqrt(x.v);
  const double f = 0.5 / r.v;
  for (int i = 0; i < N; ++i) r.d[i] = f * x.d[i];
  return r;
}

// |x| differentiated as sign(x)*x; the kink at 0 is left to the a.e. derivative
template <int N>
inline Dual<N> abs(const Dual<N>& x) {
  return x.v < 0.0 ? -x : x;
}

// value extraction that also works for plain doubles, so residual kernels can
// branch on frozen quantities (upwind switches) independent of the scalar type
inline double value(double x) { return x; }
template <int N>
inline double value(const Dual<N>& x) { return x.v; }

using std::abs;
using std::exp;
using std::pow;
using std::sqrt;

}  // namespace slicefem
