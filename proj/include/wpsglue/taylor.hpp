#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace wpsglue {

/// Truncated Taylor series c[0] + c[1] h + ... + c[N] h^N, used to carry exact
/// derivatives through closed-form expressions.
template <class T, int N>
struct Taylor {
  static_assert(N >= 0);
  std::array<T, N + 1> c{};

  Taylor() = default;
  Taylor(T value) { c[0] = value; } // NOLINT: implicit from scalars on purpose

  static Taylor variable(T x0) {
    Taylor t(x0);
    if constexpr (N >= 1) t.c[1] = T(1);
    return t;
  }

  T value() const { return c[0]; }
  T& operator[](std::size_t i) { return c[i]; }
  const T& operator[](std::size_t i) const { return c[i]; }

  /// m-th derivative at the expansion point.
  T derivative(int m) const {
    T f = 1;
    for (int i = 2; i <= m; ++i) f *= T(i);
    return c[m] * f;
  }

  Taylor operator-() const {
    Taylor r;
    for (int i = 0; i <= N; ++i) r.c[i] = -c[i];
    return r;
  }
  Taylor& operator+=(const Taylor& o) {
    for (int i = 0; i <= N; ++i) c[i] += o.c[i];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int i = 0; i <= N; ++i) c[i] -= o.c[i];
    return *this;
  }
  Taylor& operator*=(const Taylor& o) { return *this = *this * o; }
  Taylor& operator/=(const Taylor& o) { return *this = *this / o; }

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    Taylor q;
    for (int m = 0; m <= N; ++m) {
      T acc = a.c[m];
      for (int j = 1; j <= m; ++j) acc -= b.c[j] * q.c[m - j];
      q.c[m] = acc / b.c[0];
    }
    return q;
  }
  friend Taylor operator+(const Taylor& a, T b) { return a + Taylor(b); }
  friend Taylor operator+(T a, const Taylor& b) { return Taylor(a) + b; }
  friend Taylor operator-(const Taylor& a, T b) { return a - Taylor(b); }
  friend Taylor operator-(T a, const Taylor& b) { return Taylor(a) - b; }
  friend Taylor operator*(const Taylor& a, T b) {
    Taylor r = a;
    for (auto& x : r.c) x *= b;
    return r;
  }
  friend Taylor operator*(T a, const Taylor& b) { return b * a; }
  friend Taylor operator/(const Taylor& a, T b) {
    Taylor r = a;
    for (auto& x : r.c) x /= b;
    return r;
  }
  friend Taylor operator/(T a, const Taylor& b) { return Taylor(a) / b; }
};

/// Derivative series (one order shorter).
template <class T, int N>
Taylor<T, N - 1> differentiate(const Taylor<T, N>& a) {
  Taylor<T, N - 1> r;
  for (int i = 1; i <= N; ++i) r.c[i - 1] = a.c[i] * T(i);
  return r;
}

/// Antiderivative with the given constant term (one order longer).
template <class T, int N>
Taylor<T, N + 1> integrate(const Taylor<T, N>& a, T constant) {
  Taylor<T, N + 1> r;
  r.c[0] = constant;
  for (int i = 0; i <= N; ++i) r.c[i + 1] = a.c[i] / T(i + 1);
  return r;
}

template <int M, class T, int N>
Taylor<T, M> truncate(const Taylor<T, N>& a) {
  static_assert(M <= N);
  Taylor<T, M> r;
  for (int i = 0; i <= M; ++i) r.c[i] = a.c[i];
  return r;
}

/// Coefficients in the step h rescaled to the step h / factor, i.e. g(h) = f(h / factor).
template <class T, int N>
Taylor<T, N> rescale(const Taylor<T, N>& a, T factor) {
  Taylor<T, N> r = a;
  T f = 1;
  for (int i = 1; i <= N; ++i) {
    f /= factor;
    r.c[i] *= f;
  }
  return r;
}

/// f(g) where `outer` holds the Taylor coefficients of f at g.value().
template <class T, int N>
Taylor<T, N> compose(const Taylor<T, N>& outer, const Taylor<T, N>& inner) {
  Taylor<T, N> dx = inner;
  dx.c[0] = T(0);
  Taylor<T, N> r(outer.c[N]);
  for (int i = N - 1; i >= 0; --i) r = r * dx + Taylor<T, N>(outer.c[i]);
  return r;
}

template <class T, int N>
Taylor<T, N> exp(const Taylor<T, N>& a) {
  using std::exp;
  Taylor<T, N> r;
  r.c[0] = exp(a.c[0]);
  for (int m = 1; m <= N; ++m) {
    T acc = 0;
    for (int j = 1; j <= m; ++j) acc += T(j) * a.c[j] * r.c[m - j];
    r.c[m] = acc / T(m);
  }
  return r;
}

template <class T, int N>
Taylor<T, N> log(const Taylor<T, N>& a) {
  using std::log;
  Taylor<T, N> r;
  r.c[0] = log(a.c[0]);
  for (int m = 1; m <= N; ++m) {
    T acc = a.c[m];
    for (int j = 1; j < m; ++j) acc -= T(j) * r.c[j] * a.c[m - j] / T(m);
    r.c[m] = acc / a.c[0];
  }
  return r;
}

/// a^p for a.value() > 0 (any real p), via the recurrence m a0 r_m = sum (p j - (m - j)) a_j r_{m-j}.
template <class T, int N>
Taylor<T, N> pow(const Taylor<T, N>& a, T p) {
  using std::pow;
  Taylor<T, N> r;
  r.c[0] = pow(a.c[0], p);
  for (int m = 1; m <= N; ++m) {
    T acc = 0;
    for (int j = 1; j <= m; ++j) acc += (p * T(j) - T(m - j)) * a.c[j] * r.c[m - j];
    r.c[m] = acc / (T(m) * a.c[0]);
  }
  return r;
}

/// Integer power by repeated multiplication; valid for any sign of a.value().
template <class T, int N>
Taylor<T, N> powi(const Taylor<T, N>& a, int p) {
  if (p < 0) return Taylor<T, N>(T(1)) / powi(a, -p);
  Taylor<T, N> r(T(1)), base = a;
  while (p) {
    if (p & 1) r = r * base;
    base = base * base;
    p >>= 1;
  }
  return r;
}

template <class T, int N>
Taylor<T, N> sqrt(const Taylor<T, N>& a) {
  return pow(a, T(0.5));
}

} // namespace wpsglue
