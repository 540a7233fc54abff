#pragma once

#include "wpsglue/errors.hpp"
#include "wpsglue/taylor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace wpsglue {

/// Taylor coefficients of H(s + h) up to h^4.
using Jet4 = Taylor<double, 4>;

/// A U(k)-invariant Kähler potential H(s), s = |z|^2 on C^k, omega = i d dbar H.
template <class P>
concept RadialProfile = requires(const P& p, double s) {
  { p.dimension() } -> std::convertible_to<int>;
  { p.jet(s) } -> std::same_as<Jet4>;
  { p.in_domain(s) } -> std::convertible_to<bool>;
};

using Jet3 = Taylor<double, 3>;

/// Profiles that can produce tau = s H' directly. Near a cap H' + s H'' is a tiny
/// difference of O(1) terms, so differentiating tau itself keeps it accurate.
template <class P>
concept HasTauJet = requires(const P& p, double s) {
  { p.tau_jet(s) } -> std::same_as<Jet3>;
};

namespace detail {
inline void check_dimension(int k, int min_k = 2) {
  if (k < min_k) throw invalid_input("complex dimension k must be at least " + std::to_string(min_k));
}
} // namespace detail

struct FlatPotential {
  int k = 2;
  int dimension() const { return k; }
  bool in_domain(double s) const { return s >= 0; }
  Jet4 jet(double s) const { return Jet4::variable(s) * 0.5; }
};

/// s/2 + A s^(2-k), k >= 3.
struct TruncatedALEPotential {
  int k = 3;
  double A = 0;
  int dimension() const { return k; }
  bool in_domain(double s) const { return s > 0; }
  Jet4 jet(double s) const {
    auto x = Jet4::variable(s);
    return x * 0.5 + A * pow(x, double(2 - k));
  }
};

/// s/2 + A log s, k = 2.
struct LogALEPotential {
  double A = 0;
  int dimension() const { return 2; }
  bool in_domain(double s) const { return s > 0; }
  Jet4 jet(double s) const {
    auto x = Jet4::variable(s);
    return x * 0.5 + A * log(x);
  }
};

/// log(1 + s).
struct FubiniLikePotential {
  int k = 2;
  int dimension() const { return k; }
  bool in_domain(double s) const { return s >= 0; }
  Jet4 jet(double s) const { return log(1.0 + Jet4::variable(s)); }
};

/// Finite-difference weights for the m-th derivative at x0 from nodes xs (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1, c4 = xs[0] - x0;
  c[0][0] = 1;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1, c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int l = mn; l >= 1; --l) c[i][l] = c1 * (l * c[i - 1][l - 1] - c5 * c[i - 1][l]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int l = mn; l >= 1; --l) c[j][l] = (c4 * c[j][l] - l * c[j][l - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

namespace detail {
/// Derivative of sampled values at node j from a five-point stencil (shifted at the ends).
inline double node_derivative(const std::vector<double>& x, const std::vector<double>& y, std::size_t j) {
  const std::size_t n = x.size();
  std::size_t width = std::min<std::size_t>(5, n);
  std::size_t lo = j >= width / 2 ? j - width / 2 : 0;
  if (lo + width > n) lo = n - width;
  std::vector<double> xs(x.begin() + lo, x.begin() + lo + width);
  auto w = fd_weights(x[j], xs, 1);
  double d = 0;
  for (std::size_t i = 0; i < width; ++i) d += w[i] * y[lo + i];
  return d;
}
} // namespace detail

/// Potential known on a grid: values of H, H', H'' (and optionally H''').
struct SampledPotential {
  int k = 2;
  std::vector<double> s, H, dH, ddH;
  std::vector<double> dddH; ///< empty when unknown; then estimated by finite differences
  /// Optional H - s/2 - const computed without cancellation (H itself cannot resolve
  /// a decaying correction next to s/2 at large s). Empty when unknown.
  std::vector<double> deviation;

  static SampledPotential make(int k, std::vector<double> s, std::vector<double> H, std::vector<double> dH,
                               std::vector<double> ddH, std::vector<double> dddH = {},
                               std::vector<double> deviation = {}) {
    detail::check_dimension(k);
    const auto n = s.size();
    if (n < 5) throw invalid_input("a sampled potential needs at least 5 points");
    if (H.size() != n || dH.size() != n || ddH.size() != n || (!dddH.empty() && dddH.size() != n) ||
        (!deviation.empty() && deviation.size() != n))
      throw invalid_input("sample columns have different lengths");
    if (s.front() <= 0) throw invalid_input("sample grid must be positive");
    for (std::size_t i = 1; i < n; ++i)
      if (!(s[i] > s[i - 1])) throw invalid_input("sample grid must be strictly increasing");
    double decades = std::log10(s.back() / s.front());
    if (decades > 0 && static_cast<double>(n - 1) < 4 * decades)
      throw invalid_input("sample grid needs at least 4 points per decade");
    return SampledPotential{k,           std::move(s),    std::move(H),        std::move(dH),
                            std::move(ddH), std::move(dddH), std::move(deviation)};
  }

  int dimension() const { return k; }
  bool in_domain(double x) const { return x >= s.front() && x <= s.back(); }

  double third_derivative_at(std::size_t j) const {
    return dddH.empty() ? detail::node_derivative(s, ddH, j) : dddH[j];
  }

  /// Quintic Hermite interpolation of (H, H', H'') on the bracketing interval.
  Jet4 jet(double x) const {
    if (!in_domain(x)) throw invalid_input("s outside the sampled range");
    std::size_t j = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
    j = std::clamp<std::size_t>(j, 1, s.size() - 1) - 1;
    const double h = s[j + 1] - s[j];
    // Local polynomial p(u), u = (x - s_j)/h, matching values and first two derivatives.
    const double a0 = H[j], a1 = dH[j] * h, a2 = ddH[j] * h * h / 2;
    const double b0 = H[j + 1], b1 = dH[j + 1] * h, b2 = ddH[j + 1] * h * h / 2;
    const double r0 = b0 - a0 - a1 - a2, r1 = b1 - a1 - 2 * a2, r2 = b2 - a2;
    const double a3 = 10 * r0 - 4 * r1 + r2;
    const double a4 = -15 * r0 + 7 * r1 - 2 * r2;
    const double a5 = 6 * r0 - 3 * r1 + r2;
    Taylor<double, 4> u = Taylor<double, 4>::variable((x - s[j]) / h);
    Taylor<double, 4> p(a5);
    for (double a : {a4, a3, a2, a1, a0}) p = p * u + a;
    return rescale(p, h);
  }
};

using RadialPotential =
    std::variant<FlatPotential, TruncatedALEPotential, LogALEPotential, FubiniLikePotential, SampledPotential>;

struct MetricEigenvalues {
  double tangent = 0; ///< multiplicity k - 1
  double radial = 0;
  bool positive() const { return tangent > 0 && radial > 0; }
  double min() const { return std::min(tangent, radial); }
};

/// (H', H' + s H'') from a jet of H at s.
inline MetricEigenvalues eigenvalues_from_jet(const Jet4& H, double s) {
  return {H[1], H[1] + s * 2 * H[2]};
}

/// (tau / s, tau') from a jet of tau = s H'.
inline MetricEigenvalues eigenvalues_from_tau_jet(const Jet3& tau, double s) { return {tau[0] / s, tau[1]}; }

/// Jet of tau = s H' built from a jet of H.
inline Jet3 tau_jet_from_jet(const Jet4& H, double s) {
  return Jet3::variable(s) * differentiate(H);
}

template <RadialProfile P>
MetricEigenvalues metric_eigenvalues(const P& p, double s) {
  if (!p.in_domain(s)) throw invalid_input("s outside the potential's domain");
  if constexpr (HasTauJet<P>) return eigenvalues_from_tau_jet(p.tau_jet(s), s);
  else return eigenvalues_from_jet(p.jet(s), s);
}

inline MetricEigenvalues metric_eigenvalues(const RadialPotential& p, double s) {
  return std::visit([s](const auto& q) { return metric_eigenvalues(q, s); }, p);
}

enum class CurvatureMethod { ClosedForm, FiniteDifference };

struct CurvatureSample {
  double s = 0;
  double S = 0;
  CurvatureMethod method = CurvatureMethod::ClosedForm;
};

/// S = -2 [(k-1) F'/H' + (F' + s F'')/(H' + s H'')] with F = log(H'^(k-1) (H' + s H'')),
/// i.e. minus twice the trace of i d dbar log det g (convention S = 2 tr Ric).
template <class T>
T scalar_curvature_from_jet(const Taylor<T, 4>& H, T s, int k) {
  auto d1 = truncate<2>(differentiate(H));
  auto d2 = differentiate(differentiate(H));
  auto x = Taylor<T, 2>::variable(s);
  auto b = d1 + x * d2;
  if (!(d1[0] > 0 && b[0] > 0)) throw numerical_failure("degenerate metric at s = " + std::to_string(double(s)));
  auto F = T(k - 1) * log(d1) + log(b);
  T F1 = F[1], F2 = 2 * F[2];
  return T(-2) * (T(k - 1) * F1 / d1[0] + (F1 + s * F2) / b[0]);
}

/// Same curvature from a jet of tau = s H', as S = -2 tau^(1-k) Q' / tau' with
/// Q = tau^(k-1) s F' = tau^(k-1) [(k-1)(s tau'/tau - 1) + s tau''/tau'].
/// Q stays O(1) up to a cap, so only the final division by tau' amplifies error.
template <class T>
T scalar_curvature_from_tau_jet(const Taylor<T, 3>& tau, T s, int k) {
  if (!(tau[0] > 0 && tau[1] > 0)) throw numerical_failure("degenerate metric at s = " + std::to_string(double(s)));
  auto t = truncate<1>(tau);
  auto t1 = truncate<1>(differentiate(tau));
  auto t2 = differentiate(differentiate(tau));
  auto x = Taylor<T, 1>::variable(s);
  auto tk = powi(t, k - 1);
  auto Q = tk * (T(k - 1) * (x * t1 / t - T(1)) + x * t2 / t1);
  return T(-2) * Q[1] / (tk[0] * tau[1]);
}

/// Same curvature when phi = s dtau/ds is known as a function of tau: Q depends on tau alone,
///   Q = tau^(k-1) [(k-1) phi/tau + dphi/dtau - k],  S = -2 tau^(1-k) dQ/dtau,
/// and the division by tau' disappears. `phi` holds the jet of phi in tau at tau0.
template <class T>
T scalar_curvature_from_phi(const Taylor<T, 2>& phi, T tau0, int k) {
  if (!(tau0 > 0 && phi[0] > 0)) throw numerical_failure("degenerate metric at tau = " + std::to_string(double(tau0)));
  auto u = Taylor<T, 1>::variable(tau0);
  auto f = truncate<1>(phi);
  auto f1 = differentiate(phi);
  auto tk = powi(u, k - 1);
  auto Q = tk * (T(k - 1) * f / u + f1 - T(k));
  return T(-2) * Q[1] / tk[0];
}

/// Profiles with their own well-conditioned curvature evaluation.
template <class P>
concept HasIntrinsicCurvature = requires(const P& p, double s) {
  { p.scalar_curvature_at(s) } -> std::convertible_to<double>;
};

template <RadialProfile P>
CurvatureSample scalar_curvature(const P& p, double s) {
  if (!p.in_domain(s)) throw invalid_input("s outside the potential's domain");
  if constexpr (HasIntrinsicCurvature<P>)
    return {s, p.scalar_curvature_at(s), CurvatureMethod::ClosedForm};
  else if constexpr (HasTauJet<P>)
    return {s, scalar_curvature_from_tau_jet(p.tau_jet(s), s, p.dimension()), CurvatureMethod::ClosedForm};
  else
    return {s, scalar_curvature_from_jet(p.jet(s), s, p.dimension()), CurvatureMethod::ClosedForm};
}

namespace detail {
/// Q = tau^(k-1) s F' with tau = s H'. S = -2 tau^(1-k) Q' / tau'.
inline double conserved_quantity(int k, double s, double h1, double h2, double h3) {
  const double tau = s * h1, b = h1 + s * h2;
  const double sF = (k - 1) * s * h2 / h1 + s * (2 * h2 + s * h3) / b;
  return std::pow(tau, k - 1) * sF;
}
} // namespace detail

/// Scalar curvature of sampled data at every node, via S = -2 tau^(1-k) (dQ/ds) / tau'.
/// Only first derivatives of Q are differenced, which keeps the estimate well conditioned.
inline std::vector<double> sampled_scalar_curvature(const SampledPotential& p) {
  const int k = p.k;
  const auto n = p.s.size();
  std::vector<double> Q(n), S(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p.dH[j] > 0 && p.dH[j] + p.s[j] * p.ddH[j] > 0))
      throw numerical_failure("degenerate metric at s = " + std::to_string(p.s[j]));
    Q[j] = detail::conserved_quantity(k, p.s[j], p.dH[j], p.ddH[j], p.third_derivative_at(j));
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double tau = p.s[j] * p.dH[j], b = p.dH[j] + p.s[j] * p.ddH[j];
    S[j] = -2 * std::pow(tau, 1 - k) * detail::node_derivative(p.s, Q, j) / b;
  }
  return S;
}

inline CurvatureSample scalar_curvature(const SampledPotential& p, double s) {
  if (!p.in_domain(s)) throw invalid_input("s outside the sampled range");
  auto S = sampled_scalar_curvature(p);
  auto it = std::lower_bound(p.s.begin(), p.s.end(), s);
  std::size_t j = static_cast<std::size_t>(it - p.s.begin());
  if (j < p.s.size() && p.s[j] == s) return {s, S[j], CurvatureMethod::ClosedForm};
  const double t = (s - p.s[j - 1]) / (p.s[j] - p.s[j - 1]);
  return {s, (1 - t) * S[j - 1] + t * S[j], CurvatureMethod::ClosedForm};
}

inline CurvatureSample scalar_curvature(const RadialPotential& p, double s) {
  return std::visit([s](const auto& q) { return scalar_curvature(q, s); }, p);
}

/// Independent oracle: builds g = H' I + H'' zbar z^T at stencil points around z, takes
/// log det, forms d dbar log det from fourth-order central differences in the 2k real
/// coordinates and contracts with g^{-1}. Default step 1e-3 (1 + |z|).
template <RadialProfile P>
double scalar_curvature_fd(const P& p, const std::vector<std::complex<double>>& z, double h = 0) {
  using Mat = Eigen::MatrixXcd;
  const int k = p.dimension();
  if (static_cast<int>(z.size()) != k) throw invalid_input("point must have k complex coordinates");
  double norm2 = 0;
  for (auto c : z) norm2 += std::norm(c);
  if (h <= 0) h = 1e-3 * (1 + std::sqrt(norm2));

  auto metric = [&](const std::vector<std::complex<double>>& w) {
    double s = 0;
    for (auto c : w) s += std::norm(c);
    if (!p.in_domain(s)) throw invalid_input("finite-difference stencil leaves the domain");
    auto J = p.jet(s);
    const double h1 = J[1], h2 = 2 * J[2];
    Mat G(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G(i, j) = (i == j ? h1 : 0.0) + h2 * std::conj(w[i]) * w[j];
    return G;
  };
  auto logdet = [&](const std::vector<double>& dx) {
    auto w = z;
    for (int i = 0; i < k; ++i) w[i] += std::complex<double>(dx[i], dx[k + i]);
    Eigen::ComplexEigenSolver<Mat> es(metric(w), false);
    double acc = 0;
    for (int i = 0; i < k; ++i) {
      double ev = es.eigenvalues()[i].real();
      if (!(ev > 0)) throw numerical_failure("degenerate metric on the stencil");
      acc += std::log(ev);
    }
    return acc;
  };

  const int m = 2 * k;
  const double f0 = logdet(std::vector<double>(m, 0.0));
  const int off[4] = {-2, -1, 1, 2};
  const double w1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
  Eigen::MatrixXd hess(m, m);
  for (int a = 0; a < m; ++a) {
    auto at = [&](int step) {
      std::vector<double> dx(m, 0.0);
      dx[a] = step * h;
      return logdet(dx);
    };
    hess(a, a) = (-at(2) + 16 * at(1) - 30 * f0 + 16 * at(-1) - at(-2)) / (12 * h * h);
    for (int b = a + 1; b < m; ++b) {
      double acc = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          std::vector<double> dx(m, 0.0);
          dx[a] = off[i] * h;
          dx[b] = off[j] * h;
          acc += w1[i] * w1[j] * logdet(dx);
        }
      hess(a, b) = hess(b, a) = acc / (h * h);
    }
  }
  // d_i dbar_j f = 1/4 (f_{x_i x_j} + f_{y_i y_j}) + i/4 (f_{x_i y_j} - f_{y_i x_j})
  Mat R(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      R(i, j) = std::complex<double>(0.25 * (hess(i, j) + hess(k + i, k + j)),
                                     0.25 * (hess(i, k + j) - hess(k + i, j)));
  Mat G = metric(z);
  return -2 * (G.inverse() * R).trace().real();
}

// ---------------------------------------------------------------------------
// Euclidean Laplacian on radial functions u(s), s = |z|^2 on C^k: 4 (s u'' + k u').

inline double laplacian_radial(const Jet4& u, double s, int k) { return 4 * (s * 2 * u[2] + k * u[1]); }

inline double biharmonic_radial(const Jet4& u, double s, int k) {
  auto d1 = truncate<2>(differentiate(u));
  auto d2 = differentiate(differentiate(u));
  auto x = Taylor<double, 2>::variable(s);
  auto v = 4.0 * (x * d2 + double(k) * d1); // Laplacian as a series in h
  return 4 * (s * 2 * v[2] + k * v[1]);
}

/// Convenience: u given as a callable returning its Jet4 at s.
template <class F>
  requires std::invocable<F, double>
double laplacian_radial(F&& u, double s, int k) {
  return laplacian_radial(u(s), s, k);
}
template <class F>
  requires std::invocable<F, double>
double biharmonic_radial(F&& u, double s, int k) {
  return biharmonic_radial(u(s), s, k);
}

/// Jet of the power s^p at s.
inline Jet4 power_jet(double s, double p) { return pow(Jet4::variable(s), p); }

} // namespace wpsglue
