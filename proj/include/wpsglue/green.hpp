#pragma once

#include "wpsglue/errors.hpp"
#include "wpsglue/rational.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace wpsglue {

struct GreenParams {
  int n = 4;              ///< complex dimension
  int k = 3;              ///< codimension
  double quad_tol = 1e-10;

  /// The fiber integral converges iff 2(n-2) - (2n-2k-1) = 2k - 3 > 1, i.e. k > 2; n > k
  /// keeps the Gamma ratio away from its poles.
  void validate() const {
    if (k <= 2)
      throw invalid_input("k = " + std::to_string(k) + " violates 2k - 3 > 1: the fiber integral diverges for k <= 2");
    if (n <= k) throw invalid_input("need n > k (Gamma(n-k) has a pole at n = k)");
    if (!(quad_tol > 0)) throw invalid_input("quadrature tolerance must be positive");
  }
};

/// Gamma(n-k) Gamma(k-2) / (2 Gamma(n-2)) = (n-k-1)! (k-3)! / (2 (n-3)!) as an exact rational.
inline Rational beta_integral_rational(const GreenParams& p) {
  p.validate();
  return Rational(factorial(p.n - p.k - 1) * factorial(p.k - 3)) / Rational(2 * factorial(p.n - 3));
}

inline double beta_integral_exact(const GreenParams& p) {
  return beta_integral_rational(p).convert_to<double>();
}

/// integral_0^inf R^(2n-2k-1) / (1+R^2)^(n-2) dR, computed after R = tan(theta) as
/// integral_0^(pi/2) sin^(2n-2k-1) cos^(2k-5) dtheta.
inline double beta_integral_quad(const GreenParams& p) {
  p.validate();
  const int a = 2 * p.n - 2 * p.k - 1, b = 2 * p.k - 5;
  auto f = [a, b](double th) { return std::pow(std::sin(th), a) * std::pow(std::cos(th), b); };
  double err = 0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, boost::math::constants::half_pi<double>(), 15, 1e-14, &err);
  if (!(err <= p.quad_tol)) throw numerical_failure("beta integral: quadrature tolerance not met");
  return v;
}

/// Vol(S^(2m-1)) = 2 pi^m / Gamma(m).
inline double sphere_volume(int m) {
  return 2 * std::pow(boost::math::constants::pi<double>(), m) / std::tgamma(m);
}

/// d^(2k-4) lambda_flat(d), computed after r = d R as
/// Vol(S^(2n-2k-1)) * integral_0^(1/d) R^(2n-2k-1) (1 + R^2)^(2-n) dR.
/// The integrand no longer depends on d and is O(1); the range is split at R = 1 and then
/// geometrically, and the summed error estimate must stay below quad_tol.
inline double scaled_lambda_flat(double d, const GreenParams& p) {
  p.validate();
  if (!(d > 0 && d <= 1)) throw invalid_input("lambda_flat needs 0 < d <= 1");
  const int a = 2 * p.n - 2 * p.k - 1, b = 2 - p.n;
  auto f = [a, b](double R) { return std::pow(R, a) * std::pow(1 + R * R, b); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double top = 1 / d;
  double total = 0, err_total = 0;
  double lo = 0, hi = std::min(1.0, top);
  while (true) {
    double err = 0;
    total += GK::integrate(f, lo, hi, 15, 1e-14, &err);
    err_total += err;
    if (hi >= top) break;
    lo = hi;
    hi = std::min(top, 2 * hi);
  }
  if (!(err_total <= p.quad_tol)) throw numerical_failure("lambda_flat: quadrature tolerance not met");
  return sphere_volume(p.n - p.k) * total;
}

/// Vol(S^(2n-2k-1)) * integral_0^1 r^(2n-2k-1) (d^2 + r^2)^(2-n) dr, the unit-ball truncation of
/// the fiber integral of the leading Green kernel term.
inline double lambda_flat(double d, const GreenParams& p) {
  return scaled_lambda_flat(d, p) * std::pow(d, 4 - 2 * p.k);
}

/// pi^(n-k) Gamma(k-2) / Gamma(n-2): the limit of d^(2k-4) lambda_flat(d) as d -> 0, with the
/// kernel constant normalized to 1.
inline double leading_coefficient(const GreenParams& p) {
  p.validate();
  return std::pow(boost::math::constants::pi<double>(), p.n - p.k) * std::tgamma(p.k - 2) / std::tgamma(p.n - 2);
}

struct MonteCarloEstimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
};

/// Plain Monte-Carlo of integral over the unit ball of R^(2n-2k) of (d^2 + |y|^2)^(2-n) dy by
/// rejection sampling from the cube. Uniform doubles are built from the top 53 bits of
/// mt19937_64 so the stream is identical across standard libraries.
inline MonteCarloEstimate lambda_flat_monte_carlo(double d, const GreenParams& p, std::uint64_t samples,
                                                  std::uint64_t seed) {
  p.validate();
  if (!(d > 0)) throw invalid_input("d must be positive");
  if (samples == 0) throw invalid_input("need at least one sample");
  const int m = 2 * (p.n - p.k);
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2 - 1; };
  // unit-ball volume in R^m (m even): pi^(m/2) / (m/2)!
  const double ball = std::pow(boost::math::constants::pi<double>(), m / 2) / std::tgamma(m / 2 + 1);
  double sum = 0, sum2 = 0;
  std::uint64_t accepted = 0;
  while (accepted < samples) {
    double r2 = 0;
    for (int i = 0; i < m; ++i) {
      const double x = uniform();
      r2 += x * x;
    }
    if (r2 >= 1) continue;
    const double v = std::pow(d * d + r2, 2 - p.n);
    sum += v;
    sum2 += v * v;
    ++accepted;
  }
  const double N = static_cast<double>(samples);
  const double mean = sum / N, var = std::max(0.0, sum2 / N - mean * mean);
  return {ball * mean, ball * std::sqrt(var / N), samples};
}

/// The correction term -(Vol(X)/Vol(Y)) lambda Lambda added to the glued metric's potential.
inline double gamma_correction(double vol_x, double vol_y, double lambda, double Lambda) {
  if (!(vol_x > 0 && vol_y > 0)) throw invalid_input("volumes must be positive");
  return -(vol_x / vol_y) * lambda * Lambda;
}

} // namespace wpsglue
