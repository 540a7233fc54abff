#pragma once

#include "wpsglue/ale.hpp"
#include "wpsglue/errors.hpp"
#include "wpsglue/radial.hpp"

#include <Eigen/QR>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wpsglue {

/// Data at the inner boundary s0. The scalar-flat equation is fourth order in H, so
/// H'' and H''' are needed besides H and H'; zero values give the flat solution.
struct InnerData {
  double s0 = 1;
  double h0 = 0.5;
  double dh0 = 0.5;
  double ddh0 = 0;
  double dddh0 = 0;
};

struct FitResult {
  double A = 0;
  double constant = 0;  ///< additive constant, fitted alongside A and otherwise unused
  double residual = 0;  ///< sup |H - s/2 - constant - A b(s)| / s^(2-k) over the fit range
  std::size_t first = 0; ///< index where the fit range starts
};

/// Least squares of H - s/2 against {1, s^(2-k)} (k >= 3) or {1, log s} (k = 2) over the
/// outer half of the grid, rows weighted by s^(k-2) so the fit is relative to the decay.
inline FitResult fit_expansion(const SampledPotential& p) {
  const int k = p.k;
  const std::size_t n = p.s.size();
  const std::size_t first = n / 2;
  if (n - first < 4 || !(p.s.back() >= 10 * p.s[first]))
    throw numerical_failure("fit range must cover at least one decade of large s");
  auto basis = [k](double s) { return k == 2 ? std::log(s) : std::pow(s, 2.0 - k); };
  auto scale = [k](double s) { return std::pow(s, 2.0 - k); };
  const auto m = static_cast<Eigen::Index>(n - first);
  Eigen::MatrixXd M(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double s = p.s[first + r], w = 1 / scale(s);
    M(r, 0) = w;
    M(r, 1) = basis(s) * w;
    const double dev = p.deviation.empty() ? p.H[first + r] - s / 2 : p.deviation[first + r];
    y(r) = dev * w;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (qr.rank() < 2) throw numerical_failure("expansion fit is rank deficient");
  Eigen::Vector2d c = qr.solve(y);
  FitResult out{c(1), c(0), 0, first};
  for (std::size_t j = first; j < n; ++j) {
    const double s = p.s[j];
    const double dev = p.deviation.empty() ? p.H[j] - s / 2 : p.deviation[j];
    out.residual = std::max(out.residual, std::abs(dev - out.constant - out.A * basis(s)) / scale(s));
  }
  return out;
}

struct SolveOptions {
  int points_per_decade = 64;
  double rel_tol = 1e-10;
  double abs_tol = 1e-100; // y decays like s^(1-k) and needs relative control
};

struct SolveResult {
  SampledPotential potential;
  FitResult fit;
  double c1 = 0;    ///< tau^(k-1) s F', constant along the solution (normalized scale)
  double c2 = 0;    ///< second integration constant (normalized scale)
  double scale = 1; ///< factor applied to the raw H so that H' -> 1/2
};

namespace detail {
/// Integral over [a, a + h] from values and first two derivatives at both ends (exact for quintics).
inline double hermite_quintic_integral(double h, double fa, double fb, double da, double db, double dda, double ddb) {
  return h / 2 * (fa + fb) + h * h / 10 * (da - db) + h * h * h / 120 * (dda + ddb);
}
} // namespace detail

// Reduction used by the solver. With tau = s H', y = s H''/H' and t = log s,
//   d(log tau)/dt = 1 + y,
//   dy/dt = (1 + y) (C1 tau^(1-k) - k y),
// where C1 = tau^(k-1) s F' is the first integral of S = 0 (see ale.hpp); this is the
// first-order system in (H', H'') with both unknowns scaled to stay well conditioned.
// y decays like s^(1-k) and is integrated to relative accuracy, so everything small is
// rebuilt from tail integrals of y rather than by subtracting large quantities:
//   M(t) = integral_t^inf y,  H' = e^(-M) / 2 once the scale is fixed so that H' -> 1/2,
//   H - s/2 = -integral_s^inf (H' - 1/2) ds   (k >= 3; for k = 2 integrated from s0).
// Tails past s_max use the local exponential rate of the integrand.
inline SolveResult solve_scalar_flat(int k, const InnerData& in, double s_max, const SolveOptions& opt = {}) {
  detail::check_dimension(k);
  if (!(in.s0 > 0) || !(s_max > in.s0)) throw invalid_input("need 0 < s0 < s_max");
  if (opt.points_per_decade < 4) throw invalid_input("need at least 4 points per decade");
  const double s0 = in.s0;
  const double tau0 = s0 * in.dh0, b0 = in.dh0 + s0 * in.ddh0;
  if (!(tau0 > 0 && b0 > 0)) throw positivity_lost(s0);
  const double sF = (k - 1) * s0 * in.ddh0 / in.dh0 + s0 * (2 * in.ddh0 + s0 * in.dddh0) / b0;
  const double C1 = std::pow(tau0, k - 1) * sF;
  const double y0 = s0 * in.ddh0 / in.dh0;
  const double C2 = std::pow(tau0, k) * y0 - C1 * tau0;

  using State = std::array<double, 2>;
  auto rhs = [k, C1](const State& x, State& dx, double) {
    const double y = x[1];
    dx[0] = 1 + y;
    dx[1] = (1 + y) * (C1 * std::exp((1 - k) * x[0]) - k * y);
  };
  auto second = [k, C1](const State& x, double yt) {
    const double y = x[1], f = C1 * std::exp((1 - k) * x[0]);
    return yt * (f - k * y) + (1 + y) * ((1 - k) * f * (1 + y) - k * yt);
  };

  std::vector<double> ts;
  const double t0 = std::log(s0), t1 = std::log(s_max);
  const double dt = std::log(10.0) / opt.points_per_decade;
  for (int j = 0;; ++j) {
    const double t = t0 + j * dt;
    if (t >= t1 - 1e-9 * dt) break;
    ts.push_back(t);
  }
  ts.push_back(t1);

  std::vector<double> T, Y, YT, YTT;
  auto observe = [&](const State& x, double t) {
    const double s = std::exp(t);
    if (!std::isfinite(x[1]) || !(1 + x[1] > 0)) throw positivity_lost(s);
    State dx;
    rhs(x, dx, t);
    T.push_back(t);
    Y.push_back(x[1]);
    YT.push_back(dx[1]);
    YTT.push_back(second(x, dx[1]));
  };

  namespace ode = boost::numeric::odeint;
  State x{std::log(tau0), y0};
  try {
    ode::integrate_times(ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>()), rhs,
                         x, ts.begin(), ts.end(), dt / 4, observe);
  } catch (const numerical_failure&) {
    throw;
  } catch (const std::exception&) {
    // step-size collapse: the metric degenerates just past the last accepted sample
    throw positivity_lost(T.empty() ? s0 : std::exp(T.back()));
  }
  if (T.size() != ts.size()) throw numerical_failure("integration stopped early");
  const std::size_t n = T.size();

  // f e^(-beta (t - t_end)) past the end, beta = -f_t / f.
  auto tail = [](double f, double ft) {
    if (f == 0) return 0.0;
    const double beta = -ft / f;
    if (!(beta > 0)) throw numerical_failure("solution is not decaying at s_max; increase s_max");
    return f / beta;
  };
  std::vector<double> M(n);
  M[n - 1] = tail(Y[n - 1], YT[n - 1]);
  for (std::size_t j = n - 1; j-- > 0;)
    M[j] = M[j + 1] + detail::hermite_quintic_integral(T[j + 1] - T[j], Y[j], Y[j + 1], YT[j], YT[j + 1], YTT[j],
                                                        YTT[j + 1]);

  // g = (H' - 1/2) s as a function of t; q = e^(-M), q_t = q y, q_tt = q (y^2 + y_t).
  std::vector<double> G(n), GT(n), GTT(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double e = std::exp(T[j]), q = std::exp(-M[j]), qm1 = std::expm1(-M[j]);
    G[j] = 0.5 * qm1 * e;
    GT[j] = 0.5 * (q * Y[j] + qm1) * e;
    GTT[j] = 0.5 * (q * (Y[j] * Y[j] + YT[j]) + 2 * q * Y[j] + qm1) * e;
  }
  std::vector<double> D(n);
  if (k >= 3) {
    D[n - 1] = -tail(G[n - 1], GT[n - 1]);
    for (std::size_t j = n - 1; j-- > 0;)
      D[j] = D[j + 1] - detail::hermite_quintic_integral(T[j + 1] - T[j], G[j], G[j + 1], GT[j], GT[j + 1], GTT[j],
                                                          GTT[j + 1]);
  } else {
    D[0] = 0;
    for (std::size_t j = 1; j < n; ++j)
      D[j] = D[j - 1] + detail::hermite_quintic_integral(T[j] - T[j - 1], G[j - 1], G[j], GT[j - 1], GT[j],
                                                          GTT[j - 1], GTT[j]);
  }

  // H' = lam tau / s, and tau / s tends to (tau0 / s0) e^(M(t0)).
  const double lam = 0.5 * std::exp(-M[0]) / in.dh0;
  const double shift = lam * in.h0 - s0 / 2 - D[0];
  std::vector<double> S(n), H(n), dH(n), ddH(n), dddH(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = j + 1 == n ? s_max : std::exp(T[j]);
    S[j] = s;
    H[j] = s / 2 + D[j] + shift;
    dH[j] = 0.5 * std::exp(-M[j]);
    ddH[j] = dH[j] * Y[j] / s;
    // from y = s H''/H': s^2 H''' = H' (y_t - y + y^2)
    dddH[j] = dH[j] * (YT[j] - Y[j] + Y[j] * Y[j]) / (s * s);
  }
  SolveResult out{SampledPotential::make(k, S, std::move(H), std::move(dH), std::move(ddH), std::move(dddH), D), {},
                  std::pow(lam, k - 1) * C1, std::pow(lam, k) * C2, lam};
  out.fit = fit_expansion(out.potential);
  return out;
}

/// Closed-form profile with the same integration constants as a solver run.
inline ScalarFlatALE matching_profile(const SolveResult& r) {
  return ScalarFlatALE(r.potential.k, r.c1, r.c2);
}

} // namespace wpsglue
