#pragma once

#include "wpsglue/errors.hpp"
#include "wpsglue/radial.hpp"
#include "wpsglue/taylor.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace wpsglue {

// U(k)-invariant scalar-flat metrics.
//
// Write tau = s H' and phi = s dtau/ds = s (H' + s H''). With F = log(H'^(k-1)(H' + s H''))
// one has s F' = (k-1) phi/tau + dphi/dtau - k, and
//   S = -2 tau^(1-k) (d/ds)[tau^(k-1) s F'] / tau'.
// So S = 0 iff tau^(k-1) s F' = C1 is constant, which integrates once more to
//   phi(tau) = tau + C1 tau^(2-k) + C2 tau^(1-k) = P(tau) / tau^(k-1),  P(u) = u^k + C1 u + C2.
// Then d log s = dtau / phi. Fixing the scale so that H' -> 1/2 gives
//   log s = log(2 tau) - J(tau),  J(tau) = integral_tau^inf (1/phi(u) - 1/u) du,
// and with the simple roots rho_j of P and w_j = rho_j^(k-1) / P'(rho_j) (sum w_j = 1),
//   J(tau) = -sum_j w_j log(1 - rho_j / tau).
// Asymptotically H = s/2 + A s^(2-k) + const + O(s^(1-k)) with A = C1 2^(k-2)/((k-1)(k-2)),
// or H = s/2 + A log s + const + O(1/s) with A = -C1 when k = 2.
// A regular cap over the zero section of O(-r) needs phi(tau0) = 0 and phi'(tau0) = r,
// i.e. C1 = (r - k) tau0^(k-1) and C2 = (k - r - 1) tau0^k.
class ScalarFlatALE {
public:
  /// Scale already normalized so that H' -> 1/2.
  ScalarFlatALE(int k, double c1, double c2) : k_(k), c1_(c1), c2_(c2) {
    detail::check_dimension(k);
    flat_ = c1 == 0 && c2 == 0;
    if (!flat_) find_roots();
  }

  /// Regular cap of order r at tau = tau0.
  static ScalarFlatALE from_cap(int k, int r, double tau0) {
    if (r < 1) throw invalid_input("cap order must be a positive integer");
    if (!(tau0 > 0)) throw invalid_input("cap parameter must be positive");
    return ScalarFlatALE(k, (r - k) * std::pow(tau0, k - 1), (k - r - 1) * std::pow(tau0, k));
  }

  /// Cap of order r whose asymptotic coefficient (of s^(2-k), or of log s when k = 2) is A.
  static ScalarFlatALE with_coefficient(int k, double A, int r) {
    detail::check_dimension(k);
    if (A == 0) return ScalarFlatALE(k, 0, 0);
    double scale = 0;
    if (k == 2) {
      scale = A / (2.0 - r);
    } else {
      scale = A * (k - 1) * (k - 2) / ((r - k) * std::pow(2.0, k - 2));
    }
    if (!(scale > 0) || !std::isfinite(scale))
      throw invalid_input("no regular cap of order " + std::to_string(r) + " has coefficient of this sign");
    return from_cap(k, r, std::pow(scale, 1.0 / (k - 1)));
  }

  /// Cap order giving the requested sign of A: r = 1 for A > 0 when k = 2, r = k + 1 for
  /// A > 0 when k >= 3, and r = 1 (k >= 3) or 3 (k = 2) for A < 0.
  static int default_cap_order(int k, double A) {
    if (k == 2) return A > 0 ? 1 : 3;
    return A > 0 ? k + 1 : 1;
  }

  int dimension() const { return k_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  bool is_flat() const { return flat_; }
  /// Smallest tau on the ALE end (the largest nonnegative root of P, or 0).
  double tau_min() const { return base_; }
  bool has_cap() const { return cap_index_ >= 0; }

  double asymptotic_coefficient() const {
    if (k_ == 2) return -c1_;
    return c1_ * std::pow(2.0, k_ - 2) / ((k_ - 1) * (k_ - 2));
  }

  double phi(double tau) const { return tau + c1_ * std::pow(tau, 2 - k_) + c2_ * std::pow(tau, 1 - k_); }

  /// J at tau = tau_min + sigma.
  double J(double sigma) const {
    if (flat_) return 0;
    const double tau = base_ + sigma;
    // Far out the log terms cancel to O(tau^(1-k)); use the expansion in 1/tau there.
    if (tau >= far_) return eval_series(j_series_, 1 / tau);
    double acc = 0;
    for (std::size_t j = 0; j < roots_.size(); ++j) {
      double term;
      if (static_cast<int>(j) == cap_index_) {
        term = weights_[j].real() * (std::log(sigma) - std::log(tau));
      } else {
        term = (weights_[j] * log1p_complex(-roots_[j] / tau)).real();
      }
      acc -= term;
    }
    return acc;
  }

  double log_s(double sigma) const { return std::log(2 * (base_ + sigma)) - J(sigma); }

  /// Infimum of s over the ALE end (0 when the end closes off with a cap).
  double s_min() const {
    if (flat_ || has_cap()) return 0;
    // tau -> 0: log s = log 2 + sum_j w_j log(-rho_j)
    std::complex<double> acc = std::log(2.0);
    for (std::size_t j = 0; j < roots_.size(); ++j)
      if (std::abs(roots_[j]) > 0) acc += weights_[j] * std::log(-roots_[j]);
    return std::exp(acc.real());
  }

  bool in_domain(double s) const { return s > s_min(); }

  /// sigma = tau - tau_min at the given s.
  double sigma_of_s(double s) const {
    if (!in_domain(s)) throw invalid_input("s outside the profile's domain");
    if (flat_) return s / 2;
    const double target = std::log(s);
    auto f = [&](double u) { return log_s(std::exp(u)) - target; };
    double lo = std::log(std::max(s / 2, 1.0)) - 1, hi = lo + 2;
    while (f(hi) < 0) hi += 2 * (hi - lo);
    while (f(lo) > 0) {
      lo -= 2 * (hi - lo);
      if (lo < -700) throw numerical_failure("cannot bracket tau(s)");
    }
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return std::exp(0.5 * (r.first + r.second));
  }

  double tau_of_s(double s) const { return base_ + sigma_of_s(s); }

  /// Taylor coefficients of tau(s + h) from the ODE s tau' = phi(tau).
  Jet3 tau_jet(double s) const { return truncate<3>(sigma_jet(s, sigma_of_s(s))) + base_; }

  /// Taylor coefficients of H(s + h). H' = 1/2 + E/s with E = tau - s/2 = -tau expm1(-J), and
  /// dJ/ds = (c1 tau + c2) / (tau P(tau)) dtau/ds, so the decaying part never comes from a
  /// difference of O(1) terms. Value: s/2 + deviation (plus A log s when k = 2).
  Jet4 jet(double s) const {
    auto x = Jet4::variable(s);
    if (flat_) return x * 0.5;
    const double sigma0 = sigma_of_s(s);
    const Jet4 sigma = sigma_jet(s, sigma0);
    const Jet4 tau = sigma + base_;
    Jet4 P(shifted_[k_]);
    for (int j = k_ - 1; j >= 0; --j) P = P * sigma + shifted_[j];
    const Jet4 rate = (c1_ * tau + c2_) / (tau * P);
    const Jet4 Jjet = integrate(truncate<3>(rate) * differentiate(tau), J(sigma0));
    Jet4 em1 = exp(-Jjet);
    em1[0] = std::expm1(-Jjet[0]);
    const Jet3 dH = truncate<3>(0.5 - tau * em1 / x);
    return integrate(dH, s / 2 + deviation_at_sigma(sigma0) + (k_ == 2 ? -c1_ * std::log(s) : 0.0));
  }

  /// phi(tau) = P(tau) / tau^(k-1) as a jet in tau at tau(s).
  Taylor<double, 2> phi_jet(double s) const {
    const auto sigma = Taylor<double, 2>::variable(flat_ ? s / 2 : sigma_of_s(s));
    Taylor<double, 2> P(shifted_[k_]);
    for (int j = k_ - 1; j >= 0; --j) P = P * sigma + shifted_[j];
    return P / powi(sigma + base_, k_ - 1);
  }

  /// Scalar curvature through phi(tau); zero up to rounding, and well conditioned near the cap.
  double scalar_curvature_at(double s) const {
    if (flat_) return 0;
    const auto phi = phi_jet(s);
    return scalar_curvature_from_phi(phi, base_ + sigma_of_s(s), k_);
  }

  /// H - s/2 (k >= 3) or H - s/2 - A log s (k = 2); tends to 0 at infinity.
  double deviation(double s) const { return flat_ ? 0 : deviation_at_sigma(sigma_of_s(s)); }

private:
  Jet4 sigma_jet(double s, double sigma0) const {
    auto x = Jet4::variable(s);
    if (flat_) return x * 0.5;
    Jet4 sigma(sigma0);
    for (int m = 1; m <= 4; ++m) {
      Jet4 P(shifted_[k_]);
      for (int j = k_ - 1; j >= 0; --j) P = P * sigma + shifted_[j];
      Jet4 rate = P / powi(base_ + sigma, k_ - 1) / x;
      sigma[m] = rate[m - 1] / m;
    }
    return sigma;
  }

  static std::complex<double> log1p_complex(std::complex<double> z) {
    const double x = z.real(), y = z.imag();
    return {0.5 * std::log1p(2 * x + x * x + y * y), std::atan2(y, 1 + x)};
  }

  static double eval_series(const std::vector<double>& c, double x) {
    double acc = 0;
    for (std::size_t m = c.size(); m-- > 0;) acc = acc * x + c[m];
    return acc;
  }

  // dD/dtau where D = H - s/2 (- A log s when k = 2).
  double deviation_rate(double sigma) const {
    const double tau = base_ + sigma;
    const double a_log = k_ == 2 ? -c1_ : 0.0;
    double P = shifted_[k_];
    for (int j = k_ - 1; j >= 0; --j) P = P * sigma + shifted_[j];
    return (-tau * std::expm1(-J(sigma)) - a_log) * std::pow(tau, k_ - 1) / P;
  }

  double deviation_at_sigma(double sigma0) const {
    const double tau0 = base_ + sigma0;
    if (tau0 >= far_) return eval_series(d_series_, 1 / tau0);
    // D(tau0) = D(far) - integral over [tau0, far], in u = log sigma to absorb the cap end.
    auto integrand = [&](double u) {
      const double sigma = std::exp(u);
      return deviation_rate(sigma) * sigma;
    };
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, std::log(sigma0), std::log(far_ - base_), 12, 1e-13, &err);
    return eval_series(d_series_, 1 / far_) - v;
  }

  // Expansions of J and D in x = 1/tau, valid for tau > max |root|.
  void build_series() {
    constexpr int M = 80;
    std::vector<double> inv(M + 2, 0.0); // 1 / (1 + c1 x^(k-1) + c2 x^k)
    inv[0] = 1;
    for (int m = 1; m <= M + 1; ++m) {
      double v = 0;
      if (m >= k_ - 1) v -= c1_ * inv[m - (k_ - 1)];
      if (m >= k_) v -= c2_ * inv[m - k_];
      inv[m] = v;
    }
    // 1/phi - 1/u = -sum a_m u^-m
    std::vector<double> a(M + 2, 0.0);
    for (int m = 0; m <= M + 1; ++m) {
      double v = 0;
      if (m >= k_) v += c1_ * inv[m - k_];
      if (m >= k_ + 1) v += c2_ * inv[m - k_ - 1];
      a[m] = v;
    }
    j_series_.assign(M + 1, 0.0);
    for (int m = 2; m <= M + 1; ++m) j_series_[m - 1] = -a[m] / (m - 1);
    // e = exp(-J)
    std::vector<double> e(M + 1, 0.0);
    e[0] = 1;
    for (int m = 1; m <= M; ++m) {
      double v = 0;
      for (int i = 1; i <= m; ++i) v -= i * j_series_[i] * e[m - i];
      e[m] = v / m;
    }
    // tau (1 - e) - a_log
    std::vector<double> num(M, 0.0);
    for (int m = 0; m < M; ++m) num[m] = -e[m + 1];
    num[0] -= k_ == 2 ? -c1_ : 0.0;
    // dD/du = x num / (1 + q), then D = -integral_tau^inf
    d_series_.assign(M, 0.0);
    for (int m = 2; m <= M; ++m) {
      double rate = 0;
      for (int i = 0; i <= m - 1; ++i) rate += num[m - 1 - i] * inv[i];
      d_series_[m - 1] = -rate / (m - 1);
    }
    double R = 0;
    for (auto r : roots_) R = std::max(R, std::abs(r));
    far_ = std::max(3 * R, base_ + 1e-300);
    if (far_ <= base_) far_ = 2 * base_;
  }

  void find_roots() {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k_, k_);
    for (int i = 1; i < k_; ++i) companion(i, i - 1) = 1;
    // P(u) = u^k + c1 u + c2
    companion(0, k_ - 1) = -c2_;
    if (k_ >= 2) companion(1, k_ - 1) -= c1_;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    const double scale = 1 + std::pow(std::abs(c1_), 1.0 / (k_ - 1)) + std::pow(std::abs(c2_), 1.0 / k_);
    for (int i = 0; i < k_; ++i) {
      std::complex<double> r = es.eigenvalues()[i];
      for (int it = 0; it < 50; ++it) { // Newton polish
        std::complex<double> p = std::pow(r, k_) + c1_ * r + c2_;
        std::complex<double> dp = double(k_) * std::pow(r, k_ - 1) + c1_;
        if (std::abs(dp) == 0) break;
        auto step = p / dp;
        r -= step;
        if (std::abs(step) < 1e-17 * scale) break;
      }
      if (std::abs(r.imag()) < 1e-12 * scale) r = {r.real(), 0.0};
      roots_.push_back(r);
    }
    for (std::size_t i = 0; i < roots_.size(); ++i)
      for (std::size_t j = i + 1; j < roots_.size(); ++j)
        if (std::abs(roots_[i] - roots_[j]) < 1e-6 * scale)
          throw numerical_failure("profile polynomial has a repeated root");
    base_ = 0;
    cap_index_ = -1;
    for (std::size_t i = 0; i < roots_.size(); ++i)
      if (roots_[i].imag() == 0 && roots_[i].real() >= base_ && roots_[i].real() > 0) {
        base_ = roots_[i].real();
        cap_index_ = static_cast<int>(i);
      }
    for (auto r : roots_) weights_.push_back(std::pow(r, k_ - 1) / (double(k_) * std::pow(r, k_ - 1) + c1_));
    // Coefficients of P(base + sigma) in sigma.
    std::vector<double> coef(k_ + 1, 0.0); // coef[j] multiplies u^j
    coef[k_] = 1;
    coef[1] += c1_;
    coef[0] += c2_;
    shifted_ = coef;
    for (int i = 0; i < k_; ++i)
      for (int j = k_ - 1; j >= i; --j) shifted_[j] += base_ * shifted_[j + 1];
    if (cap_index_ >= 0) shifted_[0] = 0;
    build_series();
  }

  int k_;
  double c1_, c2_;
  bool flat_ = false;
  double base_ = 0;
  int cap_index_ = -1;
  std::vector<std::complex<double>> roots_;
  std::vector<std::complex<double>> weights_;
  std::vector<double> shifted_{0.0, 0.0, 0.5};
  std::vector<double> j_series_, d_series_;
  double far_ = std::numeric_limits<double>::infinity();
};

} // namespace wpsglue
