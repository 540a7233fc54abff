#pragma once

#include "wpsglue/ale.hpp"
#include "wpsglue/errors.hpp"
#include "wpsglue/radial.hpp"
#include "wpsglue/taylor.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wpsglue {

// ---------------------------------------------------------------------------
// Cutoffs

namespace detail {
inline double value_of(double x) { return x; }
inline long double value_of(long double x) { return x; }
template <class T, int N>
double value_of(const Taylor<T, N>& x) {
  return static_cast<double>(x.value());
}

/// exp(-a/x) for x > 0, zero otherwise.
template <class T>
T cutoff_psi(const T& x, double a) {
  using std::exp;
  if (!(value_of(x) > 0)) return T(0);
  return exp(T(-a) / x);
}
} // namespace detail

/// 1 on (-inf, 1], 0 on [2, inf), psi(2 - t) / (psi(2 - t) + psi(t - 1)) in between, with
/// psi(x) = exp(-a/x). Works for double, long double and Taylor jets.
template <class T>
T cutoff_gamma1(const T& t, double sharpness = 1) {
  const double v = detail::value_of(t);
  if (v <= 1) return T(1);
  if (v >= 2) return T(0);
  const T p = detail::cutoff_psi(T(2) - t, sharpness), q = detail::cutoff_psi(t - T(1), sharpness);
  return p / (p + q);
}

/// 0 on (-inf, 1], 1 on [2, inf).
template <class T>
T cutoff_gamma2(const T& t, double sharpness = 1) {
  return T(1) - cutoff_gamma1(t, sharpness);
}

// ---------------------------------------------------------------------------
// Configuration

enum class GluingProfile {
  ExactALE,  ///< the scalar-flat ALE metric with coefficient A (default)
  Truncated, ///< only the leading term A t^(4-2k) (or A log t); degenerates near d ~ eps
};

inline std::string to_string(GluingProfile p) { return p == GluingProfile::ExactALE ? "exact" : "truncated"; }

struct GluingConfig {
  int k = 3;
  double eps = 1e-3;
  double A = 1;
  std::optional<double> delta;   ///< defaults to 4 - 2k + 0.1
  double cutoff = 1;             ///< sharpness a in exp(-a/x)
  int points_per_decade = 64;
  GluingProfile profile = GluingProfile::ExactALE;
  bool green_correction = false; ///< keep the leading term uncut (see glued model below)

  double r_eps() const { return std::pow(eps, 2.0 * k / (2.0 * k + 1)); }
  double weight_exponent() const { return delta.value_or(4.0 - 2 * k + 0.1); }

  void validate() const {
    detail::check_dimension(k);
    if (!(eps > 0) || !std::isfinite(eps)) throw invalid_input("eps must be positive");
    if (!std::isfinite(A)) throw invalid_input("A must be finite");
    if (!(cutoff > 0)) throw invalid_input("cutoff sharpness must be positive");
    if (points_per_decade < 32) throw invalid_input("grid needs at least 32 points per decade");
    const double d = weight_exponent();
    if (!(d > 4 - 2 * k)) throw invalid_input("delta must exceed 4 - 2k");
    // for k = 2 the interval (4 - 2k, 0) is empty; only the lower bound is enforced there
    if (k >= 3 && !(d < 0)) throw invalid_input("delta must be negative");
  }
};

// ---------------------------------------------------------------------------
// Glued potential

/// The glued potential in the rescaled variable sigma = s / eps^2, where
///   Phi(s) = eps^2 Psi(s / eps^2),  Psi(sigma) = sigma/2 + gamma1(sqrt(sigma) / rho) F(sigma),
/// rho = r_eps / eps and F = H_ALE - sigma/2 (so eps^2 F(s/eps^2) = eps^2 f(d/eps)).
/// With green_correction, Psi = sigma/2 + F_lead + gamma1 (F - F_lead): the decaying leading
/// term is kept on the whole space and only the remainder is cut off.
/// Metric eigenvalues are the same for Phi at s and Psi at sigma; S scales by 1/eps^2.
class GluedModel {
public:
  explicit GluedModel(const GluingConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    rho_ = cfg.r_eps() / cfg.eps;
    lead_ = cfg.k == 2 ? cfg.A / 2 : cfg.A; // coefficient of sigma^(2-k) or of log sigma
    if (cfg.profile == GluingProfile::ExactALE)
      ale_.emplace(ScalarFlatALE::with_coefficient(cfg.k, lead_, ScalarFlatALE::default_cap_order(cfg.k, lead_)));
  }

  const GluingConfig& config() const { return cfg_; }
  int dimension() const { return cfg_.k; }
  double rho() const { return rho_; }
  const std::optional<ScalarFlatALE>& ale() const { return ale_; }

  bool in_domain(double sigma) const {
    if (!(sigma > 0)) return false;
    // the truncated model is only meaningful for d >= eps/10
    return cfg_.profile == GluingProfile::ExactALE || sigma >= 0.01 * (1 - 1e-12);
  }

  /// Which closed form applies at t = d / eps.
  enum class Piece { Inner, Transition, Outer };
  Piece piece(double t) const {
    if (t <= rho_) return Piece::Inner;
    if (t >= 2 * rho_) return Piece::Outer;
    return Piece::Transition;
  }

  Jet4 jet(double sigma) const {
    if (!in_domain(sigma)) throw invalid_input("sigma outside the glued model's domain");
    const auto x = Jet4::variable(sigma);
    const double t = std::sqrt(sigma);
    switch (piece(t)) {
    case Piece::Inner:
      return inner_jet(sigma);
    case Piece::Outer:
      return cfg_.green_correction ? x * 0.5 + lead_jet(sigma) : x * 0.5;
    case Piece::Transition:
      break;
    }
    const Jet4 gamma = cutoff_gamma1(sqrt(x) / rho_, cfg_.cutoff);
    const Jet4 F = inner_jet(sigma) - x * 0.5;
    if (cfg_.green_correction) {
      const Jet4 lead = lead_jet(sigma);
      return x * 0.5 + lead + gamma * (F - lead);
    }
    return x * 0.5 + gamma * F;
  }

  /// tau = sigma Psi'. Inside the cutoff the ALE profile supplies it directly, which keeps
  /// the radial eigenvalue accurate near the cap.
  Jet3 tau_jet(double sigma) const {
    if (!in_domain(sigma)) throw invalid_input("sigma outside the glued model's domain");
    if (ale_ && piece(std::sqrt(sigma)) == Piece::Inner) return ale_->tau_jet(sigma);
    return tau_jet_from_jet(jet(sigma), sigma);
  }

  /// Scalar curvature of Psi at sigma (Phi's is this divided by eps^2).
  double scalar_curvature_at(double sigma) const {
    if (!in_domain(sigma)) throw invalid_input("sigma outside the glued model's domain");
    if (ale_ && piece(std::sqrt(sigma)) == Piece::Inner) return ale_->scalar_curvature_at(sigma);
    return scalar_curvature_from_tau_jet(tau_jet(sigma), sigma, cfg_.k);
  }

private:
  Jet4 lead_jet(double sigma) const {
    const auto x = Jet4::variable(sigma);
    if (cfg_.k == 2) return lead_ * log(x);
    return lead_ * pow(x, 2.0 - cfg_.k);
  }

  Jet4 inner_jet(double sigma) const {
    if (ale_) return ale_->jet(sigma);
    return Jet4::variable(sigma) * 0.5 + lead_jet(sigma);
  }

  GluingConfig cfg_;
  double rho_ = 1;
  double lead_ = 0;
  std::optional<ScalarFlatALE> ale_;
};

/// Phi(s) in the original variable; a RadialProfile usable with the generic radial tools.
class GluedPotential {
public:
  explicit GluedPotential(const GluingConfig& cfg) : model_(cfg), e2_(cfg.eps * cfg.eps) {}

  int dimension() const { return model_.dimension(); }
  bool in_domain(double s) const { return model_.in_domain(s / e2_); }
  Jet4 jet(double s) const { return rescale(model_.jet(s / e2_), e2_) * e2_; }
  Jet3 tau_jet(double s) const { return rescale(model_.tau_jet(s / e2_), e2_) * e2_; }
  double scalar_curvature_at(double s) const { return model_.scalar_curvature_at(s / e2_) / e2_; }
  const GluedModel& model() const { return model_; }

private:
  GluedModel model_;
  double e2_;
};

// ---------------------------------------------------------------------------
// Regions

enum class RegionScheme { ThreeRegion, FourRegion };

/// Region index (1-based). Ties go to the lower index.
inline int region_of(double d, const GluingConfig& cfg, RegionScheme scheme) {
  if (!(d > 0)) throw invalid_input("distance must be positive");
  const double r = cfg.r_eps();
  if (scheme == RegionScheme::ThreeRegion) {
    if (d <= r) return 1;
    if (d <= 2 * r) return 2;
    return 3;
  }
  if (d <= cfg.eps) return 1;
  if (d <= r) return 2;
  if (d <= 2 * r) return 3;
  return 4;
}

/// Samples t = d/eps = 0.1 * 10^(j/ppd) up to the first point at or beyond 10 r_eps / eps,
/// plus 4 ppd uniform points across the cutoff annulus, where S oscillates on a scale much
/// finer than the log grid. The log part does not depend on eps, so the inner region is
/// sampled at identical points across an eps sweep.
inline std::vector<double> grid_t(const GluingConfig& cfg, int points_per_decade = 0) {
  const int ppd = points_per_decade > 0 ? points_per_decade : cfg.points_per_decade;
  const double rho = cfg.r_eps() / cfg.eps;
  const double t_max = 10 * rho;
  std::vector<double> out;
  for (int j = 0;; ++j) {
    const double t = 0.1 * std::pow(10.0, static_cast<double>(j) / ppd);
    out.push_back(t);
    if (t >= t_max) break;
  }
  const int m = 4 * ppd;
  for (int i = 1; i < m; ++i) out.push_back(rho * (1 + static_cast<double>(i) / m));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct PointEvaluation {
  double t = 0;
  double d = 0;
  MetricEigenvalues eig;
  double S = 0; ///< scalar curvature of Phi at s = d^2
};

/// Eigenvalues and curvature at d = eps t, computed on the rescaled model.
inline PointEvaluation evaluate_at(const GluedModel& m, double t) {
  const auto& cfg = m.config();
  const double sigma = t * t;
  const Jet3 tau = m.tau_jet(sigma);
  PointEvaluation p{t, cfg.eps * t, eigenvalues_from_tau_jet(tau, sigma), 0};
  if (!p.eig.positive()) throw numerical_failure("degenerate metric at d = " + std::to_string(p.d));
  p.S = m.scalar_curvature_at(sigma) / (cfg.eps * cfg.eps);
  return p;
}

// ---------------------------------------------------------------------------
// Positivity

struct PositivityResult {
  double min_margin = std::numeric_limits<double>::infinity();
  double argmin_d = 0;
};

/// Smallest metric eigenvalue over the grid. A non-positive eigenvalue is reported as data.
inline PositivityResult positivity_scan(const GluingConfig& cfg) {
  GluedModel m(cfg);
  PositivityResult out;
  for (double t : grid_t(cfg)) {
    const double sigma = t * t;
    const auto e = eigenvalues_from_tau_jet(m.tau_jet(sigma), sigma);
    const double v = e.min();
    if (v < out.min_margin || std::isnan(v)) {
      out.min_margin = v;
      out.argmin_d = cfg.eps * t;
      if (std::isnan(v)) break;
    }
  }
  return out;
}

struct SweepEntry {
  double eps = 0;
  PositivityResult result;
};

struct PositivitySweep {
  std::vector<SweepEntry> entries;
  std::optional<double> first_failure; ///< first eps with margin <= 0
};

/// Doubles eps from eps_start until positivity fails or eps exceeds eps_stop.
inline PositivitySweep positivity_sweep(GluingConfig cfg, double eps_start, double eps_stop) {
  if (!(eps_start > 0) || !(eps_stop >= eps_start)) throw invalid_input("need 0 < eps_start <= eps_stop");
  PositivitySweep out;
  for (double e = eps_start; e <= eps_stop * (1 + 1e-12); e *= 2) {
    cfg.eps = e;
    auto r = positivity_scan(cfg);
    out.entries.push_back({e, r});
    if (!(r.min_margin > 0)) {
      out.first_failure = e;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar curvature by region

struct RegionSample {
  double d = 0;
  int region = 0; ///< four-region index
  double S = 0;
  double d_abs_S = 0;
  double weighted_S = 0; ///< rho^(4 - delta) |S| with rho = sqrt(d^2 + eps^2)
  double eig_min = 0;
};

struct RegionStats {
  int region = 0;
  std::size_t count = 0;
  double sup_abs_S = 0;
  double sup_d_abs_S = 0;
  double sup_weighted_S = 0;
  double min_margin = std::numeric_limits<double>::infinity();
};

struct RegionReport {
  GluingConfig config;
  double r_eps = 0;
  double delta = 0;
  std::array<RegionStats, 4> regions{};
  std::vector<RegionSample> samples;
  double refinement_change = 0; ///< largest relative change of a sup when the grid density doubles

  double sup_weighted_S() const {
    double v = 0;
    for (const auto& r : regions) v = std::max(v, r.sup_weighted_S);
    return v;
  }
  /// Stats merged into the three-region scheme (its region 1 is four-region 1 and 2).
  std::array<RegionStats, 3> three_region() const {
    std::array<RegionStats, 3> out{};
    for (int i = 0; i < 3; ++i) out[i].region = i + 1;
    for (const auto& r : regions) {
      auto& o = out[r.region <= 2 ? 0 : r.region - 2];
      o.count += r.count;
      o.sup_abs_S = std::max(o.sup_abs_S, r.sup_abs_S);
      o.sup_d_abs_S = std::max(o.sup_d_abs_S, r.sup_d_abs_S);
      o.sup_weighted_S = std::max(o.sup_weighted_S, r.sup_weighted_S);
      o.min_margin = std::min(o.min_margin, r.min_margin);
    }
    return out;
  }
};

namespace detail {
inline RegionSample region_sample(const GluedModel& m, double t) {
  const auto& cfg = m.config();
  const auto p = evaluate_at(m, t);
  const double rho2 = p.d * p.d + cfg.eps * cfg.eps;
  const double w = std::pow(rho2, (4 - cfg.weight_exponent()) / 2);
  return {p.d, region_of(p.d, cfg, RegionScheme::FourRegion), p.S, p.d * std::abs(p.S), w * std::abs(p.S),
          p.eig.min()};
}

/// Grid sups per region, each polished by a local 1-d maximization around its grid argmax
/// (kept inside the region), so the reported sups do not hinge on where grid points fall.
inline std::array<RegionStats, 4> region_stats(const GluedModel& m, const std::vector<double>& ts,
                                               std::vector<RegionSample>* samples) {
  const auto& cfg = m.config();
  std::array<RegionStats, 4> st{};
  for (int i = 0; i < 4; ++i) st[i].region = i + 1;
  std::vector<RegionSample> all;
  all.reserve(ts.size());
  for (double t : ts) all.push_back(region_sample(m, t));

  // region boundaries in t
  const std::array<double, 5> edge{0.0, 1.0, cfg.r_eps() / cfg.eps, 2 * cfg.r_eps() / cfg.eps,
                                   std::numeric_limits<double>::infinity()};
  using Field = double RegionSample::*;
  const std::array<Field, 3> fields{&RegionSample::S, &RegionSample::d_abs_S, &RegionSample::weighted_S};
  for (int reg = 1; reg <= 4; ++reg) {
    auto& s = st[reg - 1];
    std::array<double, 3> best{0, 0, 0};
    std::array<std::size_t, 3> arg{};
    for (std::size_t j = 0; j < all.size(); ++j) {
      const auto& x = all[j];
      if (x.region != reg) continue;
      ++s.count;
      s.min_margin = std::min(s.min_margin, x.eig_min);
      for (int f = 0; f < 3; ++f) {
        const double v = std::abs(x.*fields[f]);
        if (v > best[f] || s.count == 1) {
          best[f] = std::max(best[f], v);
          arg[f] = j;
        }
      }
    }
    if (s.count == 0) continue;
    for (int f = 0; f < 3; ++f) {
      const std::size_t j = arg[f];
      if (best[f] == 0) continue;
      double lo = j > 0 ? ts[j - 1] : ts[j], hi = j + 1 < ts.size() ? ts[j + 1] : ts[j];
      lo = std::max(lo, edge[reg - 1] * (1 + 1e-12));
      hi = std::min(hi, edge[reg]);
      if (!(hi > lo)) continue;
      auto neg = [&](double u) { return -std::abs(region_sample(m, std::exp(u)).*fields[f]); };
      auto r = boost::math::tools::brent_find_minima(neg, std::log(lo), std::log(hi), 40);
      best[f] = std::max(best[f], -r.second);
    }
    s.sup_abs_S = best[0];
    s.sup_d_abs_S = best[1];
    s.sup_weighted_S = best[2];
  }
  if (samples) *samples = std::move(all);
  return st;
}
} // namespace detail

/// Relative size below which a region sup counts as round-off in the refinement check.
inline constexpr double kRoundoffFraction = 1e-9;

/// Per-region sups of |S|, d |S| and rho^(4-delta) |S| over the grid, with a grid-doubling
/// check recorded in refinement_change.
inline RegionReport scalar_error_report(const GluingConfig& cfg) {
  GluedModel m(cfg);
  RegionReport rep;
  rep.config = cfg;
  rep.r_eps = cfg.r_eps();
  rep.delta = cfg.weight_exponent();
  rep.regions = detail::region_stats(m, grid_t(cfg), &rep.samples);
  const auto fine = detail::region_stats(m, grid_t(cfg, 2 * cfg.points_per_decade), nullptr);
  // Sups far below the largest one of the same kind are round-off of an exact zero (the
  // metric is scalar-flat inside the cutoff and flat outside); they are not compared.
  using Field = double RegionStats::*;
  for (Field f : {&RegionStats::sup_abs_S, &RegionStats::sup_d_abs_S, &RegionStats::sup_weighted_S}) {
    double top = 0;
    for (int i = 0; i < 4; ++i) top = std::max({top, rep.regions[i].*f, fine[i].*f});
    for (int i = 0; i < 4; ++i) {
      const double x = rep.regions[i].*f, y = fine[i].*f, scale = std::max(x, y);
      if (scale > kRoundoffFraction * top) rep.refinement_change = std::max(rep.refinement_change, std::abs(x - y) / scale);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rate fits

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares of log value against log r_eps, r_eps = eps^(2k/(2k+1)).
inline RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs, int k) {
  if (pairs.size() < 4) throw invalid_input("rate fit needs at least 4 pairs");
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0;
  std::vector<double> xs, ys;
  for (auto [e, v] : pairs) {
    if (!(e > 0)) throw invalid_input("eps must be positive");
    if (!(v > 0)) throw invalid_input("rate fit needs positive values");
    xs.push_back(2.0 * k / (2.0 * k + 1) * std::log(e));
    ys.push_back(std::log(v));
    sx += xs.back();
    sy += ys.back();
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw invalid_input("rate fit needs distinct eps values");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

} // namespace wpsglue
