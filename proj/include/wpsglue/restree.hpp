#pragma once

#include "wpsglue/errors.hpp"
#include "wpsglue/rational.hpp"
#include "wpsglue/weights.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace wpsglue {

// ---------------------------------------------------------------------------
// Resolution trees

/// NonIsolated marks a child whose normalized weights are not pairwise coprime;
/// the recursion has no well-defined next step there.
enum class NodeStatus { SmoothLeaf, Interior, CycleDetected, DepthExceeded, NonIsolated };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::SmoothLeaf: return "SmoothLeaf";
    case NodeStatus::Interior: return "Interior";
    case NodeStatus::CycleDetected: return "CycleDetected";
    case NodeStatus::DepthExceeded: return "DepthExceeded";
    case NodeStatus::NonIsolated: return "NonIsolated";
  }
  return "?";
}

struct ResolutionNode {
  WeightVector weights;
  NodeStatus status = NodeStatus::Interior;
  std::vector<ResolutionNode> children;
};

struct ResolutionTree {
  ResolutionNode root;
  bool is_type_I = false;
  int depth = 0;
  int node_count = 0;
};

/// Of the form (m, 1, ..., 1).
inline bool is_smooth_model(const WeightVector& v) {
  return std::all_of(v.w.begin(), v.w.end(), [](auto x) { return x == 1; });
}

namespace detail {
inline WeightVector child_raw(const WeightVector& v, std::size_t i) {
  if (i < 1 || i > v.n()) throw invalid_input("branch index out of range");
  auto ai = v.at(i);
  if (ai == 1) throw invalid_input("no singular point at index " + std::to_string(i) + " (weight 1)");
  WeightVector c = v;
  c.w0 = ai;
  c.w[i - 1] = mod_positive(-v.w0, ai);
  if (c.w[i - 1] == 0) c.w[i - 1] = ai;
  return c;
}
} // namespace detail

/// Weighted blow-up step at the point with weight a_i: (a_i, a_1, .., x, .., a_n) with
/// x = -a_0 mod a_i, then normalized.
inline WeightVector child(const WeightVector& v, std::size_t i) {
  return normalize(detail::child_raw(v, i));
}

namespace detail {
struct TreeBuilder {
  int max_depth;
  int max_seen = 0;
  int count = 0;
  std::vector<WeightVector> path;

  ResolutionNode visit(const WeightVector& v, int depth) {
    ++count;
    max_seen = std::max(max_seen, depth);
    ResolutionNode node{v, NodeStatus::Interior, {}};
    auto same = [&](const WeightVector& p) { return p.w0 == v.w0 && p.w == v.w; };
    if (is_smooth_model(v)) {
      node.status = NodeStatus::SmoothLeaf;
    } else if (std::any_of(path.begin(), path.end(), same)) {
      node.status = NodeStatus::CycleDetected;
    } else if (!has_isolated_singularities(v)) {
      node.status = NodeStatus::NonIsolated;
    } else if (depth >= max_depth) {
      node.status = NodeStatus::DepthExceeded;
    } else {
      path.push_back(v);
      for (std::size_t i = 1; i <= v.n(); ++i) {
        if (v.at(i) == 1) continue;
        auto raw = child_raw(v, i);
        bool reducible = std::none_of(raw.w.begin(), raw.w.end(), [&](auto x) { return x % raw.w0 == 0; });
        node.children.push_back(visit(reducible ? normalize(raw) : raw, depth + 1));
      }
      path.pop_back();
    }
    return node;
  }
};

inline bool all_leaves_smooth(const ResolutionNode& n) {
  if (n.children.empty()) return n.status == NodeStatus::SmoothLeaf;
  return std::all_of(n.children.begin(), n.children.end(), all_leaves_smooth);
}
} // namespace detail

/// Branch weights strictly decrease, so depth never exceeds w0; the limit is only a guard.
inline constexpr int kDefaultMaxDepth = 1024;

/// Depth-first expansion of every singular point. The root is stored normalized.
inline ResolutionTree build_tree(const WeightVector& v, int max_depth = kDefaultMaxDepth) {
  if (max_depth < 0) throw invalid_input("max_depth must be nonnegative");
  if (auto f = find_shared_factor(v)) throw invalid_input("singularities are not isolated: " + describe(*f));
  detail::TreeBuilder b{max_depth, 0, 0, {}};
  ResolutionTree t;
  t.root = b.visit(normalize(v), 0);
  t.is_type_I = detail::all_leaves_smooth(t.root);
  t.depth = b.max_seen;
  t.node_count = b.count;
  return t;
}

/// Chain (p, q, 1, ..., 1) -> (q, -p mod q, 1, ..., 1) -> ... ending at (p_N, 1, ..., 1),
/// computed directly from the Euclidean-type recursion. Each vector has n entries after p.
inline std::vector<WeightVector> euclidean_chain(std::int64_t p, std::int64_t q, std::size_t n) {
  if (n < 2) throw invalid_input("n must be at least 2");
  if (!(p > q && q >= 1)) throw invalid_input("need p > q >= 1");
  if (std::gcd(p, q) != 1) throw invalid_input("p and q must be coprime");
  std::vector<WeightVector> chain;
  while (true) {
    std::vector<std::int64_t> w(n, 1);
    w[0] = q;
    chain.push_back(WeightVector{SpaceKind::NonCompact, p, w});
    if (q == 1) break;
    auto next_q = mod_positive(-p, q);
    p = q;
    q = next_q;
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Topological constants

/// Coefficient of -[E] in c1 of the weighted blow-up: sum(w_i)/w0 - 1.
inline Rational chern_coefficient(const WeightVector& v) {
  Integer sum = 0;
  for (auto x : v.w) sum += x;
  return Rational(sum, Integer(v.w0)) - 1;
}

/// Intersection numbers on the blow-up. `vol` is the top power of the base Kähler
/// class; `I` is the integral over E of [w]^(n-k) [E]^(k-1). Optional extras feed
/// the expansion oracle: `higher[j]` is the integral over E of [w]^(n-1-j) [E]^j for
/// j >= k, and `base_chern` is the integral of c1(X) [w]^(n-1).
struct IntersectionData {
  int n = 0;
  int k = 0;
  Rational vol = 1;
  Rational I = 0;
  std::map<int, Rational> higher;
  std::optional<Rational> base_chern;
};

/// value * pi^pi_power
struct LambdaResult {
  Rational value;
  int pi_power = 1;
  bool operator==(const LambdaResult&) const = default;
};

namespace detail {
inline void check_lambda_inputs(const WeightVector& v, const IntersectionData& d) {
  if (d.k != static_cast<int>(v.n()))
    throw invalid_input("codimension k must equal the number of weights (" + std::to_string(v.n()) + ")");
  if (d.k < 3 || d.k > d.n) throw invalid_input("need 3 <= k <= n");
  if (d.vol <= 0) throw invalid_input("Vol must be positive");
}
} // namespace detail

/// Coefficient of eps^(2k-2) in the scalar curvature of the class [w] - eps^2 [E]:
/// (4 pi n / Vol) * chern_coefficient * C(n-1, k-1) * (-1)^k * I.
/// Sign: the e-degree-k term of c1 [w]^(n-1) is -chern * C(n-1,k-1) (-eps^2)^(k-1) e^k,
/// and e^k [w]^(n-k) integrates to I.
inline LambdaResult lambda_constant(const WeightVector& v, const IntersectionData& d) {
  detail::check_lambda_inputs(v, d);
  Rational sign = d.k % 2 == 0 ? 1 : -1;
  Rational value = Rational(4 * d.n) / d.vol * chern_coefficient(v) * Rational(binomial(d.n - 1, d.k - 1)) * sign * d.I;
  return {value, 1};
}

/// The closed form written with (-1)^(k-1) instead of (-1)^k. It is always
/// -lambda_constant and disagrees with expansion_oracle; kept for comparison only.
inline LambdaResult published_lambda_constant(const WeightVector& v, const IntersectionData& d) {
  auto r = lambda_constant(v, d);
  r.value = -r.value;
  return r;
}

// ---------------------------------------------------------------------------
// Expansion oracle

/// constant + sum(coeff * symbol), exact.
struct LinearForm {
  Rational constant = 0;
  std::map<std::string, Rational> terms;

  bool is_constant() const { return terms.empty(); }
  LinearForm& operator+=(const LinearForm& o) {
    constant += o.constant;
    for (const auto& [s, c] : o.terms) {
      auto& slot = terms[s];
      slot += c;
      if (slot == 0) terms.erase(s);
    }
    return *this;
  }
  LinearForm operator*(const Rational& r) const {
    LinearForm out;
    if (r == 0) return out;
    out.constant = constant * r;
    for (const auto& [s, c] : terms) out.terms[s] = c * r;
    return out;
  }
  bool operator==(const LinearForm&) const = default;
};

inline std::string to_string(const LinearForm& f) {
  std::string out = to_string(f.constant);
  for (const auto& [s, c] : f.terms) out += " + (" + to_string(c) + ")*" + s;
  return out;
}

/// Coefficients of eps^(2i), i = 0..k-1, of 4 n * c1(X^) [w^]^(n-1) / [w^]^n in units of pi.
/// Unknown intersection numbers stay symbolic: "K" (c1 [w]^(n-1) on X), "I_m" and "P_m"
/// (integrals over E of [w]^(n-1-m) e^m and c [w]^(n-2-m) e^m).
struct ExpansionResult {
  std::vector<LinearForm> coefficients;
  std::vector<LinearForm> volume_coefficients; ///< of [w^]^n, i = 0..k-1
};

namespace detail {
/// Monomial c^a h^b e^j in the degree-n part of the ring generated by the pulled-back
/// Chern class c, the base class h and the exceptional class e.
struct Monomial {
  int a, b, j;
  auto operator<=>(const Monomial&) const = default;
};
using Poly = std::map<Monomial, Rational>;

inline Poly multiply(const Poly& x, const Poly& y) {
  Poly out;
  for (const auto& [mx, cx] : x)
    for (const auto& [my, cy] : y) {
      Monomial m{mx.a + my.a, mx.b + my.b, mx.j + my.j};
      out[m] += cx * cy;
    }
  return out;
}

/// Integral of a degree-n monomial on the blow-up.
inline LinearForm evaluate(const Monomial& m, const IntersectionData& d) {
  LinearForm out;
  if (m.a > 1) throw invalid_input("oracle supports at most one Chern factor");
  if (m.j == 0) {
    if (m.a == 0) {
      out.constant = d.vol;
    } else if (d.base_chern) {
      out.constant = *d.base_chern;
    } else {
      out.terms["K"] = 1;
    }
    return out;
  }
  // e^j = (e|_E)^(j-1) on E; classes from the base only see the (n-k)-dimensional centre.
  int m_e = m.j - 1;
  if (m_e < d.k - 1) return out;
  if (m.a == 0) {
    if (m_e == d.k - 1) {
      out.constant = d.I;
    } else if (auto it = d.higher.find(m_e); it != d.higher.end()) {
      out.constant = it->second;
    } else {
      out.terms["I_" + std::to_string(m_e)] = 1;
    }
  } else {
    out.terms["P_" + std::to_string(m_e)] = 1;
  }
  return out;
}
} // namespace detail

/// Brute-force expansion by repeated multiplication in the truncated ring; independent of
/// the binomial closed form used by lambda_constant.
inline ExpansionResult expansion_oracle(const WeightVector& v, const IntersectionData& d) {
  detail::check_lambda_inputs(v, d);
  using detail::Monomial;
  using detail::Poly;
  const Rational kappa = chern_coefficient(v);
  // Polynomials in (c, h, e) whose coefficients are themselves polynomials in eps^2:
  // store eps-degree as a separate index.
  std::vector<Poly> kahler(2); // h - eps^2 e
  kahler[0][{0, 1, 0}] = 1;
  kahler[1][{0, 0, 1}] = -1;
  auto mul = [](const std::vector<Poly>& x, const std::vector<Poly>& y) {
    std::vector<Poly> out(x.size() + y.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        for (const auto& [m, c] : detail::multiply(x[i], y[j])) out[i + j][m] += c;
    return out;
  };
  std::vector<Poly> power(1);
  power[0][{0, 0, 0}] = 1;
  for (int i = 0; i < d.n - 1; ++i) power = mul(power, kahler);
  std::vector<Poly> chern(1); // c - kappa e
  chern[0][{1, 0, 0}] = 1;
  chern[0][{0, 0, 1}] = -kappa;
  auto numerator = mul(chern, power);
  auto volume = mul(power, kahler);

  auto integrate = [&](const Poly& p) {
    LinearForm out;
    for (const auto& [m, c] : p)
      if (c != 0) out += detail::evaluate(m, d) * c;
    return out;
  };

  ExpansionResult r;
  for (int i = 0; i < d.k; ++i) {
    r.volume_coefficients.push_back(integrate(volume.at(i)));
    r.coefficients.push_back(integrate(numerator.at(i)) * (Rational(4 * d.n) / d.vol));
  }
  for (int i = 1; i < d.k; ++i)
    if (!(r.volume_coefficients[i] == LinearForm{}))
      throw numerical_failure("volume expansion has a nonzero eps^" + std::to_string(2 * i) + " term");
  return r;
}

} // namespace wpsglue
