#pragma once

#include "wpsglue/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace wpsglue {

enum class SpaceKind { Compact, NonCompact };

/// Weight vector of a weighted projective space. `w0` is stored positive; the
/// non-compact space (-w0, w) is distinguished by `kind`.
struct WeightVector {
  SpaceKind kind = SpaceKind::NonCompact;
  std::int64_t w0 = 1;
  std::vector<std::int64_t> w;

  static WeightVector make(SpaceKind kind, std::int64_t w0, std::vector<std::int64_t> w) {
    if (w0 < 1) throw invalid_input("w0 must be a positive integer");
    if (w.size() < 2) throw invalid_input("a weight vector needs at least two weights after w0");
    for (auto x : w)
      if (x < 1) throw invalid_input("weights must be positive integers");
    return WeightVector{kind, w0, std::move(w)};
  }

  /// Number of weights after w0 (the complex dimension for the non-compact space).
  std::size_t n() const { return w.size(); }

  /// Entry by homogeneous index: 0 is w0, i >= 1 is w[i-1].
  std::int64_t at(std::size_t i) const { return i == 0 ? w0 : w.at(i - 1); }

  bool operator==(const WeightVector&) const = default;
};

enum class Notation { Paren, JsonArray };

struct ParsedWeights {
  WeightVector vector;
  Notation notation = Notation::Paren;
};

/// Parses "(-5,3,2,1)" or "[-5,3,2,1]". A negative first entry means non-compact.
inline ParsedWeights parse_weights(const std::string& text) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos >= text.size()) throw parse_error("empty weight vector", pos);
  char open = text[pos];
  if (open != '(' && open != '[') throw parse_error("expected '(' or '['", pos);
  char close = open == '(' ? ')' : ']';
  ++pos;

  std::vector<std::int64_t> values;
  std::vector<std::size_t> starts;
  while (true) {
    skip_ws();
    std::size_t start = pos;
    bool neg = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
      neg = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      throw parse_error("expected an integer", pos);
    std::int64_t v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (v > (INT64_MAX - 9) / 10) throw parse_error("integer too large", start);
      v = v * 10 + (text[pos] - '0');
      ++pos;
    }
    values.push_back(neg ? -v : v);
    starts.push_back(start);
    skip_ws();
    if (pos >= text.size()) throw parse_error(std::string("missing '") + close + "'", pos);
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] == close) {
      ++pos;
      break;
    }
    throw parse_error(std::string("expected ',' or '") + close + "'", pos);
  }
  skip_ws();
  if (pos != text.size()) throw parse_error("trailing characters", pos);
  if (values.size() < 3) throw parse_error("need w0 and at least two weights", 0);
  if (values[0] == 0) throw parse_error("w0 must be nonzero", starts[0]);
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < 1) throw parse_error("weights after w0 must be positive", starts[i]);

  SpaceKind kind = values[0] < 0 ? SpaceKind::NonCompact : SpaceKind::Compact;
  std::int64_t w0 = values[0] < 0 ? -values[0] : values[0];
  return {WeightVector::make(kind, w0, {values.begin() + 1, values.end()}),
          open == '(' ? Notation::Paren : Notation::JsonArray};
}

inline std::string format_weights(const WeightVector& v, Notation notation = Notation::Paren) {
  std::string out(1, notation == Notation::Paren ? '(' : '[');
  out += std::to_string(v.kind == SpaceKind::NonCompact ? -v.w0 : v.w0);
  for (auto x : v.w) out += "," + std::to_string(x);
  out += notation == Notation::Paren ? ')' : ']';
  return out;
}

/// Unsigned label "(a0,a1,...)" used for resolution-tree nodes.
inline std::string format_label(const WeightVector& v) {
  std::string out = "(" + std::to_string(v.w0);
  for (auto x : v.w) out += "," + std::to_string(x);
  return out + ")";
}

inline bool is_smooth(const WeightVector& v) {
  for (auto x : v.w)
    if (x != 1) return false;
  return v.kind == SpaceKind::NonCompact || v.w0 == 1;
}

/// A pair of homogeneous indices whose weights share a factor.
struct SharedFactor {
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t gcd = 1;
};

/// First pair (i < j) over indices 0..n with gcd > 1, in lexicographic order.
inline std::optional<SharedFactor> find_shared_factor(const WeightVector& v) {
  for (std::size_t i = 0; i <= v.n(); ++i)
    for (std::size_t j = i + 1; j <= v.n(); ++j) {
      auto g = std::gcd(v.at(i), v.at(j));
      if (g > 1) return SharedFactor{i, j, g};
    }
  return std::nullopt;
}

/// Pairwise coprimality over all homogeneous indices.
inline bool has_isolated_singularities(const WeightVector& v) { return !find_shared_factor(v); }

/// The quotient C^n / Z_{w0} with weights w has an isolated singularity at the origin.
inline bool isolated_at_origin(const WeightVector& v) {
  for (auto x : v.w)
    if (std::gcd(v.w0, x) != 1) return false;
  return true;
}

/// Singular point (non-compact case: support is the single coordinate index)
/// or singular stratum (compact case: support is the index set S).
struct SingularPoint {
  std::vector<std::size_t> support;
  std::int64_t group_order = 1;
  std::vector<std::int64_t> action_exponents;

  bool operator==(const SingularPoint&) const = default;
};

inline std::int64_t mod_positive(std::int64_t a, std::int64_t m) {
  auto r = a % m;
  return r < 0 ? r + m : r;
}

inline std::string describe(const SharedFactor& f) {
  return "weights at indices " + std::to_string(f.i) + " and " + std::to_string(f.j) +
         " share the factor " + std::to_string(f.gcd);
}

/// Non-compact: one point per i >= 1 with w_i != 1, exponents (-w0, w_j for j != i) mod w_i.
/// Compact: one record per nonempty support subset whose weights have gcd d > 1, exponents
/// w_j mod d for j outside the subset. The compact enumeration is 2^(n+1) - 1 subsets.
inline std::vector<SingularPoint> singular_points(const WeightVector& v) {
  std::vector<SingularPoint> out;
  if (v.kind == SpaceKind::NonCompact) {
    if (auto f = find_shared_factor(v)) throw invalid_input("singularities are not isolated: " + describe(*f));
    for (std::size_t i = 1; i <= v.n(); ++i) {
      auto d = v.at(i);
      if (d == 1) continue;
      SingularPoint p{{i}, d, {}};
      p.action_exponents.push_back(mod_positive(-v.w0, d));
      for (std::size_t j = 1; j <= v.n(); ++j)
        if (j != i) p.action_exponents.push_back(mod_positive(v.at(j), d));
      out.push_back(std::move(p));
    }
    return out;
  }

  const std::size_t count = v.n() + 1;
  if (count > 24) throw invalid_input("compact stratum enumeration is limited to 24 coordinates");
  for (std::uint32_t mask = 1; mask < (1u << count); ++mask) {
    std::int64_t d = 0;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < count; ++i)
      if (mask & (1u << i)) {
        d = std::gcd(d, v.at(i));
        support.push_back(i);
      }
    if (d <= 1) continue;
    SingularPoint p{support, d, {}};
    for (std::size_t j = 0; j < count; ++j)
      if (!(mask & (1u << j))) p.action_exponents.push_back(mod_positive(v.at(j), d));
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const SingularPoint& a, const SingularPoint& b) { return a.support < b.support; });
  return out;
}

/// Replaces each w_i by its representative in [1, w0]. For w0 = 1 every weight maps to 1.
inline WeightVector normalize(const WeightVector& v) {
  WeightVector out = v;
  if (v.w0 == 1) {
    for (auto& x : out.w) x = 1;
    return out;
  }
  for (std::size_t i = 0; i < out.w.size(); ++i) {
    auto r = mod_positive(out.w[i], v.w0);
    if (r == 0)
      throw invalid_input("weight at index " + std::to_string(i + 1) + " is divisible by w0 = " +
                          std::to_string(v.w0));
    out.w[i] = r;
  }
  return out;
}

} // namespace wpsglue
