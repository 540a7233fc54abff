#pragma once

#include "wpsglue/errors.hpp"
#include "wpsglue/gluing.hpp"
#include "wpsglue/rational.hpp"
#include "wpsglue/restree.hpp"
#include "wpsglue/weights.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

namespace wpsglue {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "wpsglue";
inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip text for a double, independent of locale and stream state.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) return "0";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline Json provenance(const std::string& subcommand, const Json& config) {
  return Json{{"tool", kToolName}, {"version", kToolVersion}, {"subcommand", subcommand}, {"config", config}};
}

/// Provenance as comment lines, for CSV ("# ") and DOT ("// ").
inline std::string provenance_comment(const Json& prov, const std::string& prefix) {
  return prefix + prov["tool"].get<std::string>() + " " + prov["version"].get<std::string>() + " " +
         prov["subcommand"].get<std::string>() + "\n" + prefix + "config " + prov["config"].dump() + "\n";
}

// ---------------------------------------------------------------------------
// Exact values

/// Integers that fit in 64 bits are emitted as JSON numbers, larger ones as decimal strings.
inline Json integer_json(const Integer& z) {
  if (z >= std::numeric_limits<std::int64_t>::min() && z <= std::numeric_limits<std::int64_t>::max())
    return z.convert_to<std::int64_t>();
  return z.str();
}

inline Json rational_json(const Rational& q) {
  return Json{{"numerator", integer_json(numerator_of(q))}, {"denominator", integer_json(denominator_of(q))}};
}

/// "p/q" or "p" (optionally signed) into an exact rational.
inline Rational parse_rational(const std::string& text) {
  auto parse_int = [&](const std::string& s, std::size_t offset) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    if (i == s.size()) throw parse_error("expected an integer", offset + i);
    for (std::size_t j = i; j < s.size(); ++j)
      if (!std::isdigit(static_cast<unsigned char>(s[j]))) throw parse_error("unexpected character", offset + j);
    return Integer(s[0] == '+' ? s.substr(1) : s);
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(parse_int(text, 0));
  const Integer den = parse_int(text.substr(slash + 1), slash + 1);
  if (den == 0) throw parse_error("zero denominator", slash + 1);
  return Rational(parse_int(text.substr(0, slash), 0), den);
}

inline Json lambda_json(const LambdaResult& r) {
  return Json{{"numerator", integer_json(numerator_of(r.value))},
              {"denominator", integer_json(denominator_of(r.value))},
              {"pi_power", r.pi_power}};
}

inline Json linear_form_json(const LinearForm& f) {
  Json terms = Json::object();
  for (const auto& [s, c] : f.terms) terms[s] = to_string(c);
  return Json{{"constant", to_string(f.constant)}, {"symbols", terms}};
}

// ---------------------------------------------------------------------------
// Weights and trees

inline Json weights_json(const WeightVector& v, Notation notation) {
  if (notation == Notation::Paren) return format_weights(v, Notation::Paren);
  Json a = Json::array();
  a.push_back(v.kind == SpaceKind::NonCompact ? -v.w0 : v.w0);
  for (auto x : v.w) a.push_back(x);
  return a;
}

inline Json singular_point_json(const SingularPoint& p) {
  return Json{{"support", p.support}, {"group_order", p.group_order}, {"action_exponents", p.action_exponents}};
}

inline Json tree_node_json(const ResolutionNode& n) {
  Json children = Json::array();
  for (const auto& c : n.children) children.push_back(tree_node_json(c));
  return Json{{"weights", format_label(n.weights)}, {"status", to_string(n.status)}, {"children", children}};
}

inline Json tree_json(const ResolutionTree& t) {
  return Json{{"is_type_I", t.is_type_I}, {"depth", t.depth}, {"node_count", t.node_count},
              {"root", tree_node_json(t.root)}};
}

/// One DOT node per tree node (repeated vectors on different branches stay distinct nodes),
/// labelled "(a0,a1,...)"; non-smooth leaves carry their status in the label.
inline std::string tree_dot(const ResolutionTree& t, const std::string& header = {}) {
  std::ostringstream out;
  out << header << "digraph resolution {\n";
  int next = 0;
  auto visit = [&](auto&& self, const ResolutionNode& n) -> int {
    const int id = next++;
    std::string label = format_label(n.weights);
    if (n.children.empty() && n.status != NodeStatus::SmoothLeaf) label += "\\n" + std::string(to_string(n.status));
    out << "  n" << id << " [label=\"" << label << "\"];\n";
    for (const auto& c : n.children) {
      const int cid = self(self, c);
      out << "  n" << id << " -> n" << cid << ";\n";
    }
    return id;
  };
  visit(visit, t.root);
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Gluing

inline Json gluing_config_json(const GluingConfig& c) {
  return Json{{"k", c.k},
              {"eps", c.eps},
              {"A", c.A},
              {"delta", c.weight_exponent()},
              {"cutoff", c.cutoff},
              {"points_per_decade", c.points_per_decade},
              {"profile", to_string(c.profile)},
              {"green_correction", c.green_correction}};
}

/// Reads GluingConfig fields from a JSON object on top of `base`; unknown keys are rejected.
inline GluingConfig gluing_config_from_json(const Json& j, GluingConfig base = {}) {
  if (!j.is_object()) throw invalid_input("gluing config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "k") base.k = value.get<int>();
      else if (key == "eps") base.eps = value.get<double>();
      else if (key == "A") base.A = value.get<double>();
      else if (key == "delta") base.delta = value.get<double>();
      else if (key == "cutoff") base.cutoff = value.get<double>();
      else if (key == "points_per_decade") base.points_per_decade = value.get<int>();
      else if (key == "green_correction") base.green_correction = value.get<bool>();
      else if (key == "profile") {
        const auto p = value.get<std::string>();
        if (p == "exact") base.profile = GluingProfile::ExactALE;
        else if (p == "truncated") base.profile = GluingProfile::Truncated;
        else throw invalid_input("profile must be \"exact\" or \"truncated\"");
      } else
        throw invalid_input("unknown gluing config key \"" + key + "\"");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw invalid_input(std::string("gluing config: ") + e.what());
  }
  return base;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

inline Json region_stats_json(const RegionStats& s) {
  return Json{{"region", s.region},
              {"count", s.count},
              {"sup_abs_S", s.sup_abs_S},
              {"sup_d_abs_S", s.sup_d_abs_S},
              {"sup_weighted_S", s.sup_weighted_S},
              {"min_margin", s.min_margin}};
}

inline Json region_report_json(const RegionReport& r) {
  Json four = Json::array(), three = Json::array();
  for (const auto& s : r.regions) four.push_back(region_stats_json(s));
  for (const auto& s : r.three_region()) three.push_back(region_stats_json(s));
  return Json{{"eps", r.config.eps},
              {"r_eps", r.r_eps},
              {"delta", r.delta},
              {"sup_weighted_S", r.sup_weighted_S()},
              {"refinement_change", r.refinement_change},
              {"four_region", four},
              {"three_region", three}};
}

inline constexpr const char* kSweepCsvHeader = "eps,region,d,S,d_abs_S,weighted_S,eig_min\n";

inline std::string region_samples_csv(const RegionReport& r) {
  std::string out;
  const std::string eps = format_double(r.config.eps);
  for (const auto& s : r.samples)
    out += eps + "," + std::to_string(s.region) + "," + format_double(s.d) + "," + format_double(s.S) + "," +
           format_double(s.d_abs_S) + "," + format_double(s.weighted_S) + "," + format_double(s.eig_min) + "\n";
  return out;
}

} // namespace wpsglue
