// wpsglue: weighted-projective-space resolution trees, topological constants and
// desk-scale checks of the glued metric family, one subcommand per module.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include "wpsglue/ale.hpp"
#include "wpsglue/errors.hpp"
#include "wpsglue/gluing.hpp"
#include "wpsglue/green.hpp"
#include "wpsglue/io.hpp"
#include "wpsglue/radial.hpp"
#include "wpsglue/restree.hpp"
#include "wpsglue/solver.hpp"
#include "wpsglue/weights.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace wpsglue;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Output {
  std::string path;
  std::string format;

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::fwrite(text.data(), 1, text.size(), stdout);
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw invalid_input("cannot open output file " + path);
    f << text;
  }
};

void add_output(CLI::App* app, Output& out, const std::string& default_format, std::vector<std::string> formats) {
  out.format = default_format;
  app->add_option("-o,--output", out.path, "Output path (default stdout)");
  app->add_option("--format", out.format, "Output format")->check(CLI::IsMember(formats));
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  std::string weights;
  Output out;
};

void run_classify(const ClassifyArgs& a) {
  const auto parsed = parse_weights(a.weights);
  const auto& v = parsed.vector;
  Json report{{"provenance", provenance("classify", Json{{"weights", a.weights}})},
              {"weights", weights_json(v, parsed.notation)},
              {"kind", v.kind == SpaceKind::NonCompact ? "non-compact" : "compact"},
              {"smooth", is_smooth(v)},
              {"isolated", has_isolated_singularities(v)},
              {"isolated_at_origin", isolated_at_origin(v)}};
  if (auto f = find_shared_factor(v))
    report["offending_pair"] = Json{{"i", f->i}, {"j", f->j}, {"gcd", f->gcd}};
  if (v.kind == SpaceKind::Compact || has_isolated_singularities(v)) {
    Json pts = Json::array();
    for (const auto& p : singular_points(v)) pts.push_back(singular_point_json(p));
    report["singular_points"] = pts;
  }
  if (isolated_at_origin(v)) report["normalized"] = weights_json(normalize(v), parsed.notation);
  a.out.write(dump(report));
}

struct TreeArgs {
  std::string weights;
  int max_depth = kDefaultMaxDepth;
  bool dot = false;
  bool json = false;
  Output out;
};

void run_tree(TreeArgs a) {
  if (a.dot && a.json) throw invalid_input("--dot and --json are exclusive");
  if (a.dot) a.out.format = "dot";
  if (a.json) a.out.format = "json";
  const auto v = parse_weights(a.weights).vector;
  const auto tree = build_tree(v, a.max_depth);
  const Json prov = provenance("tree", Json{{"weights", a.weights}, {"max_depth", a.max_depth}});
  if (a.out.format == "dot") {
    a.out.write(tree_dot(tree, provenance_comment(prov, "// ")));
  } else {
    Json j{{"provenance", prov}};
    const Json body = tree_json(tree);
    for (const auto& [key, value] : body.items()) j[key] = value;
    a.out.write(dump(j));
  }
}

struct LambdaArgs {
  std::string weights;
  int n = 0;
  std::string vol = "1";
  std::string I = "1";
  bool oracle = false;
  Output out;
};

void run_lambda(const LambdaArgs& a) {
  const auto v = parse_weights(a.weights).vector;
  if (v.kind != SpaceKind::NonCompact) throw invalid_input("lambda needs a non-compact weight vector (negative w0)");
  IntersectionData d;
  d.n = a.n;
  d.k = static_cast<int>(v.n());
  d.vol = parse_rational(a.vol);
  d.I = parse_rational(a.I);
  const auto lam = lambda_constant(v, d);
  Json j{{"provenance", provenance("lambda", Json{{"weights", a.weights}, {"n", a.n}, {"vol", a.vol}, {"I", a.I},
                                                  {"oracle", a.oracle}})},
         {"chern_coefficient", rational_json(chern_coefficient(v))},
         {"lambda", lambda_json(lam)},
         {"lambda_text", to_string(lam.value) + "*pi"}};
  if (a.oracle) {
    const auto ex = expansion_oracle(v, d);
    Json coeffs = Json::array();
    for (const auto& c : ex.coefficients) coeffs.push_back(linear_form_json(c));
    const auto& top = ex.coefficients.back();
    const bool match = top.is_constant() && top.constant == lam.value;
    j["oracle"] = Json{{"eps2_coefficients", coeffs}, {"matches_lambda", match}};
    if (!match) {
      a.out.write(dump(j));
      throw numerical_failure("expansion oracle disagrees with the closed form");
    }
  }
  a.out.write(dump(j));
}

struct FlatSolveArgs {
  int k = 3;
  InnerData inner;
  double s_max = 1e5;
  int ppd = 64;
  Output out;
};

void run_flat_solve(const FlatSolveArgs& a) {
  SolveOptions opt;
  opt.points_per_decade = a.ppd;
  const auto r = solve_scalar_flat(a.k, a.inner, a.s_max, opt);
  const auto S = sampled_scalar_curvature(r.potential);
  double sup_S = 0;
  for (double x : S) sup_S = std::max(sup_S, std::abs(x));
  const Json config{{"k", a.k},         {"s0", a.inner.s0},     {"h0", a.inner.h0},
                    {"dh0", a.inner.dh0}, {"ddh0", a.inner.ddh0}, {"dddh0", a.inner.dddh0},
                    {"smax", a.s_max},    {"ppd", a.ppd}};
  const Json prov = provenance("flat-solve", config);
  const Json fit{{"basis", a.k == 2 ? "log s" : "s^(2-k)"},
                 {"A", r.fit.A},
                 {"constant", r.fit.constant},
                 {"residual", r.fit.residual},
                 {"sup_abs_S", sup_S},
                 {"scale", r.scale}};
  if (a.out.format == "json") {
    a.out.write(dump(Json{{"provenance", prov}, {"fit", fit}, {"points", r.potential.s.size()}}));
    return;
  }
  std::string text = provenance_comment(prov, "# ");
  text += "# fit " + fit.dump() + "\n";
  text += "s,H,dH,ddH,S\n";
  const auto& p = r.potential;
  for (std::size_t j = 0; j < p.s.size(); ++j)
    text += format_double(p.s[j]) + "," + format_double(p.H[j]) + "," + format_double(p.dH[j]) + "," +
            format_double(p.ddH[j]) + "," + format_double(S[j]) + "\n";
  a.out.write(text);
}

struct GlueArgs {
  std::string config_path;
  std::optional<int> k;
  std::vector<double> eps;
  std::optional<double> A, delta, cutoff;
  std::optional<int> ppd;
  std::optional<std::string> profile;
  bool green_correction = false;
  bool positivity_sweep = false;
  Output out;
};

void run_glue(const GlueArgs& a) {
  GluingConfig cfg;
  if (!a.config_path.empty()) {
    std::ifstream f(a.config_path, std::ios::binary);
    if (!f) throw invalid_input("cannot read config file " + a.config_path);
    std::stringstream buf;
    buf << f.rdbuf();
    cfg = gluing_config_from_json(parse_json_text(buf.str()));
  }
  if (a.k) cfg.k = *a.k;
  if (a.A) cfg.A = *a.A;
  if (a.delta) cfg.delta = *a.delta;
  if (a.cutoff) cfg.cutoff = *a.cutoff;
  if (a.ppd) cfg.points_per_decade = *a.ppd;
  if (a.profile) cfg = gluing_config_from_json(Json{{"profile", *a.profile}}, cfg);
  if (a.green_correction) cfg.green_correction = true;
  std::vector<double> eps_list = a.eps;
  if (eps_list.empty()) eps_list.push_back(cfg.eps);
  cfg.eps = eps_list.front();
  cfg.validate();

  Json resolved = gluing_config_json(cfg);
  resolved.erase("eps");
  resolved["eps"] = eps_list;
  resolved["positivity_sweep"] = a.positivity_sweep;
  const Json prov = provenance("glue", resolved);

  std::vector<RegionReport> reports;
  for (double e : eps_list) {
    GluingConfig c = cfg;
    c.eps = e;
    const auto pos = positivity_scan(c);
    if (!(pos.min_margin > 0))
      throw positivity_lost(pos.argmin_d * pos.argmin_d);
    reports.push_back(scalar_error_report(c));
  }

  if (a.out.format == "csv") {
    std::string text = provenance_comment(prov, "# ") + kSweepCsvHeader;
    for (const auto& r : reports) text += region_samples_csv(r);
    a.out.write(text);
    return;
  }
  Json j{{"provenance", prov}};
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(region_report_json(r));
  j["reports"] = arr;
  if (reports.size() >= 4) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : reports) pairs.emplace_back(r.config.eps, r.sup_weighted_S());
    const auto fit = rate_fit(pairs, cfg.k);
    j["rate_fit"] = Json{{"quantity", "sup rho^(4-delta)|S| vs r_eps"},
                         {"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared},
                         {"bound_slope", 3 - cfg.weight_exponent()}};
  }
  if (a.positivity_sweep) {
    const auto sw = positivity_sweep(cfg, eps_list.front(), 1e3);
    Json entries = Json::array();
    for (const auto& e : sw.entries)
      entries.push_back(Json{{"eps", e.eps}, {"min_margin", e.result.min_margin}, {"argmin_d", e.result.argmin_d}});
    j["positivity_sweep"] = Json{{"entries", entries}, {"first_failure", sw.first_failure ? Json(*sw.first_failure) : Json()}};
  }
  a.out.write(dump(j));
}

struct GreenArgs {
  int n = 4;
  int k = 3;
  std::vector<double> d_sweep{1e-1, 1e-2, 1e-3};
  std::uint64_t mc_samples = 100000;
  std::optional<std::uint64_t> seed;
  double mc_d = 1;
  Output out;
};

void run_green(const GreenArgs& a) {
  GreenParams p{a.n, a.k};
  p.validate();
  const double exact = beta_integral_exact(p), quad = beta_integral_quad(p), lead = leading_coefficient(p);
  Json config{{"n", a.n}, {"k", a.k}, {"d_sweep", a.d_sweep}, {"quad_tol", p.quad_tol}};
  if (a.seed) config.update(Json{{"mc_samples", a.mc_samples}, {"seed", *a.seed}, {"mc_d", a.mc_d}});
  const Json prov = provenance("green", config);

  struct Row {
    double d, value, scaled;
  };
  std::vector<Row> rows;
  for (double d : a.d_sweep) {
    const double scaled = scaled_lambda_flat(d, p);
    rows.push_back({d, scaled * std::pow(d, 4 - 2 * a.k), scaled});
  }

  if (a.out.format == "csv") {
    std::string text = provenance_comment(prov, "# ") + "n,k,d,lambda_flat,scaled\n";
    for (const auto& r : rows)
      text += std::to_string(a.n) + "," + std::to_string(a.k) + "," + format_double(r.d) + "," +
              format_double(r.value) + "," + format_double(r.scaled) + "\n";
    a.out.write(text);
    return;
  }
  Json table = Json::array();
  for (const auto& r : rows)
    table.push_back(Json{{"d", r.d}, {"lambda_flat", r.value}, {"scaled", r.scaled},
                         {"relative_to_leading", r.scaled / lead - 1}});
  Json j{{"provenance", prov},
         {"beta_exact", rational_json(beta_integral_rational(p))},
         {"beta_exact_value", exact},
         {"beta_quad", quad},
         {"beta_difference", quad - exact},
         {"leading_coefficient", lead},
         {"sphere_volume", sphere_volume(a.n - a.k)},
         {"table", table}};
  if (a.seed) {
    const auto mc = lambda_flat_monte_carlo(a.mc_d, p, a.mc_samples, *a.seed);
    j["monte_carlo"] = Json{{"d", a.mc_d},
                            {"value", mc.value},
                            {"std_error", mc.std_error},
                            {"samples", mc.samples},
                            {"seed", *a.seed},
                            {"quadrature", a.mc_d <= 1 ? Json(lambda_flat(a.mc_d, p)) : Json()}};
  }
  a.out.write(dump(j));
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted projective resolutions and glued-metric checks"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  ClassifyArgs classify;
  auto* c = app.add_subcommand("classify", "Smoothness, isolatedness and singular points of a weight vector");
  c->add_option("weights", classify.weights, "e.g. \"(-5,3,2,1)\" or \"[-5,3,2,1]\"")->required();
  add_output(c, classify.out, "json", {"json"});

  TreeArgs tree;
  auto* t = app.add_subcommand("tree", "Resolution tree of iterated weighted blow-ups");
  t->add_option("weights", tree.weights)->required();
  t->add_option("--max-depth", tree.max_depth)->check(CLI::NonNegativeNumber);
  t->add_flag("--dot", tree.dot, "Shorthand for --format dot");
  t->add_flag("--json", tree.json, "Shorthand for --format json");
  add_output(t, tree.out, "json", {"json", "dot"});

  LambdaArgs lambda;
  auto* l = app.add_subcommand("lambda", "Exact topological constant lambda as a rational multiple of pi");
  l->add_option("weights", lambda.weights)->required();
  l->add_option("--n", lambda.n, "Complex dimension of X")->required();
  l->add_option("--vol", lambda.vol, "Top power of the base class, rational");
  l->add_option("--I", lambda.I, "Intersection number over E, rational");
  l->add_flag("--oracle", lambda.oracle, "Cross-check with the brute-force cohomology expansion");
  add_output(l, lambda.out, "json", {"json"});

  FlatSolveArgs flat;
  auto* f = app.add_subcommand("flat-solve", "Integrate the scalar-flat radial equation and fit the ALE coefficient");
  f->add_option("--k", flat.k);
  f->add_option("--s0", flat.inner.s0);
  f->add_option("--h0", flat.inner.h0);
  f->add_option("--dh0", flat.inner.dh0);
  f->add_option("--ddh0", flat.inner.ddh0);
  f->add_option("--dddh0", flat.inner.dddh0);
  f->add_option("--smax", flat.s_max);
  f->add_option("--ppd", flat.ppd, "Output samples per decade");
  add_output(f, flat.out, "csv", {"csv", "json"});

  GlueArgs glue;
  auto* g = app.add_subcommand("glue", "Region report of the glued metric family");
  g->add_option("--config", glue.config_path, "JSON file with GluingConfig fields; flags override it");
  g->add_option("--k", glue.k);
  g->add_option("--eps", glue.eps, "One or more eps values")->delimiter(',');
  g->add_option("--A", glue.A);
  g->add_option("--delta", glue.delta);
  g->add_option("--cutoff", glue.cutoff);
  g->add_option("--ppd", glue.ppd);
  g->add_option("--profile", glue.profile)->check(CLI::IsMember({"exact", "truncated"}));
  g->add_flag("--green-correction", glue.green_correction, "Keep the leading ALE term uncut");
  g->add_flag("--positivity-sweep", glue.positivity_sweep, "Double eps from the first value until positivity fails");
  add_output(g, glue.out, "json", {"json", "csv"});

  GreenArgs green;
  auto* r = app.add_subcommand("green", "Beta-integral identity and Lambda(d) asymptotics");
  r->add_option("--n", green.n);
  r->add_option("--k", green.k);
  r->add_option("--d-sweep", green.d_sweep)->delimiter(',');
  r->add_option("--mc-samples", green.mc_samples);
  r->add_option("--seed", green.seed, "Enables the Monte-Carlo cross-check");
  r->add_option("--mc-d", green.mc_d);
  add_output(r, green.out, "json", {"json", "csv"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*c) run_classify(classify);
    else if (*t) run_tree(tree);
    else if (*l) run_lambda(lambda);
    else if (*f) run_flat_solve(flat);
    else if (*g) run_glue(glue);
    else if (*r) run_green(green);
  } catch (const invalid_input& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const numerical_failure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
