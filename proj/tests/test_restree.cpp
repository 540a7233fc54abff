#include "wpsglue/restree.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace wpsglue;

namespace {

WeightVector nc(std::int64_t w0, std::vector<std::int64_t> w) { return WeightVector::make(SpaceKind::NonCompact, w0, w); }

std::vector<std::int64_t> entries(const WeightVector& v) {
  std::vector<std::int64_t> e{v.w0};
  e.insert(e.end(), v.w.begin(), v.w.end());
  return e;
}

using E = std::vector<std::int64_t>;

} // namespace

TEST(Child, Examples) {
  EXPECT_EQ(entries(child(nc(5, {3, 2, 1}), 1)), (E{3, 1, 2, 1}));
  EXPECT_EQ(entries(detail::child_raw(nc(5, {3, 2, 1}), 2)), (E{2, 3, 1, 1}));
  EXPECT_EQ(entries(child(nc(5, {3, 2, 1}), 2)), (E{2, 1, 1, 1}));
  EXPECT_EQ(entries(child(nc(3, {1, 2, 1}), 2)), (E{2, 1, 1, 1}));
  EXPECT_THROW(child(nc(5, {3, 2, 1}), 3), invalid_input);
  EXPECT_THROW(child(nc(5, {3, 2, 1}), 0), invalid_input);
}

TEST(BuildTree, ExampleFiveThreeTwoOne) {
  const auto t = build_tree(nc(5, {3, 2, 1}), 10);
  EXPECT_TRUE(t.is_type_I);
  EXPECT_EQ(t.node_count, 4);
  EXPECT_EQ(t.depth, 2);
  ASSERT_EQ(t.root.children.size(), 2u);
  EXPECT_EQ(entries(t.root.children[0].weights), (E{3, 1, 2, 1}));
  EXPECT_EQ(entries(t.root.children[1].weights), (E{2, 1, 1, 1}));
  EXPECT_EQ(t.root.children[1].status, NodeStatus::SmoothLeaf);
  ASSERT_EQ(t.root.children[0].children.size(), 1u);
  EXPECT_EQ(entries(t.root.children[0].children[0].weights), (E{2, 1, 1, 1}));
  EXPECT_EQ(t.root.children[0].status, NodeStatus::Interior);
}

TEST(BuildTree, SmoothRootIsSingleLeaf) {
  const auto t = build_tree(nc(2, {1, 1, 1}));
  EXPECT_TRUE(t.is_type_I);
  EXPECT_EQ(t.node_count, 1);
  EXPECT_EQ(t.root.status, NodeStatus::SmoothLeaf);
}

TEST(BuildTree, SevenThreeOneChain) {
  const auto t = build_tree(nc(7, {3, 1}));
  EXPECT_TRUE(t.is_type_I);
  EXPECT_EQ(t.node_count, 3);
  const ResolutionNode* n = &t.root;
  for (const E& expect : {E{7, 3, 1}, E{3, 2, 1}, E{2, 1, 1}}) {
    EXPECT_EQ(entries(n->weights), expect);
    if (!n->children.empty()) n = &n->children[0];
  }
}

TEST(BuildTree, DepthLimitIsReportedSeparately) {
  const auto t = build_tree(nc(5, {3, 2, 1}), 1);
  EXPECT_FALSE(t.is_type_I);
  EXPECT_EQ(t.root.children[0].status, NodeStatus::DepthExceeded);
  EXPECT_EQ(t.root.children[1].status, NodeStatus::SmoothLeaf);
}

TEST(BuildTree, RejectsNonIsolatedInput) {
  EXPECT_THROW(build_tree(nc(4, {2, 3})), invalid_input);
  EXPECT_THROW(build_tree(nc(5, {3, 2}), -1), invalid_input);
}

TEST(BuildTree, InteriorNodesBranchOncePerSingularPoint) {
  int non_isolated = 0;
  for (const auto& v : {nc(5, {3, 2, 1}), nc(11, {4, 9, 1, 5}), nc(13, {5, 7, 3}), nc(17, {3, 5, 7, 11})}) {
    const auto t = build_tree(v);
    auto check = [&](auto&& self, const ResolutionNode& n) -> void {
      if (n.status == NodeStatus::NonIsolated) {
        ++non_isolated;
        EXPECT_FALSE(has_isolated_singularities(n.weights));
      }
      if (n.status != NodeStatus::Interior) {
        EXPECT_TRUE(n.children.empty());
        return;
      }
      EXPECT_TRUE(has_isolated_singularities(n.weights));
      std::size_t c = 0;
      for (std::size_t i = 1; i <= n.weights.n(); ++i) {
        if (n.weights.at(i) == 1) continue;
        ASSERT_LT(c, n.children.size());
        EXPECT_EQ(n.children[c].weights.w0, n.weights.at(i));
        EXPECT_LT(n.children[c].weights.w0, n.weights.w0);
        ++c;
      }
      EXPECT_EQ(c, n.children.size());
      for (const auto& ch : n.children) self(self, ch);
    };
    check(check, t.root);
    EXPECT_EQ(t.is_type_I, v == nc(5, {3, 2, 1}));
  }
  // (11,4,9,1,5) reaches (4,3,3,1,1), where two weights share the factor 3
  EXPECT_GT(non_isolated, 0);
}

TEST(EuclideanChain, Examples) {
  auto c = euclidean_chain(7, 3, 2);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(entries(c[0]), (E{7, 3, 1}));
  EXPECT_EQ(entries(c[1]), (E{3, 2, 1}));
  EXPECT_EQ(entries(c[2]), (E{2, 1, 1}));
  auto single = euclidean_chain(9, 1, 3);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(entries(single[0]), (E{9, 1, 1, 1}));
  auto five = euclidean_chain(5, 3, 3);
  ASSERT_EQ(five.size(), 2u);
  EXPECT_EQ(entries(five[1]), (E{3, 1, 1, 1}));
  EXPECT_THROW(euclidean_chain(6, 4, 2), invalid_input);
  EXPECT_THROW(euclidean_chain(3, 5, 2), invalid_input);
}

TEST(EuclideanChain, MatchesTreeAndDecreases) {
  for (std::int64_t p = 2; p <= 80; ++p)
    for (std::int64_t q = 1; q < p; ++q) {
      if (std::gcd(p, q) != 1) continue;
      const auto chain = euclidean_chain(p, q, 3);
      const auto t = build_tree(nc(p, {q, 1, 1}));
      ASSERT_TRUE(t.is_type_I);
      ASSERT_EQ(t.node_count, static_cast<int>(chain.size()));
      const ResolutionNode* n = &t.root;
      for (std::size_t j = 0; j < chain.size(); ++j) {
        ASSERT_EQ(n->weights, chain[j]);
        if (j > 0) { ASSERT_LT(chain[j].w0, chain[j - 1].w0); }
        ASSERT_LE(n->children.size(), 1u);
        if (!n->children.empty()) n = &n->children[0];
      }
    }
}

TEST(Chern, Examples) {
  for (int k = 3; k <= 10; ++k) EXPECT_EQ(chern_coefficient(nc(1, std::vector<std::int64_t>(k, 1))), Rational(k - 1));
  EXPECT_EQ(chern_coefficient(nc(5, {3, 2, 1})), Rational(1, 5));
  EXPECT_EQ(chern_coefficient(nc(2, {1, 1, 1})), Rational(1, 2));
}

TEST(Lambda, Examples) {
  IntersectionData d{3, 3, 1, 1, {}, {}};
  // (4 pi 3 / 1) * 2 * C(2,2) * (-1)^3 * 1
  EXPECT_EQ(lambda_constant(nc(1, {1, 1, 1}), d), (LambdaResult{Rational(-24), 1}));
  EXPECT_EQ(published_lambda_constant(nc(1, {1, 1, 1}), d), (LambdaResult{Rational(24), 1}));
  d.I = 0;
  EXPECT_EQ(lambda_constant(nc(5, {3, 2, 1}), d).value, 0);
  IntersectionData d4{4, 3, 1, 1, {}, {}};
  EXPECT_EQ(lambda_constant(nc(5, {3, 2, 1}), d4).value, Rational(-48, 5));
  EXPECT_EQ(published_lambda_constant(nc(5, {3, 2, 1}), d4).value, Rational(48, 5));
}

TEST(Lambda, LinearInIAndInverseInVol) {
  const auto v = nc(5, {3, 2, 1});
  IntersectionData d{6, 3, Rational(7, 3), Rational(2, 5), {}, {}};
  const auto base = lambda_constant(v, d).value;
  auto d2 = d;
  d2.I *= Rational(-9, 4);
  EXPECT_EQ(lambda_constant(v, d2).value, base * Rational(-9, 4));
  auto d3 = d;
  d3.vol *= 11;
  EXPECT_EQ(lambda_constant(v, d3).value, base / 11);
}

TEST(Lambda, RejectsBadInputs) {
  EXPECT_THROW(lambda_constant(nc(5, {3, 2, 1}), IntersectionData{4, 3, 0, 1, {}, {}}), invalid_input);
  EXPECT_THROW(lambda_constant(nc(5, {3, 2, 1}), IntersectionData{4, 4, 1, 1, {}, {}}), invalid_input);
  EXPECT_THROW(lambda_constant(nc(5, {3, 2}), IntersectionData{4, 2, 1, 1, {}, {}}), invalid_input);
}

TEST(Oracle, ThreeFoldExample) {
  IntersectionData d{3, 3, 1, 1, {}, {}};
  const auto r = expansion_oracle(nc(1, {1, 1, 1}), d);
  ASSERT_EQ(r.coefficients.size(), 3u);
  EXPECT_EQ(r.coefficients[1], LinearForm{});
  EXPECT_TRUE(r.coefficients[2].is_constant());
  EXPECT_EQ(r.coefficients[2].constant, -24);
  // constant term 4 pi n / Vol * K with K left symbolic
  EXPECT_EQ(r.coefficients[0].terms.at("K"), 12);
}

TEST(Oracle, ZeroIntersectionsGiveConstant) {
  IntersectionData d{5, 3, 2, 0, {{3, 0}, {4, 0}}, Rational(3)};
  const auto r = expansion_oracle(nc(5, {3, 2, 1}), d);
  EXPECT_EQ(r.coefficients[0], (LinearForm{Rational(4 * 5 * 3, 2), {}}));
  for (std::size_t i = 1; i < r.coefficients.size(); ++i) EXPECT_EQ(r.coefficients[i], LinearForm{});
}

TEST(Oracle, VanishingChernCoefficient) {
  // sum w = w0: only the pulled-back c1 can contribute at eps^(2k-2), and it does not reach E
  const auto v = nc(3, {1, 1, 1});
  EXPECT_EQ(chern_coefficient(v), 0);
  IntersectionData d{4, 3, 1, 5, {}, {}};
  const auto r = expansion_oracle(v, d);
  EXPECT_EQ(r.coefficients[2], LinearForm{});
  EXPECT_EQ(lambda_constant(v, d).value, 0);
}

TEST(Oracle, AgreesWithClosedFormOnRandomInstances) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + static_cast<int>(gen() % 4);
    const int n = k + static_cast<int>(gen() % 4);
    std::vector<std::int64_t> w(k);
    for (auto& x : w) x = 1 + static_cast<std::int64_t>(gen() % 9);
    const auto v = nc(1 + static_cast<std::int64_t>(gen() % 12), w);
    IntersectionData d{n, k, Rational(1 + static_cast<int>(gen() % 50), 1 + static_cast<int>(gen() % 7)),
                       Rational(static_cast<int>(gen() % 41) - 20, 1 + static_cast<int>(gen() % 9)), {}, {}};
    const auto r = expansion_oracle(v, d);
    const auto& top = r.coefficients.at(k - 1);
    ASSERT_TRUE(top.is_constant());
    EXPECT_EQ(top.constant, lambda_constant(v, d).value);
  }
}
