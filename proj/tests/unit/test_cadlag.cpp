#include <gtest/gtest.h>

#include "m1path/cadlag.hpp"
#include "m1path/error.hpp"
#include "support/generators.hpp"

using namespace m1path;

namespace {

CadlagPath indicator12() { return CadlagPath::step(2.0, 0.0, {{1.0, 1.0}, {2.0, 0.0}}); }
CadlagPath unit12() { return CadlagPath::step(2.0, 0.0, {{1.0, 1.0}}); }
CadlagPath identity_line() { return CadlagPath::piecewise_linear(1.0, {{0.0, 0.0}, {1.0, 1.0}}); }

// Brute-force sup over a dense grid plus left limits at breakpoints.
double brute_oscillation(const CadlagPath& x, double a, double b) {
  std::vector<double> vals;
  for (int i = 0; i <= 4000; ++i) vals.push_back(eval(x, a + (b - a) * i / 4000.0));
  for (double t : x.breakpoints())
    if (t > a && t <= b) vals.push_back(eval_left(x, t));
  auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  return *hi - *lo;
}

}  // namespace

TEST(Eval, RightContinuousAtJump) {
  auto x = unit12();
  EXPECT_EQ(eval(x, 1.0), 1.0);
  EXPECT_EQ(eval_left(x, 1.0), 0.0);
  EXPECT_EQ(eval(x, 0.999), 0.0);
}

TEST(Eval, ConstantAndLinear) {
  auto c = CadlagPath::constant(1.0, 3.0);
  for (double t : {0.0, 0.3, 1.0}) EXPECT_EQ(eval(c, t), 3.0);
  EXPECT_DOUBLE_EQ(eval(identity_line(), 0.5), 0.5);
}

TEST(Eval, OutOfDomain) {
  auto x = unit12();
  EXPECT_THROW(eval(x, -0.1), DomainError);
  EXPECT_THROW(eval(x, 2.5), DomainError);
  EXPECT_THROW(eval_left(x, 0.0), DomainError);
}

TEST(Construction, RejectsBadInput) {
  EXPECT_THROW(CadlagPath::step(1.0, 0.0, {{0.0, 1.0}}), DomainError);
  EXPECT_THROW(CadlagPath::step(1.0, 0.0, {{0.5, 1.0}, {0.4, 2.0}}), DomainError);
  EXPECT_THROW(CadlagPath::step(1.0, 0.0, {{0.5, std::nan("")}}), DomainError);
  EXPECT_THROW(CadlagPath::piecewise_linear(1.0, {{0.1, 0.0}, {1.0, 1.0}}), DomainError);
  EXPECT_THROW(CadlagPath::piecewise_linear(1.0, {{0.0, 0.0}, {0.5, 1.0}, {0.5, 2.0}, {0.5, 3.0}}),
               DomainError);
  EXPECT_THROW(CadlagPath::constant(0.0, 1.0), DomainError);
}

TEST(Jumps, SingleAndThreshold) {
  auto js = jumps(unit12(), 0.0);
  ASSERT_EQ(js.size(), 1u);
  EXPECT_EQ(js[0].t, 1.0);
  EXPECT_EQ(js[0].size, 1.0);

  auto x = CadlagPath::step(2.0, 0.0, {{0.5, 0.3}, {1.5, 1.3}});
  auto big = jumps(x, 0.5);
  ASSERT_EQ(big.size(), 1u);
  EXPECT_EQ(big[0].t, 1.5);
  EXPECT_TRUE(jumps(identity_line(), 0.0).empty());
}

TEST(Jumps, PiecewiseLinearDoubleNode) {
  auto x = CadlagPath::piecewise_linear(1.0, {{0.0, 0.0}, {0.5, 0.5}, {0.5, 1.5}, {1.0, 1.0}});
  auto js = jumps(x);
  ASSERT_EQ(js.size(), 1u);
  EXPECT_EQ(js[0].left, 0.5);
  EXPECT_EQ(js[0].right, 1.5);
  EXPECT_EQ(eval(x, 0.5), 1.5);
  EXPECT_EQ(eval_left(x, 0.5), 0.5);
}

TEST(JMax, Values) {
  EXPECT_EQ(j_max(unit12()), 1.0);
  EXPECT_EQ(j_max(identity_line()), 0.0);
  auto x = CadlagPath::step(4.0, 0.0, {{1.0, 0.3}, {2.0, 1.3}, {3.0, 0.6}});
  EXPECT_NEAR(j_max(x), 1.0, 1e-15);
}

TEST(Oscillation, Examples) {
  EXPECT_EQ(oscillation(CadlagPath::constant(1.0, 2.0), 0.2, 0.7), 0.0);
  EXPECT_EQ(oscillation(indicator12(), 0.9, 1.1), 1.0);
  EXPECT_DOUBLE_EQ(modulus(identity_line(), 0.25), 0.25);
  EXPECT_THROW(oscillation(indicator12(), 1.5, 1.0), DomainError);
}

TEST(Oscillation, BeforeExcludesRightEndpoint) {
  auto x = unit12();
  EXPECT_EQ(oscillation_before(x, 0.5, 1.0), 0.0);
  EXPECT_EQ(oscillation(x, 0.5, 1.0), 1.0);
}

TEST(Oscillation, MatchesBruteForceOnRandomPaths) {
  auto rng = gen::make_rng(11);
  for (int k = 0; k < 30; ++k) {
    auto x = k % 2 ? gen::random_step(rng, 6) : gen::random_pl(rng, 7);
    double a = gen::uniform(rng, 0.0, 0.5), b = gen::uniform(rng, 0.5, 1.0);
    EXPECT_NEAR(oscillation(x, a, b), brute_oscillation(x, a, b), 2e-3) << k;
    EXPECT_GE(oscillation(x, a, b) + 1e-15, brute_oscillation(x, a, b) - 1e-12);
  }
}

TEST(SegmentDist, Examples) {
  EXPECT_EQ(segment_dist(0.5, 0.0, 1.0), 0.0);
  EXPECT_EQ(segment_dist(2.0, 0.0, 1.0), 1.0);
  EXPECT_EQ(segment_dist(2.0, 1.0, 0.0), 1.0);
  EXPECT_EQ(segment_dist(0.3, 0.3, 0.3), 0.0);
}

TEST(WsOsc, Examples) {
  auto mono = CadlagPath::step(1.0, 0.0, {{0.25, 1.0}, {0.5, 1.5}, {0.75, 4.0}});
  for (double d : {0.01, 0.1, 1.0}) EXPECT_EQ(ws_osc(mono, d), 0.0);
  auto bump = CadlagPath::step(1.0, 0.0, {{1.0 / 3, 1.0}, {2.0 / 3, 0.0}});
  EXPECT_EQ(ws_osc(bump, 1.0), 1.0);
  auto smooth = CadlagPath::piecewise_linear(1.0, {{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}});
  EXPECT_LE(ws_osc(smooth, 0.01), 0.05);
  EXPECT_LE(ws_osc(smooth, 0.01), ws_osc(smooth, 0.1));
}

TEST(Uniform, Examples) {
  auto x = indicator12();
  EXPECT_EQ(uniform_dist(x, x), 0.0);
  EXPECT_EQ(uniform_dist(x, CadlagPath::constant(2.0, 0.0)), 1.0);
  auto y = CadlagPath::piecewise_linear(1.0, {{0.0, 0.0}, {1.0, 2.0}});
  EXPECT_DOUBLE_EQ(uniform_dist(identity_line(), y), 1.0);
  EXPECT_THROW(uniform_dist(x, identity_line()), DomainError);
  EXPECT_EQ(uniform_norm(CadlagPath::step(1.0, -3.0, {{0.5, 2.0}})), 3.0);
}

TEST(CompletedGraph, Examples) {
  auto c = completed_graph(CadlagPath::constant(1.0, 3.0));
  ASSERT_EQ(c.vertices.size(), 2u);
  EXPECT_EQ(c.vertices[0], (Node{0.0, 3.0}));
  EXPECT_EQ(c.vertices[1], (Node{1.0, 3.0}));

  auto g = completed_graph(unit12());
  std::vector<Node> want{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}};
  EXPECT_EQ(g.vertices, want);
  EXPECT_EQ(g.vertical_segments(), 1u);

  auto two = completed_graph(CadlagPath::step(3.0, 0.0, {{1.0, 1.0}, {2.0, -1.0}}));
  EXPECT_EQ(two.vertical_segments(), 2u);
}
