#include <gtest/gtest.h>

#include <cmath>

#include "amerasian/oracles.hpp"

using namespace amerasian;

namespace {

TreeSpec put_spec(double s0 = 100.0, int steps = 2000) {
  TreeSpec t;
  t.params.s0 = s0;
  t.steps = steps;
  return t;
}

}  // namespace

TEST(Tree, ReferenceAmericanPut) {
  // S = 36, K = 40, r = 6%, sigma = 20%, T = 1: 4.478 by finite differences (coarse grid)
  TreeSpec t;
  t.params.s0 = 36.0;
  t.params.r = 0.06;
  t.params.sigma = 0.2;
  t.params.maturity = 1.0;
  t.strike = 40.0;
  EXPECT_NEAR(tree_price(t), 4.478, 1e-2);
  t.smooth = true;
  EXPECT_NEAR(tree_price(t), 4.478, 1e-2);
}

TEST(Tree, EuropeanMatchesClosedForm) {
  for (auto type : {OptionType::Put, OptionType::Call})
    for (double s0 : {80.0, 100.0, 125.0}) {
      auto t = put_spec(s0, 5000);
      t.type = type;
      t.style = ExerciseStyle::European;
      EXPECT_NEAR(tree_price(t), bs_closed_form(t.params, t.strike, type), 3e-3) << s0;
    }
}

TEST(Tree, PutCallParity) {
  auto t = put_spec(95.0);
  t.params.q = 0.02;
  t.style = ExerciseStyle::European;
  const double p = tree_price(t);
  t.type = OptionType::Call;
  const double c = tree_price(t);
  const auto& m = t.params;
  EXPECT_NEAR(c - p, m.s0 * std::exp(-m.q * m.maturity) - t.strike * std::exp(-m.r * m.maturity), 1e-10);
}

TEST(Tree, RefinementConverges) {
  const double a = tree_price(put_spec(100.0, 5000)), b = tree_price(put_spec(100.0, 10000));
  EXPECT_NEAR(a, b, 1e-3);
}

TEST(Tree, AmericanDominatesEuropean) {
  for (double s0 : {70.0, 90.0, 100.0, 120.0}) {
    auto t = put_spec(s0);
    const double am = tree_price(t);
    t.style = ExerciseStyle::European;
    EXPECT_GE(am, tree_price(t)) << s0;
    EXPECT_GE(am, std::max(t.strike - s0, 0.0) - 1e-12);
  }
  // without dividends the American call is European
  auto c = put_spec();
  c.type = OptionType::Call;
  const double am = tree_price(c);
  c.style = ExerciseStyle::European;
  EXPECT_NEAR(am, tree_price(c), 1e-12);
}

TEST(Tree, BermudanBetweenEuropeanAndAmerican) {
  auto t = put_spec(100.0, 2000);
  const double am = tree_price(t);
  t.exercise_every = 40;
  const double be = tree_price(t);
  t.style = ExerciseStyle::European;
  const double eu = tree_price(t);
  EXPECT_LE(be, am);
  EXPECT_GE(be, eu);
}

TEST(Tree, MonotoneInVolatilityAndMaturity) {
  double last = 0.0;
  for (double sigma : {0.1, 0.2, 0.3, 0.4}) {
    auto t = put_spec();
    t.params.sigma = sigma;
    const double v = tree_price(t);
    EXPECT_GT(v, last);
    last = v;
  }
  last = 0.0;
  for (double T : {0.05, 0.1, 0.2, 0.5}) {
    auto t = put_spec();
    t.params.maturity = T;
    const double v = tree_price(t);
    EXPECT_GT(v, last);
    last = v;
  }
}

TEST(Tree, ZeroVolatilityLimit) {
  auto t = put_spec(90.0);
  t.params.sigma = 0.0;
  EXPECT_DOUBLE_EQ(tree_price(t), 10.0);
  t.style = ExerciseStyle::European;
  const auto& m = t.params;
  EXPECT_NEAR(tree_price(t), std::max(100.0 * std::exp(-m.r * m.maturity) - 90.0, 0.0), 1e-12);
  t.params.s0 = 120.0;
  EXPECT_EQ(tree_price(t), 0.0);
}

TEST(Tree, Errors) {
  auto t = put_spec(100.0, 0);
  EXPECT_THROW(tree_price(t), ParameterError);
  t = put_spec(100.0, 2);
  t.params.r = 5.0;
  t.params.sigma = 0.01;
  EXPECT_THROW(tree_price(t), StabilityError);
  EXPECT_THROW(bs_closed_form(ModelParams{100, 0.05, 0, 0.0, 1, 1}, 100, OptionType::Put), ParameterError);
}

TEST(TreeGreeks, DeepInTheMoneyPut) {
  const auto g = tree_greeks(put_spec(50.0));
  EXPECT_NEAR(g.delta, -1.0, 1e-9);
  EXPECT_NEAR(g.gamma, 0.0, 1e-6);
  EXPECT_DOUBLE_EQ(g.price, 50.0);
}

TEST(TreeGreeks, SignsAndBumpStability) {
  for (double s0 : {60.0, 80.0, 90.0, 100.0, 115.0, 140.0}) {
    auto t = put_spec(s0, 5000);
    const auto a = tree_greeks(t, 0.005), b = tree_greeks(t, 0.0025);
    EXPECT_LE(a.delta, 0.0);
    EXPECT_GE(a.delta, -1.0 - 1e-9);
    EXPECT_GE(a.gamma, -1e-6);
    EXPECT_NEAR(a.delta, b.delta, 5e-3) << s0;
    t.smooth = true;
    const auto c = tree_greeks(t, 0.005), d = tree_greeks(t, 0.0025);
    EXPECT_NEAR(c.delta, d.delta, 1e-3) << s0;
    if (s0 != 80.0) {  // 80 sits on the exercise boundary
      EXPECT_NEAR(c.gamma, d.gamma, 1e-3) << s0;
    }
  }
  EXPECT_THROW(tree_greeks(put_spec(), 0.0), ParameterError);
}

TEST(Tree, SmoothingKeepsPrices) {
  for (double s0 : {80.0, 100.0, 120.0}) {
    auto t = put_spec(s0, 2000);
    const double plain = tree_price(t);
    t.smooth = true;
    EXPECT_NEAR(tree_price(t), plain, 2e-3) << s0;
  }
}

TEST(TreeGreeks, EuropeanMatchesClosedForm) {
  for (double s0 : {80.0, 100.0, 120.0}) {
    auto t = put_spec(s0, 5000);
    t.style = ExerciseStyle::European;
    t.smooth = true;
    const auto g = tree_greeks(t);
    const auto& m = t.params;
    const double vs = m.sigma * std::sqrt(m.maturity);
    const double d1 = (std::log(m.s0 / t.strike) + (m.r + 0.5 * m.sigma * m.sigma) * m.maturity) / vs;
    EXPECT_NEAR(g.delta, normal_cdf(d1) - 1.0, 1e-3) << s0;
    EXPECT_NEAR(g.gamma, std::exp(-0.5 * d1 * d1) / std::sqrt(2 * M_PI) / (m.s0 * vs), 2e-4) << s0;
  }
}
