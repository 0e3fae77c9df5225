#include <gtest/gtest.h>

#include <vector>

#include "amerasian/payoffs.hpp"

using namespace amerasian;

TEST(Payoffs, WindowStatistics) {
  const std::vector<double> path{100, 90, 120, 110, 80};
  EXPECT_DOUBLE_EQ(window_stat(path, 2, 3, WindowStat::Avg), 310.0 / 3.0);
  EXPECT_DOUBLE_EQ(window_stat(path, 4, 3, WindowStat::Max, ExtremaPrefactor::Plain), 120.0);
  EXPECT_DOUBLE_EQ(window_stat(path, 4, 3, WindowStat::Min, ExtremaPrefactor::Plain), 80.0);
  EXPECT_DOUBLE_EQ(window_stat(path, 4, 3, WindowStat::Max), 40.0);
  EXPECT_DOUBLE_EQ(window_stat(path, 4, 1, WindowStat::Avg), 80.0);
  EXPECT_THROW(window_stat(path, 1, 3, WindowStat::Avg), WindowUnderflowError);
  EXPECT_THROW(window_stat(path, 5, 1, WindowStat::Avg), IndexError);
}

TEST(Payoffs, DegenerateWindowReductions) {
  const std::vector<double> path{100, 93, 104};
  OptionSpec o;
  o.strike = 100;
  o.kind = OptionKind::AsianFixed;
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 1), 7.0);
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 2), 0.0);
  o.kind = OptionKind::AsianFloating;
  for (int i = 0; i < 3; ++i) EXPECT_EQ(exercise_value(o, path, i), 0.0);
  o.kind = OptionKind::LookbackFixed;
  o.prefactor = ExtremaPrefactor::Plain;
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 2), 4.0);
}

TEST(Payoffs, WindowedPayoffs) {
  const std::vector<double> path{100, 90, 120, 110};
  OptionSpec o;
  o.window = 3;
  o.kind = OptionKind::AsianFloating;
  EXPECT_NEAR(exercise_value(o, path, 3), 110.0 - 320.0 / 3.0, 1e-12);
  o.kind = OptionKind::LookbackFloating;
  o.prefactor = ExtremaPrefactor::Plain;
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 3), 20.0);
  o.prefactor = ExtremaPrefactor::Paper;
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 3), 110.0 - 30.0);
  o.kind = OptionKind::LookbackFixed;
  o.strike = 30.0;
  EXPECT_DOUBLE_EQ(exercise_value(o, path, 3), 10.0);
  EXPECT_EQ(o.first_exercise_date(), 2);
}

TEST(Payoffs, OptionSpecValidation) {
  OptionSpec o;
  o.window = 52;
  EXPECT_THROW(o.validate(50), ParameterError);
  o.window = 51;
  EXPECT_NO_THROW(o.validate(50));
  o.strike = 0.0;
  EXPECT_THROW(o.validate(50), ParameterError);
}

TEST(Payoffs, SnowballAccumulatesUnpaidCoupons) {
  auto c = CertificateSpec::quarterly(CertificateKind::Snowball, 1, 0.02, 1.0, 0.35);
  // performance above barrier on dates 2 and 4 only
  const std::vector<double> path{100, 95, 105, 99, 101};
  EXPECT_EQ(certificate_coupon(c, path, 1), 0.0);
  EXPECT_NEAR(certificate_coupon(c, path, 2), 0.04, 1e-15);
  EXPECT_EQ(certificate_coupon(c, path, 3), 0.0);
  EXPECT_NEAR(certificate_coupon(c, path, 4), 0.04, 1e-15);
  EXPECT_THROW(certificate_coupon(c, path, 0), IndexError);
}

TEST(Payoffs, LockInPaysOnceBarrierTouched) {
  auto c = CertificateSpec::quarterly(CertificateKind::LockIn, 1, 0.03, 1.0, 0.4);
  const std::vector<double> path{100, 95, 105, 90, 80};
  EXPECT_EQ(certificate_coupon(c, path, 1), 0.0);
  EXPECT_EQ(certificate_coupon(c, path, 2), 0.03);
  EXPECT_EQ(certificate_coupon(c, path, 3), 0.03);
  EXPECT_EQ(certificate_coupon(c, path, 4), 0.03);
}

TEST(Payoffs, Redemption) {
  auto c = CertificateSpec::quarterly(CertificateKind::Snowball, 1, 0.02, 1.0, 0.35);
  const std::vector<double> crash{100, 50, 40, 30, 20};
  EXPECT_EQ(certificate_redemption(c, crash, 3), 1.0);
  EXPECT_DOUBLE_EQ(certificate_redemption(c, crash, 4), 0.2);
  const std::vector<double> ok{100, 50, 40, 30, 36};
  EXPECT_EQ(certificate_redemption(c, ok, 4), 1.0);
  EXPECT_EQ(c.dates(), 4);
  c.coupons[1] = -1.0;
  EXPECT_THROW(c.validate(), ParameterError);
}
