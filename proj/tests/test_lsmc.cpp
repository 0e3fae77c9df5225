#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "amerasian/lsmc.hpp"
#include "amerasian/oracles.hpp"

using namespace amerasian;

namespace {

ModelParams small_model(int steps = 10) {
  ModelParams m;
  m.steps = steps;
  m.maturity = 0.1;
  return m;
}

PathBatch hand_batch(std::initializer_list<std::initializer_list<double>> rows) {
  PathBatch::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index p = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(p, j++) = v;
    ++p;
  }
  return PathBatch(std::move(m), 0);
}

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

}  // namespace

TEST(Lsmc, BasisLabels) {
  BasisSpec b;
  EXPECT_EQ(b.label(), "poly_d2");
  b.family = BasisFamily::Signature;
  EXPECT_THROW(b.validate(), SpecError);
  b.rho = 4;
  EXPECT_EQ(b.label(), "signature_n5");
  EXPECT_EQ(parse_basis_family("rrnn"), BasisFamily::Rrnn);
  EXPECT_FALSE(parse_basis_family("spline").has_value());
}

TEST(Lsmc, ZeroVolDeepOutOfTheMoney) {
  auto m = small_model();
  m.sigma = 0.0;
  OptionSpec put;
  put.strike = 50.0;
  const auto train = simulate_paths(m, 200, 1), eval = simulate_paths(m, 200, 2);
  const auto policy = fit_policy(train, m, put, BasisSpec{});
  EXPECT_EQ(price_with_policy(eval, policy).price, 0.0);
}

TEST(Lsmc, TwoPathDynamicProgram) {
  ModelParams m;
  m.r = 0.0;
  m.steps = 2;
  m.maturity = 1.0;
  RegressionConfig cfg;
  cfg.min_regression_paths = 1;
  OptionSpec put;  // M = 1, K = 100: an American put on the spot
  // path 0 is in the money at date 1 with payoff 10 against a realized 5
  const auto a = hand_batch({{100, 90, 95}, {100, 110, 80}});
  const auto pa = fit_policy(a, m, put, BasisSpec{}, cfg);
  EXPECT_TRUE(pa.fits[1].regressed);
  EXPECT_FALSE(pa.fits[0].regressed);
  EXPECT_NEAR(pa.train_price, 15.0, 1e-9);
  EXPECT_NEAR(price_with_policy(a, pa).price, 15.0, 1e-9);
  // now holding is worth 20 > 10
  const auto b = hand_batch({{100, 90, 80}, {100, 110, 80}});
  const auto pb = fit_policy(b, m, put, BasisSpec{}, cfg);
  EXPECT_NEAR(price_with_policy(b, pb).price, 20.0, 1e-9);
}

TEST(Lsmc, FloatingAsianSingleObservationIsWorthless) {
  const auto m = small_model();
  OptionSpec o;
  o.kind = OptionKind::AsianFloating;
  const auto train = simulate_paths(m, 2000, 3), eval = simulate_paths(m, 2000, 4);
  for (auto fam : {BasisFamily::Poly, BasisFamily::Rffnn, BasisFamily::Rrnn, BasisFamily::Signature}) {
    BasisSpec b;
    b.family = fam;
    b.rho = fam == BasisFamily::Signature ? 4 : 2;
    b.sig_order = 3;
    const auto policy = fit_policy(train, m, o, b);
    EXPECT_EQ(price_with_policy(eval, policy).price, 0.0) << to_string(fam);
  }
}

TEST(Lsmc, NoRegressionMeansEuropean) {
  const auto m = small_model();
  RegressionConfig cfg;
  cfg.min_regression_paths = 1 << 30;
  for (auto kind : {OptionKind::AsianFixed, OptionKind::LookbackFloating}) {
    OptionSpec o;
    o.kind = kind;
    o.window = 3;
    const auto train = simulate_paths(m, 1000, 5), eval = simulate_paths(m, 3000, 6);
    const auto policy = fit_policy(train, m, o, BasisSpec{}, cfg);
    const auto am = price_with_policy(eval, policy), eu = price_european(eval, m, o);
    EXPECT_DOUBLE_EQ(am.price, eu.price);
    EXPECT_DOUBLE_EQ(am.std_error, eu.std_error);
  }
}

TEST(Lsmc, LookbackCallWithoutDividendsIsEuropean) {
  ModelParams m;  // defaults: T = 0.2, N = 50
  OptionSpec o;
  o.kind = OptionKind::LookbackFixed;
  const auto train = simulate_paths(m, 20000, 7), eval = simulate_paths(m, 100000, 8);
  const auto r = price_with_policy(eval, fit_policy(train, m, o, BasisSpec{}));
  const double bs = bs_closed_form(m, 100.0, OptionType::Call);
  EXPECT_LE(r.price, bs + 3.0 * r.std_error);
  EXPECT_GE(r.price, bs - 4.0 * r.std_error - 0.01 * bs);
}

TEST(Lsmc, LowerBoundAgainstTree) {
  const ModelParams m;
  OptionSpec put;
  const auto train = simulate_paths(m, 20000, 9), eval = simulate_paths(m, 100000, 10);
  const auto r = price_with_policy(eval, fit_policy(train, m, put, BasisSpec{}));
  TreeSpec t;
  t.params = m;
  t.steps = 2000;
  t.exercise_every = 40;  // the 50 LSMC dates
  const double bermudan = tree_price(t);
  EXPECT_LE(r.price, bermudan + 3.0 * r.std_error);
  EXPECT_GE(r.price, 0.98 * bermudan);
}

TEST(Lsmc, CertificateWithoutCouponsOrBarrierIsAZeroBond) {
  ModelParams m;
  m.maturity = 1.0;
  m.steps = 4;
  auto c = CertificateSpec::quarterly(CertificateKind::Snowball, 1, 0.0, 1.0, 0.0);
  const auto train = simulate_paths(m, 500, 1), eval = simulate_paths(m, 500, 2);
  BasisSpec b;
  b.rho = 4;
  const auto policy = fit_certificate_policy(train, m, c, b);
  const auto r = price_certificate_with_policy(eval, policy);
  EXPECT_NEAR(r.price, std::exp(-m.r), 1e-12);
  EXPECT_NEAR(r.first_date_exercise_fraction, 0.0, 0.0);
  EXPECT_NEAR(price_certificate_noncallable(eval, m, c).price, std::exp(-m.r), 1e-12);
}

TEST(Lsmc, CallableBelowNonCallableAndBounded) {
  ModelParams m;
  m.maturity = 2.0;
  m.steps = 8;
  const auto train = simulate_paths(m, 4000, 11), eval = simulate_paths(m, 20000, 12);
  for (auto kind : {CertificateKind::Snowball, CertificateKind::LockIn}) {
    auto c = CertificateSpec::quarterly(kind, 2, 0.024, kind == CertificateKind::Snowball ? 1.0 : 0.9, 0.3);
    const auto policy = fit_certificate_policy(train, m, c, BasisSpec{});
    const auto callable = price_certificate_with_policy(eval, policy, true);
    const auto hold = price_certificate_noncallable(eval, m, c);
    EXPECT_LE(callable.price, hold.price + 3.0 * hold.std_error) << to_string(kind);
    const double cap = std::accumulate(c.coupons.begin(), c.coupons.end(), 0.0) + 1.0;
    for (double v : callable.pathwise) ASSERT_LE(v, cap);
    EXPECT_GT(callable.price, 0.5);
  }
}

TEST(Lsmc, PolicyProductMismatch) {
  const auto m = small_model(4);
  const auto batch = simulate_paths(m, 200, 1);
  const auto opt = fit_policy(batch, m, OptionSpec{}, BasisSpec{});
  EXPECT_THROW(price_certificate_with_policy(batch, opt), SpecError);
  ModelParams cm = m;
  cm.maturity = 1.0;
  const auto cert = fit_certificate_policy(batch, cm, CertificateSpec::quarterly(CertificateKind::Snowball, 1, 0.02, 1.0, 0.35),
                                           BasisSpec{});
  EXPECT_THROW(price_with_policy(batch, cert), SpecError);
  EXPECT_THROW(price_with_policy(simulate_paths(small_model(5), 10, 1), opt), SpecError);
}

TEST(Lsmc, DeterministicAcrossThreads) {
  const auto m = small_model();
  OptionSpec o;
  o.window = 3;
  RunSettings s;
  s.paths = 40000;
  s.n_runs = 3;
  s.seed = 99;
  const auto a = run_experiment(m, o, BasisSpec{}, s);
  s.threads = 3;
  const auto b = run_experiment(m, o, BasisSpec{}, s);
  EXPECT_EQ(a.run_prices, b.run_prices);
  EXPECT_EQ(a.price, b.price);
  EXPECT_EQ(a.std_error, b.std_error);

  const auto train = simulate_paths(m, 5000, 1), eval = simulate_paths(m, 40000, 2);
  const auto policy = fit_policy(train, m, o, BasisSpec{});
  const auto r1 = price_with_policy(eval, policy, true, 1), r3 = price_with_policy(eval, policy, true, 3);
  EXPECT_EQ(r1.price, r3.price);
  EXPECT_EQ(r1.pathwise, r3.pathwise);
}

TEST(Lsmc, StreamCursorsMatchScratchDesign) {
  const auto m = small_model(12);
  const auto batch = simulate_paths(m, 300, 21);
  const auto scaler = FactorScaler::fit(batch, 1);
  const auto panel = scaler.transform(batch);
  const auto rows = all_rows(batch.n_paths());
  auto compare = [&](const BasisSpec& spec, Direction dir) {
    const Basis basis(spec, RiskSetSpec{4, 1}, scaler, m.steps);
    auto cursor = basis.cursor(panel, dir);
    for (int k = 0; k <= m.steps; ++k) {
      const int i = dir == Direction::Forward ? k : m.steps - k;
      cursor->move_to(i);
      const auto got = cursor->design(rows);
      const auto want = basis.design(panel, i, rows);
      ASSERT_EQ(got.cols(), want.cols()) << "date " << i;
      ASSERT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9) << "date " << i;
    }
  };
  BasisSpec sig;
  sig.family = BasisFamily::Signature;
  sig.rho = 4;
  sig.sig_order = 4;
  compare(sig, Direction::Forward);
  compare(sig, Direction::Backward);
  sig.augment = true;
  compare(sig, Direction::Backward);
  BasisSpec rnn;
  rnn.family = BasisFamily::Rrnn;
  rnn.rho = 4;
  compare(rnn, Direction::Forward);
  compare(rnn, Direction::Backward);
}

TEST(Lsmc, SignatureSkipsDatesBeforeWindow) {
  const auto m = small_model();
  OptionSpec o;
  o.window = 4;
  BasisSpec b;
  b.family = BasisFamily::Signature;
  b.rho = 3;
  b.sig_order = 3;
  const auto train = simulate_paths(m, 3000, 1);
  const auto policy = fit_policy(train, m, o, b);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(policy.fits[i].regressed);
  EXPECT_TRUE(policy.fits[5].regressed);
}
