#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amerasian/basis_signature.hpp"

using namespace amerasian;

namespace {

PiecewiseLinearPath random_path(std::mt19937_64& rng, int dim, int vertices) {
  std::normal_distribution<double> n;
  PiecewiseLinearPath p{dim, {}};
  for (int k = 0; k < dim * vertices; ++k) p.vertices.push_back(n(rng));
  return p;
}

PiecewiseLinearPath concat(const PiecewiseLinearPath& a, const PiecewiseLinearPath& b) {
  PiecewiseLinearPath out = a;
  out.vertices.insert(out.vertices.end(), b.vertices.begin() + b.dim, b.vertices.end());
  return out;
}

PiecewiseLinearPath reversed(const PiecewiseLinearPath& p) {
  PiecewiseLinearPath out{p.dim, {}};
  for (std::size_t k = p.size(); k-- > 0;) {
    const auto v = p.vertex(k);
    out.vertices.insert(out.vertices.end(), v.begin(), v.end());
  }
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(Signature, LeadLagGolden) {
  std::ifstream in(std::string(AMERASIAN_TEST_DATA) + "/lead_lag_golden.txt");
  ASSERT_TRUE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto bar = line.find('|');
    std::istringstream s(line.substr(0, bar)), v(line.substr(bar + 1));
    std::vector<double> series, want;
    for (double x; s >> x;) series.push_back(x);
    for (double x; v >> x;) want.push_back(x);
    const auto p = lead_lag(series);
    EXPECT_EQ(p.dim, 2);
    EXPECT_EQ(p.size(), 2 * series.size() - 1);
    EXPECT_EQ(p.vertices, want) << line;
    ++cases;
  }
  EXPECT_EQ(cases, 4);
  EXPECT_THROW(lead_lag(std::vector<double>{1.0}), InputError);
}

TEST(Signature, TimeJoin) {
  const auto p = time_join(lead_lag(std::vector<double>{2, 3}));
  EXPECT_EQ(p.dim, 3);
  const std::vector<double> want{0, 0, 0, 0, 2, 2, 0.5, 3, 2, 1, 3, 3};
  EXPECT_EQ(p.vertices, want);
  const auto sig = signature(p, 2);
  EXPECT_NEAR(sig.level(1)[0], 1.0, 1e-15);  // total time increment
  EXPECT_THROW(time_join(PiecewiseLinearPath{3, {0, 0, 0, 1, 1, 1}}), InputError);
  for (std::size_t k = 2; k < p.size(); ++k) EXPECT_GT(p.vertex(k)[0], p.vertex(k - 1)[0]);
}

TEST(Signature, LinearSegmentClosedForm) {
  const double a = 0.7, b = -1.3;
  const auto s = signature(PiecewiseLinearPath{2, {0, 0, a, b}}, 3);
  EXPECT_NEAR(s.level(1)[0], a, 1e-12);
  EXPECT_NEAR(s.level(1)[1], b, 1e-12);
  const double l2[] = {a * a / 2, a * b / 2, a * b / 2, b * b / 2};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s.level(2)[k], l2[k], 1e-12);
  EXPECT_NEAR(s.level(3)[1], a * a * b / 6, 1e-12);  // word (1,1,2)
  EXPECT_NEAR(s.level(3)[6], a * b * b / 6, 1e-12);  // word (2,2,1)
  EXPECT_NEAR(s.level(3)[7], b * b * b / 6, 1e-12);
}

TEST(Signature, FeatureCounts) {
  EXPECT_EQ(signature_feature_count(3, 2), 12u);
  EXPECT_EQ(signature_feature_count(3, 3), 39u);
  EXPECT_EQ(signature_feature_count(3, 4), 120u);
  EXPECT_EQ(signature_feature_count(3, 5), 363u);
  for (int n = 1; n <= 5; ++n) {
    const auto d = signature_design(Eigen::MatrixXd::Random(3, 7), n);
    EXPECT_EQ(static_cast<long>(d.cols()), (static_cast<long>(std::pow(3, n + 1)) - 1) / 2);
  }
  EXPECT_EQ(signature_design(Eigen::MatrixXd::Random(3, 7), 2, Eigen::VectorXd::Ones(3)).cols(), 14);
  EXPECT_EQ(signature_design(Eigen::MatrixXd::Random(3, 40), 5).cols(), signature_design(Eigen::MatrixXd::Random(3, 2), 5).cols());
}

TEST(Signature, OrderCap) {
  const PiecewiseLinearPath p{2, {0, 0, 1, 1}};
  EXPECT_THROW(signature(p, 7), OrderError);
  EXPECT_THROW(signature(p, 0), OrderError);
  EXPECT_NO_THROW(signature(p, 6));
  EXPECT_NO_THROW(signature(p, 7, 7));
}

TEST(Signature, ChenIdentity) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    auto p = random_path(rng, 3, 3);
    auto q = random_path(rng, 3, 3);
    for (int c = 0; c < 3; ++c) q.vertices[c] = p.vertices[p.vertices.size() - 3 + c];
    const auto lhs = signature(concat(p, q), 5);
    const auto rhs = signature(p, 5) * signature(q, 5);
    worst = std::max(worst, max_abs_diff(lhs.coefficients(), rhs.coefficients()));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Signature, ReversalIsInverse) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_path(rng, 3, 5);
    const auto s = signature(concat(p, reversed(p)), 5);
    const auto c = s.coefficients();
    EXPECT_NEAR(c[0], 1.0, 1e-15);
    for (std::size_t k = 1; k < c.size(); ++k) ASSERT_NEAR(c[k], 0.0, 1e-10);
  }
}

TEST(Signature, ConstantSeriesVanishes) {
  const auto s = signature(lead_lag(std::vector<double>{4, 4, 4}), 4);
  for (double v : s.features()) EXPECT_EQ(v, 0.0);
  // with time joined only pure-time words survive, after the spatial stub
  const auto d = signature_design(Eigen::MatrixXd::Zero(1, 5), 3);
  const TensorLayout layout(3, 3);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t i = 0; i < layout.level_size(k); ++i) {
      const double v = d(0, static_cast<Eigen::Index>(layout.offset(k) - 1 + i));
      if (i == 0) EXPECT_NEAR(v, 1.0 / std::tgamma(k + 1), 1e-14);
      else EXPECT_EQ(v, 0.0);
    }
}

TEST(Signature, LevyAreaIsHalfQuadraticVariation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> series(5);
    for (auto& x : series) x = n(rng);
    const auto path = lead_lag(series);
    // second-level iterated integrals by brute force over segment pairs
    double s12 = 0.0, s21 = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      const double ak = path.vertex(k)[0] - path.vertex(k - 1)[0], bk = path.vertex(k)[1] - path.vertex(k - 1)[1];
      s12 += 0.5 * ak * bk;
      s21 += 0.5 * bk * ak;
      for (std::size_t l = k + 1; l < path.size(); ++l) {
        const double al = path.vertex(l)[0] - path.vertex(l - 1)[0], bl = path.vertex(l)[1] - path.vertex(l - 1)[1];
        s12 += ak * bl;
        s21 += bk * al;
      }
    }
    double qv = 0.0;
    for (std::size_t j = 1; j < series.size(); ++j) qv += (series[j] - series[j - 1]) * (series[j] - series[j - 1]);
    EXPECT_NEAR(0.5 * (s12 - s21), 0.5 * qv, 1e-12);
    const auto sig = signature(path, 2);
    EXPECT_NEAR(sig.level(2)[1], s12, 1e-12);
    EXPECT_NEAR(sig.level(2)[2], s21, 1e-12);
  }
}

TEST(Signature, FactorialDecay) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_path(rng, 3, 6);
    double len = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k)
      for (int c = 0; c < 3; ++c) len += std::abs(p.vertex(k)[c] - p.vertex(k - 1)[c]);
    const auto s = signature(p, 5);
    for (int k = 1; k <= 5; ++k)
      for (double v : s.level(k)) EXPECT_LE(std::abs(v), std::pow(len, k) / std::tgamma(k + 1) * (1 + 1e-12));
  }
}

TEST(Signature, FastPathMatchesExplicitConstruction) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  const TensorLayout layout(3, 4);
  std::vector<double> sig(layout.size()), scratch(2 * layout.level_size(4));
  for (int len = 2; len < 9; ++len) {
    std::vector<double> series(len);
    for (auto& x : series) x = n(rng);
    lead_lag_signature_features(layout, series, sig, scratch);
    const auto want = signature(time_join(lead_lag(series)), 4);
    EXPECT_LT(max_abs_diff(sig, want.coefficients()), 1e-12);
  }
  // single observation: flat two-point series
  const std::vector<double> one{0.8};
  lead_lag_signature_features(layout, one, sig, scratch);
  const auto want = signature(time_join(lead_lag(std::vector<double>{0.8, 0.8})), 4);
  EXPECT_LT(max_abs_diff(sig, want.coefficients()), 1e-14);
}

TEST(Signature, StreamMatchesScratchBothWays) {
  const Eigen::Index paths = 4;
  const int len = 12, order = 5;
  const Eigen::MatrixXd series = Eigen::MatrixXd::Random(paths, len);
  SignatureStream stream(paths, order);
  std::vector<double> got(stream.feature_count());
  auto check = [&](int l) {
    const auto want = signature_design(series.leftCols(l), order);
    for (Eigen::Index p = 0; p < paths; ++p) {
      stream.features(p, got);
      for (std::size_t k = 0; k < got.size(); ++k)
        ASSERT_NEAR(got[k], want(p, static_cast<Eigen::Index>(k)), 1e-10) << "length " << l;
    }
  };
  for (int l = 1; l <= len; ++l) {
    const Eigen::VectorXd x = series.col(l - 1), prev = l > 1 ? Eigen::VectorXd(series.col(l - 2)) : x;
    stream.push(x, l > 1 ? &prev : nullptr);
    check(l);
  }
  for (int l = len; l > 1; --l) {
    const Eigen::VectorXd last = series.col(l - 1), prev = series.col(l - 2);
    stream.pop(last, &prev);
    check(l - 1);
  }
}
