#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amerasian/error.hpp"
#include "amerasian/lsmc.hpp"
#include "amerasian/market_model.hpp"
#include "amerasian/payoffs.hpp"
#include "amerasian/random.hpp"

namespace amerasian {

// Degree n-1 interpolant through the n first-kind Chebyshev points of [a, b].
class ChebyshevInterpolant {
 public:
  static std::vector<double> nodes(double a, double b, int n) {
    if (!(a < b)) throw ParameterError("interval must satisfy a < b");
    if (n < 1) throw ParameterError("need at least one node");
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      s[k] = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(std::numbers::pi * (k + 0.5) / n);
    return s;
  }

  // `values[k]` is the function at nodes(a, b, n)[k].
  ChebyshevInterpolant(double a, double b, std::span<const double> values) : a_(a), b_(b) {
    const int n = static_cast<int>(values.size());
    if (!(a < b)) throw ParameterError("interval must satisfy a < b");
    if (n < 1) throw ParameterError("need at least one node value");
    coef_.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += values[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
      coef_[j] = 2.0 * sum / n;
    }
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  int size() const { return static_cast<int>(coef_.size()); }

  double value(double s) const { return clenshaw(coef_, s); }

  // order-th derivative in s, from the Chebyshev coefficient recurrence.
  double derivative(double s, int order) const {
    std::vector<double> c = coef_;
    for (int k = 0; k < order; ++k) c = differentiate(c);
    return clenshaw(c, s);
  }

 private:
  // Coefficients c use the convention f = sum_j c_j T_j - c_0 / 2.
  double clenshaw(const std::vector<double>& c, double s) const {
    const double x = (2.0 * s - a_ - b_) / (b_ - a_);
    double d = 0.0, dd = 0.0;
    for (int j = static_cast<int>(c.size()) - 1; j >= 1; --j) {
      const double t = d;
      d = 2.0 * x * d - dd + c[j];
      dd = t;
    }
    return x * d - dd + 0.5 * c[0];
  }

  std::vector<double> differentiate(const std::vector<double>& c) const {
    const int n = static_cast<int>(c.size());
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    if (n >= 2) {
      out[n - 2] = 2.0 * (n - 1) * c[n - 1];
      for (int j = n - 2; j >= 1; --j) out[j - 1] = (j + 1 < n ? out[j + 1] : 0.0) + 2.0 * j * c[j];
    }
    const double scale = 2.0 / (b_ - a_);
    for (auto& v : out) v *= scale;
    return out;
  }

  double a_, b_;
  std::vector<double> coef_;
};

struct SpotEvaluation {
  double price = 0.0;
  double std_error = 0.0;
  bool exercised_at_inception = false;
};

using SpotPricer = std::function<SpotEvaluation(double spot)>;

struct ChebyshevConfig {
  int nodes = 7;
  double width_fraction = 0.10;  // interval width as a fraction of s0
  double bisection_tolerance = 1e-3;  // fraction of s0
  bool adaptive = true;
};

struct GreekReport {
  double delta = 0.0;
  double gamma = 0.0;
  std::string method;
  double lower = 0.0, upper = 0.0;  // interpolation interval (chebyshev)
  bool shifted = false;
  std::optional<double> boundary;  // detected exercise-at-inception boundary
  std::vector<double> node_spots, node_prices, node_errors;
  double delta_error = 0.0, gamma_error = 0.0;  // regression method only
  std::shared_ptr<GreekReport> left, right;  // one-sided Greeks when s0 sits on the boundary
};

namespace detail {

inline GreekReport chebyshev_on(const SpotPricer& pricer, double s0, double a, double b, int n,
                                std::vector<SpotEvaluation>* evals = nullptr) {
  GreekReport rep;
  rep.method = "chebyshev";
  rep.lower = a;
  rep.upper = b;
  rep.node_spots = ChebyshevInterpolant::nodes(a, b, n);
  std::vector<SpotEvaluation> local;
  for (int k = 0; k < n; ++k) {
    SpotEvaluation e;
    try {
      e = pricer(rep.node_spots[k]);
    } catch (const NodePricingError&) {
      throw;
    } catch (const std::exception& ex) {
      throw NodePricingError(k, rep.node_spots[k], ex.what());
    }
    if (!std::isfinite(e.price)) throw NodePricingError(k, rep.node_spots[k], "non-finite price");
    rep.node_prices.push_back(e.price);
    rep.node_errors.push_back(e.std_error);
    local.push_back(e);
  }
  const ChebyshevInterpolant f(a, b, rep.node_prices);
  rep.delta = f.derivative(s0, 1);
  rep.gamma = f.derivative(s0, 2);
  if (evals) *evals = std::move(local);
  return rep;
}

}  // namespace detail

// Delta and Gamma at s0 from a Chebyshev interpolant of spot -> price. When the
// exercise-at-inception indicator flips inside the interval, the flip point is
// located by bisection and the interval is moved entirely to the side of s0.
inline GreekReport chebyshev_greeks(const SpotPricer& pricer, double s0, const ChebyshevConfig& cfg = {}) {
  if (!(s0 > 0.0)) throw ParameterError("spot must be positive");
  if (cfg.nodes < 3) throw ParameterError("Gamma needs at least three nodes");
  if (!(cfg.width_fraction > 0.0 && cfg.width_fraction < 1.0)) throw ParameterError("width fraction must lie in (0, 1)");
  const double w = cfg.width_fraction * s0;
  std::vector<SpotEvaluation> evals;
  GreekReport rep = detail::chebyshev_on(pricer, s0, s0 - 0.5 * w, s0 + 0.5 * w, cfg.nodes, &evals);
  if (!cfg.adaptive) return rep;

  // Nodes come out in decreasing spot order; scan for a change of the indicator.
  int flip = -1;
  for (int k = 0; k + 1 < cfg.nodes; ++k)
    if (evals[k].exercised_at_inception != evals[k + 1].exercised_at_inception) {
      flip = k;
      break;
    }
  if (flip < 0) return rep;

  double hi = rep.node_spots[flip], lo = rep.node_spots[flip + 1];
  const bool hi_state = evals[flip].exercised_at_inception;
  const double tol = cfg.bisection_tolerance * s0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (hi + lo);
    (pricer(mid).exercised_at_inception == hi_state ? hi : lo) = mid;
  }
  const double boundary = 0.5 * (hi + lo);

  GreekReport out;
  if (std::abs(boundary - s0) <= tol) {
    auto left = std::make_shared<GreekReport>(detail::chebyshev_on(pricer, s0, boundary - w, boundary, cfg.nodes));
    auto right = std::make_shared<GreekReport>(detail::chebyshev_on(pricer, s0, boundary, boundary + w, cfg.nodes));
    out = s0 >= boundary ? *right : *left;
    out.left = std::move(left);
    out.right = std::move(right);
  } else if (s0 > boundary) {
    out = detail::chebyshev_on(pricer, s0, boundary, boundary + w, cfg.nodes);
  } else {
    out = detail::chebyshev_on(pricer, s0, boundary - w, boundary, cfg.nodes);
  }
  out.shifted = true;
  out.boundary = boundary;
  return out;
}

// Discounted payoffs, one per path, for paths started at the given spots.
using PathwisePricer = std::function<std::vector<double>(std::span<const double> spots)>;

// Draws spots uniformly on s0 (1 +- epsilon), prices every path from its own
// spot, and regresses the pathwise values on (1, s - s0, (s - s0)^2).
inline GreekReport regression_greeks(const PathwisePricer& pricer, double s0, double epsilon, Eigen::Index n_paths,
                                     std::uint64_t seed) {
  if (!(s0 > 0.0)) throw ParameterError("spot must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  if (n_paths < 3) throw ParameterError("regression Greeks need at least three paths");
  std::vector<double> spots(static_cast<std::size_t>(n_paths));
  for (Eigen::Index p = 0; p < n_paths; ++p) {
    StreamRng rng(mix_seed(seed, 0x5b07), static_cast<std::uint64_t>(p));
    spots[p] = s0 * (1.0 + epsilon * (2.0 * rng.uniform() - 1.0));
  }
  const auto values = pricer(spots);
  if (static_cast<Eigen::Index>(values.size()) != n_paths) throw ShapeError("pricer returned the wrong path count");

  Eigen::MatrixXd x(n_paths, 3);
  Eigen::VectorXd y(n_paths);
  for (Eigen::Index p = 0; p < n_paths; ++p) {
    const double u = spots[p] - s0;
    x(p, 0) = 1.0;
    x(p, 1) = u;
    x(p, 2) = u * u;
    y(p) = values[p];
  }
  const auto qr = x.colPivHouseholderQr();
  const Eigen::VectorXd b = qr.solve(y);
  const double dof = static_cast<double>(n_paths - 3);
  const double s2 = dof > 0 ? (y - x * b).squaredNorm() / dof : 0.0;
  const Eigen::MatrixXd cov = s2 * (x.transpose() * x).inverse();

  GreekReport rep;
  rep.method = "regression";
  rep.delta = b(1);
  rep.gamma = 2.0 * b(2);
  rep.delta_error = std::sqrt(cov(1, 1));
  rep.gamma_error = 2.0 * std::sqrt(cov(2, 2));
  rep.lower = s0 * (1.0 - epsilon);
  rep.upper = s0 * (1.0 + epsilon);
  return rep;
}

struct LsmcGreekSettings {
  Eigen::Index n_train = 25000;
  Eigen::Index n_eval = 25000;
  std::uint64_t seed = 42;
  RegressionConfig regression;
  double inception_threshold = 0.5;  // exercise share at the first admissible date
};

// LSMC price as a function of spot with common random numbers: one batch of
// unit-spot paths is drawn up front and rescaled for every spot.
inline SpotPricer make_lsmc_spot_pricer(const ModelParams& params, const OptionSpec& option, const BasisSpec& basis,
                                        const LsmcGreekSettings& settings) {
  ModelParams unit = params;
  unit.s0 = 1.0;
  auto train = std::make_shared<PathBatch>(simulate_paths(unit, settings.n_train, mix_seed(settings.seed, 0)));
  auto eval = std::make_shared<PathBatch>(simulate_paths(unit, settings.n_eval, mix_seed(settings.seed, 1)));
  return [=](double spot) {
    ModelParams m = params;
    m.s0 = spot;
    const auto policy = fit_policy(train->scaled(spot), m, option, basis, settings.regression);
    const auto r = price_with_policy(eval->scaled(spot), policy);
    return SpotEvaluation{r.price, r.std_error, r.first_date_exercise_fraction > settings.inception_threshold};
  };
}

// Pathwise LSMC values for paths started at arbitrary spots. The training set
// has the same size and draws its own spots from the same interval.
inline PathwisePricer make_lsmc_pathwise_pricer(const ModelParams& params, const OptionSpec& option,
                                                const BasisSpec& basis, const RegressionConfig& regression,
                                                std::uint64_t seed) {
  return [=](std::span<const double> spots) {
    const auto n = static_cast<Eigen::Index>(spots.size());
    ModelParams unit = params;
    unit.s0 = 1.0;
    const auto [lo, hi] = std::minmax_element(spots.begin(), spots.end());
    std::vector<double> train_spots(spots.size());
    for (Eigen::Index p = 0; p < n; ++p) {
      StreamRng rng(mix_seed(seed, 0x7a11), static_cast<std::uint64_t>(p));
      train_spots[p] = *lo + (*hi - *lo) * rng.uniform();
    }
    const auto train = simulate_paths(unit, n, mix_seed(seed, 2)).scaled(train_spots);
    const auto eval = simulate_paths(unit, n, mix_seed(seed, 3)).scaled(spots);
    const auto policy = fit_policy(train, params, option, basis, regression);
    return price_with_policy(eval, policy, true).pathwise;
  };
}

}  // namespace amerasian
