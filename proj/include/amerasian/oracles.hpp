#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "amerasian/error.hpp"
#include "amerasian/market_model.hpp"

namespace amerasian {

enum class OptionType { Call, Put };

enum class ExerciseStyle { American, European };

struct TreeSpec {
  ModelParams params;  // s0, r, q, sigma, maturity are read; params.steps is ignored
  int steps = 5000;
  OptionType type = OptionType::Put;
  double strike = 100.0;
  ExerciseStyle style = ExerciseStyle::American;
  int exercise_every = 1;  // early exercise only on steps divisible by this (Bermudan lattice)
  bool smooth = false;  // Black-Scholes values over the last step instead of the raw payoff
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// European Black-Scholes price with continuous rate r and dividend yield q.
inline double bs_closed_form(const ModelParams& m, double strike, OptionType type) {
  if (!(m.sigma > 0.0) || !(m.maturity > 0.0)) throw ParameterError("closed form needs sigma > 0 and T > 0");
  if (!(strike > 0.0)) throw ParameterError("strike must be positive");
  const double t = m.maturity;
  const double vs = m.sigma * std::sqrt(t);
  const double d1 = (std::log(m.s0 / strike) + (m.r - m.q + 0.5 * m.sigma * m.sigma) * t) / vs;
  const double d2 = d1 - vs;
  const double fwd = m.s0 * std::exp(-m.q * t), pv_k = strike * std::exp(-m.r * t);
  if (type == OptionType::Call) return fwd * normal_cdf(d1) - pv_k * normal_cdf(d2);
  return pv_k * normal_cdf(-d2) - fwd * normal_cdf(-d1);
}

inline double vanilla_payoff(OptionType type, double s, double k) {
  return type == OptionType::Put ? std::max(k - s, 0.0) : std::max(s - k, 0.0);
}

// Cox-Ross-Rubinstein lattice, u = exp(sigma sqrt(dt)), d = 1/u.
inline double tree_price(const TreeSpec& spec) {
  const auto& m = spec.params;
  if (spec.steps < 1) throw ParameterError("tree needs at least one step");
  if (!(m.s0 > 0.0) || !(m.maturity > 0.0) || !(m.sigma >= 0.0)) throw ParameterError("invalid model parameters");
  if (spec.exercise_every < 1) throw ParameterError("exercise_every must be positive");
  const bool american = spec.style == ExerciseStyle::American;
  const double dt = m.maturity / spec.steps;

  if (m.sigma == 0.0) {
    // Deterministic forward path; the holder picks the best admissible date.
    double best = std::exp(-m.r * m.maturity) *
                  vanilla_payoff(spec.type, m.s0 * std::exp((m.r - m.q) * m.maturity), spec.strike);
    if (american) {
      for (int j = 0; j < spec.steps; j += spec.exercise_every) {
        const double t = j * dt;
        best = std::max(best, std::exp(-m.r * t) * vanilla_payoff(spec.type, m.s0 * std::exp((m.r - m.q) * t), spec.strike));
      }
    }
    return best;
  }

  const double u = std::exp(m.sigma * std::sqrt(dt));
  const double d = 1.0 / u;
  const double p = (std::exp((m.r - m.q) * dt) - d) / (u - d);
  if (!(p > 0.0 && p < 1.0)) throw StabilityError("risk-neutral probability outside (0, 1); refine the tree");
  const double disc = std::exp(-m.r * dt);
  const double pu = disc * p, pd = disc * (1.0 - p);

  const int n = spec.steps;
  std::vector<double> v(static_cast<std::size_t>(n + 1));
  const double log_s0 = std::log(m.s0), log_u = std::log(u);
  for (int k = 0; k <= n; ++k)
    v[k] = vanilla_payoff(spec.type, std::exp(log_s0 + (2 * k - n) * log_u), spec.strike);
  int top = n - 1;
  if (spec.smooth && n >= 2) {
    // removes the odd-even oscillation of the lattice around the strike
    ModelParams last = m;
    last.maturity = dt;
    for (int k = 0; k < n; ++k) {
      last.s0 = std::exp(log_s0 + (2 * k - (n - 1)) * log_u);
      double cont = bs_closed_form(last, spec.strike, spec.type);
      if (american && (n - 1) % spec.exercise_every == 0)
        cont = std::max(cont, vanilla_payoff(spec.type, last.s0, spec.strike));
      v[k] = cont;
    }
    top = n - 2;
  }
  for (int j = top; j >= 0; --j) {
    const bool can_exercise = american && j % spec.exercise_every == 0;
    for (int k = 0; k <= j; ++k) {
      double cont = pd * v[k] + pu * v[k + 1];
      if (can_exercise) cont = std::max(cont, vanilla_payoff(spec.type, std::exp(log_s0 + (2 * k - j) * log_u), spec.strike));
      v[k] = cont;
    }
  }
  return v[0];
}

inline double tree_price_american(TreeSpec spec) {
  spec.style = ExerciseStyle::American;
  return tree_price(spec);
}

struct TreeGreeks {
  double price = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
};

// Central differences of rebuilt trees at s0 (1 +- bump).
inline TreeGreeks tree_greeks(const TreeSpec& spec, double bump = 0.005) {
  if (!(bump > 0.0 && bump < 1.0)) throw ParameterError("bump must lie in (0, 1)");
  const double s0 = spec.params.s0, h = bump * s0;
  auto at = [&](double s) {
    TreeSpec t = spec;
    t.params.s0 = s;
    return tree_price(t);
  };
  const double up = at(s0 + h), mid = at(s0), down = at(s0 - h);
  return {mid, (up - down) / (2.0 * h), (up - 2.0 * mid + down) / (h * h)};
}

}  // namespace amerasian
