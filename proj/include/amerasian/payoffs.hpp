#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amerasian/error.hpp"

namespace amerasian {

enum class WindowStat { Avg, Min, Max };

// `Paper` keeps the 1/M factor in front of the window minimum and maximum exactly
// as the defining formula prints it; `Plain` uses the bare extrema.
enum class ExtremaPrefactor { Paper, Plain };

enum class OptionKind { AsianFixed, AsianFloating, LookbackFixed, LookbackFloating };

struct OptionSpec {
  OptionKind kind = OptionKind::AsianFixed;
  int window = 1;  // M, number of observations in the moving window
  double strike = 100.0;  // used by the fixed-strike kinds only
  ExtremaPrefactor prefactor = ExtremaPrefactor::Paper;

  bool fixed_strike() const { return kind == OptionKind::AsianFixed || kind == OptionKind::LookbackFixed; }

  // First date on which the payoff is defined (and exercise is admissible).
  int first_exercise_date() const { return window - 1; }

  void validate(int steps) const {
    if (window < 1 || window > steps + 1) throw ParameterError("window M must satisfy 1 <= M <= N+1");
    if (fixed_strike() && !(strike > 0.0)) throw ParameterError("strike must be positive");
  }
};

inline std::string_view to_string(OptionKind kind) {
  switch (kind) {
    case OptionKind::AsianFixed: return "asian_fixed";
    case OptionKind::AsianFloating: return "asian_floating";
    case OptionKind::LookbackFixed: return "lookback_fixed";
    case OptionKind::LookbackFloating: return "lookback_floating";
  }
  return "unknown";
}

// Window statistic over S_{T_{i-M+1}}..S_{T_i}. Min and max carry the 1/M factor
// unless `prefactor` is Plain.
inline double window_stat(std::span<const double> path, int i, int window, WindowStat stat,
                          ExtremaPrefactor prefactor = ExtremaPrefactor::Paper) {
  if (window < 1) throw ParameterError("window must be positive");
  if (i < window - 1) throw WindowUnderflowError("date index precedes the first full window");
  if (i >= static_cast<int>(path.size())) throw IndexError("date index beyond the path");
  const auto first = path.begin() + (i - window + 1);
  const auto last = path.begin() + i + 1;
  const double m = static_cast<double>(window);
  switch (stat) {
    case WindowStat::Avg: return std::accumulate(first, last, 0.0) / m;
    case WindowStat::Min: {
      const double v = *std::min_element(first, last);
      return prefactor == ExtremaPrefactor::Paper ? v / m : v;
    }
    case WindowStat::Max: {
      const double v = *std::max_element(first, last);
      return prefactor == ExtremaPrefactor::Paper ? v / m : v;
    }
  }
  return 0.0;
}

// Immediate exercise value Psi_i(M) of a put-style Asian or call-style look-back.
inline double exercise_value(const OptionSpec& spec, std::span<const double> path, int i) {
  const double spot = path[static_cast<std::size_t>(i)];
  switch (spec.kind) {
    case OptionKind::AsianFixed:
      return std::max(spec.strike - window_stat(path, i, spec.window, WindowStat::Avg), 0.0);
    case OptionKind::AsianFloating:
      return std::max(spot - window_stat(path, i, spec.window, WindowStat::Avg), 0.0);
    case OptionKind::LookbackFixed:
      return std::max(window_stat(path, i, spec.window, WindowStat::Max, spec.prefactor) - spec.strike, 0.0);
    case OptionKind::LookbackFloating:
      return std::max(spot - window_stat(path, i, spec.window, WindowStat::Min, spec.prefactor), 0.0);
  }
  return 0.0;
}

enum class CertificateKind { Snowball, LockIn };

inline std::string_view to_string(CertificateKind kind) {
  return kind == CertificateKind::Snowball ? "snowball" : "lock_in";
}

// Callable certificate on one underlying. Coupon dates are the path grid T_1..T_N;
// performances are measured as P(s) = s / reference.
struct CertificateSpec {
  CertificateKind kind = CertificateKind::Snowball;
  std::vector<double> coupons;  // c_1..c_N as fractions of notional
  double coupon_barrier = 1.0;  // K
  double capital_barrier = 0.35;  // H
  double reference = 100.0;  // s_0
  bool callable = true;  // issuer may redeem early on T_1..T_{N-1}

  int dates() const { return static_cast<int>(coupons.size()); }

  double performance(double s) const { return s / reference; }

  void validate() const {
    if (coupons.empty()) throw ParameterError("certificate needs at least one coupon date");
    for (double c : coupons)
      if (!(c >= 0.0)) throw ParameterError("coupon cash flows must be non-negative");
    if (!(coupon_barrier > 0.0)) throw ParameterError("coupon barrier must be positive");
    if (!(capital_barrier >= 0.0 && capital_barrier <= 1.0)) throw ParameterError("capital barrier must be in [0, 1]");
    if (!(reference > 0.0)) throw ParameterError("reference level must be positive");
  }

  // Quarterly certificate: N = 4 * years, constant coupon.
  static CertificateSpec quarterly(CertificateKind kind, int years, double coupon, double coupon_barrier,
                                   double capital_barrier, double reference = 100.0) {
    CertificateSpec spec;
    spec.kind = kind;
    spec.coupons.assign(static_cast<std::size_t>(4 * years), coupon);
    spec.coupon_barrier = coupon_barrier;
    spec.capital_barrier = capital_barrier;
    spec.reference = reference;
    return spec;
  }
};

// Coupon gamma_i paid on date i (1 <= i <= N). `path` holds S_{T_0}..S_{T_N}.
inline double certificate_coupon(const CertificateSpec& spec, std::span<const double> path, int i) {
  if (i < 1 || i > spec.dates()) throw IndexError("coupon index outside [1, N]");
  if (static_cast<int>(path.size()) <= i) throw IndexError("path shorter than coupon index");
  const auto above = [&](int j) { return spec.performance(path[static_cast<std::size_t>(j)]) > spec.coupon_barrier; };
  if (spec.kind == CertificateKind::Snowball) {
    if (!above(i)) return 0.0;
    int last_paid = 0;  // sup J(i), zero when empty
    for (int j = i - 1; j >= 1; --j) {
      if (above(j)) {
        last_paid = j;
        break;
      }
    }
    double total = 0.0;
    for (int j = last_paid + 1; j <= i; ++j) total += spec.coupons[static_cast<std::size_t>(j - 1)];
    return total;
  }
  for (int j = 1; j <= i; ++j)
    if (above(j)) return spec.coupons[static_cast<std::size_t>(i - 1)];
  return 0.0;
}

// Principal redeemed on date i: 1 before maturity, phi(S_{T_N}, H) at maturity.
inline double certificate_redemption(const CertificateSpec& spec, std::span<const double> path, int i) {
  if (i < 1 || i > spec.dates()) throw IndexError("redemption index outside [1, N]");
  if (i < spec.dates()) return 1.0;
  const double perf = spec.performance(path[static_cast<std::size_t>(i)]);
  return perf > spec.capital_barrier ? 1.0 : perf;
}

}  // namespace amerasian
