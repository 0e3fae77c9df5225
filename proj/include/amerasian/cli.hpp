#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amerasian/basis_poly.hpp"
#include "amerasian/basis_signature.hpp"
#include "amerasian/config.hpp"
#include "amerasian/csv.hpp"
#include "amerasian/features.hpp"
#include "amerasian/lsmc.hpp"
#include "amerasian/oracles.hpp"
#include "amerasian/sensitivities.hpp"

namespace amerasian {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Runs the (product x basis x rho x M) grid and writes one CSV row per cell.
inline int cmd_price(const ExperimentConfig& cfg, std::ostream& csv, std::ostream& log) {
  if (cfg.empty_grid()) {
    log << "error: empty experiment grid\n";
    return kExitUsage;
  }
  write_csv_row(csv, split_csv_line(kPriceCsvHeader));
  bool failed = false;
  for (const auto& name : cfg.products) {
    const bool cert = ExperimentConfig::is_certificate(name);
    const auto params = cfg.model_for(name);
    const std::vector<int> windows = cert ? std::vector<int>{1} : cfg.windows;
    const std::vector<int> rhos = cert ? std::vector<int>{4} : cfg.rhos;
    for (int m : windows) {
      const auto product = cfg.make_product(name, m);
      for (auto family : cfg.families) {
        for (int rho : rhos) {
          BasisSpec basis = cfg.basis;
          basis.family = family;
          basis.rho = rho;
          if (!ExperimentConfig::basis_cell_applies(basis)) continue;
          std::vector<std::string> row{product_name(product), basis.label(), std::to_string(rho), std::to_string(m)};
          try {
            const auto est = run_experiment(params, product, basis, cfg.run);
            row.push_back(format_fixed(est.price));
            row.push_back(format_fixed(est.std_error));
            row.push_back(format_fixed(cfg.timing ? est.median_time_s : 0.0));
            for (const auto& w : est.warnings) log << "warning: " << w << '\n';
            log << row[0] << ' ' << row[1] << " rho=" << rho << " M=" << m << ": " << row[4] << " +- " << row[5]
                << '\n';
          } catch (const Error& e) {
            failed = true;
            row.insert(row.end(), {"NA", "NA", "NA"});
            log << "warning: " << row[0] << ' ' << row[1] << " rho=" << rho << " M=" << m << " failed: " << e.what()
                << '\n';
          }
          row.push_back(std::to_string(cfg.run.seed));
          write_csv_row(csv, row);
        }
      }
    }
  }
  return failed ? kExitNumerical : kExitOk;
}

enum class GreekMethod { Chebyshev, Regression, Tree };

inline std::string_view to_string(GreekMethod m) {
  switch (m) {
    case GreekMethod::Chebyshev: return "chebyshev";
    case GreekMethod::Regression: return "regression";
    case GreekMethod::Tree: return "tree";
  }
  return "unknown";
}

inline std::vector<GreekMethod> parse_greek_methods(const std::string& text) {
  std::vector<GreekMethod> out;
  for (const auto& s : detail::split_list(text)) {
    if (s == "chebyshev") out.push_back(GreekMethod::Chebyshev);
    else if (s == "regression") out.push_back(GreekMethod::Regression);
    else if (s == "tree") out.push_back(GreekMethod::Tree);
    else if (s == "all") out.insert(out.end(), {GreekMethod::Chebyshev, GreekMethod::Regression, GreekMethod::Tree});
    else throw ConfigError("unknown Greek method '" + s + "'");
  }
  if (out.empty()) throw ConfigError("no Greek method given");
  return out;
}

// Vanilla equivalent of an M = 1 option for the tree oracle, if there is one.
inline std::optional<OptionType> tree_equivalent(const OptionSpec& o) {
  if (o.window != 1) return std::nullopt;
  if (o.kind == OptionKind::AsianFixed) return OptionType::Put;
  if (o.kind == OptionKind::LookbackFixed && o.prefactor == ExtremaPrefactor::Plain) return OptionType::Call;
  return std::nullopt;
}

// One run of one estimator at spot moneyness * strike. `run` selects the seed.
inline GreekReport greek_point(const ExperimentConfig& cfg, GreekMethod method, const OptionSpec& option,
                               double moneyness, int run) {
  ModelParams params = cfg.model;
  params.s0 = moneyness * option.strike;
  BasisSpec basis = cfg.basis;
  basis.family = cfg.families.front();
  basis.rho = cfg.rhos.front();
  const auto& g = cfg.greeks;
  const std::uint64_t seed = mix_seed(cfg.run.seed, static_cast<std::uint64_t>(run));
  switch (method) {
    case GreekMethod::Chebyshev: {
      LsmcGreekSettings s;
      s.n_train = s.n_eval = g.node_paths;
      s.seed = seed;
      s.regression = cfg.run.regression;
      s.inception_threshold = g.inception_threshold;
      ChebyshevConfig c;
      c.nodes = g.nodes;
      c.width_fraction = g.width;
      c.bisection_tolerance = g.bisection_tolerance;
      c.adaptive = g.adaptive;
      return chebyshev_greeks(make_lsmc_spot_pricer(params, option, basis, s), params.s0, c);
    }
    case GreekMethod::Regression:
      return regression_greeks(make_lsmc_pathwise_pricer(params, option, basis, cfg.run.regression, seed), params.s0,
                               g.epsilon, g.regression_paths, seed);
    case GreekMethod::Tree: {
      const auto type = tree_equivalent(option);
      if (!type) throw ConfigError("the tree method needs M = 1 and a fixed-strike Asian or plain look-back option");
      TreeSpec t;
      t.params = params;
      t.steps = g.tree_steps;
      t.type = *type;
      t.strike = option.strike;
      t.smooth = g.tree_smoothing;
      const auto tg = tree_greeks(t, g.bump);
      GreekReport rep;
      rep.method = "tree";
      rep.delta = tg.delta;
      rep.gamma = tg.gamma;
      return rep;
    }
  }
  throw ConfigError("unknown Greek method");
}

// Greek surface over products x windows x moneyness; each row averages greeks.runs runs.
inline int cmd_greeks(const ExperimentConfig& cfg, const std::vector<GreekMethod>& methods, std::ostream& csv,
                      std::ostream& log) {
  if (cfg.empty_grid() || cfg.greeks.moneyness.empty()) {
    log << "error: empty Greek grid\n";
    return kExitUsage;
  }
  for (const auto& name : cfg.products)
    if (ExperimentConfig::is_certificate(name)) {
      log << "error: Greeks are only available for options\n";
      return kExitUsage;
    }
  for (auto method : methods)
    if (method == GreekMethod::Tree)
      for (const auto& name : cfg.products)
        for (int m : cfg.windows)
          if (!tree_equivalent(std::get<OptionSpec>(cfg.make_product(name, m)))) {
            log << "error: the tree method needs M = 1 and a fixed-strike Asian or plain look-back option\n";
            return kExitUsage;
          }

  write_csv_row(csv, split_csv_line(kGreeksCsvHeader));
  bool failed = false;
  for (const auto& name : cfg.products) {
    for (int m : cfg.windows) {
      const auto option = std::get<OptionSpec>(cfg.make_product(name, m));
      for (double mny : cfg.greeks.moneyness) {
        for (auto method : methods) {
          std::vector<std::string> row{name, std::to_string(m), format_fixed(mny, 4)};
          try {
            const int runs = method == GreekMethod::Tree ? 1 : cfg.greeks.runs;
            double delta = 0.0, gamma = 0.0;
            for (int r = 0; r < runs; ++r) {
              const auto rep = greek_point(cfg, method, option, mny, r);
              delta += rep.delta / runs;
              gamma += rep.gamma / runs;
            }
            row.push_back(format_fixed(delta));
            row.push_back(format_fixed(gamma));
            log << name << " M=" << m << " moneyness=" << row[2] << ' ' << to_string(method) << ": delta " << row[3]
                << " gamma " << row[4] << '\n';
          } catch (const ConfigError&) {
            throw;
          } catch (const Error& e) {
            failed = true;
            row.insert(row.end(), {"NA", "NA"});
            log << "warning: " << name << " M=" << m << " moneyness=" << row[2] << " failed: " << e.what() << '\n';
          }
          row.emplace_back(to_string(method));
          write_csv_row(csv, row);
        }
      }
    }
  }
  return failed ? kExitNumerical : kExitOk;
}

struct SelftestCheck {
  std::string name;
  std::function<std::string()> run;  // empty string means pass, otherwise the failure detail
};

namespace detail {

inline std::string expect_near(double got, double want, double tol, const std::string& what) {
  if (std::abs(got - want) <= tol) return {};
  std::ostringstream s;
  s << std::setprecision(10) << what << ": got " << got << ", want " << want << " +- " << tol;
  return s.str();
}

inline PiecewiseLinearPath random_path(std::mt19937_64& rng, int dim, int vertices) {
  std::normal_distribution<double> n;
  PiecewiseLinearPath p{dim, {}};
  for (int k = 0; k < dim * vertices; ++k) p.vertices.push_back(n(rng));
  return p;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace detail

// Fast oracle-equivalence suite.
inline std::vector<SelftestCheck> selftest_checks() {
  std::vector<SelftestCheck> checks;
  checks.push_back({"poly_basis_counts", [] {
    const int ms[] = {2, 3, 4, 5, 10, 20, 30};
    const int want[4][7] = {{3, 3, 3, 3, 3, 3, 3},
                            {6, 6, 6, 6, 6, 6, 6},
                            {3, 6, 10, 15, 55, 210, 465},
                            {1275, 1275, 1275, 1275, 1275, 1275, 1275}};
    for (int rho = 1; rho <= 4; ++rho)
      for (int k = 0; k < 7; ++k) {
        const RiskSetSpec spec{rho, ms[k]};
        const auto got = poly_column_count(factor_count(spec, 49), 2);
        if (got != static_cast<std::size_t>(want[rho - 1][k]))
          return "rho " + std::to_string(rho) + " M " + std::to_string(ms[k]) + ": " + std::to_string(got);
      }
    return std::string{};
  }});
  checks.push_back({"signature_basis_counts", [] {
    const std::size_t want[] = {12, 39, 120, 363};
    for (int n = 2; n <= 5; ++n)
      if (signature_feature_count(3, n) != want[n - 2]) return "order " + std::to_string(n);
    return std::string{};
  }});
  checks.push_back({"chen_identity", [] {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
      auto p = detail::random_path(rng, 3, 4), q = detail::random_path(rng, 3, 4);
      for (int c = 0; c < 3; ++c) q.vertices[c] = p.vertices[p.vertices.size() - 3 + c];
      PiecewiseLinearPath pq = p;
      pq.vertices.insert(pq.vertices.end(), q.vertices.begin() + 3, q.vertices.end());
      const auto lhs = signature(pq, 5), rhs = signature(p, 5) * signature(q, 5);
      const double d = detail::max_abs_diff(lhs.coefficients(), rhs.coefficients());
      if (d > 1e-10) return "deviation " + std::to_string(d);
    }
    return std::string{};
  }});
  checks.push_back({"tree_vs_black_scholes", [] {
    ModelParams m;
    TreeSpec t;
    t.params = m;
    t.type = OptionType::Call;
    t.style = ExerciseStyle::European;
    return detail::expect_near(tree_price(t), bs_closed_form(m, 100.0, OptionType::Call), 1e-3 * bs_closed_form(m, 100.0, OptionType::Call),
                               "European call");
  }});
  checks.push_back({"bermudan_put_reduction", [] {
    ModelParams m;
    OptionSpec o;
    RunSettings s;
    s.paths = 100000;
    s.n_runs = 1;
    const auto est = run_experiment(m, o, BasisSpec{}, s);
    TreeSpec t;
    t.params = m;
    const double tree = tree_price_american(t);
    return detail::expect_near(est.price, tree, 0.015 * tree, "M=1 fixed-strike Asian vs American put");
  }});
  checks.push_back({"lookback_call_reduction", [] {
    ModelParams m;
    OptionSpec o;
    o.kind = OptionKind::LookbackFixed;
    o.prefactor = ExtremaPrefactor::Plain;
    RunSettings s;
    s.paths = 100000;
    s.n_runs = 1;
    const auto est = run_experiment(m, o, BasisSpec{}, s);
    return detail::expect_near(est.price, bs_closed_form(m, 100.0, OptionType::Call), 4.0 * est.std_error,
                               "M=1 plain look-back vs European call");
  }});
  checks.push_back({"floating_asian_zero", [] {
    ModelParams m;
    OptionSpec o;
    o.kind = OptionKind::AsianFloating;
    RunSettings s;
    s.paths = 20000;
    s.n_runs = 1;
    const auto est = run_experiment(m, o, BasisSpec{}, s);
    return est.price == 0.0 ? std::string{} : "price " + std::to_string(est.price);
  }});
  checks.push_back({"csv_round_trip", [] {
    std::ostringstream out;
    CsvTable t{split_csv_line(kPriceCsvHeader), {{"asian_fixed", "poly_d2", "2", "1", "4.899270", "0.003272", "0.000000", "42"}}};
    write_csv(out, t);
    std::ostringstream again;
    write_csv(again, parse_csv_string(out.str()));
    return again.str() == out.str() ? std::string{} : "CSV changed after a round trip";
  }});
  return checks;
}

// Runs the suite (plus a config check when a path is given) and prints one line per check.
inline int cmd_selftest(const std::optional<std::string>& config_path, std::ostream& log) {
  auto checks = selftest_checks();
  if (config_path) {
    checks.insert(checks.begin(), {"config", [path = *config_path] {
                                     try {
                                       load_config_file(path);
                                       return std::string{};
                                     } catch (const Error& e) {
                                       return std::string(e.what());
                                     }
                                   }});
  }
  int failures = 0;
  for (const auto& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (detail.empty()) {
      log << "PASS " << c.name << " (" << std::fixed << std::setprecision(2) << secs << " s)\n";
    } else {
      ++failures;
      log << "FAIL " << c.name << ": " << detail << '\n';
    }
  }
  log << (failures ? "selftest failed: " + std::to_string(failures) + " check(s)\n" : "selftest passed\n");
  return failures ? kExitNumerical : kExitOk;
}

}  // namespace amerasian
