// amerasian: price early-exercise path-dependent contracts and their Greeks from an INI config.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "amerasian/cli.hpp"

namespace {

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return amerasian::kExitOk;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return amerasian::kExitUsage;
  }
  out << text;
  return amerasian::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares Monte Carlo pricer for American-style Asian and look-back options and callable certificates"};
  app.require_subcommand(1);

  std::string config_path, out_path, methods = "chebyshev";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<unsigned> threads;

  auto* price = app.add_subcommand("price", "run the configured product x basis x M grid and write the price CSV");
  price->add_option("--config", config_path, "INI experiment file")->required();
  price->add_option("--seed", seed, "master seed (overrides [run] seed)");
  price->add_option("--runs", runs, "independent runs per cell (overrides [run] runs)");
  price->add_option("--threads", threads, "worker threads (overrides [run] threads)");
  price->add_option("--out", out_path, "CSV output file, '-' for stdout (overrides [run] out)");

  auto* greeks = app.add_subcommand("greeks", "write Delta/Gamma over the moneyness grid");
  greeks->add_option("--config", config_path, "INI experiment file")->required();
  greeks->add_option("--method", methods, "chebyshev, regression, tree, a comma list, or all")->capture_default_str();
  greeks->add_option("--seed", seed, "master seed (overrides [run] seed)");
  greeks->add_option("--out", out_path, "CSV output file, '-' for stdout");

  auto* selftest = app.add_subcommand("selftest", "run the fast oracle-equivalence checks");
  selftest->add_option("--config", config_path, "also validate this config file");

  app.footer(
      "Config sections and defaults:\n"
      "  [model]      s0=100 r=0.05 q=0 sigma=0.3 maturity=0.2 steps=50\n"
      "  [product]    type=asian_fixed (asian_floating, lookback_fixed, lookback_floating, snowball, lock_in;\n"
      "               comma list) strike=100 prefactor=paper|plain windows=1 (comma list of M)\n"
      "               years=1 coupon=0.023 coupon_barrier=1.0 capital_barrier=0.35 callable=true\n"
      "  [basis]      families=poly (rffnn, rrnn, signature; comma list) rho=2 (comma list) degree=2\n"
      "               max_columns=5000 hidden=40 leaky_slope=0.01 weight_std=1 rffnn_seed=7 rnn_hidden=40\n"
      "               rnn_input_std=1e-4 rnn_recurrent_std=0.3 rnn_bias_std=1 rnn_seed=11 sig_order=5 augment=false\n"
      "  [regression] ridge_scale=1e-8 itm_filter=true train_fraction=0.2 min_regression_paths=32\n"
      "  [run]        paths=400000 runs=10 seed=42 antithetic=false threads=1 timing=true out=\n"
      "  [greeks]     moneyness=0.60,0.65,...,1.40 nodes=7 width=0.10 bisection_tolerance=1e-3 adaptive=true\n"
      "               inception_threshold=0.5 node_paths=25000 regression_paths=175000 epsilon=0.05 runs=1\n"
      "               tree_steps=5000 bump=0.005 tree_smoothing=true\n"
      "Exit codes: 0 success, 1 numerical failure, 2 usage or config error.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? amerasian::kExitOk : amerasian::kExitUsage;
  }

  try {
    if (selftest->parsed()) {
      std::optional<std::string> path;
      if (!config_path.empty()) path = config_path;
      return amerasian::cmd_selftest(path, std::cout);
    }

    auto cfg = amerasian::load_config_file(config_path);
    if (seed) cfg.run.seed = *seed;
    if (runs) cfg.run.n_runs = *runs;
    if (threads) cfg.run.threads = *threads;
    cfg.validate();
    if (out_path.empty()) out_path = cfg.out;

    std::ostringstream csv;
    int code = amerasian::kExitOk;
    if (price->parsed()) {
      if (cfg.empty_grid()) {
        std::cerr << "error: empty experiment grid\n";
        return amerasian::kExitUsage;
      }
      code = amerasian::cmd_price(cfg, csv, std::cerr);
    } else {
      code = amerasian::cmd_greeks(cfg, amerasian::parse_greek_methods(methods), csv, std::cerr);
    }
    if (code == amerasian::kExitUsage) return code;
    const int io = emit(csv.str(), out_path);
    return io != amerasian::kExitOk ? io : code;
  } catch (const amerasian::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return amerasian::kExitUsage;
  } catch (const amerasian::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return amerasian::kExitNumerical;
  }
}
