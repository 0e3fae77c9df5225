#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "amerasian/error.hpp"
#include "amerasian/lsmc.hpp"
#include "amerasian/payoffs.hpp"

namespace amerasian {

// Greek-surface settings ([greeks] section).
struct GreeksConfig {
  std::vector<double> moneyness;  // spot / strike
  int nodes = 7;
  double width = 0.10;
  double bisection_tolerance = 1e-3;
  bool adaptive = true;
  double inception_threshold = 0.5;
  Eigen::Index node_paths = 25000;  // per node, used for training and for evaluation
  Eigen::Index regression_paths = 175000;  // used for training and for evaluation
  double epsilon = 0.05;
  int runs = 1;
  int tree_steps = 5000;
  double bump = 0.005;
  bool tree_smoothing = true;  // smoothed last lattice step for the tree Greeks
};

// Everything an experiment needs; no hidden state beyond this and the master seed.
struct ExperimentConfig {
  ModelParams model;
  std::vector<std::string> products{"asian_fixed"};
  double strike = 100.0;
  ExtremaPrefactor prefactor = ExtremaPrefactor::Paper;
  std::vector<int> windows{1};
  int years = 1;
  double coupon = 0.023;
  double coupon_barrier = 1.0;
  double capital_barrier = 0.35;
  bool callable = true;
  std::vector<BasisFamily> families{BasisFamily::Poly};
  std::vector<int> rhos{2};
  BasisSpec basis;  // family and rho are overwritten per grid cell
  RunSettings run;
  bool timing = true;
  std::string out;
  GreeksConfig greeks;

  // Signature bases are only defined on the streamed risk sets; other grid
  // cells combining them with rho 1 or 2 are skipped.
  static bool basis_cell_applies(const BasisSpec& b) {
    return b.family != BasisFamily::Signature || b.rho == 3 || b.rho == 4;
  }

  static bool is_certificate(const std::string& product) { return product == "snowball" || product == "lock_in"; }

  bool empty_grid() const { return products.empty() || windows.empty() || families.empty() || rhos.empty(); }

  // Model parameters for a product; certificates run on a quarterly grid.
  ModelParams model_for(const std::string& product) const {
    ModelParams m = model;
    if (is_certificate(product)) {
      m.maturity = years;
      m.steps = 4 * years;
    }
    return m;
  }

  Product make_product(const std::string& product, int window) const {
    if (is_certificate(product)) {
      auto c = CertificateSpec::quarterly(product == "snowball" ? CertificateKind::Snowball : CertificateKind::LockIn,
                                          years, coupon, coupon_barrier, capital_barrier, model.s0);
      c.callable = callable;
      return c;
    }
    OptionSpec o;
    o.kind = parse_option_kind(product);
    o.window = window;
    o.strike = strike;
    o.prefactor = prefactor;
    return o;
  }

  static OptionKind parse_option_kind(const std::string& s) {
    if (s == "asian_fixed") return OptionKind::AsianFixed;
    if (s == "asian_floating") return OptionKind::AsianFloating;
    if (s == "lookback_fixed") return OptionKind::LookbackFixed;
    if (s == "lookback_floating") return OptionKind::LookbackFloating;
    throw ConfigError("unknown product '" + s + "'");
  }

  void validate() const {
    try {
      model.validate();
      for (const auto& p : products) {
        if (!is_certificate(p)) parse_option_kind(p);
        const auto m = model_for(p);
        m.validate();
        for (int w : windows) {
          const auto prod = make_product(p, w);
          if (const auto* o = std::get_if<OptionSpec>(&prod)) o->validate(m.steps);
          else std::get<CertificateSpec>(prod).validate();
        }
      }
      if (years < 1) throw ParameterError("years must be at least 1");
      for (auto f : families) {
        BasisSpec b = basis;
        b.family = f;
        for (int r : rhos) {
          b.rho = r;
          if (!basis_cell_applies(b)) continue;
          b.validate();
        }
      }
      run.validate();
      if (greeks.nodes < 3) throw ParameterError("greeks.nodes must be at least 3");
      if (!(greeks.width > 0.0 && greeks.width < 1.0)) throw ParameterError("greeks.width must lie in (0, 1)");
      if (!(greeks.epsilon > 0.0 && greeks.epsilon < 1.0)) throw ParameterError("greeks.epsilon must lie in (0, 1)");
      if (greeks.runs < 1) throw ParameterError("greeks.runs must be at least 1");
      if (greeks.node_paths < 64 || greeks.regression_paths < 64) throw ParameterError("greek path counts too small");
      if (greeks.tree_steps < 1) throw ParameterError("greeks.tree_steps must be positive");
      for (double m : greeks.moneyness)
        if (!(m > 0.0)) throw ParameterError("moneyness values must be positive");
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("invalid value '" + text + "' for " + key);
  return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"model", {"s0", "r", "q", "sigma", "maturity", "steps"}},
      {"product",
       {"type", "strike", "prefactor", "windows", "years", "coupon", "coupon_barrier", "capital_barrier", "callable"}},
      {"basis",
       {"families", "rho", "degree", "max_columns", "hidden", "leaky_slope", "weight_std", "rffnn_seed", "rnn_hidden",
        "rnn_input_std", "rnn_recurrent_std", "rnn_bias_std", "rnn_seed", "sig_order", "augment"}},
      {"regression", {"ridge_scale", "itm_filter", "train_fraction", "min_regression_paths"}},
      {"run", {"paths", "runs", "seed", "antithetic", "threads", "timing", "out"}},
      {"greeks",
       {"moneyness", "nodes", "width", "bisection_tolerance", "adaptive", "inception_threshold", "node_paths",
        "regression_paths", "epsilon", "runs", "tree_steps", "bump", "tree_smoothing"}},
  };
  return schema;
}

}  // namespace detail

inline std::vector<double> default_moneyness_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 16; ++k) g.push_back(0.60 + 0.05 * k);
  return g;
}

// Parses an INI document. Unknown sections and keys are rejected; full-line
// comments start with ';' or '#'.
inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  const auto& schema = detail::config_schema();
  for (const auto& [section, body] : tree) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown section [" + section + "]");
    if (!body.data().empty() && body.empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }

  ExperimentConfig cfg;
  cfg.greeks.moneyness = default_moneyness_grid();
  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto s = tree.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return v->data();
  };
  auto num = [&](const std::string& section, const std::string& key, auto& target) {
    if (auto v = get(section, key)) target = detail::parse_number<std::decay_t<decltype(target)>>(section + "." + key, *v);
  };
  auto flag = [&](const std::string& section, const std::string& key, bool& target) {
    if (auto v = get(section, key)) target = detail::parse_bool(section + "." + key, *v);
  };

  num("model", "s0", cfg.model.s0);
  num("model", "r", cfg.model.r);
  num("model", "q", cfg.model.q);
  num("model", "sigma", cfg.model.sigma);
  num("model", "maturity", cfg.model.maturity);
  num("model", "steps", cfg.model.steps);

  if (auto v = get("product", "type")) cfg.products = detail::split_list(*v);
  num("product", "strike", cfg.strike);
  if (auto v = get("product", "prefactor")) {
    const auto s = detail::trim(*v);
    if (s == "paper") cfg.prefactor = ExtremaPrefactor::Paper;
    else if (s == "plain") cfg.prefactor = ExtremaPrefactor::Plain;
    else throw ConfigError("product.prefactor must be 'paper' or 'plain'");
  }
  if (auto v = get("product", "windows")) {
    cfg.windows.clear();
    for (const auto& w : detail::split_list(*v)) cfg.windows.push_back(detail::parse_number<int>("product.windows", w));
  }
  num("product", "years", cfg.years);
  num("product", "coupon", cfg.coupon);
  num("product", "coupon_barrier", cfg.coupon_barrier);
  num("product", "capital_barrier", cfg.capital_barrier);
  flag("product", "callable", cfg.callable);

  if (auto v = get("basis", "families")) {
    cfg.families.clear();
    for (const auto& f : detail::split_list(*v)) {
      const auto fam = parse_basis_family(f);
      if (!fam) throw ConfigError("unknown basis family '" + f + "'");
      cfg.families.push_back(*fam);
    }
  }
  if (auto v = get("basis", "rho")) {
    cfg.rhos.clear();
    for (const auto& r : detail::split_list(*v)) cfg.rhos.push_back(detail::parse_number<int>("basis.rho", r));
  }
  num("basis", "degree", cfg.basis.degree);
  num("basis", "max_columns", cfg.basis.max_columns);
  num("basis", "hidden", cfg.basis.rffnn.hidden);
  num("basis", "leaky_slope", cfg.basis.rffnn.leaky_slope);
  num("basis", "weight_std", cfg.basis.rffnn.weight_std);
  num("basis", "rffnn_seed", cfg.basis.rffnn.seed);
  num("basis", "rnn_hidden", cfg.basis.rrnn.hidden);
  num("basis", "rnn_input_std", cfg.basis.rrnn.input_std);
  num("basis", "rnn_recurrent_std", cfg.basis.rrnn.recurrent_std);
  num("basis", "rnn_bias_std", cfg.basis.rrnn.bias_std);
  num("basis", "rnn_seed", cfg.basis.rrnn.seed);
  num("basis", "sig_order", cfg.basis.sig_order);
  flag("basis", "augment", cfg.basis.augment);

  num("regression", "ridge_scale", cfg.run.regression.ridge_scale);
  flag("regression", "itm_filter", cfg.run.regression.itm_filter);
  num("regression", "train_fraction", cfg.run.regression.train_fraction);
  num("regression", "min_regression_paths", cfg.run.regression.min_regression_paths);

  num("run", "paths", cfg.run.paths);
  num("run", "runs", cfg.run.n_runs);
  num("run", "seed", cfg.run.seed);
  flag("run", "antithetic", cfg.run.antithetic);
  num("run", "threads", cfg.run.threads);
  flag("run", "timing", cfg.timing);
  if (auto v = get("run", "out")) cfg.out = detail::trim(*v);

  if (auto v = get("greeks", "moneyness")) {
    cfg.greeks.moneyness.clear();
    for (const auto& m : detail::split_list(*v))
      cfg.greeks.moneyness.push_back(detail::parse_number<double>("greeks.moneyness", m));
  }
  num("greeks", "nodes", cfg.greeks.nodes);
  num("greeks", "width", cfg.greeks.width);
  num("greeks", "bisection_tolerance", cfg.greeks.bisection_tolerance);
  flag("greeks", "adaptive", cfg.greeks.adaptive);
  num("greeks", "inception_threshold", cfg.greeks.inception_threshold);
  num("greeks", "node_paths", cfg.greeks.node_paths);
  num("greeks", "regression_paths", cfg.greeks.regression_paths);
  num("greeks", "epsilon", cfg.greeks.epsilon);
  num("greeks", "runs", cfg.greeks.runs);
  num("greeks", "tree_steps", cfg.greeks.tree_steps);
  num("greeks", "bump", cfg.greeks.bump);
  flag("greeks", "tree_smoothing", cfg.greeks.tree_smoothing);

  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace amerasian
