#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "amerasian/basis_poly.hpp"
#include "amerasian/basis_random_nets.hpp"
#include "amerasian/basis_signature.hpp"
#include "amerasian/error.hpp"
#include "amerasian/features.hpp"
#include "amerasian/market_model.hpp"
#include "amerasian/parallel.hpp"
#include "amerasian/payoffs.hpp"
#include "amerasian/random.hpp"
#include "amerasian/regression.hpp"

namespace amerasian {

enum class BasisFamily { Poly, Rffnn, Rrnn, Signature };

inline std::string_view to_string(BasisFamily f) {
  switch (f) {
    case BasisFamily::Poly: return "poly";
    case BasisFamily::Rffnn: return "rffnn";
    case BasisFamily::Rrnn: return "rrnn";
    case BasisFamily::Signature: return "signature";
  }
  return "unknown";
}

inline std::optional<BasisFamily> parse_basis_family(std::string_view s) {
  if (s == "poly") return BasisFamily::Poly;
  if (s == "rffnn") return BasisFamily::Rffnn;
  if (s == "rrnn") return BasisFamily::Rrnn;
  if (s == "signature") return BasisFamily::Signature;
  return std::nullopt;
}

struct BasisSpec {
  BasisFamily family = BasisFamily::Poly;
  int rho = 2;
  int degree = 2;
  RffnnSpec rffnn;
  RrnnSpec rrnn;
  int sig_order = 5;
  bool augment = false;
  std::size_t max_columns = 5000;
  int max_sig_order = kDefaultMaxSignatureOrder;

  void validate() const {
    if (rho < 1 || rho > 4) throw ParameterError("risk set rho must be in {1,2,3,4}");
    if (family == BasisFamily::Poly && degree < 1) throw ParameterError("polynomial degree must be at least 1");
    if (family == BasisFamily::Rffnn) rffnn.validate();
    if (family == BasisFamily::Rrnn) rrnn.validate();
    if (family == BasisFamily::Signature) {
      if (rho != 3 && rho != 4) throw SpecError("signature bases need a streamed risk set (rho 3 or 4)");
      if (sig_order < 1 || sig_order > max_sig_order) throw OrderError("signature order outside the configured range");
    }
  }

  // Short label used in CSV output, e.g. "poly_d2" or "signature_n5".
  std::string label() const {
    switch (family) {
      case BasisFamily::Poly: return "poly_d" + std::to_string(degree);
      case BasisFamily::Rffnn: return "rffnn_h" + std::to_string(rffnn.hidden);
      case BasisFamily::Rrnn: return "rrnn_h" + std::to_string(rrnn.hidden);
      case BasisFamily::Signature: return std::string("signature_n") + std::to_string(sig_order) + (augment ? "a" : "");
    }
    return "unknown";
  }
};

struct RegressionConfig {
  double ridge_scale = 1e-8;  // lambda = ridge_scale * mean diagonal of X^T X
  bool itm_filter = true;
  double train_fraction = 0.20;
  int min_regression_paths = 32;

  void validate() const {
    if (!(ridge_scale >= 0.0)) throw ParameterError("ridge scale must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParameterError("train fraction must lie in (0, 1)");
    if (min_regression_paths < 1) throw ParameterError("min_regression_paths must be positive");
  }
};

enum class Direction { Forward, Backward };

// Produces design matrices for one batch as dates are visited in a fixed
// direction. Streamed bases keep per-path state between dates.
class DesignCursor {
 public:
  virtual ~DesignCursor() = default;
  virtual void move_to(int date) { date_ = date; }
  virtual Eigen::MatrixXd design(std::span<const Eigen::Index> rows) = 0;
  int date() const { return date_; }

 protected:
  int date_ = -1;
};

// A basis family bound to the standardization statistics of one training set.
class Basis {
 public:
  Basis(BasisSpec spec, RiskSetSpec risk, FactorScaler scaler, int steps)
      : spec_(std::move(spec)), risk_(risk), scaler_(std::move(scaler)), steps_(steps) {
    spec_.validate();
    risk_.validate();
    if (spec_.family == BasisFamily::Rffnn) {
      nets_.resize(static_cast<std::size_t>(steps_ + 1));
      for (int i = risk_.first_date(); i <= steps_; ++i) {
        const int f = static_cast<int>(scaler_.input_columns(risk_, i).size());
        if (f > 0) nets_[i] = RandomFeedForward::sample(f, spec_.rffnn, static_cast<std::uint64_t>(i));
      }
    }
    if (spec_.family == BasisFamily::Rrnn) {
      const int r = risk_.effective_rho();
      rnn_ = RandomRecurrent::sample(r == 1 ? 1 : r == 2 ? 2 : 1, spec_.rrnn);
    }
  }

  const BasisSpec& spec() const { return spec_; }
  const RiskSetSpec& risk() const { return risk_; }
  const FactorScaler& scaler() const { return scaler_; }
  int steps() const { return steps_; }

  std::unique_ptr<DesignCursor> cursor(const FactorScaler::Panel& panel, Direction dir) const;

  // Design for the given rows at `date`, computed from scratch.
  Eigen::MatrixXd design(const FactorScaler::Panel& panel, int date, std::span<const Eigen::Index> rows) const {
    const auto cols = scaler_.input_columns(risk_, date);
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (cols.empty() && !(spec_.family == BasisFamily::Rrnn && risk_.effective_rho() <= 2))
      return Eigen::MatrixXd::Ones(n, 1);
    switch (spec_.family) {
      case BasisFamily::Poly:
        return poly_features(scaler_.inputs(panel, risk_, date, rows), spec_.degree, spec_.max_columns);
      case BasisFamily::Rffnn:
        return nets_[date]->features(scaler_.inputs(panel, risk_, date, rows));
      case BasisFamily::Rrnn:
        return rnn_features(panel, date, rows);
      case BasisFamily::Signature: {
        std::optional<Eigen::VectorXd> aug;
        if (spec_.augment) aug = average_column(panel, date, rows);
        return signature_design(scaler_.inputs(panel, risk_, date, rows), spec_.sig_order, aug, spec_.max_sig_order);
      }
    }
    throw SpecError("unknown basis family");
  }

  Eigen::VectorXd average_column(const FactorScaler::Panel& panel, int date, std::span<const Eigen::Index> rows) const {
    Eigen::VectorXd a(static_cast<Eigen::Index>(rows.size()));
    const int m = scaler_.window();
    for (std::size_t r = 0; r < rows.size(); ++r)
      a(static_cast<Eigen::Index>(r)) = date >= m - 1 ? panel.averages(rows[r], date) : panel.spots(rows[r], date);
    return a;
  }

  const RandomRecurrent& rnn() const { return *rnn_; }

 private:
  Eigen::MatrixXd rnn_features(const FactorScaler::Panel& panel, int date, std::span<const Eigen::Index> rows) const {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const int r = risk_.effective_rho();
    if (r <= 2) {
      // Single recurrent step on the factor vector; dropped factors enter as 0.
      Eigen::MatrixXd x(n, r);
      for (Eigen::Index k = 0; k < n; ++k) {
        x(k, 0) = panel.spots(rows[k], date);
        if (r == 2) x(k, 1) = panel.averages(rows[k], date);
      }
      Eigen::MatrixXd state = rnn_->initial_state(n);
      rnn_->step(state, x);
      return RandomRecurrent::with_constant(state);
    }
    Eigen::MatrixXd state = rnn_->initial_state(n);
    Eigen::MatrixXd x(n, 1);
    for (int j : factor_dates(risk_, date)) {
      if (!scaler_.spot_kept(j)) continue;
      for (Eigen::Index k = 0; k < n; ++k) x(k, 0) = panel.spots(rows[k], j);
      rnn_->step(state, x);
    }
    return RandomRecurrent::with_constant(state);
  }

  BasisSpec spec_;
  RiskSetSpec risk_;
  FactorScaler scaler_;
  int steps_;
  std::vector<std::optional<RandomFeedForward>> nets_;
  std::optional<RandomRecurrent> rnn_;
};

namespace detail {

class ScratchCursor : public DesignCursor {
 public:
  ScratchCursor(const Basis& basis, const FactorScaler::Panel& panel) : basis_(basis), panel_(panel) {}
  Eigen::MatrixXd design(std::span<const Eigen::Index> rows) override { return basis_.design(panel_, date_, rows); }

 private:
  const Basis& basis_;
  const FactorScaler::Panel& panel_;
};

// Running signature of the full post-inception history (risk set 4).
class SignatureStreamCursor : public DesignCursor {
 public:
  SignatureStreamCursor(const Basis& basis, const FactorScaler::Panel& panel, Direction dir)
      : basis_(basis), panel_(panel), dir_(dir), stream_(panel.spots.rows(), basis.spec().sig_order) {}

  void move_to(int date) override {
    if (dir_ == Direction::Forward) {
      if (date < date_) throw SequencingError("forward cursor moved backwards");
      for (int j = std::max(1, date_ + 1); j <= date; ++j) push(j);
    } else {
      if (date_ < 0) {
        for (int j = 1; j <= date; ++j) push(j);
      } else {
        if (date > date_) throw SequencingError("backward cursor moved forwards");
        while (!pushed_.empty() && pushed_.back() > date) pop();
      }
    }
    date_ = date;
  }

  Eigen::MatrixXd design(std::span<const Eigen::Index> rows) override {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (stream_.length() == 0) return Eigen::MatrixXd::Ones(n, 1);
    const auto width = static_cast<Eigen::Index>(stream_.feature_count());
    const bool aug = basis_.spec().augment;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, width + 1 + (aug ? 1 : 0));
    for (Eigen::Index k = 0; k < n; ++k) {
      stream_.features(rows[k], {out.data() + k * out.cols(), static_cast<std::size_t>(width)});
      out(k, width) = 1.0;
    }
    if (aug) out.col(width + 1) = basis_.average_column(panel_, date_, rows);
    return out;
  }

 private:
  void push(int j) {
    if (!basis_.scaler().spot_kept(j)) return;
    const Eigen::VectorXd x = panel_.spots.col(j);
    if (pushed_.empty()) {
      stream_.push(x, nullptr);
    } else {
      const Eigen::VectorXd prev = panel_.spots.col(pushed_.back());
      stream_.push(x, &prev);
    }
    pushed_.push_back(j);
  }

  void pop() {
    const Eigen::VectorXd last = panel_.spots.col(pushed_.back());
    pushed_.pop_back();
    if (pushed_.empty()) {
      stream_.pop(last, nullptr);
    } else {
      const Eigen::VectorXd prev = panel_.spots.col(pushed_.back());
      stream_.pop(last, &prev);
    }
  }

  const Basis& basis_;
  const FactorScaler::Panel& panel_;
  Direction dir_;
  SignatureStream stream_;
  std::vector<int> pushed_;
};

// Recurrent state over the full history, advanced one date at a time (forward only).
class RecurrentStreamCursor : public DesignCursor {
 public:
  RecurrentStreamCursor(const Basis& basis, const FactorScaler::Panel& panel)
      : basis_(basis), panel_(panel), state_(basis.rnn().initial_state(panel.spots.rows())) {}

  void move_to(int date) override {
    if (date < date_) throw SequencingError("forward cursor moved backwards");
    Eigen::MatrixXd x(panel_.spots.rows(), 1);
    for (int j = std::max(1, date_ + 1); j <= date; ++j) {
      if (!basis_.scaler().spot_kept(j)) continue;
      x.col(0) = panel_.spots.col(j);
      basis_.rnn().step(state_, x);
      ++steps_;
    }
    date_ = date;
  }

  Eigen::MatrixXd design(std::span<const Eigen::Index> rows) override {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (steps_ == 0) return Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd out(n, state_.cols() + 1);
    for (Eigen::Index k = 0; k < n; ++k) out.row(k).head(state_.cols()) = state_.row(rows[k]);
    out.col(state_.cols()).setOnes();
    return out;
  }

 private:
  const Basis& basis_;
  const FactorScaler::Panel& panel_;
  Eigen::MatrixXd state_;
  int steps_ = 0;
};

}  // namespace detail

inline std::unique_ptr<DesignCursor> Basis::cursor(const FactorScaler::Panel& panel, Direction dir) const {
  if (risk_.effective_rho() == 4) {
    if (spec_.family == BasisFamily::Signature)
      return std::make_unique<detail::SignatureStreamCursor>(*this, panel, dir);
    if (spec_.family == BasisFamily::Rrnn && dir == Direction::Forward)
      return std::make_unique<detail::RecurrentStreamCursor>(*this, panel);
  }
  return std::make_unique<detail::ScratchCursor>(*this, panel);
}

struct DateFit {
  bool regressed = false;
  Eigen::VectorXd theta;
};

// Fitted continuation-value regressions, one per exercise (or call) date,
// together with the standardization statistics they were fitted on.
struct ExercisePolicy {
  ModelParams params;
  std::variant<OptionSpec, CertificateSpec> product;
  std::shared_ptr<const Basis> basis;
  std::vector<DateFit> fits;  // indexed by date 0..N
  int first_date = 0;
  double train_price = 0.0;  // in-sample estimate, biased high
  std::vector<std::string> warnings;
};

// Out-of-sample pricing result for one evaluation batch.
struct EvalResult {
  double price = 0.0;
  double std_error = 0.0;  // path-level
  double first_date_exercise_fraction = 0.0;
  std::vector<double> pathwise;  // discounted payoff per path, if requested
};

namespace detail {

inline std::vector<Eigen::Index> select_rows(const Eigen::VectorXd& mask_values, bool positive_only) {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(mask_values.size()));
  for (Eigen::Index p = 0; p < mask_values.size(); ++p)
    if (!positive_only || mask_values(p) > 0.0) rows.push_back(p);
  return rows;
}

inline Eigen::VectorXd option_payoffs(const OptionSpec& option, const PathBatch& batch, int date) {
  Eigen::VectorXd psi(batch.n_paths());
  for (Eigen::Index p = 0; p < batch.n_paths(); ++p) psi(p) = exercise_value(option, batch.path(p), date);
  return psi;
}

inline void mean_and_error(std::span<const double> v, double& mean, double& se) {
  const double n = static_cast<double>(v.size());
  mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

inline DateFit regress(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RegressionConfig& cfg, int date,
                       std::vector<std::string>& warnings) {
  auto fit = ridge_solve(x, y, cfg.ridge_scale);
  if (fit.rank_deficient)
    warnings.push_back("date " + std::to_string(date) + ": rank-deficient design, minimum-norm solution used");
  if (!fit.coef.allFinite()) throw StabilityError("non-finite regression coefficients at date " + std::to_string(date));
  return {true, std::move(fit.coef)};
}

inline constexpr Eigen::Index kEvalChunk = 16384;

}  // namespace detail

// Longstaff-Schwartz backward induction on the training paths. The regression
// target at date i is the realized value of following the policy from i+1 on,
// discounted to T_i.
inline ExercisePolicy fit_policy(const PathBatch& train, const ModelParams& params, const OptionSpec& option,
                                 const BasisSpec& basis_spec, const RegressionConfig& cfg = {}) {
  params.validate();
  cfg.validate();
  const int n = params.steps;
  if (train.steps() != n) throw ShapeError("training batch grid differs from the model grid");
  option.validate(n);
  const RiskSetSpec risk{basis_spec.rho, option.window};

  ExercisePolicy policy;
  policy.params = params;
  policy.product = option;
  policy.first_date = option.first_exercise_date();
  policy.basis = std::make_shared<Basis>(basis_spec, risk, FactorScaler::fit(train, option.window), n);
  policy.fits.assign(static_cast<std::size_t>(n + 1), DateFit{});

  const auto panel = policy.basis->scaler().transform(train);
  auto cursor = policy.basis->cursor(panel, Direction::Backward);
  Eigen::VectorXd v = detail::option_payoffs(option, train, n);
  for (int i = n - 1; i >= 0; --i) {
    v *= discount_factor(params, i, i + 1);
    if (i < policy.first_date) continue;
    const Eigen::VectorXd psi = detail::option_payoffs(option, train, i);
    const auto rows = detail::select_rows(psi, cfg.itm_filter);
    if (static_cast<int>(rows.size()) < cfg.min_regression_paths) continue;
    cursor->move_to(i);
    const Eigen::MatrixXd x = cursor->design(rows);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) y(static_cast<Eigen::Index>(k)) = v(rows[k]);
    policy.fits[i] = detail::regress(x, y, cfg, i, policy.warnings);
    const Eigen::VectorXd c = x * policy.fits[i].theta;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto p = rows[k];
      if (psi(p) > 0.0 && psi(p) > c(static_cast<Eigen::Index>(k))) v(p) = psi(p);
    }
  }
  policy.train_price = v.mean();
  return policy;
}

// Forward pass on fresh paths: each path stops at the first date where the
// payoff is positive and exceeds the fitted continuation value.
inline EvalResult price_with_policy(const PathBatch& eval, const ExercisePolicy& policy, bool keep_pathwise = false,
                                    unsigned threads = 1) {
  const auto* option = std::get_if<OptionSpec>(&policy.product);
  if (!option) throw SpecError("policy was fitted for a certificate, not an option");
  const ModelParams& params = policy.params;
  const int n = params.steps;
  if (eval.steps() != n) throw SpecError("evaluation grid differs from the policy grid");

  std::vector<double> values(static_cast<std::size_t>(eval.n_paths()));
  const auto n_chunks = static_cast<std::size_t>((eval.n_paths() + detail::kEvalChunk - 1) / detail::kEvalChunk);
  std::vector<Eigen::Index> first_counts(n_chunks, 0);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * detail::kEvalChunk;
    const Eigen::Index end = std::min(eval.n_paths(), begin + detail::kEvalChunk);
    const PathBatch chunk = eval.slice(begin, end);
    const auto panel = policy.basis->scaler().transform(chunk);
    auto cursor = policy.basis->cursor(panel, Direction::Forward);
    std::vector<char> alive(static_cast<std::size_t>(chunk.n_paths()), 1);
    for (int i = policy.first_date; i < n; ++i) {
      if (!policy.fits[i].regressed) continue;
      const double df = discount_factor(params, 0, i);
      std::vector<Eigen::Index> rows;
      std::vector<double> psi;
      for (Eigen::Index p = 0; p < chunk.n_paths(); ++p) {
        if (!alive[p]) continue;
        const double v = exercise_value(*option, chunk.path(p), i);
        if (v > 0.0) {
          rows.push_back(p);
          psi.push_back(v);
        }
      }
      if (rows.empty()) continue;
      cursor->move_to(i);
      const Eigen::VectorXd cont = cursor->design(rows) * policy.fits[i].theta;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (psi[k] > cont(static_cast<Eigen::Index>(k))) {
          alive[rows[k]] = 0;
          values[static_cast<std::size_t>(begin + rows[k])] = df * psi[k];
          if (i == policy.first_date) ++first_counts[c];
        }
      }
    }
    const double df_n = discount_factor(params, 0, n);
    for (Eigen::Index p = 0; p < chunk.n_paths(); ++p)
      if (alive[p]) values[static_cast<std::size_t>(begin + p)] = df_n * exercise_value(*option, chunk.path(p), n);
  });

  EvalResult out;
  detail::mean_and_error(values, out.price, out.std_error);
  out.first_date_exercise_fraction =
      static_cast<double>(std::accumulate(first_counts.begin(), first_counts.end(), Eigen::Index{0})) /
      static_cast<double>(eval.n_paths());
  if (keep_pathwise) out.pathwise = std::move(values);
  return out;
}

// Discounted payoff held to maturity, path by path (no early exercise).
inline EvalResult price_european(const PathBatch& eval, const ModelParams& params, const OptionSpec& option) {
  option.validate(params.steps);
  std::vector<double> values(static_cast<std::size_t>(eval.n_paths()));
  const double df = discount_factor(params, 0, params.steps);
  for (Eigen::Index p = 0; p < eval.n_paths(); ++p)
    values[static_cast<std::size_t>(p)] = df * exercise_value(option, eval.path(p), params.steps);
  EvalResult out;
  detail::mean_and_error(values, out.price, out.std_error);
  return out;
}

namespace detail {

// gamma_i per path and date, column i for i = 1..N (column 0 unused).
inline Eigen::MatrixXd coupon_table(const CertificateSpec& cert, const PathBatch& batch) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(batch.n_paths(), cert.dates() + 1);
  for (Eigen::Index p = 0; p < batch.n_paths(); ++p)
    for (int i = 1; i <= cert.dates(); ++i) g(p, i) = certificate_coupon(cert, batch.path(p), i);
  return g;
}

inline void check_certificate_grid(const CertificateSpec& cert, const ModelParams& params, const PathBatch& batch) {
  cert.validate();
  params.validate();
  if (params.steps != cert.dates()) throw SpecError("certificate coupon grid must coincide with the path grid");
  if (batch.steps() != params.steps) throw ShapeError("batch grid differs from the model grid");
}

}  // namespace detail

// Issuer-callable certificate: V_N = gamma_N + Psi^C_N and, for 1 <= i < N,
// V_i = gamma_i + min(1, discounted continuation). Regressions use every path
// (there is no natural in-the-money set) on the spots at T_1..T_i.
inline ExercisePolicy fit_certificate_policy(const PathBatch& train, const ModelParams& params,
                                             const CertificateSpec& cert, BasisSpec basis_spec,
                                             const RegressionConfig& cfg = {}) {
  detail::check_certificate_grid(cert, params, train);
  cfg.validate();
  const int n = params.steps;
  basis_spec.rho = 4;
  const RiskSetSpec risk{4, 1};

  ExercisePolicy policy;
  policy.params = params;
  policy.product = cert;
  policy.first_date = 1;
  policy.basis = std::make_shared<Basis>(basis_spec, risk, FactorScaler::fit(train, 1), n);
  policy.fits.assign(static_cast<std::size_t>(n + 1), DateFit{});

  const Eigen::MatrixXd gamma = detail::coupon_table(cert, train);
  Eigen::VectorXd v(train.n_paths());
  for (Eigen::Index p = 0; p < train.n_paths(); ++p)
    v(p) = gamma(p, n) + certificate_redemption(cert, train.path(p), n);

  const auto panel = policy.basis->scaler().transform(train);
  auto cursor = policy.basis->cursor(panel, Direction::Backward);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(train.n_paths()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  for (int i = n - 1; i >= 1; --i) {
    v *= discount_factor(params, i, i + 1);
    if (cert.callable && train.n_paths() >= cfg.min_regression_paths) {
      cursor->move_to(i);
      const Eigen::MatrixXd x = cursor->design(rows);
      policy.fits[i] = detail::regress(x, v, cfg, i, policy.warnings);
      const Eigen::VectorXd c = x * policy.fits[i].theta;
      for (Eigen::Index p = 0; p < train.n_paths(); ++p)
        if (c(p) > 1.0) v(p) = 1.0;
    }
    v += gamma.col(i);
  }
  policy.train_price = discount_factor(params, 0, 1) * v.mean();
  return policy;
}

inline EvalResult price_certificate_with_policy(const PathBatch& eval, const ExercisePolicy& policy,
                                                bool keep_pathwise = false, unsigned threads = 1) {
  const auto* cert = std::get_if<CertificateSpec>(&policy.product);
  if (!cert) throw SpecError("policy was fitted for an option, not a certificate");
  const ModelParams& params = policy.params;
  detail::check_certificate_grid(*cert, params, eval);
  const int n = params.steps;

  std::vector<double> values(static_cast<std::size_t>(eval.n_paths()), 0.0);
  const auto n_chunks = static_cast<std::size_t>((eval.n_paths() + detail::kEvalChunk - 1) / detail::kEvalChunk);
  std::vector<Eigen::Index> first_counts(n_chunks, 0);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * detail::kEvalChunk;
    const Eigen::Index end = std::min(eval.n_paths(), begin + detail::kEvalChunk);
    const PathBatch chunk = eval.slice(begin, end);
    const Eigen::MatrixXd gamma = detail::coupon_table(*cert, chunk);
    const auto panel = policy.basis->scaler().transform(chunk);
    auto cursor = policy.basis->cursor(panel, Direction::Forward);
    std::vector<char> alive(static_cast<std::size_t>(chunk.n_paths()), 1);
    auto value = [&](Eigen::Index p) -> double& { return values[static_cast<std::size_t>(begin + p)]; };
    for (int i = 1; i < n; ++i) {
      const double df = discount_factor(params, 0, i);
      std::vector<Eigen::Index> rows;
      for (Eigen::Index p = 0; p < chunk.n_paths(); ++p) {
        if (!alive[p]) continue;
        value(p) += df * gamma(p, i);
        rows.push_back(p);
      }
      if (!policy.fits[i].regressed || rows.empty()) continue;
      cursor->move_to(i);
      const Eigen::VectorXd cont = cursor->design(rows) * policy.fits[i].theta;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (cont(static_cast<Eigen::Index>(k)) > 1.0) {
          alive[rows[k]] = 0;
          value(rows[k]) += df;
          if (i == 1) ++first_counts[c];
        }
      }
    }
    const double df_n = discount_factor(params, 0, n);
    for (Eigen::Index p = 0; p < chunk.n_paths(); ++p)
      if (alive[p]) value(p) += df_n * (gamma(p, n) + certificate_redemption(*cert, chunk.path(p), n));
  });

  EvalResult out;
  detail::mean_and_error(values, out.price, out.std_error);
  out.first_date_exercise_fraction =
      static_cast<double>(std::accumulate(first_counts.begin(), first_counts.end(), Eigen::Index{0})) /
      static_cast<double>(eval.n_paths());
  if (keep_pathwise) out.pathwise = std::move(values);
  return out;
}

// Certificate held to maturity: discounted coupons plus final redemption.
inline EvalResult price_certificate_noncallable(const PathBatch& eval, const ModelParams& params,
                                                const CertificateSpec& cert) {
  detail::check_certificate_grid(cert, params, eval);
  const int n = params.steps;
  const Eigen::MatrixXd gamma = detail::coupon_table(cert, eval);
  std::vector<double> values(static_cast<std::size_t>(eval.n_paths()));
  for (Eigen::Index p = 0; p < eval.n_paths(); ++p) {
    double v = 0.0;
    for (int i = 1; i <= n; ++i) v += discount_factor(params, 0, i) * gamma(p, i);
    values[static_cast<std::size_t>(p)] = v + discount_factor(params, 0, n) * certificate_redemption(cert, eval.path(p), n);
  }
  EvalResult out;
  detail::mean_and_error(values, out.price, out.std_error);
  return out;
}

using Product = std::variant<OptionSpec, CertificateSpec>;

inline std::string product_name(const Product& product) {
  if (const auto* o = std::get_if<OptionSpec>(&product)) return std::string(to_string(o->kind));
  const auto& c = std::get<CertificateSpec>(product);
  return std::string(to_string(c.kind)) + (c.callable ? "" : "_noncallable");
}

inline int product_window(const Product& product) {
  if (const auto* o = std::get_if<OptionSpec>(&product)) return o->window;
  return 1;
}

// Fits on `train` and prices on `eval` for either product type. Certificates
// flagged non-callable skip the regression entirely.
inline EvalResult fit_and_price(const PathBatch& train, const PathBatch& eval, const ModelParams& params,
                                const Product& product, const BasisSpec& basis, const RegressionConfig& cfg,
                                std::vector<std::string>* warnings = nullptr, bool keep_pathwise = false,
                                unsigned threads = 1) {
  if (const auto* o = std::get_if<OptionSpec>(&product)) {
    auto policy = fit_policy(train, params, *o, basis, cfg);
    if (warnings) warnings->insert(warnings->end(), policy.warnings.begin(), policy.warnings.end());
    return price_with_policy(eval, policy, keep_pathwise, threads);
  }
  const auto& cert = std::get<CertificateSpec>(product);
  if (!cert.callable) {
    auto r = price_certificate_noncallable(eval, params, cert);
    return r;
  }
  auto policy = fit_certificate_policy(train, params, cert, basis, cfg);
  if (warnings) warnings->insert(warnings->end(), policy.warnings.begin(), policy.warnings.end());
  return price_certificate_with_policy(eval, policy, keep_pathwise, threads);
}

struct RunSettings {
  Eigen::Index paths = 400000;  // training + evaluation; split by train_fraction
  int n_runs = 10;
  std::uint64_t seed = 42;
  bool antithetic = false;
  unsigned threads = 1;
  RegressionConfig regression;

  Eigen::Index n_train() const {
    auto k = static_cast<Eigen::Index>(std::llround(static_cast<double>(paths) * regression.train_fraction));
    if (antithetic && k % 2) ++k;
    return k;
  }
  Eigen::Index n_eval() const { return paths - n_train(); }

  void validate() const {
    regression.validate();
    if (n_runs < 1) throw ParameterError("n_runs must be at least 1");
    if (n_train() < 2 || n_eval() < 2) throw ParameterError("too few paths for the train/eval split");
    if (antithetic && (n_eval() % 2)) throw ParameterError("antithetic sampling needs even train and eval counts");
  }

  // Independent, disjoint streams for run k.
  std::uint64_t train_seed(int k) const { return mix_seed(seed, 2 * static_cast<std::uint64_t>(k)); }
  std::uint64_t eval_seed(int k) const { return mix_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1); }
};

struct PriceEstimate {
  double price = 0.0;
  double std_error = 0.0;
  int n_runs = 0;
  std::vector<double> run_prices;
  std::vector<double> run_errors;
  double path_time_s = 0.0;  // total path generation time (all runs)
  double median_time_s = 0.0;  // median regression + pricing time per run
  std::vector<std::string> warnings;
};

// Summary over independent run prices; falls back to the path-level error for a single run.
inline void summarize_runs(PriceEstimate& est) {
  const auto& v = est.run_prices;
  const double n = static_cast<double>(v.size());
  est.n_runs = static_cast<int>(v.size());
  est.price = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() == 1) {
    est.std_error = est.run_errors.front();
    return;
  }
  double ss = 0.0;
  for (double x : v) ss += (x - est.price) * (x - est.price);
  est.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

// n_runs independent fit + price cycles. Runs execute in parallel; each run's
// numbers depend only on (seed, run index).
inline PriceEstimate run_experiment(const ModelParams& params, const Product& product, const BasisSpec& basis,
                                    const RunSettings& settings) {
  settings.validate();
  using clock = std::chrono::steady_clock;
  const auto runs = static_cast<std::size_t>(settings.n_runs);
  PriceEstimate est;
  est.run_prices.assign(runs, 0.0);
  est.run_errors.assign(runs, 0.0);
  std::vector<double> path_times(runs), fit_times(runs);
  std::vector<std::vector<std::string>> warnings(runs);

  parallel_for(runs, settings.threads, [&](std::size_t k) {
    const int run = static_cast<int>(k);
    const auto t0 = clock::now();
    const auto train = simulate_paths(params, settings.n_train(), settings.train_seed(run), settings.antithetic);
    const auto eval = simulate_paths(params, settings.n_eval(), settings.eval_seed(run), settings.antithetic);
    const auto t1 = clock::now();
    const auto r = fit_and_price(train, eval, params, product, basis, settings.regression, &warnings[k]);
    const auto t2 = clock::now();
    est.run_prices[k] = r.price;
    est.run_errors[k] = r.std_error;
    path_times[k] = std::chrono::duration<double>(t1 - t0).count();
    fit_times[k] = std::chrono::duration<double>(t2 - t1).count();
  });

  summarize_runs(est);
  est.path_time_s = std::accumulate(path_times.begin(), path_times.end(), 0.0);
  std::sort(fit_times.begin(), fit_times.end());
  est.median_time_s = runs % 2 ? fit_times[runs / 2] : 0.5 * (fit_times[runs / 2 - 1] + fit_times[runs / 2]);
  for (auto& w : warnings) est.warnings.insert(est.warnings.end(), w.begin(), w.end());
  return est;
}

}  // namespace amerasian
