#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "amerasian/error.hpp"
#include "amerasian/market_model.hpp"
#include "amerasian/payoffs.hpp"

namespace amerasian {

// Risk-factor set selector:
//   1: S_{T_i}
//   2: S_{T_i} and the window average A^avg_i(M)
//   3: S_{T_{i-M+2}}..S_{T_i} (the in-window spots that still matter)
//   4: S_{T_1}..S_{T_i} (full post-inception history)
// With M = 1 sets 2 and 3 revert to set 1.
struct RiskSetSpec {
  int rho = 2;
  int window = 1;

  void validate() const {
    if (rho < 1 || rho > 4) throw ParameterError("risk set rho must be in {1,2,3,4}");
    if (window < 1) throw ParameterError("window must be positive");
  }

  int effective_rho() const { return (window == 1 && (rho == 2 || rho == 3)) ? 1 : rho; }

  // Earliest date for which the factors exist.
  int first_date() const {
    const int r = effective_rho();
    return (r == 2 || r == 3) ? window - 1 : 0;
  }
};

// F^rho_i, the number of raw factors at date i.
inline int factor_count(const RiskSetSpec& spec, int date) {
  spec.validate();
  if (date < spec.first_date()) throw WindowUnderflowError("date precedes the first full window");
  switch (spec.effective_rho()) {
    case 1: return 1;
    case 2: return 2;
    case 3: return spec.window - 1;
    default: return date;
  }
}

// Dates whose spots make up the streamed sets (3 and 4); empty for sets 1 and 2.
inline std::vector<int> factor_dates(const RiskSetSpec& spec, int date) {
  std::vector<int> dates;
  switch (spec.effective_rho()) {
    case 1: dates.push_back(date); break;
    case 3:
      for (int j = date - spec.window + 2; j <= date; ++j) dates.push_back(j);
      break;
    case 4:
      for (int j = 1; j <= date; ++j) dates.push_back(j);
      break;
    default: break;
  }
  return dates;
}

// Raw (pre-log) factor matrix, one row per path.
inline Eigen::MatrixXd extract_risk_factors(const PathBatch& batch, int date, const RiskSetSpec& spec) {
  const int f = factor_count(spec, date);
  if (date > batch.steps()) throw IndexError("date beyond the path grid");
  Eigen::MatrixXd raw(batch.n_paths(), f);
  if (spec.effective_rho() == 2) {
    for (Eigen::Index p = 0; p < batch.n_paths(); ++p) {
      raw(p, 0) = batch(p, date);
      raw(p, 1) = window_stat(batch.path(p), date, spec.window, WindowStat::Avg);
    }
    return raw;
  }
  const auto dates = factor_dates(spec, date);
  for (std::size_t c = 0; c < dates.size(); ++c) raw.col(static_cast<Eigen::Index>(c)) = batch.prices().col(dates[c]);
  return raw;
}

enum class DegeneratePolicy { Drop, Throw };

// Column-wise log-standardization X = (log raw - mean) / std with population
// statistics. Constant columns are dropped (or rejected under Throw).
class Standardizer {
 public:
  static Standardizer fit(const Eigen::MatrixXd& raw, DegeneratePolicy policy = DegeneratePolicy::Drop) {
    if (raw.rows() < 2 && raw.cols() > 0) throw InputError("standardization needs at least two rows");
    if (raw.size() > 0 && !(raw.array() > 0.0).all()) throw InputError("risk factors must be strictly positive");
    Standardizer s;
    const double n = static_cast<double>(raw.rows());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      const Eigen::ArrayXd z = raw.col(c).array().log();
      const double mean = z.sum() / n;
      const double sd = std::sqrt((z - mean).square().sum() / n);
      if (is_degenerate(mean, sd)) {
        if (policy == DegeneratePolicy::Throw)
          throw DegenerateFeatureError("risk factor column " + std::to_string(c) + " is constant");
        s.dropped_.push_back(static_cast<int>(c));
        continue;
      }
      s.kept_.push_back(static_cast<int>(c));
      s.means_.push_back(mean);
      s.stds_.push_back(sd);
    }
    s.input_width_ = static_cast<int>(raw.cols());
    return s;
  }

  static bool is_degenerate(double mean, double sd) { return !(sd > 1e-12 * (1.0 + std::abs(mean))); }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != input_width_) throw ShapeError("factor width differs from the fitted width");
    Eigen::MatrixXd x(raw.rows(), static_cast<Eigen::Index>(kept_.size()));
    for (std::size_t k = 0; k < kept_.size(); ++k)
      x.col(static_cast<Eigen::Index>(k)) = (raw.col(kept_[k]).array().log() - means_[k]) / stds_[k];
    return x;
  }

  // exp(X * std + mean) for the kept columns.
  Eigen::MatrixXd invert(const Eigen::MatrixXd& x) const {
    if (x.cols() != static_cast<Eigen::Index>(kept_.size())) throw ShapeError("standardized width mismatch");
    Eigen::MatrixXd raw(x.rows(), x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k)
      raw.col(k) = (x.col(k).array() * stds_[static_cast<std::size_t>(k)] + means_[static_cast<std::size_t>(k)]).exp();
    return raw;
  }

  const std::vector<int>& kept() const { return kept_; }
  const std::vector<int>& dropped() const { return dropped_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stds() const { return stds_; }
  int input_width() const { return input_width_; }

 private:
  std::vector<int> kept_;
  std::vector<int> dropped_;
  std::vector<double> means_;
  std::vector<double> stds_;
  int input_width_ = 0;
};

struct StandardizedFeatures {
  Eigen::MatrixXd values;
  Standardizer stats;
};

inline StandardizedFeatures standardize(const Eigen::MatrixXd& raw, DegeneratePolicy policy = DegeneratePolicy::Drop) {
  auto stats = Standardizer::fit(raw, policy);
  return {stats.apply(raw), std::move(stats)};
}

// Standardized log spots and log window averages for every date of a batch,
// using statistics fitted once on a training population. Because every factor
// of sets 1, 3 and 4 is a spot S_{T_j} and set 2 adds A^avg_j(M), one statistic
// per (kind, date) reproduces standardize(extract_risk_factors(...)) for all
// sets and dates at once.
class FactorScaler {
 public:
  static FactorScaler fit(const PathBatch& train, int window) {
    FactorScaler s;
    s.window_ = window;
    const int n = train.steps();
    s.spot_ = fit_columns(train.prices(), 0);
    s.avg_ = fit_columns(window_averages(train, window), window - 1);
    s.steps_ = n;
    return s;
  }

  struct Panel {
    Eigen::MatrixXd spots;  // P x (N+1)
    Eigen::MatrixXd averages;  // P x (N+1); columns before M-1 are unused
  };

  Panel transform(const PathBatch& batch) const {
    if (batch.steps() != steps_) throw ShapeError("batch grid differs from the fitted grid");
    Panel panel;
    panel.spots = apply_columns(batch.prices(), spot_);
    panel.averages = apply_columns(window_averages(batch, window_), avg_);
    return panel;
  }

  // Standardized factor matrix (kept columns only) for the given rows at `date`.
  Eigen::MatrixXd inputs(const Panel& panel, const RiskSetSpec& spec, int date,
                         std::span<const Eigen::Index> rows) const {
    const auto cols = input_columns(spec, date);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& src = cols[c].average ? panel.averages : panel.spots;
      for (std::size_t r = 0; r < rows.size(); ++r)
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src(rows[r], cols[c].date);
    }
    return x;
  }

  struct Column {
    int date;
    bool average;
  };

  // Kept standardized columns that make up set `spec` at `date`, in factor order.
  std::vector<Column> input_columns(const RiskSetSpec& spec, int date) const {
    factor_count(spec, date);
    std::vector<Column> cols;
    if (spec.effective_rho() == 2) {
      if (spot_.kept[date]) cols.push_back({date, false});
      if (avg_.kept[date]) cols.push_back({date, true});
      return cols;
    }
    for (int j : factor_dates(spec, date))
      if (spot_.kept[j]) cols.push_back({j, false});
    return cols;
  }

  bool spot_kept(int date) const { return spot_.kept[date]; }
  bool average_kept(int date) const { return avg_.kept[date]; }
  int window() const { return window_; }

  static Eigen::MatrixXd window_averages(const PathBatch& batch, int window) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Ones(batch.n_paths(), batch.steps() + 1);
    for (Eigen::Index p = 0; p < batch.n_paths(); ++p) {
      const auto path = batch.path(p);
      for (int j = window - 1; j <= batch.steps(); ++j) avg(p, j) = window_stat(path, j, window, WindowStat::Avg);
    }
    return avg;
  }

 private:
  struct ColumnStats {
    std::vector<double> mean, sd;
    std::vector<bool> kept;
  };

  template <class Mat>
  static ColumnStats fit_columns(const Mat& raw, int first_col) {
    ColumnStats s;
    const auto cols = raw.cols();
    s.mean.assign(cols, 0.0);
    s.sd.assign(cols, 1.0);
    s.kept.assign(cols, false);
    const double n = static_cast<double>(raw.rows());
    for (Eigen::Index c = first_col; c < cols; ++c) {
      const Eigen::ArrayXd z = raw.col(c).array().log();
      const double mean = z.sum() / n;
      const double sd = std::sqrt((z - mean).square().sum() / n);
      s.mean[c] = mean;
      if (raw.rows() >= 2 && !Standardizer::is_degenerate(mean, sd)) {
        s.sd[c] = sd;
        s.kept[c] = true;
      }
    }
    return s;
  }

  template <class Mat>
  static Eigen::MatrixXd apply_columns(const Mat& raw, const ColumnStats& s) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c)
      if (s.kept[c]) out.col(c) = (raw.col(c).array().log() - s.mean[c]) / s.sd[c];
    return out;
  }

  ColumnStats spot_, avg_;
  int window_ = 1;
  int steps_ = 0;
};

}  // namespace amerasian
