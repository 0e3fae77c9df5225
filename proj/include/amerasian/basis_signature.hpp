#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amerasian/error.hpp"

namespace amerasian {

// Piecewise-linear path through `vertices` (row-major, `dim` values per vertex).
struct PiecewiseLinearPath {
  int dim = 0;
  std::vector<double> vertices;

  std::size_t size() const { return dim == 0 ? 0 : vertices.size() / static_cast<std::size_t>(dim); }
  std::span<const double> vertex(std::size_t k) const {
    return {vertices.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push(std::initializer_list<double> v) { vertices.insert(vertices.end(), v.begin(), v.end()); }
};

// Index arithmetic of the truncated tensor algebra T^n(R^d): levels 0..n stored
// back to back, a word (i_1..i_k) at offset(k) + sum_m i_m d^{k-m}.
class TensorLayout {
 public:
  TensorLayout() = default;
  TensorLayout(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 1) throw InputError("tensor dimension must be positive");
    if (order < 1) throw OrderError("signature order must be at least 1");
    offset_.push_back(0);
    std::size_t level = 1;
    for (int k = 0; k <= order; ++k) {
      offset_.push_back(offset_.back() + level);
      level *= static_cast<std::size_t>(dim);
    }
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t offset(int k) const { return offset_[static_cast<std::size_t>(k)]; }
  std::size_t level_size(int k) const { return offset_[k + 1] - offset_[k]; }
  std::size_t size() const { return offset_.back(); }

  // Number of occurrences of letter `axis` in the word stored at flat index `idx` of level k.
  int letter_count(int k, std::size_t idx, int axis) const {
    int count = 0;
    for (int m = 0; m < k; ++m) {
      if (static_cast<int>(idx % dim_) == axis) ++count;
      idx /= dim_;
    }
    return count;
  }

 private:
  int dim_ = 0;
  int order_ = 0;
  std::vector<std::size_t> offset_;
};

// sig <- sig (x) exp(v): appends one linear segment with increment v. `scratch`
// must hold 2 * d^n doubles. Levels are updated top-down with a Horner scheme.
inline void extend_by_segment(const TensorLayout& layout, std::span<double> sig, std::span<const double> v,
                              std::span<double> scratch) {
  const int d = layout.dim();
  const int n = layout.order();
  const std::size_t top = layout.level_size(n);
  double* t = scratch.data();
  double* u = scratch.data() + top;
  for (int k = n; k >= 1; --k) {
    const double a0 = sig[0];
    const double inv_k = 1.0 / k;
    for (int a = 0; a < d; ++a) t[a] = a0 * v[a] * inv_k;
    std::size_t len = static_cast<std::size_t>(d);
    for (int m = 1; m < k; ++m) {
      const double* am = sig.data() + layout.offset(m);
      const double inv = 1.0 / (k - m);
      for (std::size_t i = 0; i < len; ++i) {
        const double coef = (t[i] + am[i]) * inv;
        double* dst = u + i * d;
        for (int a = 0; a < d; ++a) dst[a] = coef * v[a];
      }
      len *= static_cast<std::size_t>(d);
      std::swap(t, u);
    }
    double* ak = sig.data() + layout.offset(k);
    for (std::size_t i = 0; i < len; ++i) ak[i] += t[i];
  }
}

// out = a (x) b in the truncated algebra (Chen concatenation).
inline void chen_product(const TensorLayout& layout, std::span<const double> a, std::span<const double> b,
                         std::span<double> out) {
  const int n = layout.order();
  for (int k = 0; k <= n; ++k) {
    double* ok = out.data() + layout.offset(k);
    std::fill(ok, ok + layout.level_size(k), 0.0);
    for (int j = 0; j <= k; ++j) {
      const double* aj = a.data() + layout.offset(j);
      const double* bk = b.data() + layout.offset(k - j);
      const std::size_t na = layout.level_size(j), nb = layout.level_size(k - j);
      for (std::size_t i = 0; i < na; ++i) {
        const double ai = aj[i];
        if (ai == 0.0) continue;
        double* dst = ok + i * nb;
        for (std::size_t l = 0; l < nb; ++l) dst[l] += ai * bk[l];
      }
    }
  }
}

class TruncatedSignature {
 public:
  TruncatedSignature(int dim, int order) : layout_(dim, order), coeffs_(layout_.size(), 0.0) { coeffs_[0] = 1.0; }

  static TruncatedSignature segment(std::span<const double> increment, int order) {
    TruncatedSignature s(static_cast<int>(increment.size()), order);
    s.extend(increment);
    return s;
  }

  int dim() const { return layout_.dim(); }
  int order() const { return layout_.order(); }
  const TensorLayout& layout() const { return layout_; }

  std::span<const double> level(int k) const {
    if (k < 0 || k > order()) throw OrderError("signature level out of range");
    return {coeffs_.data() + layout_.offset(k), layout_.level_size(k)};
  }
  std::span<const double> coefficients() const { return coeffs_; }

  // Levels 1..n flattened; the constant level-0 term is dropped.
  std::vector<double> features() const { return {coeffs_.begin() + 1, coeffs_.end()}; }

  void extend(std::span<const double> increment) {
    if (static_cast<int>(increment.size()) != dim()) throw ShapeError("segment dimension mismatch");
    std::vector<double> scratch(2 * layout_.level_size(order()));
    extend_by_segment(layout_, coeffs_, increment, scratch);
  }

  friend TruncatedSignature operator*(const TruncatedSignature& a, const TruncatedSignature& b) {
    if (a.dim() != b.dim() || a.order() != b.order()) throw ShapeError("signature shapes differ");
    TruncatedSignature out(a.dim(), a.order());
    chen_product(a.layout_, a.coeffs_, b.coeffs_, out.coeffs_);
    return out;
  }

 private:
  TensorLayout layout_;
  std::vector<double> coeffs_;
};

inline constexpr int kDefaultMaxSignatureOrder = 6;

// Feature count sum_{k=1..n} d^k = s_d(n) - 1.
inline std::size_t signature_feature_count(int dim, int order) {
  std::size_t total = 0, level = 1;
  for (int k = 1; k <= order; ++k) {
    level *= static_cast<std::size_t>(dim);
    total += level;
  }
  return total;
}

inline TruncatedSignature signature(const PiecewiseLinearPath& path, int order,
                                    int max_order = kDefaultMaxSignatureOrder) {
  if (order < 1 || order > max_order)
    throw OrderError("signature order " + std::to_string(order) + " outside [1, " + std::to_string(max_order) + "]");
  if (path.size() < 2) throw InputError("a path needs at least two vertices");
  TruncatedSignature sig(path.dim, order);
  std::vector<double> inc(static_cast<std::size_t>(path.dim));
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto a = path.vertex(k - 1), b = path.vertex(k);
    for (int c = 0; c < path.dim; ++c) inc[c] = b[c] - a[c];
    sig.extend(inc);
  }
  return sig;
}

// Lead-lag embedding: (x_0,x_0) -> (x_1,x_0) -> (x_1,x_1) -> (x_2,x_1) -> ...
// The lead coordinate moves first, then the lag catches up; 2(L-1)+1 vertices.
inline PiecewiseLinearPath lead_lag(std::span<const double> series) {
  if (series.size() < 2) throw InputError("lead-lag needs at least two observations");
  PiecewiseLinearPath out{2, {}};
  out.vertices.reserve(2 * (2 * series.size() - 1));
  out.push({series[0], series[0]});
  for (std::size_t j = 1; j < series.size(); ++j) {
    out.push({series[j], series[j - 1]});
    out.push({series[j], series[j]});
  }
  return out;
}

// Prepends a time coordinate running uniformly from 0 to 1 over the vertices,
// preceded by a stub from the origin (0,0,0) to (0, lead_0, lag_0).
inline PiecewiseLinearPath time_join(const PiecewiseLinearPath& path2d) {
  if (path2d.dim != 2) throw InputError("time-join expects a 2-dimensional path");
  const std::size_t n = path2d.size();
  if (n < 2) throw InputError("time-join needs at least two vertices");
  PiecewiseLinearPath out{3, {}};
  out.vertices.reserve(3 * (n + 1));
  out.push({0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = path2d.vertex(k);
    out.push({static_cast<double>(k) / static_cast<double>(n - 1), v[0], v[1]});
  }
  return out;
}

// Signature features (levels 1..n, axis 0 = time, 1 = lead, 2 = lag) of
// time_join(lead_lag(series)), computed segment by segment without building the
// path. A single observation is treated as a flat two-point series.
inline void lead_lag_signature_features(const TensorLayout& layout, std::span<const double> series,
                                        std::span<double> sig, std::span<double> scratch) {
  std::fill(sig.begin(), sig.end(), 0.0);
  sig[0] = 1.0;
  if (series.empty()) return;
  const std::size_t len = std::max<std::size_t>(series.size(), 2);
  const double dt = 1.0 / (2.0 * static_cast<double>(len - 1));
  const double stub[3] = {0.0, series[0], series[0]};
  extend_by_segment(layout, sig, stub, scratch);
  for (std::size_t j = 1; j < len; ++j) {
    const double delta = j < series.size() ? series[j] - series[j - 1] : 0.0;
    const double lead[3] = {dt, delta, 0.0};
    const double lag[3] = {dt, 0.0, delta};
    extend_by_segment(layout, sig, lead, scratch);
    extend_by_segment(layout, sig, lag, scratch);
  }
}

// Design matrix for standardized series (one row per path): signature features,
// then the constant 1, then `augment` (if given) as a final column.
inline Eigen::MatrixXd signature_design(const Eigen::MatrixXd& series, int order,
                                        const std::optional<Eigen::VectorXd>& augment = std::nullopt,
                                        int max_order = kDefaultMaxSignatureOrder) {
  if (order < 1 || order > max_order) throw OrderError("signature order outside the configured range");
  if (augment && augment->size() != series.rows()) throw ShapeError("augmentation column length mismatch");
  const TensorLayout layout(3, order);
  const auto width = static_cast<Eigen::Index>(layout.size() - 1);
  Eigen::MatrixXd out(series.rows(), width + 1 + (augment ? 1 : 0));
  std::vector<double> sig(layout.size()), scratch(2 * layout.level_size(order)), row(series.cols());
  for (Eigen::Index p = 0; p < series.rows(); ++p) {
    for (Eigen::Index j = 0; j < series.cols(); ++j) row[j] = series(p, j);
    lead_lag_signature_features(layout, row, sig, scratch);
    for (Eigen::Index c = 0; c < width; ++c) out(p, c) = sig[static_cast<std::size_t>(c) + 1];
    out(p, width) = 1.0;
    if (augment) out(p, width + 1) = (*augment)(p);
  }
  return out;
}

// Per-path running signatures of time_join(lead_lag(x_1..x_L)) that can grow or
// shrink by one observation at a time. Internally every lead-lag segment takes
// one unit of time; features() rescales the time letter so time spans [0, 1].
// Shrinking multiplies by the inverse segment exponentials, exact up to rounding.
class SignatureStream {
 public:
  SignatureStream(Eigen::Index paths, int order)
      : layout_(3, order),
        state_(paths, static_cast<Eigen::Index>(layout_.size())),
        scratch_(2 * layout_.level_size(order)),
        length_(0) {
    state_.setZero();
    state_.col(0).setOnes();
    const int n = order;
    time_letters_.resize(layout_.size());
    for (int k = 0; k <= n; ++k)
      for (std::size_t i = 0; i < layout_.level_size(k); ++i)
        time_letters_[layout_.offset(k) + i] = layout_.letter_count(k, i, 0);
  }

  int length() const { return length_; }
  Eigen::Index paths() const { return state_.rows(); }
  std::size_t feature_count() const { return layout_.size() - 1; }

  // Appends observation x(p) to path p; `previous` holds the last appended values.
  void push(const Eigen::VectorXd& x, const Eigen::VectorXd* previous) {
    for (Eigen::Index p = 0; p < paths(); ++p) {
      auto sig = row(p);
      if (length_ == 0) {
        const double stub[3] = {0.0, x(p), x(p)};
        extend_by_segment(layout_, sig, stub, scratch_);
      } else {
        const double delta = x(p) - (*previous)(p);
        const double lead[3] = {1.0, delta, 0.0};
        const double lag[3] = {1.0, 0.0, delta};
        extend_by_segment(layout_, sig, lead, scratch_);
        extend_by_segment(layout_, sig, lag, scratch_);
      }
    }
    ++length_;
  }

  // Removes the last observation `last`, whose predecessor is `previous`.
  void pop(const Eigen::VectorXd& last, const Eigen::VectorXd* previous) {
    if (length_ == 0) throw SequencingError("signature stream is empty");
    for (Eigen::Index p = 0; p < paths(); ++p) {
      auto sig = row(p);
      if (length_ == 1) {
        std::fill(sig.begin(), sig.end(), 0.0);
        sig[0] = 1.0;
      } else {
        const double delta = last(p) - (*previous)(p);
        const double lag[3] = {-1.0, 0.0, -delta};
        const double lead[3] = {-1.0, -delta, 0.0};
        extend_by_segment(layout_, sig, lag, scratch_);
        extend_by_segment(layout_, sig, lead, scratch_);
      }
    }
    --length_;
  }

  // Features of path `p` written to `out` (feature_count() values).
  void features(Eigen::Index p, std::span<double> out) {
    if (length_ == 0) throw SequencingError("signature stream is empty");
    tmp_.assign(row(p).begin(), row(p).end());
    int units = 2 * (length_ - 1);
    if (length_ == 1) {
      const double flat[3] = {1.0, 0.0, 0.0};
      extend_by_segment(layout_, tmp_, flat, scratch_);
      extend_by_segment(layout_, tmp_, flat, scratch_);
      units = 2;
    }
    const double c = 1.0 / units;
    powers_.resize(static_cast<std::size_t>(layout_.order()) + 1);
    powers_[0] = 1.0;
    for (std::size_t k = 1; k < powers_.size(); ++k) powers_[k] = powers_[k - 1] * c;
    for (std::size_t i = 1; i < tmp_.size(); ++i) out[i - 1] = tmp_[i] * powers_[time_letters_[i]];
  }

 private:
  std::span<double> row(Eigen::Index p) {
    return {state_.data() + p * state_.cols(), static_cast<std::size_t>(state_.cols())};
  }

  TensorLayout layout_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> state_;
  std::vector<double> scratch_;
  std::vector<double> tmp_;
  std::vector<double> powers_;
  std::vector<int> time_letters_;
  int length_;
};

}  // namespace amerasian
