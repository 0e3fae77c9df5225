#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>

#include "amerasian/error.hpp"
#include "amerasian/random.hpp"

namespace amerasian {

struct RffnnSpec {
  int hidden = 40;  // h - 1 random units; the readout adds the constant
  double leaky_slope = 0.01;
  double weight_std = 1.0;
  std::uint64_t seed = 7;

  void validate() const {
    if (hidden < 1) throw ParameterError("R-FFNN needs at least one hidden unit");
    if (!(weight_std > 0.0)) throw ParameterError("weight std must be positive");
  }
};

struct RrnnSpec {
  int hidden = 40;
  double input_std = 1e-4;  // A_x
  double recurrent_std = 0.3;  // A_xi
  double bias_std = 1.0;
  std::uint64_t seed = 11;

  void validate() const {
    if (hidden < 1) throw ParameterError("R-RNN needs at least one hidden unit");
    if (!(input_std >= 0.0 && recurrent_std >= 0.0 && bias_std >= 0.0)) throw ParameterError("negative weight std");
  }
};

namespace detail {
inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double sd, StreamRng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = sd * normal(rng);
  return m;
}
}  // namespace detail

// Single hidden layer with frozen Gaussian weights: phi(x) = (leaky_relu(A x + b), 1).
class RandomFeedForward {
 public:
  RandomFeedForward(Eigen::MatrixXd weights, Eigen::VectorXd bias, double leaky_slope)
      : a_(std::move(weights)), b_(std::move(bias)), slope_(leaky_slope) {
    if (a_.rows() != b_.size()) throw ShapeError("bias length must match the hidden size");
  }

  // Weights for one regression date; `stream` keeps each date's draw independent.
  static RandomFeedForward sample(int input_dim, const RffnnSpec& spec, std::uint64_t stream) {
    spec.validate();
    StreamRng rng(spec.seed, stream);
    auto a = detail::gaussian_matrix(spec.hidden, input_dim, spec.weight_std, rng);
    Eigen::VectorXd b = detail::gaussian_matrix(spec.hidden, 1, spec.weight_std, rng);
    return RandomFeedForward(std::move(a), std::move(b), spec.leaky_slope);
  }

  int input_dim() const { return static_cast<int>(a_.cols()); }
  int width() const { return static_cast<int>(a_.rows()) + 1; }

  // One row per input row: leaky_relu(A x + b) followed by the constant 1.
  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const {
    if (x.cols() != a_.cols()) throw ShapeError("R-FFNN input width mismatch");
    Eigen::MatrixXd out(x.rows(), a_.rows() + 1);
    out.leftCols(a_.rows()).noalias() = x * a_.transpose();
    out.leftCols(a_.rows()).rowwise() += b_.transpose();
    const double slope = slope_;
    out.leftCols(a_.rows()) = out.leftCols(a_.rows()).unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
    out.col(a_.rows()).setOnes();
    return out;
  }

  const Eigen::MatrixXd& weights() const { return a_; }
  const Eigen::VectorXd& bias() const { return b_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  double slope_;
};

// One observation date worth of inputs, one row per path.
struct TimeSlice {
  int date;
  Eigen::MatrixXd x;
};

// Recurrent layer xi_j = tanh(A_x x_j + A_xi xi_{j-1} + b), xi_{-1} = 0, with
// weights sampled once and shared by every regression date.
class RandomRecurrent {
 public:
  RandomRecurrent(Eigen::MatrixXd input_weights, Eigen::MatrixXd recurrent_weights, Eigen::VectorXd bias)
      : ax_(std::move(input_weights)), axi_(std::move(recurrent_weights)), b_(std::move(bias)) {
    if (axi_.rows() != axi_.cols() || axi_.rows() != ax_.rows() || b_.size() != ax_.rows())
      throw ShapeError("inconsistent R-RNN weight shapes");
  }

  static RandomRecurrent sample(int input_dim, const RrnnSpec& spec) {
    spec.validate();
    StreamRng rng(spec.seed, 0);
    auto ax = detail::gaussian_matrix(spec.hidden, input_dim, spec.input_std, rng);
    auto axi = detail::gaussian_matrix(spec.hidden, spec.hidden, spec.recurrent_std, rng);
    Eigen::VectorXd b = detail::gaussian_matrix(spec.hidden, 1, spec.bias_std, rng);
    return RandomRecurrent(std::move(ax), std::move(axi), std::move(b));
  }

  int input_dim() const { return static_cast<int>(ax_.cols()); }
  int hidden() const { return static_cast<int>(ax_.rows()); }

  // Zero initial state for `rows` paths; states are stored one row per path.
  Eigen::MatrixXd initial_state(Eigen::Index rows) const { return Eigen::MatrixXd::Zero(rows, ax_.rows()); }

  // Advances `state` by one observation x (rows x input_dim).
  void step(Eigen::MatrixXd& state, const Eigen::MatrixXd& x) const {
    if (x.cols() != ax_.cols() || x.rows() != state.rows()) throw ShapeError("R-RNN input shape mismatch");
    Eigen::MatrixXd pre = x * ax_.transpose();
    pre.noalias() += state * axi_.transpose();
    pre.rowwise() += b_.transpose();
    state = pre.array().tanh().matrix();
  }

  Eigen::MatrixXd hidden_state(std::span<const TimeSlice> slices) const {
    if (slices.empty()) throw InputError("R-RNN needs at least one time slice");
    Eigen::MatrixXd state = initial_state(slices.front().x.rows());
    int previous = slices.front().date - 1;
    for (const auto& s : slices) {
      if (s.date <= previous) throw SequencingError("R-RNN slices must be in chronological order");
      previous = s.date;
      step(state, s.x);
    }
    return state;
  }

  // (xi_i, 1) per path after consuming every slice.
  Eigen::MatrixXd features(std::span<const TimeSlice> slices) const {
    return with_constant(hidden_state(slices));
  }

  static Eigen::MatrixXd with_constant(const Eigen::MatrixXd& state) {
    Eigen::MatrixXd out(state.rows(), state.cols() + 1);
    out.leftCols(state.cols()) = state;
    out.col(state.cols()).setOnes();
    return out;
  }

  const Eigen::MatrixXd& input_weights() const { return ax_; }
  const Eigen::MatrixXd& recurrent_weights() const { return axi_; }
  const Eigen::VectorXd& bias() const { return b_; }

 private:
  Eigen::MatrixXd ax_, axi_;
  Eigen::VectorXd b_;
};

}  // namespace amerasian
