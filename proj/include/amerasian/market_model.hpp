#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>

#include "amerasian/error.hpp"
#include "amerasian/parallel.hpp"
#include "amerasian/random.hpp"

namespace amerasian {

// Black-Scholes dynamics on an equally spaced grid T_0 = 0, ..., T_N = maturity.
struct ModelParams {
  double s0 = 100.0;
  double r = 0.05;
  double q = 0.0;
  double sigma = 0.3;
  double maturity = 0.2;
  int steps = 50;

  void validate() const {
    if (!(s0 > 0.0)) throw ParameterError("s0 must be positive");
    if (!(maturity > 0.0)) throw ParameterError("maturity must be positive");
    if (!(sigma >= 0.0)) throw ParameterError("sigma must be non-negative");
    if (steps < 1) throw ParameterError("steps must be at least 1");
    if (!std::isfinite(r) || !std::isfinite(q)) throw ParameterError("rates must be finite");
  }

  double dt() const { return maturity / steps; }
  double time(int j) const { return maturity * static_cast<double>(j) / steps; }
};

// e^{-r (T_j - T_i)}: the ratio B_{T_i} / B_{T_j} of bank-account values.
inline double discount_factor(const ModelParams& params, int i, int j) {
  if (i < 0 || j > params.steps) throw IndexError("date index outside [0, N]");
  if (i > j) throw IndexError("discount_factor requires i <= j");
  return std::exp(-params.r * (params.time(j) - params.time(i)));
}

// Simulated spot values: one row per path, one column per date T_0..T_N.
// Immutable after construction.
class PathBatch {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PathBatch() = default;

  PathBatch(Matrix prices, std::uint64_t seed) : prices_(std::move(prices)), seed_(seed) {
    if (prices_.rows() < 1 || prices_.cols() < 2) throw ShapeError("path batch needs >= 1 path and >= 2 dates");
    if (!(prices_.array() > 0.0).all() || !prices_.allFinite())
      throw ParameterError("path prices must be finite and strictly positive");
  }

  Eigen::Index n_paths() const { return prices_.rows(); }
  int steps() const { return static_cast<int>(prices_.cols()) - 1; }
  double operator()(Eigen::Index p, int j) const { return prices_(p, j); }
  std::span<const double> path(Eigen::Index p) const {
    return {prices_.data() + p * prices_.cols(), static_cast<std::size_t>(prices_.cols())};
  }
  const Matrix& prices() const { return prices_; }
  std::uint64_t seed() const { return seed_; }

  // Paths [begin, end) as a standalone batch.
  PathBatch slice(Eigen::Index begin, Eigen::Index end) const {
    if (begin < 0 || end > n_paths() || begin >= end) throw IndexError("invalid path slice");
    return PathBatch(prices_.middleRows(begin, end - begin), seed_);
  }

  // Every path multiplied by `factor`; with GBM this is the same noise at spot factor * s0.
  PathBatch scaled(double factor) const {
    if (!(factor > 0.0)) throw ParameterError("scale factor must be positive");
    return PathBatch(prices_ * factor, seed_);
  }

  // Path p multiplied by factors[p]. Column 0 then carries per-path initial spots.
  PathBatch scaled(std::span<const double> factors) const {
    if (static_cast<Eigen::Index>(factors.size()) != n_paths()) throw ShapeError("one factor per path required");
    Matrix out = prices_;
    for (Eigen::Index p = 0; p < n_paths(); ++p) {
      if (!(factors[p] > 0.0)) throw ParameterError("scale factor must be positive");
      out.row(p) *= factors[p];
    }
    return PathBatch(std::move(out), seed_);
  }

 private:
  Matrix prices_;
  std::uint64_t seed_ = 0;
};

// Exact log-normal stepping S_{j+1} = S_j exp((r - q - sigma^2/2) dt + sigma sqrt(dt) Z).
// Path p (or antithetic pair p/2) draws from its own (seed, index) stream, so
// the result is bit-identical for any thread count.
inline PathBatch simulate_paths(const ModelParams& params, Eigen::Index n_paths, std::uint64_t seed,
                                bool antithetic = false, unsigned threads = 1) {
  params.validate();
  if (n_paths < 1) throw ParameterError("n_paths must be at least 1");
  if (antithetic && n_paths % 2 != 0) throw ParameterError("antithetic sampling needs an even path count");

  const int n = params.steps;
  const double dt = params.dt();
  const double drift = (params.r - params.q - 0.5 * params.sigma * params.sigma) * dt;
  const double vol = params.sigma * std::sqrt(dt);

  PathBatch::Matrix prices(n_paths, n + 1);
  const Eigen::Index n_streams = antithetic ? n_paths / 2 : n_paths;
  constexpr Eigen::Index kBlock = 1024;
  const auto n_blocks = static_cast<std::size_t>((n_streams + kBlock - 1) / kBlock);

  parallel_for(n_blocks, threads, [&](std::size_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index end = std::min(n_streams, begin + kBlock);
    for (Eigen::Index k = begin; k < end; ++k) {
      StreamRng rng(seed, static_cast<std::uint64_t>(k));
      std::normal_distribution<double> normal;
      const Eigen::Index row = antithetic ? 2 * k : k;
      double log_up = std::log(params.s0);
      double log_down = log_up;
      prices(row, 0) = params.s0;
      if (antithetic) prices(row + 1, 0) = params.s0;
      for (int j = 1; j <= n; ++j) {
        const double z = normal(rng);
        log_up += drift + vol * z;
        prices(row, j) = std::exp(log_up);
        if (antithetic) {
          log_down += drift - vol * z;
          prices(row + 1, j) = std::exp(log_down);
        }
      }
    }
  });
  return PathBatch(std::move(prices), seed);
}

// CSV dump: header `path_id,t0,...,tN`, one row per path.
inline void write_paths_csv(const PathBatch& batch, std::ostream& out) {
  out << "path_id";
  for (int j = 0; j <= batch.steps(); ++j) out << ",t" << j;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (Eigen::Index p = 0; p < batch.n_paths(); ++p) {
    out << p;
    for (int j = 0; j <= batch.steps(); ++j) out << ',' << batch(p, j);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace amerasian
