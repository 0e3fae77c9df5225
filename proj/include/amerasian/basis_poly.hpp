#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "amerasian/error.hpp"

namespace amerasian {

// C(F + d, d): number of monomials of total degree <= d in F variables.
inline std::size_t poly_column_count(int n_features, int degree) {
  if (n_features < 0 || degree < 0) throw ParameterError("negative polynomial dimensions");
  long double count = 1.0L;
  for (int k = 1; k <= degree; ++k) count = count * (n_features + k) / k;
  return static_cast<std::size_t>(count + 0.5L);
}

// Monomials in graded-lex order: degree 0, then degree 1 (x_0, x_1, ...), then
// degree 2 (x_0^2, x_0 x_1, ..., x_1^2, ...), each encoded as its non-decreasing
// variable-index list. `parent[k]` is the monomial with the last index removed,
// so column k = column parent[k] * x_{last}.
struct MonomialTable {
  std::vector<std::vector<int>> terms;
  std::vector<std::size_t> parent;
};

inline MonomialTable graded_lex_monomials(int n_features, int degree) {
  MonomialTable table;
  table.terms.push_back({});
  table.parent.push_back(0);
  std::size_t level_begin = 0, level_end = 1;
  for (int d = 1; d <= degree; ++d) {
    for (std::size_t k = level_begin; k < level_end; ++k) {
      const int start = table.terms[k].empty() ? 0 : table.terms[k].back();
      for (int v = start; v < n_features; ++v) {
        auto term = table.terms[k];
        term.push_back(v);
        table.terms.push_back(std::move(term));
        table.parent.push_back(k);
      }
    }
    level_begin = level_end;
    level_end = table.terms.size();
  }
  return table;
}

// All monomials of total degree <= `degree` in the columns of X, constant first.
inline Eigen::MatrixXd poly_features(const Eigen::MatrixXd& x, int degree, std::size_t max_columns = 5000) {
  if (degree < 1) throw ParameterError("polynomial degree must be at least 1");
  const int f = static_cast<int>(x.cols());
  const std::size_t width = poly_column_count(f, degree);
  if (width > max_columns)
    throw BasisTooLargeError("polynomial basis has " + std::to_string(width) + " columns, cap is " +
                             std::to_string(max_columns));
  const auto table = graded_lex_monomials(f, degree);
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(width));
  out.col(0).setOnes();
  for (std::size_t k = 1; k < width; ++k)
    out.col(static_cast<Eigen::Index>(k)) =
        out.col(static_cast<Eigen::Index>(table.parent[k])).cwiseProduct(x.col(table.terms[k].back()));
  return out;
}

}  // namespace amerasian
