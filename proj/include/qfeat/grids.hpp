#pragma once

#include "qfeat/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qfeat {

/// Multi-dimensional quadrature for the unit (standard normal) spectrum:
/// D points in R^d with weights. Points are rows of a D x d matrix.
class GridQuadrature {
 public:
  GridQuadrature(RowMatrix points, Vector weights, std::string provenance = {});

  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  std::size_t count() const { return static_cast<std::size_t>(points_.rows()); }
  const RowMatrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  std::span<const double> point(std::size_t i) const {
    return row_span(points_, static_cast<Eigen::Index>(i));
  }
  bool nonnegative() const { return nonnegative_; }
  double weight_sum() const { return weights_.sum(); }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

 private:
  RowMatrix points_;
  Vector weights_;
  bool nonnegative_;
  std::string provenance_;
};

inline constexpr double kDefaultPointCap = 1e7;
inline constexpr double kDefaultConstraintCap = 1e6;

/// Tensor product of the L-point Hermite rule in d dimensions (L^d points).
GridQuadrature dense_grid(std::size_t L, std::size_t d, double cap = kDefaultPointCap);

/// Smolyak sparse grid of total level A: signed sum over |m|_1 <= A of tensor
/// products of the difference rules G^{2^m} - G^{2^{m-1}} (G^{1/2} = 0).
/// Coincident points are merged and zero-weight points dropped.
GridQuadrature sparse_grid(std::size_t level, std::size_t d, double cap = kDefaultPointCap);

/// D i.i.d. draws proportional to weight, each worth 1/D; duplicates merged.
GridQuadrature subsample_grid(const GridQuadrature& g, std::size_t draws, Seed seed);

/// Same distribution as subsample_grid(dense_grid(L, d), draws, seed) but draws
/// coordinates independently, so the L^d grid is never materialized.
GridQuadrature subsample_dense(std::size_t L, std::size_t d, std::size_t draws, Seed seed);

/// Multi-indices r in N^d with |r|_1 <= R, stored sparsely as (dimension, exponent).
using SparseMonomial = std::vector<std::pair<std::size_t, unsigned>>;

/// C(d + R, d) as a double (for cap checks).
double monomial_count(std::size_t d, std::size_t R);

/// Enumerates all monomials of total degree <= R in d variables, in a fixed
/// depth-first order, calling visit(monomial, values) where values[i] is the
/// monomial evaluated at point i.
template <class Visit>
void for_each_monomial(const RowMatrix& points, std::size_t R, Visit&& visit);

/// Analytic standard-normal moment of a monomial: prod (r_l - 1)!! or 0.
double monomial_moment(const SparseMonomial& r);

/// max over |r|_1 <= R of |E[prod w_l^{r_l}] - sum_i a_i prod (w_i)_l^{r_l}|.
double exactness_residual(const GridQuadrature& g, std::size_t R, double cap = kDefaultConstraintCap);

// ---------------------------------------------------------------------------

namespace detail {

template <class Visit>
void monomial_dfs(const RowMatrix& points, std::size_t R, std::size_t start, std::size_t used,
                  SparseMonomial& mono, const Vector& values, Visit& visit) {
  const std::size_t d = static_cast<std::size_t>(points.cols());
  for (std::size_t j = start; j < d; ++j) {
    Vector cur = values;
    for (unsigned e = 1; used + e <= R; ++e) {
      cur.array() *= points.col(static_cast<Eigen::Index>(j)).array();
      mono.emplace_back(j, e);
      visit(static_cast<const SparseMonomial&>(mono), static_cast<const Vector&>(cur));
      monomial_dfs(points, R, j + 1, used + e, mono, cur, visit);
      mono.pop_back();
    }
  }
}

}  // namespace detail

template <class Visit>
void for_each_monomial(const RowMatrix& points, std::size_t R, Visit&& visit) {
  SparseMonomial mono;
  const Vector ones = Vector::Ones(points.rows());
  visit(static_cast<const SparseMonomial&>(mono), ones);
  detail::monomial_dfs(points, R, 0, 0, mono, ones, visit);
}

}  // namespace qfeat
