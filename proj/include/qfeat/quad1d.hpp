#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qfeat {

/// Symmetric tridiagonal matrix: n diagonal entries, n-1 off-diagonal entries.
struct SymTriDiag {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;

  std::size_t size() const { return diagonal.size(); }
};

struct TridiagEigen {
  std::vector<double> eigenvalues;       // ascending
  std::vector<double> first_components;  // v_k[0] of the unit eigenvector for eigenvalues[k]
  // Full eigenvectors, column k belongs to eigenvalues[k]; stored column-major n*n.
  // Empty unless requested.
  std::vector<double> vectors;
};

inline constexpr double kDefaultEigenTol = 1e-14;

/// All eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL.
/// Only the first row of the eigenvector matrix is accumulated unless
/// `want_vectors` is set. Throws ConvergenceError after 100*n sweeps.
TridiagEigen sym_tridiag_eigen(const SymTriDiag& m, double tol = kDefaultEigenTol,
                               bool want_vectors = false);

/// One-dimensional quadrature rule for a probability density: ascending nodes,
/// positive weights summing to one.
class QuadratureRule1D {
 public:
  QuadratureRule1D(std::vector<double> nodes, std::vector<double> weights);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline constexpr std::size_t kMaxHermitePoints = 200;

/// L-point Gauss rule for the standard normal density (probabilists' Hermite
/// weight); exact for polynomials of degree <= 2L-1.
QuadratureRule1D gauss_hermite(std::size_t points);

/// Gauss rule for an arbitrary probability density given its monic
/// three-term recurrence p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}.
/// Needs alpha_0..alpha_{L-1} and beta_1..beta_{L-1} (beta.size() == L-1);
/// weights are the squared first eigenvector components.
QuadratureRule1D gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta);

template <class F>
double integrate_1d(const QuadratureRule1D& rule, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights()[i] * f(rule.nodes()[i]);
  return sum;
}

/// E[w^p] for w ~ N(0, 1): (p-1)!! for even p, 0 for odd p.
double normal_moment(unsigned p);

}  // namespace qfeat
