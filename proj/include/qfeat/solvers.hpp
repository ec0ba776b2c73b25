#pragma once

#include "qfeat/error.hpp"
#include "qfeat/grids.hpp"
#include "qfeat/kernels.hpp"
#include "qfeat/types.hpp"

#include <cstddef>
#include <vector>

namespace qfeat {

struct NnlsSolution {
  Vector a;
  double residual_norm = 0.0;              // |M a - b|
  std::vector<std::size_t> active_set;     // indices with a_i == 0
  std::size_t iterations = 0;              // outer (column-adding) iterations
  std::vector<double> objective_log;       // objective after each outer iteration, starting at a = 0

  std::size_t nonzeros() const { return static_cast<std::size_t>(a.size()) - active_set.size(); }
};

struct NnlsOptions {
  double tol = 1e-10;
  /// 0 selects the default cap of 3 * p outer iterations.
  std::size_t max_iterations = 0;
  /// Adds l1_shift * sum(a) to the objective 1/2 |M a - b|^2.
  double l1_shift = 0.0;
};

/// Thrown when the outer iteration cap is hit; carries the last iterate.
class NnlsNotConverged : public ConvergenceError {
 public:
  NnlsNotConverged(std::size_t iterations, NnlsSolution best)
      : ConvergenceError("nnls: iteration cap reached", iterations), best_(std::move(best)) {}
  const NnlsSolution& best() const { return best_; }

 private:
  NnlsSolution best_;
};

/// Lawson-Hanson active-set solver for min 1/2 |M a - b|^2 (+ shift * 1'a), a >= 0.
NnlsSolution nnls(const Eigen::MatrixXd& M, const Vector& b, const NnlsOptions& options);
inline NnlsSolution nnls(const Eigen::MatrixXd& M, const Vector& b, double tol = 1e-10) {
  NnlsOptions o;
  o.tol = tol;
  return nnls(M, b, o);
}

/// 1/2 |M a - b|^2 + shift * sum(a).
double nnls_objective(const Eigen::MatrixXd& M, const Vector& b, const Vector& a, double shift = 0.0);

/// The polynomially-exact construction could not meet its exactness tolerance.
class ConstructionFailed : public Error {
 public:
  ConstructionFailed(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct PolyExactOptions {
  double exactness_tol = 1e-8;
  double constraint_cap = kDefaultConstraintCap;
};

/// Moment matrix of the exactness constraints: one row per monomial of total
/// degree <= R (depth-first order of for_each_monomial), one column per point.
/// `rhs` receives the analytic standard-normal moments.
Eigen::MatrixXd moment_matrix(const RowMatrix& points, std::size_t R, Vector& rhs);

/// Draws `candidates` standard-normal points and solves the degree-R moment
/// system by NNLS; returns the points with positive weight.
GridQuadrature construct_poly_exact(std::size_t d, std::size_t R, std::size_t candidates, Seed seed,
                                   const PolyExactOptions& options = {});

/// Design matrix and targets for reweighting: M(l, i) = cos(s w_i . (x_l - y_l)),
/// b_l = k(x_l - y_l), with s the kernel's frequency scale.
void reweight_system(const GridQuadrature& candidates, const PairSet& pairs, const GaussianKernel& kernel,
                     Eigen::MatrixXd& M, Vector& b);

/// Minimizes (1/n)|M a - b|^2 + lambda * sum(a) over a >= 0 and keeps the
/// candidates with a > 0. Weights are not renormalized.
GridQuadrature reweight(const GridQuadrature& candidates, const PairSet& pairs, const GaussianKernel& kernel,
                        double lambda);

struct LambdaBisection {
  double lambda = 0.0;
  GridQuadrature grid;
  /// Lower end of the final bracket and its support size (> target unless lambda == 0).
  double lambda_below = 0.0;
  std::size_t nnz_below = 0;
};

/// Bisects lambda on [0, lambda_hi] until the support is at most target_D.
/// lambda_hi <= 0 selects 2 max(M'b) / n, where the solution is empty.
LambdaBisection bisect_lambda(const GridQuadrature& candidates, const PairSet& pairs,
                              const GaussianKernel& kernel, std::size_t target_D, double lambda_hi = 0.0,
                              std::size_t iterations = 30);

}  // namespace qfeat
