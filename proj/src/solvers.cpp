#include "qfeat/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qfeat {

namespace {

// Passive columns of M with their Gram matrix and its Cholesky factor, both
// kept in insertion order. Appends extend the factor by one row; removals
// refactor.
class PassiveSet {
 public:
  PassiveSet(const Eigen::MatrixXd& M, std::size_t capacity)
      : M_(M), gram_(capacity, capacity), chol_(capacity, capacity) {}

  std::size_t size() const { return cols_.size(); }
  const std::vector<std::size_t>& columns() const { return cols_; }

  // False when column t is numerically dependent on the current set.
  bool append(std::size_t t) {
    const auto k = static_cast<Eigen::Index>(cols_.size());
    if (k >= gram_.rows()) return false;
    const auto col_t = M_.col(static_cast<Eigen::Index>(t));
    const double c = col_t.squaredNorm();
    if (!(c > 0.0)) return false;
    Vector g(k);
    for (Eigen::Index j = 0; j < k; ++j) g[j] = M_.col(static_cast<Eigen::Index>(cols_[j])).dot(col_t);
    Vector l = g;
    if (k > 0) chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
    const double schur = c - l.squaredNorm();
    if (!(schur > kDependence * c)) return false;
    gram_.block(k, 0, 1, k) = g.transpose();
    gram_.block(0, k, k, 1) = g;
    gram_(k, k) = c;
    chol_.block(k, 0, 1, k) = l.transpose();
    chol_(k, k) = std::sqrt(schur);
    cols_.push_back(t);
    return true;
  }

  // Removes the passive positions flagged in `drop`.
  void remove(const std::vector<bool>& drop) {
    std::vector<Eigen::Index> keep;
    for (std::size_t q = 0; q < cols_.size(); ++q)
      if (!drop[q]) keep.push_back(static_cast<Eigen::Index>(q));
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd g(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index s = 0; s < k; ++s) g(r, s) = gram_(keep[r], keep[s]);
    std::vector<std::size_t> cols;
    for (Eigen::Index q : keep) cols.push_back(cols_[static_cast<std::size_t>(q)]);
    cols_ = std::move(cols);
    gram_.topLeftCorner(k, k) = g;
    refactor();
  }

  // Solves G_PP z = rhs with one step of iterative refinement.
  Vector solve(const Vector& rhs) const {
    Vector z = solve_once(rhs);
    const auto k = static_cast<Eigen::Index>(cols_.size());
    const Vector r = rhs - gram_.topLeftCorner(k, k).selfadjointView<Eigen::Lower>() * z;
    z += solve_once(r);
    return z;
  }

 private:
  static constexpr double kDependence = 1e-11;

  Vector solve_once(const Vector& rhs) const {
    const auto k = static_cast<Eigen::Index>(cols_.size());
    Vector z = rhs;
    const auto L = chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    L.solveInPlace(z);
    L.transpose().solveInPlace(z);
    return z;
  }

  void refactor() {
    const auto k = static_cast<Eigen::Index>(cols_.size());
    if (k == 0) return;
    Eigen::LLT<Eigen::MatrixXd> llt(gram_.topLeftCorner(k, k));
    chol_.topLeftCorner(k, k) = llt.matrixL();
  }

  const Eigen::MatrixXd& M_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd chol_;
  std::vector<std::size_t> cols_;
};

NnlsSolution package(const Eigen::MatrixXd& M, const Vector& b, Vector a, std::size_t iterations,
                     std::vector<double> log) {
  NnlsSolution s;
  s.residual_norm = (M * a - b).norm();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] == 0.0) s.active_set.push_back(static_cast<std::size_t>(i));
  s.a = std::move(a);
  s.iterations = iterations;
  s.objective_log = std::move(log);
  return s;
}

}  // namespace

double nnls_objective(const Eigen::MatrixXd& M, const Vector& b, const Vector& a, double shift) {
  return 0.5 * (M * a - b).squaredNorm() + shift * a.sum();
}

NnlsSolution nnls(const Eigen::MatrixXd& M, const Vector& b, const NnlsOptions& options) {
  const Eigen::Index n = M.rows();
  const Eigen::Index p = M.cols();
  if (n < 1 || p < 1) throw ArgumentError("nnls: matrix must be non-empty");
  if (b.size() != n) throw ArgumentError("nnls: right-hand side length differs from row count");
  if (!(options.tol > 0.0)) throw ArgumentError("nnls: tol must be positive");
  if (!M.allFinite() || !b.allFinite()) throw ArgumentError("nnls: non-finite input");
  const std::size_t cap = options.max_iterations > 0 ? options.max_iterations : 3 * static_cast<std::size_t>(p);
  const double shift = options.l1_shift;

  const Vector mtb = M.transpose() * b;
  const Vector h = mtb.array() - shift;
  const double scale = mtb.norm() > 0.0 ? mtb.norm() : 1.0;
  const double threshold = options.tol * scale;

  Vector a = Vector::Zero(p);
  Vector w = h;
  std::vector<double> log{0.5 * b.squaredNorm()};
  std::vector<char> passive(static_cast<std::size_t>(p), 0);
  std::vector<char> blocked(static_cast<std::size_t>(p), 0);
  PassiveSet P(M, static_cast<std::size_t>(std::min(n, p)));
  std::size_t iterations = 0;

  while (true) {
    Eigen::Index t = -1;
    double best = threshold;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!passive[ju] && !blocked[ju] && w[j] > best) {
        best = w[j];
        t = j;
      }
    }
    if (t < 0) break;
    if (iterations >= cap) throw NnlsNotConverged(iterations, package(M, b, a, iterations, log));

    const auto tu = static_cast<std::size_t>(t);
    if (!P.append(tu)) {
      blocked[tu] = 1;
      continue;
    }
    ++iterations;
    passive[tu] = 1;

    bool degenerate = false;
    for (bool first = true;; first = false) {
      const auto& cols = P.columns();
      const auto k = static_cast<Eigen::Index>(cols.size());
      Vector hp(k), ap(k);
      for (Eigen::Index q = 0; q < k; ++q) {
        hp[q] = h[static_cast<Eigen::Index>(cols[static_cast<std::size_t>(q)])];
        ap[q] = a[static_cast<Eigen::Index>(cols[static_cast<std::size_t>(q)])];
      }
      const Vector z = P.solve(hp);
      if (first && z[k - 1] <= 0.0) {
        // Round-off made the entering column unattractive; back it out.
        std::vector<bool> drop(cols.size(), false);
        drop.back() = true;
        passive[tu] = 0;
        blocked[tu] = 1;
        P.remove(drop);
        degenerate = true;
        break;
      }
      if (z.minCoeff() > 0.0) {
        for (Eigen::Index q = 0; q < k; ++q) a[static_cast<Eigen::Index>(cols[static_cast<std::size_t>(q)])] = z[q];
        break;
      }
      double alpha = 1.0;
      Eigen::Index hit = -1;
      for (Eigen::Index q = 0; q < k; ++q) {
        if (z[q] <= 0.0) {
          const double ratio = ap[q] / (ap[q] - z[q]);
          if (hit < 0 || ratio < alpha) {
            alpha = ratio;
            hit = q;
          }
        }
      }
      std::vector<bool> drop(cols.size(), false);
      for (Eigen::Index q = 0; q < k; ++q) {
        double v = ap[q] + alpha * (z[q] - ap[q]);
        if (q == hit || v <= 0.0) {
          v = 0.0;
          drop[static_cast<std::size_t>(q)] = true;
          passive[cols[static_cast<std::size_t>(q)]] = 0;
        }
        a[static_cast<Eigen::Index>(cols[static_cast<std::size_t>(q)])] = v;
      }
      P.remove(drop);
    }
    if (degenerate) continue;

    std::fill(blocked.begin(), blocked.end(), 0);
    Vector r = b;
    for (std::size_t c : P.columns()) r -= a[static_cast<Eigen::Index>(c)] * M.col(static_cast<Eigen::Index>(c));
    w.noalias() = M.transpose() * r;
    w.array() -= shift;
    log.push_back(0.5 * r.squaredNorm() + shift * a.sum());
  }
  return package(M, b, std::move(a), iterations, std::move(log));
}

Eigen::MatrixXd moment_matrix(const RowMatrix& points, std::size_t R, Vector& rhs) {
  const double rows = monomial_count(static_cast<std::size_t>(points.cols()), R);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), points.rows());
  rhs.resize(static_cast<Eigen::Index>(rows));
  Eigen::Index row = 0;
  for_each_monomial(points, R, [&](const SparseMonomial& r, const Vector& values) {
    M.row(row) = values.transpose();
    rhs[row] = monomial_moment(r);
    ++row;
  });
  return M;
}

GridQuadrature construct_poly_exact(std::size_t d, std::size_t R, std::size_t candidates, Seed seed,
                                   const PolyExactOptions& options) {
  if (d < 1 || candidates < 1) throw ArgumentError("construct_poly_exact: d and candidate count must be positive");
  if (R % 2 != 0) throw ArgumentError("construct_poly_exact: degree R must be even");
  const double constraints = monomial_count(d, R);
  if (constraints > options.constraint_cap)
    throw SizeError("construct_poly_exact: constraints", constraints, options.constraint_cap);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix pts(static_cast<Eigen::Index>(candidates), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = normal(rng);

  Vector rhs;
  const Eigen::MatrixXd M = moment_matrix(pts, R, rhs);
  NnlsOptions opt;
  opt.tol = 1e-13;
  const NnlsSolution sol = nnls(M, rhs, opt);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < sol.a.size(); ++i)
    if (sol.a[i] > 0.0) keep.push_back(i);
  RowMatrix kept(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(d));
  Vector w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept.row(static_cast<Eigen::Index>(k)) = pts.row(keep[k]);
    w[static_cast<Eigen::Index>(k)] = sol.a[keep[k]];
  }
  if (keep.empty()) throw ConstructionFailed("construct_poly_exact: empty solution", sol.residual_norm);
  GridQuadrature g(std::move(kept), std::move(w));
  const double residual = exactness_residual(g, R, options.constraint_cap);
  if (residual > options.exactness_tol)
    throw ConstructionFailed("construct_poly_exact: moment constraints not met; raise the candidate count",
                             residual);
  std::ostringstream prov;
  prov << "poly-exact d=" << d << " R=" << R << " candidates=" << candidates << " seed=" << seed
       << " residual=" << residual;
  g.set_provenance(prov.str());
  return g;
}

void reweight_system(const GridQuadrature& candidates, const PairSet& pairs, const GaussianKernel& kernel,
                     Eigen::MatrixXd& M, Vector& b) {
  if (pairs.size() < 1) throw ArgumentError("reweight: at least one pair required");
  if (static_cast<std::size_t>(pairs.dim()) != candidates.dim() || pairs.x.rows() != pairs.y.rows() ||
      pairs.x.cols() != pairs.y.cols())
    throw ArgumentError("reweight: pair dimension differs from candidate dimension");
  const RowMatrix u = pairs.x - pairs.y;
  M.noalias() = u * (kernel.frequency_scale() * candidates.points()).transpose();
  M = M.array().cos().matrix();
  b.resize(u.rows());
  for (Eigen::Index l = 0; l < u.rows(); ++l) b[l] = kernel(row_span(u, l));
}

namespace {

GridQuadrature restrict_support(const GridQuadrature& candidates, const Vector& a, double lambda) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] > 0.0) keep.push_back(i);
  RowMatrix pts(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(candidates.dim()));
  Vector w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = candidates.points().row(keep[k]);
    w[static_cast<Eigen::Index>(k)] = a[keep[k]];
  }
  std::ostringstream prov;
  prov << "reweighted lambda=" << lambda << " weight_sum=" << w.sum() << " from " << candidates.provenance();
  return GridQuadrature(std::move(pts), std::move(w), prov.str());
}

NnlsSolution solve_reweight(const Eigen::MatrixXd& M, const Vector& b, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("reweight: lambda must be non-negative");
  NnlsOptions opt;
  // (1/n)|Ma - b|^2 + lambda 1'a  ==  (2/n) [1/2 |Ma - b|^2 + (n lambda / 2) 1'a]
  opt.l1_shift = 0.5 * static_cast<double>(M.rows()) * lambda;
  return nnls(M, b, opt);
}

}  // namespace

GridQuadrature reweight(const GridQuadrature& candidates, const PairSet& pairs, const GaussianKernel& kernel,
                        double lambda) {
  Eigen::MatrixXd M;
  Vector b;
  reweight_system(candidates, pairs, kernel, M, b);
  return restrict_support(candidates, solve_reweight(M, b, lambda).a, lambda);
}

LambdaBisection bisect_lambda(const GridQuadrature& candidates, const PairSet& pairs,
                              const GaussianKernel& kernel, std::size_t target_D, double lambda_hi,
                              std::size_t iterations) {
  if (target_D < 1) throw ArgumentError("bisect_lambda: target_D must be positive");
  Eigen::MatrixXd M;
  Vector b;
  reweight_system(candidates, pairs, kernel, M, b);
  const double n = static_cast<double>(M.rows());

  NnlsSolution lo_sol = solve_reweight(M, b, 0.0);
  if (lo_sol.nonzeros() <= target_D)
    return {0.0, restrict_support(candidates, lo_sol.a, 0.0), 0.0, lo_sol.nonzeros()};

  double lo = 0.0;
  double hi = lambda_hi > 0.0 ? lambda_hi : 2.0 * (M.transpose() * b).maxCoeff() / n;
  NnlsSolution hi_sol = solve_reweight(M, b, hi);
  while (hi_sol.nonzeros() > target_D) {
    lo = hi;
    lo_sol = std::move(hi_sol);
    hi *= 2.0;
    hi_sol = solve_reweight(M, b, hi);
  }
  for (std::size_t it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    NnlsSolution s = solve_reweight(M, b, mid);
    if (s.nonzeros() <= target_D) {
      hi = mid;
      hi_sol = std::move(s);
    } else {
      lo = mid;
      lo_sol = std::move(s);
    }
  }
  return {hi, restrict_support(candidates, hi_sol.a, hi), lo, lo_sol.nonzeros()};
}

}  // namespace qfeat
