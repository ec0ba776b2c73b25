#include "qfeat/quad1d.hpp"

#include "qfeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qfeat {

TridiagEigen sym_tridiag_eigen(const SymTriDiag& m, double tol, bool want_vectors) {
  const int n = static_cast<int>(m.size());
  if (n < 1) throw ArgumentError("sym_tridiag_eigen: empty matrix");
  if (m.off_diagonal.size() != static_cast<std::size_t>(n - 1))
    throw ArgumentError("sym_tridiag_eigen: off-diagonal must have n-1 entries");
  if (!(tol > 0.0)) throw ArgumentError("sym_tridiag_eigen: tol must be positive");
  for (double v : m.off_diagonal)
    if (!std::isfinite(v)) throw ArgumentError("sym_tridiag_eigen: non-finite off-diagonal entry");

  std::vector<double> d = m.diagonal;
  std::vector<double> e(n, 0.0);
  std::copy(m.off_diagonal.begin(), m.off_diagonal.end(), e.begin());

  // z holds `rows` rows of the accumulated rotation matrix, row-major n columns.
  const int rows = want_vectors ? n : 1;
  std::vector<double> z(static_cast<std::size_t>(rows) * n, 0.0);
  for (int r = 0; r < rows; ++r) z[static_cast<std::size_t>(r) * n + r] = 1.0;

  const std::size_t cap = 100 * static_cast<std::size_t>(n);
  std::size_t sweeps = 0;

  for (int l = 0; l < n; ++l) {
    int mm;
    do {
      for (mm = l; mm < n - 1; ++mm) {
        const double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
        if (std::abs(e[mm]) <= tol * dd || e[mm] == 0.0) break;
      }
      if (mm == l) break;
      if (++sweeps > cap)
        throw ConvergenceError("sym_tridiag_eigen: QL iteration did not converge", sweeps - 1);

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i;
      bool underflow = false;
      for (i = mm - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[mm] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (int k = 0; k < rows; ++k) {
          double* zk = z.data() + static_cast<std::size_t>(k) * n;
          f = zk[i + 1];
          zk[i + 1] = s * zk[i] + c * f;
          zk[i] = c * zk[i] - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[mm] = 0.0;
    } while (mm != l);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagEigen out;
  out.eigenvalues.reserve(n);
  out.first_components.reserve(n);
  for (int k : order) {
    out.eigenvalues.push_back(d[k]);
    out.first_components.push_back(z[k]);
  }
  if (want_vectors) {
    out.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int col = 0; col < n; ++col)
      for (int row = 0; row < n; ++row)
        out.vectors[static_cast<std::size_t>(col) * n + row] =
            z[static_cast<std::size_t>(row) * n + order[col]];
  }
  return out;
}

QuadratureRule1D::QuadratureRule1D(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.empty() || nodes_.size() != weights_.size())
    throw ArgumentError("QuadratureRule1D: nodes and weights must be non-empty and equal length");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!(weights_[i] > 0.0)) throw ArgumentError("QuadratureRule1D: weights must be positive");
    if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
      throw ArgumentError("QuadratureRule1D: nodes must be strictly increasing");
  }
}

namespace {

// Orthonormal probabilists' Hermite polynomials p_0..p_L at x. Returns p_L and
// p_{L-1}, and sum_{k<L} p_k(x)^2.
struct HermiteEval {
  double p_last;
  double p_prev;
  double christoffel_sum;
};

HermiteEval eval_orthonormal_hermite(std::size_t L, double x) {
  double prev = 0.0;
  double cur = 1.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    sum += cur * cur;
    const double next =
        (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {cur, prev, sum};
}

}  // namespace

QuadratureRule1D gauss_hermite(std::size_t points) {
  if (points < 1 || points > kMaxHermitePoints)
    throw ArgumentError("gauss_hermite: point count must be in 1.." +
                        std::to_string(kMaxHermitePoints) + ", got " + std::to_string(points));
  const std::size_t L = points;

  SymTriDiag jacobi;
  jacobi.diagonal.assign(L, 0.0);
  for (std::size_t k = 1; k < L; ++k) jacobi.off_diagonal.push_back(std::sqrt(static_cast<double>(k)));
  std::vector<double> x = sym_tridiag_eigen(jacobi).eigenvalues;

  // Newton polish on the nodes, then Christoffel weights 1 / sum p_k(x)^2. The
  // squared eigenvector components lose relative accuracy in the tails, which
  // matters for high-degree moments.
  std::vector<double> w(L);
  const double sqrtL = std::sqrt(static_cast<double>(L));
  for (std::size_t i = 0; i < L; ++i) {
    for (int it = 0; it < 2; ++it) {
      const HermiteEval h = eval_orthonormal_hermite(L, x[i]);
      if (h.p_prev == 0.0) break;
      x[i] -= h.p_last / (sqrtL * h.p_prev);
    }
    w[i] = 1.0 / eval_orthonormal_hermite(L, x[i]).christoffel_sum;
  }

  // Exact mirror symmetry about zero.
  for (std::size_t i = 0; i < L / 2; ++i) {
    const std::size_t j = L - 1 - i;
    const double node = 0.5 * (x[j] - x[i]);
    const double weight = 0.5 * (w[i] + w[j]);
    x[i] = -node;
    x[j] = node;
    w[i] = w[j] = weight;
  }
  if (L % 2 == 1) x[L / 2] = 0.0;

  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& wi : w) wi /= total;
  return QuadratureRule1D(std::move(x), std::move(w));
}

QuadratureRule1D gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta) {
  const std::size_t L = alpha.size();
  if (L < 1 || beta.size() != L - 1)
    throw ArgumentError("gauss_from_recurrence: need L alpha and L-1 beta coefficients");
  SymTriDiag jacobi;
  jacobi.diagonal.assign(alpha.begin(), alpha.end());
  for (double b : beta) {
    if (!(b > 0.0)) throw ArgumentError("gauss_from_recurrence: beta coefficients must be positive");
    jacobi.off_diagonal.push_back(std::sqrt(b));
  }
  TridiagEigen eig = sym_tridiag_eigen(jacobi);
  std::vector<double> w(L);
  for (std::size_t i = 0; i < L; ++i) w[i] = eig.first_components[i] * eig.first_components[i];
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& wi : w) wi /= total;
  return QuadratureRule1D(std::move(eig.eigenvalues), std::move(w));
}

double normal_moment(unsigned p) {
  if (p % 2 == 1) return 0.0;
  double m = 1.0;
  for (unsigned k = p; k > 1; k -= 2) m *= static_cast<double>(k - 1);
  return m;
}

}  // namespace qfeat
