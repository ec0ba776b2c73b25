#include "qfeat/bounds.hpp"

#include "qfeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qfeat {

double subgaussian_parameter(double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("subgaussian_parameter: gamma must be positive");
  return std::sqrt(2.0 * gamma);
}

double poly_bound(double b, double M, unsigned R) {
  if (R < 2 || R % 2 != 0) throw ArgumentError("poly_bound: R must be even and at least 2");
  if (!(b > 0.0) || !(M >= 0.0)) throw ArgumentError("poly_bound: need b > 0 and M >= 0");
  const double base = std::numbers::e * b * b * M * M / R;
  return 3.0 * std::pow(base, 0.5 * R);
}

std::optional<double> sparse_bound(double b, double M, unsigned A, std::size_t d) {
  if (!(b > 0.0) || !(M >= 0.0)) throw ArgumentError("sparse_bound: need b > 0 and M >= 0");
  const double scale = std::numbers::e * b * b * M * M;
  if (static_cast<double>(A) < 24.0 * scale) return std::nullopt;
  if (M == 0.0) return 0.0;
  return std::pow(2.0, static_cast<double>(d)) * std::pow(12.0 * scale / A, static_cast<double>(A));
}

BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

Counts counts(std::size_t d, std::size_t R, std::size_t A, std::size_t L) {
  Counts c;
  c.poly_constraints = binomial(d + R, d);
  c.dense_points = boost::multiprecision::pow(BigInt(L), static_cast<unsigned>(d));
  c.sparse_point_bound = boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(A)) * binomial(d + A, A);
  return c;
}

}  // namespace qfeat
