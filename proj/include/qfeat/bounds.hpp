#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <optional>

namespace qfeat {

using BigInt = boost::multiprecision::cpp_int;

/// Subgaussian parameter of the spectrum of exp(-gamma |u|^2): sqrt(2 gamma).
double subgaussian_parameter(double gamma);

/// Max-error bound for a nonnegative rule exact to even degree R over a region
/// of diameter M: 3 (e b^2 M^2 / R)^(R/2). Throws ArgumentError for odd R or R < 2.
double poly_bound(double b, double M, unsigned R);

/// Sparse-grid bound 2^d (12 e b^2 M^2 / A)^A. Empty when A < 24 e b^2 M^2,
/// where the bound does not apply.
std::optional<double> sparse_bound(double b, double M, unsigned A, std::size_t d);

struct Counts {
  BigInt poly_constraints;   // C(d + R, d)
  BigInt dense_points;       // L^d
  BigInt sparse_point_bound; // 3^A C(d + A, A)
};

BigInt binomial(std::size_t n, std::size_t k);
Counts counts(std::size_t d, std::size_t R, std::size_t A, std::size_t L);

}  // namespace qfeat
