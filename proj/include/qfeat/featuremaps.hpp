#pragma once

#include "qfeat/grids.hpp"
#include "qfeat/kernels.hpp"
#include "qfeat/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qfeat {

enum class Method { rff, qmc, dense, sparse, subsampled, poly_exact, reweighted, anova };

/// "rff", "qmc", "dense", "sparse", "subsampled", "poly-exact", "reweighted", "anova".
std::string_view method_name(Method m);
/// Accepts the names above, with '_' in place of '-' as well.
Method parse_method(std::string_view name);

/// A quadrature over the unit spectrum packaged with a bandwidth. Frequencies
/// used for evaluation are sqrt(2 gamma) times the grid points.
class FeatureMap {
 public:
  FeatureMap(GridQuadrature grid, Method method, double gamma);

  const GridQuadrature& grid() const { return grid_; }
  Method method() const { return method_; }
  double gamma() const { return gamma_; }
  std::size_t dim() const { return grid_.dim(); }
  std::size_t count() const { return grid_.count(); }
  /// Scaled frequencies, one per row.
  const RowMatrix& frequencies() const { return freq_; }

  /// sum_i a_i cos(w_i . u)
  double approx_kernel(std::span<const double> u) const;
  double approx_kernel(std::span<const double> x, std::span<const double> y) const;

  /// [sqrt(a_i) cos(w_i . x)]_i followed by [sqrt(a_i) sin(w_i . x)]_i.
  /// Throws UnsupportedEmbedding for rules with negative weights.
  Vector embed(std::span<const double> x) const;
  /// Row-wise embed of an n x d matrix.
  RowMatrix embed(const RowMatrix& X) const;

 private:
  void require_nonnegative() const;

  GridQuadrature grid_;
  Method method_;
  double gamma_;
  RowMatrix freq_;
  Vector sqrt_w_;
};

inline double approx_kernel(const FeatureMap& fm, std::span<const double> x, std::span<const double> y) {
  return fm.approx_kernel(x, y);
}

inline Vector embed(const FeatureMap& fm, std::span<const double> x) { return fm.embed(x); }

/// D standard-normal frequencies, weight 1/D each.
FeatureMap rff(std::size_t d, std::size_t D, double gamma, Seed seed);

inline constexpr std::size_t kMaxHaltonDim = 1000;

/// First `count` primes.
std::vector<unsigned> first_primes(std::size_t count);
/// Van der Corput radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, unsigned base);
/// Standard normal quantile: rational approximation plus one Halley step.
double inverse_normal_cdf(double p);

/// First D Halton points (index from 1, bases = first d primes) pushed through
/// the normal quantile, weight 1/D each.
FeatureMap qmc_halton(std::size_t d, std::size_t D, double gamma);

inline constexpr std::size_t kMaxFastValues = 64;

struct FastEmbedding {
  RowMatrix features;
  bool used_fast = false;  // false when the distinct-value cap forced the plain path
  std::size_t distinct_values = 0;  // total distinct frequency values over all coordinates
};

/// Embedding that multiplies each data column only by the distinct frequency
/// values of that coordinate and assembles w_i . x from the products. Equals
/// embed() row-wise.
FastEmbedding embed_grid_fast(const FeatureMap& fm, const RowMatrix& X);

/// Feature map for a sparse ANOVA kernel: one sub-map per subset, applied to
/// the restricted coordinates.
class AnovaFeatureMap {
 public:
  struct Part {
    std::vector<std::size_t> subset;
    FeatureMap map;
  };

  AnovaFeatureMap(std::size_t dim, std::vector<Part> parts);

  std::size_t dim() const { return dim_; }
  const std::vector<Part>& parts() const { return parts_; }
  std::size_t feature_length() const;

  double approx_kernel(std::span<const double> x, std::span<const double> y) const;
  /// Per-part approximations, in subset order.
  std::vector<double> part_approx(std::span<const double> x, std::span<const double> y) const;
  Vector embed(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::vector<Part> parts_;
};

/// Builds a sub-map for a subset: (subset dimension, D_S, subset index) -> map.
using SubmapFactory = std::function<FeatureMap(std::size_t, std::size_t, std::size_t)>;

AnovaFeatureMap anova_compose(const AnovaKernel& k, const SubmapFactory& make, std::size_t D_per_subset);

// Serialization: grid JSON {"d","D","points","weights","nonnegative","provenance"}
// plus {"method","gamma"} for feature maps.
std::string grid_to_json(const GridQuadrature& g);
GridQuadrature grid_from_json(const std::string& text);
std::string feature_map_to_json(const FeatureMap& fm);
FeatureMap feature_map_from_json(const std::string& text);
std::string anova_map_to_json(const AnovaFeatureMap& fm);
AnovaFeatureMap anova_map_from_json(const std::string& text);

}  // namespace qfeat
