#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qfeat {

/// Product Gaussian kernel k(u) = exp(-gamma * |u|^2). gamma = 1/2 matches the
/// standard normal spectrum; other bandwidths scale the spectrum by sqrt(2 gamma).
class GaussianKernel {
 public:
  explicit GaussianKernel(double gamma = 0.5);

  double gamma() const { return gamma_; }
  /// Scale applied to unit-spectrum frequencies.
  double frequency_scale() const;

  double operator()(std::span<const double> u) const;
  double operator()(std::span<const double> x, std::span<const double> y) const;
  /// One-dimensional factor k_1(t).
  double factor(double t) const;

 private:
  double gamma_;
};

struct AnovaStats {
  std::size_t rank;    // max |S|
  std::size_t degree;  // max number of subsets containing one index
  std::size_t size;    // number of subsets
};

/// Sparse ANOVA kernel: sum over subsets S of prod_{i in S} k_1(x_i - y_i).
/// Subsets are stored 0-based, sorted, without duplicates.
class AnovaKernel {
 public:
  AnovaKernel(std::size_t dim, std::vector<std::vector<std::size_t>> subsets, GaussianKernel base);

  std::size_t dim() const { return dim_; }
  const std::vector<std::vector<std::size_t>>& subsets() const { return subsets_; }
  const GaussianKernel& base() const { return base_; }

  double operator()(std::span<const double> x, std::span<const double> y) const;
  AnovaStats stats() const;

 private:
  std::size_t dim_;
  std::vector<std::vector<std::size_t>> subsets_;
  GaussianKernel base_;
};

inline double eval_gaussian(const GaussianKernel& k, std::span<const double> u) { return k(u); }

inline double eval_anova(const AnovaKernel& k, std::span<const double> x, std::span<const double> y) {
  return k(x, y);
}

inline AnovaStats anova_stats(const AnovaKernel& k) { return k.stats(); }

/// ANOVA structure file: {"d": int, "gamma": real, "subsets": [[int, ...], ...]}
/// with 1-based indices.
AnovaKernel anova_from_json(const std::string& text);
AnovaKernel load_anova(const std::filesystem::path& path);
std::string anova_to_json(const AnovaKernel& k);

}  // namespace qfeat
