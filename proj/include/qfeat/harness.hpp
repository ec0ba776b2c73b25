#pragma once

#include "qfeat/featuremaps.hpp"
#include "qfeat/kernels.hpp"
#include "qfeat/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qfeat {

/// Mixes a master seed with a stream index (splitmix64 finalizer).
Seed derive_seed(Seed master, std::uint64_t stream);

struct ErrorReport {
  std::string method;
  std::size_t d = 0;
  std::size_t D = 0;
  double gamma = 0.5;
  double M = 0.0;
  double max_err = 0.0;
  double rms_err = 0.0;
  std::size_t n_eval = 0;
  Seed seed = 0;
  std::int64_t build_ms = 0;
  std::int64_t embed_ms = 0;
};

/// "method,d,D,gamma,M,max_err,rms_err,n_eval,seed,build_ms,embed_ms"
const std::string& report_csv_header();
std::string report_csv_row(const ErrorReport& r);
std::string reports_to_csv(const std::vector<ErrorReport>& rows);

struct Dataset {
  RowMatrix rows;
  std::string source;
  bool had_header = false;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

/// Comma-separated reals; a first row that does not parse as numbers is
/// treated as a header. Ragged rows and bad cells raise ParseError with the line.
Dataset parse_csv(const std::string& text, std::string source = "<memory>");
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const RowMatrix& m);
std::string matrix_to_csv(const RowMatrix& m);

/// n pairs of distinct rows, indices uniform with replacement.
PairSet sample_pairs(const Dataset& ds, std::size_t n, Seed seed);

/// Mixture of `components` unit-covariance Gaussians whose means are the
/// vertices of a regular simplex with edge `side`.
Dataset gaussian_mixture(std::size_t n, std::size_t d, std::size_t components, double side, Seed seed);

/// Displacements u = t * M * v with v uniform on the unit sphere and t uniform
/// on [0, 1]. Stored unscaled so every diameter reuses the same draws.
struct DisplacementSample {
  RowMatrix directions;
  Vector fractions;
};
DisplacementSample sample_displacements(std::size_t d, std::size_t n, Seed seed);

/// max |k(u) - k~(u)| over n displacements with |u| <= M.
double max_error_empirical(const FeatureMap& fm, const GaussianKernel& k, double M, std::size_t n, Seed seed);

struct ErrorPoint {
  double M = 0.0;
  double max_err = 0.0;  // running max over the sample sets of all diameters <= M
  double rms_err = 0.0;  // over this diameter's own sample set
};

/// Errors at several diameters from one set of draws. Because every diameter's
/// samples lie inside the larger balls, max_err is accumulated so that it is
/// non-decreasing in M. Output is ordered as `diameters`.
std::vector<ErrorPoint> error_curve(const FeatureMap& fm, const GaussianKernel& k,
                                    std::span<const double> diameters, std::size_t n, Seed seed);

/// Same measurement for an arbitrary approximation of a function of u.
using DisplacementFn = std::function<double(std::span<const double>)>;
std::vector<ErrorPoint> error_curve(const DisplacementFn& exact, const DisplacementFn& approx, std::size_t d,
                                    std::span<const double> diameters, std::size_t n, Seed seed);

double rms_error(const FeatureMap& fm, const GaussianKernel& k, const PairSet& pairs);
double max_error_pairs(const FeatureMap& fm, const GaussianKernel& k, const PairSet& pairs);

struct ReweightSetup {
  std::size_t L = 8;            // per-dimension Hermite points of the dense grid the pool is drawn from
  std::size_t pool_factor = 4;  // candidate pool D' = pool_factor * target D
  std::size_t pairs = 500;
  double lambda = -1.0;         // < 0: bisect lambda to reach the target; >= 0: fixed lambda
  std::size_t bisect_iterations = 30;
  bool refit = true;            // re-solve with lambda = 0 on the support chosen by the l1 penalty
};

/// Data-reweighted map: pool from the subsampled dense grid, pairs from `train`.
FeatureMap build_reweighted(const Dataset& train, const GaussianKernel& k, std::size_t target_D, Seed seed,
                            const ReweightSetup& setup = {});

/// Reweighted map per ANOVA subset: each sub-map is fitted on the dataset
/// restricted to its subset, with `D_per_subset` target points.
AnovaFeatureMap build_reweighted_anova(const Dataset& train, const AnovaKernel& k, std::size_t D_per_subset,
                                       Seed seed, const ReweightSetup& setup = {});

/// Sweep configuration (JSON object). Keys:
///   methods [str], d int, gamma real, D [int], M [real], seeds [int], n_eval int,
///   L int, level int, degree int, data str, pairs int, lambda real, pool_factor int,
///   bisect_iterations int. For reweighted cells each D is the target support size.
struct SweepConfig {
  std::vector<Method> methods;
  std::size_t d = 0;
  double gamma = 0.5;
  std::vector<std::size_t> D;
  std::vector<double> M;
  std::vector<Seed> seeds{0};
  std::size_t n_eval = 100000;
  std::size_t L = 8;
  std::size_t level = 2;
  std::size_t degree = 2;
  std::string data;
  ReweightSetup reweight;
};

SweepConfig parse_sweep_config(const std::string& json_text);

struct BuildParams {
  Method method = Method::rff;
  std::size_t d = 0;
  std::size_t D = 0;
  std::size_t L = 8;
  std::size_t level = 2;
  std::size_t degree = 2;
  double gamma = 0.5;
  Seed seed = 0;
  const Dataset* data = nullptr;  // required for reweighted
  ReweightSetup reweight;
};

/// Constructs one feature map from parameters (shared by the CLI and sweeps).
FeatureMap build_feature_map(const BuildParams& p);

/// One report row per (method, D, seed, M). Deterministic apart from timings.
std::vector<ErrorReport> sweep(const SweepConfig& config);

}  // namespace qfeat
