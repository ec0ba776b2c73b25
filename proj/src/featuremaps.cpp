#include "qfeat/featuremaps.hpp"

#include "qfeat/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace qfeat {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::rff: return "rff";
    case Method::qmc: return "qmc";
    case Method::dense: return "dense";
    case Method::sparse: return "sparse";
    case Method::subsampled: return "subsampled";
    case Method::poly_exact: return "poly-exact";
    case Method::reweighted: return "reweighted";
    case Method::anova: return "anova";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  for (Method m : {Method::rff, Method::qmc, Method::dense, Method::sparse, Method::subsampled,
                   Method::poly_exact, Method::reweighted, Method::anova})
    if (method_name(m) == s) return m;
  throw ArgumentError("unknown method '" + std::string(name) + "'");
}

FeatureMap::FeatureMap(GridQuadrature grid, Method method, double gamma)
    : grid_(std::move(grid)), method_(method), gamma_(gamma) {
  const GaussianKernel k(gamma);  // validates gamma
  freq_ = k.frequency_scale() * grid_.points();
  if (grid_.nonnegative()) sqrt_w_ = grid_.weights().array().sqrt();
}

double FeatureMap::approx_kernel(std::span<const double> u) const {
  if (u.size() != dim()) throw ArgumentError("approx_kernel: dimension mismatch");
  const auto& w = grid_.weights();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < freq_.rows(); ++i) {
    const double* f = freq_.data() + i * freq_.cols();
    double proj = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) proj += f[j] * u[j];
    sum += w[i] * std::cos(proj);
  }
  return sum;
}

double FeatureMap::approx_kernel(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim() || y.size() != dim()) throw ArgumentError("approx_kernel: dimension mismatch");
  std::vector<double> u(x.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = x[j] - y[j];
  return approx_kernel(u);
}

void FeatureMap::require_nonnegative() const {
  if (!grid_.nonnegative())
    throw UnsupportedEmbedding("embed: rule has negative weights; use approx_kernel instead");
}

Vector FeatureMap::embed(std::span<const double> x) const {
  require_nonnegative();
  if (x.size() != dim()) throw ArgumentError("embed: dimension mismatch");
  const Eigen::Index D = freq_.rows();
  Vector z(2 * D);
  for (Eigen::Index i = 0; i < D; ++i) {
    const double* f = freq_.data() + i * freq_.cols();
    double proj = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) proj += f[j] * x[j];
    z[i] = sqrt_w_[i] * std::cos(proj);
    z[D + i] = sqrt_w_[i] * std::sin(proj);
  }
  return z;
}

RowMatrix FeatureMap::embed(const RowMatrix& X) const {
  require_nonnegative();
  if (static_cast<std::size_t>(X.cols()) != dim()) throw ArgumentError("embed: dimension mismatch");
  RowMatrix Z(X.rows(), 2 * freq_.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) Z.row(r) = embed(row_span(X, r)).transpose();
  return Z;
}

FeatureMap rff(std::size_t d, std::size_t D, double gamma, Seed seed) {
  if (d < 1 || D < 1) throw ArgumentError("rff: d and D must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RowMatrix pts(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = normal(rng);
  Vector w = Vector::Constant(static_cast<Eigen::Index>(D), 1.0 / static_cast<double>(D));
  return FeatureMap(GridQuadrature(std::move(pts), std::move(w), "rff D=" + std::to_string(D) +
                                                                      " seed=" + std::to_string(seed)),
                    Method::rff, gamma);
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("inverse_normal_cdf: p must lie in (0, 1)");
  // 1 - p is exact here; the lower tail keeps the Halley residual well conditioned.
  if (p > 0.5) return -inverse_normal_cdf(1.0 - p);
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double low = 0.02425;

  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // Halley step on Phi(x) - p.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

FeatureMap qmc_halton(std::size_t d, std::size_t D, double gamma) {
  if (d < 1 || D < 1) throw ArgumentError("qmc_halton: d and D must be positive");
  if (d > kMaxHaltonDim) throw ArgumentError("qmc_halton: dimension exceeds the prime table");
  const std::vector<unsigned> bases = first_primes(d);
  RowMatrix pts(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < d; ++j)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          inverse_normal_cdf(radical_inverse(i + 1, bases[j]));
  Vector w = Vector::Constant(static_cast<Eigen::Index>(D), 1.0 / static_cast<double>(D));
  return FeatureMap(GridQuadrature(std::move(pts), std::move(w), "qmc-halton D=" + std::to_string(D)),
                    Method::qmc, gamma);
}

FastEmbedding embed_grid_fast(const FeatureMap& fm, const RowMatrix& X) {
  if (!fm.grid().nonnegative())
    throw UnsupportedEmbedding("embed_grid_fast: rule has negative weights; use approx_kernel instead");
  if (static_cast<std::size_t>(X.cols()) != fm.dim()) throw ArgumentError("embed_grid_fast: dimension mismatch");
  const RowMatrix& F = fm.frequencies();
  const Eigen::Index D = F.rows();
  const Eigen::Index d = F.cols();

  // Distinct values per coordinate and, for every frequency entry, the offset
  // of its value in the flattened product table.
  std::vector<std::vector<double>> values(static_cast<std::size_t>(d));
  std::vector<std::size_t> base(static_cast<std::size_t>(d) + 1, 0);
  FastEmbedding out;
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& v = values[static_cast<std::size_t>(j)];
    v.reserve(static_cast<std::size_t>(D));
    for (Eigen::Index i = 0; i < D; ++i) v.push_back(F(i, j));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() > kMaxFastValues) {
      out.features = fm.embed(X);
      out.used_fast = false;
      return out;
    }
    base[static_cast<std::size_t>(j) + 1] = base[static_cast<std::size_t>(j)] + v.size();
  }
  out.distinct_values = base.back();

  std::vector<std::uint32_t> offset(static_cast<std::size_t>(D * d));
  for (Eigen::Index i = 0; i < D; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& v = values[static_cast<std::size_t>(j)];
      const auto pos = std::lower_bound(v.begin(), v.end(), F(i, j)) - v.begin();
      offset[static_cast<std::size_t>(i * d + j)] =
          static_cast<std::uint32_t>(base[static_cast<std::size_t>(j)] + static_cast<std::size_t>(pos));
    }

  const Vector sqrt_w = fm.grid().weights().array().sqrt();
  std::vector<double> products(base.back());
  out.features.resize(X.rows(), 2 * D);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double xj = X(r, j);
      const auto& v = values[static_cast<std::size_t>(j)];
      double* dst = products.data() + base[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < v.size(); ++k) dst[k] = v[k] * xj;
    }
    for (Eigen::Index i = 0; i < D; ++i) {
      const std::uint32_t* off = offset.data() + i * d;
      double proj = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) proj += products[off[j]];
      out.features(r, i) = sqrt_w[i] * std::cos(proj);
      out.features(r, D + i) = sqrt_w[i] * std::sin(proj);
    }
  }
  out.used_fast = true;
  return out;
}

AnovaFeatureMap::AnovaFeatureMap(std::size_t dim, std::vector<Part> parts) : dim_(dim), parts_(std::move(parts)) {
  if (parts_.empty()) throw ArgumentError("AnovaFeatureMap: at least one part required");
  for (const auto& p : parts_) {
    if (p.subset.empty() || p.subset.size() != p.map.dim())
      throw ArgumentError("AnovaFeatureMap: sub-map dimension differs from subset size");
    for (std::size_t i : p.subset)
      if (i >= dim_) throw ArgumentError("AnovaFeatureMap: subset index out of range");
  }
}

std::size_t AnovaFeatureMap::feature_length() const {
  std::size_t n = 0;
  for (const auto& p : parts_) n += 2 * p.map.count();
  return n;
}

std::vector<double> AnovaFeatureMap::part_approx(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim_ || y.size() != dim_) throw ArgumentError("AnovaFeatureMap: dimension mismatch");
  std::vector<double> out;
  out.reserve(parts_.size());
  std::vector<double> u;
  for (const auto& p : parts_) {
    u.resize(p.subset.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = x[p.subset[k]] - y[p.subset[k]];
    out.push_back(p.map.approx_kernel(u));
  }
  return out;
}

double AnovaFeatureMap::approx_kernel(std::span<const double> x, std::span<const double> y) const {
  double total = 0.0;
  for (double v : part_approx(x, y)) total += v;
  return total;
}

Vector AnovaFeatureMap::embed(std::span<const double> x) const {
  if (x.size() != dim_) throw ArgumentError("AnovaFeatureMap: dimension mismatch");
  Vector z(static_cast<Eigen::Index>(feature_length()));
  Eigen::Index at = 0;
  std::vector<double> xs;
  for (const auto& p : parts_) {
    xs.resize(p.subset.size());
    for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = x[p.subset[k]];
    const Vector zs = p.map.embed(xs);
    z.segment(at, zs.size()) = zs;
    at += zs.size();
  }
  return z;
}

AnovaFeatureMap anova_compose(const AnovaKernel& k, const SubmapFactory& make, std::size_t D_per_subset) {
  if (D_per_subset < 1) throw ArgumentError("anova_compose: D per subset must be positive");
  std::vector<AnovaFeatureMap::Part> parts;
  for (std::size_t s = 0; s < k.subsets().size(); ++s) {
    const auto& subset = k.subsets()[s];
    FeatureMap fm = make(subset.size(), D_per_subset, s);
    if (fm.dim() != subset.size())
      throw ArgumentError("anova_compose: constructor returned a map of the wrong dimension");
    if (std::abs(fm.gamma() - k.base().gamma()) > 1e-15 * k.base().gamma())
      throw ArgumentError("anova_compose: sub-map bandwidth differs from the kernel's");
    parts.push_back({subset, std::move(fm)});
  }
  return AnovaFeatureMap(k.dim(), std::move(parts));
}

namespace {

nlohmann::json grid_json(const GridQuadrature& g) {
  nlohmann::json j;
  j["d"] = g.dim();
  j["D"] = g.count();
  auto& pts = j["points"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.count(); ++i) {
    const auto p = g.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["weights"] = std::vector<double>(g.weights().data(), g.weights().data() + g.weights().size());
  j["nonnegative"] = g.nonnegative();
  j["provenance"] = g.provenance();
  return j;
}

nlohmann::json parse(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

GridQuadrature grid_from(const nlohmann::json& j) {
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto& pts = j.at("points");
    const auto ws = j.at("weights").get<std::vector<double>>();
    if (pts.size() != ws.size()) throw ParseError("grid JSON: points and weights differ in length", 0);
    if (j.contains("D") && j.at("D").get<std::size_t>() != ws.size())
      throw ParseError("grid JSON: D does not match the weight count", 0);
    RowMatrix P(static_cast<Eigen::Index>(ws.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto row = pts[i].get<std::vector<double>>();
      if (row.size() != d) throw ParseError("grid JSON: point " + std::to_string(i) + " has wrong dimension", 0);
      for (std::size_t k = 0; k < d; ++k) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    Vector w = Eigen::Map<const Vector>(ws.data(), static_cast<Eigen::Index>(ws.size()));
    return GridQuadrature(std::move(P), std::move(w), j.value("provenance", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what(), 0);
  }
}

nlohmann::json map_json(const FeatureMap& fm) {
  nlohmann::json j = grid_json(fm.grid());
  j["method"] = method_name(fm.method());
  j["gamma"] = fm.gamma();
  return j;
}

FeatureMap map_from(const nlohmann::json& j) {
  try {
    return FeatureMap(grid_from(j), parse_method(j.at("method").get<std::string>()), j.at("gamma").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("feature map JSON: ") + e.what(), 0);
  }
}

}  // namespace

std::string grid_to_json(const GridQuadrature& g) { return grid_json(g).dump(); }
GridQuadrature grid_from_json(const std::string& text) { return grid_from(parse(text, "grid JSON")); }
std::string feature_map_to_json(const FeatureMap& fm) { return map_json(fm).dump(); }
FeatureMap feature_map_from_json(const std::string& text) { return map_from(parse(text, "feature map JSON")); }

std::string anova_map_to_json(const AnovaFeatureMap& fm) {
  nlohmann::json j;
  j["method"] = "anova";
  j["d"] = fm.dim();
  auto& parts = j["parts"] = nlohmann::json::array();
  for (const auto& p : fm.parts()) {
    nlohmann::json part;
    std::vector<std::size_t> one_based;
    for (std::size_t i : p.subset) one_based.push_back(i + 1);
    part["subset"] = one_based;
    part["map"] = map_json(p.map);
    parts.push_back(std::move(part));
  }
  return j.dump();
}

AnovaFeatureMap anova_map_from_json(const std::string& text) {
  const nlohmann::json j = parse(text, "ANOVA map JSON");
  try {
    std::vector<AnovaFeatureMap::Part> parts;
    for (const auto& part : j.at("parts")) {
      std::vector<std::size_t> subset;
      for (auto i : part.at("subset").get<std::vector<std::size_t>>()) {
        if (i < 1) throw ParseError("ANOVA map JSON: subset indices are 1-based", 0);
        subset.push_back(i - 1);
      }
      parts.push_back({std::move(subset), map_from(part.at("map"))});
    }
    return AnovaFeatureMap(j.at("d").get<std::size_t>(), std::move(parts));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ANOVA map JSON: ") + e.what(), 0);
  }
}

}  // namespace qfeat
