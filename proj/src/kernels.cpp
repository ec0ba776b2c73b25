#include "qfeat/kernels.hpp"

#include "qfeat/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qfeat {

GaussianKernel::GaussianKernel(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError("GaussianKernel: gamma must be positive");
}

double GaussianKernel::frequency_scale() const { return std::sqrt(2.0 * gamma_); }

double GaussianKernel::operator()(std::span<const double> u) const {
  double sq = 0.0;
  for (double v : u) sq += v * v;
  return std::exp(-gamma_ * sq);
}

double GaussianKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw ArgumentError("GaussianKernel: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x[i] - y[i];
    sq += t * t;
  }
  return std::exp(-gamma_ * sq);
}

double GaussianKernel::factor(double t) const { return std::exp(-gamma_ * t * t); }

AnovaKernel::AnovaKernel(std::size_t dim, std::vector<std::vector<std::size_t>> subsets,
                         GaussianKernel base)
    : dim_(dim), subsets_(std::move(subsets)), base_(base) {
  if (dim_ == 0) throw ArgumentError("AnovaKernel: dimension must be positive");
  if (subsets_.empty()) throw ArgumentError("AnovaKernel: at least one subset required");
  for (auto& s : subsets_) {
    if (s.empty()) throw ArgumentError("AnovaKernel: subsets must be non-empty");
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw ArgumentError("AnovaKernel: repeated index within a subset");
    if (s.back() >= dim_) throw ArgumentError("AnovaKernel: subset index out of range");
  }
}

double AnovaKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim_ || y.size() != dim_) throw ArgumentError("AnovaKernel: dimension mismatch");
  // exp(-gamma * sum) equals the product of one-dimensional factors.
  double total = 0.0;
  for (const auto& s : subsets_) {
    double sq = 0.0;
    for (std::size_t i : s) {
      const double t = x[i] - y[i];
      sq += t * t;
    }
    total += std::exp(-base_.gamma() * sq);
  }
  return total;
}

AnovaStats AnovaKernel::stats() const {
  std::vector<std::size_t> membership(dim_, 0);
  std::size_t rank = 0;
  for (const auto& s : subsets_) {
    rank = std::max(rank, s.size());
    for (std::size_t i : s) ++membership[i];
  }
  return {rank, *std::max_element(membership.begin(), membership.end()), subsets_.size()};
}

AnovaKernel anova_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ANOVA structure: ") + e.what(), 0);
  }
  for (const char* key : {"d", "subsets"})
    if (!j.contains(key)) throw ParseError(std::string("ANOVA structure: missing field '") + key + "'", 0);
  const auto d = j.at("d").get<std::int64_t>();
  if (d <= 0) throw ArgumentError("ANOVA structure: d must be positive");
  const double gamma = j.value("gamma", 0.5);
  std::vector<std::vector<std::size_t>> subsets;
  for (const auto& js : j.at("subsets")) {
    std::vector<std::size_t> s;
    for (const auto& idx : js) {
      const auto v = idx.get<std::int64_t>();
      if (v < 1 || v > d) throw ArgumentError("ANOVA structure: index " + std::to_string(v) + " outside 1..d");
      s.push_back(static_cast<std::size_t>(v - 1));
    }
    subsets.push_back(std::move(s));
  }
  return AnovaKernel(static_cast<std::size_t>(d), std::move(subsets), GaussianKernel(gamma));
}

AnovaKernel load_anova(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ANOVA structure file " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return anova_from_json(ss.str());
}

std::string anova_to_json(const AnovaKernel& k) {
  nlohmann::json j;
  j["d"] = k.dim();
  j["gamma"] = k.base().gamma();
  auto& subs = j["subsets"] = nlohmann::json::array();
  for (const auto& s : k.subsets()) {
    auto one = nlohmann::json::array();
    for (std::size_t i : s) one.push_back(i + 1);
    subs.push_back(std::move(one));
  }
  return j.dump();
}

}  // namespace qfeat
