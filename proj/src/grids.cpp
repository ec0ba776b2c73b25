#include "qfeat/grids.hpp"

#include "qfeat/error.hpp"
#include "qfeat/quad1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>

namespace qfeat {

GridQuadrature::GridQuadrature(RowMatrix points, Vector weights, std::string provenance)
    : points_(std::move(points)), weights_(std::move(weights)), provenance_(std::move(provenance)) {
  if (points_.rows() != weights_.size())
    throw ArgumentError("GridQuadrature: point count and weight count differ");
  if (points_.cols() < 1) throw ArgumentError("GridQuadrature: dimension must be positive");
  if (!points_.allFinite() || !weights_.allFinite())
    throw ArgumentError("GridQuadrature: non-finite point or weight");
  nonnegative_ = weights_.size() == 0 || weights_.minCoeff() >= 0.0;
}

namespace {

constexpr double kMergeScale = 1e12;

std::int64_t merge_key(double v) { return std::llround(v * kMergeScale); }

}  // namespace

GridQuadrature dense_grid(std::size_t L, std::size_t d, double cap) {
  if (L < 1 || d < 1) throw ArgumentError("dense_grid: L and d must be positive");
  const double total = std::pow(static_cast<double>(L), static_cast<double>(d));
  if (total > cap) throw SizeError("dense_grid: L^d points", total, cap);
  const QuadratureRule1D rule = gauss_hermite(L);
  const auto D = static_cast<Eigen::Index>(std::llround(total));

  RowMatrix pts(D, static_cast<Eigen::Index>(d));
  Vector w(D);
  std::vector<std::size_t> idx(d, 0);
  for (Eigen::Index row = 0; row < D; ++row) {
    double a = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      pts(row, static_cast<Eigen::Index>(j)) = rule.nodes()[idx[j]];
      a *= rule.weights()[idx[j]];
    }
    w[row] = a;
    // Odometer, last coordinate fastest.
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < L) break;
      idx[j] = 0;
    }
  }
  return GridQuadrature(std::move(pts), std::move(w),
                        "dense L=" + std::to_string(L) + " d=" + std::to_string(d));
}

namespace {

struct SignedRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Delta_m = G^{2^m} - G^{2^{m-1}}, with Delta_0 = G^1. Coincident nodes merged.
std::vector<SignedRule> difference_rules(std::size_t level) {
  std::vector<QuadratureRule1D> rules;
  for (std::size_t m = 0; m <= level; ++m) rules.push_back(gauss_hermite(std::size_t{1} << m));

  std::vector<SignedRule> out;
  for (std::size_t m = 0; m <= level; ++m) {
    std::map<std::int64_t, std::pair<double, double>> acc;  // key -> (node, weight)
    auto add = [&](const QuadratureRule1D& r, double sign) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        auto [it, fresh] = acc.try_emplace(merge_key(r.nodes()[i]), r.nodes()[i], 0.0);
        it->second.second += sign * r.weights()[i];
      }
    };
    add(rules[m], 1.0);
    if (m > 0) add(rules[m - 1], -1.0);
    SignedRule s;
    for (const auto& [key, nw] : acc) {
      s.nodes.push_back(nw.first);
      s.weights.push_back(nw.second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

template <class F>
void for_each_level_index(std::size_t d, std::size_t level, F&& f) {
  std::vector<std::size_t> m(d, 0);
  auto rec = [&](auto& self, std::size_t j, std::size_t remaining) -> void {
    if (j == d) {
      f(static_cast<const std::vector<std::size_t>&>(m));
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      m[j] = v;
      self(self, j + 1, remaining - v);
    }
    m[j] = 0;
  };
  rec(rec, 0, level);
}

}  // namespace

GridQuadrature sparse_grid(std::size_t level, std::size_t d, double cap) {
  if (d < 1) throw ArgumentError("sparse_grid: d must be positive");
  if ((std::size_t{1} << std::min<std::size_t>(level, 62)) > kMaxHermitePoints || level > 62)
    throw ArgumentError("sparse_grid: level too large for the Hermite rule table");
  const std::vector<SignedRule> delta = difference_rules(level);

  double enumerated = 0.0;
  for_each_level_index(d, level, [&](const std::vector<std::size_t>& m) {
    double n = 1.0;
    for (std::size_t v : m) n *= static_cast<double>(delta[v].nodes.size());
    enumerated += n;
  });
  if (enumerated > cap) throw SizeError("sparse_grid: enumerated points", enumerated, cap);

  struct Acc {
    std::vector<double> point;
    double weight = 0.0;
    double magnitude = 0.0;
  };
  std::map<std::vector<std::int64_t>, Acc> acc;
  std::vector<std::size_t> idx(d);
  std::vector<double> point(d);
  std::vector<std::int64_t> key(d);

  for_each_level_index(d, level, [&](const std::vector<std::size_t>& m) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double w = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        const SignedRule& r = delta[m[j]];
        point[j] = r.nodes[idx[j]];
        key[j] = merge_key(point[j]);
        w *= r.weights[idx[j]];
      }
      auto [it, fresh] = acc.try_emplace(key);
      if (fresh) it->second.point = point;
      it->second.weight += w;
      it->second.magnitude += std::abs(w);

      std::size_t j = d;
      while (j-- > 0) {
        if (++idx[j] < delta[m[j]].nodes.size()) break;
        idx[j] = 0;
      }
      if (j == static_cast<std::size_t>(-1)) break;
    }
  });

  // Contributions that cancel to round-off (e.g. the origin for d = 1) are dropped.
  constexpr double kCancel = 64 * std::numeric_limits<double>::epsilon();
  std::vector<const Acc*> kept;
  for (const auto& [k, a] : acc)
    if (std::abs(a.weight) > kCancel * a.magnitude) kept.push_back(&a);

  RowMatrix pts(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(d));
  Vector w(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i]->point[j];
    w[static_cast<Eigen::Index>(i)] = kept[i]->weight;
  }
  return GridQuadrature(std::move(pts), std::move(w),
                        "sparse A=" + std::to_string(level) + " d=" + std::to_string(d));
}

GridQuadrature subsample_grid(const GridQuadrature& g, std::size_t draws, Seed seed) {
  if (!g.nonnegative()) throw ContractError("subsample_grid: input rule has negative weights");
  if (draws < 1) throw ArgumentError("subsample_grid: draw count must be positive");
  if (g.count() == 0) throw ArgumentError("subsample_grid: empty input rule");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(g.weights().data(), g.weights().data() + g.weights().size());
  std::vector<std::size_t> hits(g.count(), 0);
  for (std::size_t k = 0; k < draws; ++k) ++hits[pick(rng)];

  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (hits[i] > 0) rows.push_back(static_cast<Eigen::Index>(i));
  RowMatrix pts(static_cast<Eigen::Index>(rows.size()), g.points().cols());
  Vector w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = g.points().row(rows[k]);
    w[static_cast<Eigen::Index>(k)] =
        static_cast<double>(hits[static_cast<std::size_t>(rows[k])]) / static_cast<double>(draws);
  }
  return GridQuadrature(std::move(pts), std::move(w),
                        "subsampled D=" + std::to_string(draws) + " from " + g.provenance());
}

GridQuadrature subsample_dense(std::size_t L, std::size_t d, std::size_t draws, Seed seed) {
  if (L < 1 || d < 1) throw ArgumentError("subsample_dense: L and d must be positive");
  if (draws < 1) throw ArgumentError("subsample_dense: draw count must be positive");
  const QuadratureRule1D rule = gauss_hermite(L);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(rule.weights().begin(), rule.weights().end());

  std::map<std::vector<std::uint16_t>, std::size_t> hits;
  std::vector<std::uint16_t> idx(d);
  for (std::size_t k = 0; k < draws; ++k) {
    for (std::size_t j = 0; j < d; ++j) idx[j] = static_cast<std::uint16_t>(pick(rng));
    ++hits[idx];
  }
  RowMatrix pts(static_cast<Eigen::Index>(hits.size()), static_cast<Eigen::Index>(d));
  Vector w(static_cast<Eigen::Index>(hits.size()));
  Eigen::Index row = 0;
  for (const auto& [ix, count] : hits) {
    for (std::size_t j = 0; j < d; ++j) pts(row, static_cast<Eigen::Index>(j)) = rule.nodes()[ix[j]];
    w[row] = static_cast<double>(count) / static_cast<double>(draws);
    ++row;
  }
  return GridQuadrature(std::move(pts), std::move(w),
                        "subsampled D=" + std::to_string(draws) + " from dense L=" + std::to_string(L) +
                            " d=" + std::to_string(d));
}

double monomial_count(std::size_t d, std::size_t R) {
  double c = 1.0;
  for (std::size_t k = 1; k <= R; ++k) c = c * static_cast<double>(d + k) / static_cast<double>(k);
  return std::round(c);
}

double monomial_moment(const SparseMonomial& r) {
  double m = 1.0;
  for (const auto& [dim, e] : r) {
    if (e % 2 == 1) return 0.0;
    m *= normal_moment(e);
  }
  return m;
}

double exactness_residual(const GridQuadrature& g, std::size_t R, double cap) {
  const double constraints = monomial_count(g.dim(), R);
  if (constraints > cap) throw SizeError("exactness_residual: constraints", constraints, cap);
  double worst = 0.0;
  for_each_monomial(g.points(), R, [&](const SparseMonomial& r, const Vector& values) {
    worst = std::max(worst, std::abs(monomial_moment(r) - g.weights().dot(values)));
  });
  return worst;
}

}  // namespace qfeat
