#include "qfeat/error.hpp"
#include "qfeat/grids.hpp"
#include "qfeat/quad1d.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

using namespace qfeat;

namespace {

using Key = std::vector<long long>;

Key key_of(std::span<const double> p, double scale = 1e10) {
  Key k;
  for (double x : p) k.push_back(std::llround(x * scale));
  return k;
}

std::map<Key, double> as_map(const GridQuadrature& g) {
  std::map<Key, double> m;
  for (std::size_t i = 0; i < g.count(); ++i) m[key_of(g.point(i))] += g.weights()[i];
  return m;
}

// All m in N^d with |m|_1 == q (or <= q when `upto`).
void multi_indices(std::size_t d, std::size_t q, bool upto, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> m(d, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == d) {
      for (std::size_t v = upto ? 0 : left; v <= left; ++v) {
        m[i] = v;
        f(m);
      }
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      m[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, q);
}

void tensor(const std::vector<std::vector<double>>& nodes, const std::vector<std::vector<double>>& weights,
            const std::function<void(const std::vector<double>&, double)>& f) {
  const std::size_t d = nodes.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = nodes[i][idx[i]];
      w *= weights.empty() ? 1.0 : weights[i][idx[i]];
    }
    f(p, w);
    std::size_t i = 0;
    while (i < d && ++idx[i] == nodes[i].size()) idx[i++] = 0;
    if (i == d) break;
  }
}

double binom(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * double(n - k + i) / double(i);
  return c;
}

// Combination technique: sum_q (-1)^(A-q) C(d-1, A-q) sum_{|m|=q} tensor of G^{2^{m_i}}.
std::map<Key, double> combination_oracle(std::size_t A, std::size_t d) {
  std::map<Key, double> out;
  const std::size_t qmin = A + 1 >= d ? A + 1 - d : 0;
  for (std::size_t q = qmin; q <= A; ++q) {
    const double coef = ((A - q) % 2 ? -1.0 : 1.0) * binom(d - 1, A - q);
    multi_indices(d, q, false, [&](const std::vector<std::size_t>& m) {
      std::vector<std::vector<double>> nodes, weights;
      for (auto mi : m) {
        const auto g = gauss_hermite(std::size_t{1} << mi);
        nodes.push_back(g.nodes());
        weights.push_back(g.weights());
      }
      tensor(nodes, weights, [&](const std::vector<double>& p, double w) { out[key_of(p)] += coef * w; });
    });
  }
  for (auto it = out.begin(); it != out.end();) it = std::abs(it->second) < 1e-12 ? out.erase(it) : std::next(it);
  return out;
}

// Union of the supports of all difference-rule tensor grids with |m|_1 <= A.
std::size_t union_count(std::size_t A, std::size_t d) {
  std::set<Key> pts;
  multi_indices(d, A, true, [&](const std::vector<std::size_t>& m) {
    std::vector<std::vector<double>> nodes;
    for (auto mi : m) {
      auto n = gauss_hermite(std::size_t{1} << mi).nodes();
      if (mi > 0) {
        const auto prev = gauss_hermite(std::size_t{1} << (mi - 1)).nodes();
        n.insert(n.end(), prev.begin(), prev.end());
      }
      nodes.push_back(n);
    }
    tensor(nodes, {}, [&](const std::vector<double>& p, double) { pts.insert(key_of(p)); });
  });
  return pts.size();
}

double approx_at(const GridQuadrature& g, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.count(); ++i) {
    double dot = 0.0;
    for (std::size_t l = 0; l < g.dim(); ++l) dot += g.point(i)[l] * u[l];
    s += g.weights()[i] * std::cos(dot);
  }
  return s;
}

}  // namespace

TEST(DenseGrid, Examples) {
  const auto g1 = dense_grid(1, 3);
  ASSERT_EQ(g1.count(), 1u);
  EXPECT_EQ(g1.points().row(0).norm(), 0.0);
  EXPECT_EQ(g1.weights()[0], 1.0);

  const auto g2 = dense_grid(2, 2);
  ASSERT_EQ(g2.count(), 4u);
  std::set<std::pair<long, long>> seen;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::abs(g2.point(i)[0]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(g2.point(i)[1]), 1.0, 1e-15);
    EXPECT_NEAR(g2.weights()[i], 0.25, 1e-15);
    seen.insert({std::lround(g2.point(i)[0]), std::lround(g2.point(i)[1])});
  }
  EXPECT_EQ(seen.size(), 4u);

  const auto g3 = dense_grid(3, 2);
  ASSERT_EQ(g3.count(), 9u);
  std::multiset<long> w;
  for (std::size_t i = 0; i < 9; ++i) w.insert(std::lround(g3.weights()[i] * 36.0));
  EXPECT_EQ(w, (std::multiset<long>{1, 1, 1, 1, 4, 4, 4, 4, 16}));
  EXPECT_NEAR(g3.weight_sum(), 1.0, 1e-15);
  EXPECT_TRUE(g3.nonnegative());
}

TEST(DenseGrid, ExactToPerCoordinateDegree) {
  for (std::size_t L = 1; L <= 4; ++L)
    for (std::size_t d = 1; d <= 4; ++d) EXPECT_LE(exactness_residual(dense_grid(L, d), 2 * L - 1), 1e-9) << L << d;
}

TEST(DenseGrid, CapExceeded) {
  try {
    dense_grid(10, 8);
    FAIL();
  } catch (const SizeError& e) {
    EXPECT_EQ(e.requested(), 1e8);
    EXPECT_EQ(e.cap(), 1e7);
  }
  EXPECT_THROW(dense_grid(0, 2), ArgumentError);
  EXPECT_THROW(dense_grid(2, 0), ArgumentError);
}

TEST(SparseGrid, LevelZeroIsOrigin) {
  for (std::size_t d : {1u, 5u, 40u}) {
    const auto g = sparse_grid(0, d);
    ASSERT_EQ(g.count(), 1u);
    EXPECT_EQ(g.points().row(0).norm(), 0.0);
    EXPECT_EQ(g.weights()[0], 1.0);
  }
}

TEST(SparseGrid, OneDimensionTelescopes) {
  const auto s = sparse_grid(2, 1);
  const auto g = gauss_hermite(4);
  ASSERT_EQ(s.count(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.point(i)[0], g.nodes()[i], 1e-12);
    EXPECT_NEAR(s.weights()[i], g.weights()[i], 1e-12);
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  for (std::size_t A = 1; A <= 3; ++A) {
    const auto sg = sparse_grid(A, 1);
    const auto gh = gauss_hermite(std::size_t{1} << A);
    for (int t = 0; t < 100; ++t) {
      const double u = U(rng);
      const double ref = integrate_1d(gh, [u](double w) { return std::cos(w * u); });
      EXPECT_NEAR(approx_at(sg, std::vector<double>{u}), ref, 1e-10);
    }
  }
}

TEST(SparseGrid, MatchesCombinationTechnique) {
  for (std::size_t d = 1; d <= 4; ++d)
    for (std::size_t A = 0; A <= 3; ++A) {
      const auto oracle = combination_oracle(A, d);
      const auto mine = as_map(sparse_grid(A, d));
      ASSERT_EQ(mine.size(), oracle.size()) << "d=" << d << " A=" << A;
      for (const auto& [k, w] : oracle) {
        auto it = mine.find(k);
        ASSERT_NE(it, mine.end());
        EXPECT_NEAR(it->second, w, 1e-12);
      }
    }
}

TEST(SparseGrid, CountAnchor) {
  const auto g = sparse_grid(2, 25);
  EXPECT_EQ(g.count(), 1351u);
  EXPECT_EQ(union_count(2, 25), 1351u);
  EXPECT_LE(g.count(), 3159u);
  EXPECT_FALSE(g.nonnegative());
  EXPECT_NEAR(g.weight_sum(), 1.0, 1e-10);
}

TEST(SparseGrid, UnionCountWhenNothingCancels) {
  // Cancellation only removes points; the rest of the union survives.
  for (std::size_t d = 2; d <= 4; ++d)
    for (std::size_t A = 1; A <= 3; ++A) {
      const auto g = sparse_grid(A, d);
      EXPECT_LE(g.count(), union_count(A, d));
      EXPECT_EQ(g.count(), combination_oracle(A, d).size());
    }
  EXPECT_EQ(sparse_grid(1, 3).count(), union_count(1, 3));
}

TEST(SparseGrid, WeightSumBoundAndUniqueness) {
  for (std::size_t d = 1; d <= 6; ++d)
    for (std::size_t A = 0; A <= 4; ++A) {
      const auto g = sparse_grid(A, d);
      EXPECT_NEAR(g.weight_sum(), 1.0, 1e-10);
      EXPECT_LE(double(g.count()), std::pow(3.0, double(A)) * binom(d + A, A));
      std::set<Key> keys;
      for (std::size_t i = 0; i < g.count(); ++i) keys.insert(key_of(g.point(i), 1e12));
      EXPECT_EQ(keys.size(), g.count());
    }
}

TEST(SparseGrid, TotalDegreeExactness) {
  EXPECT_LE(exactness_residual(sparse_grid(1, 2), 2), 1e-10);
  for (std::size_t A = 1; A <= 3; ++A)
    for (std::size_t d = 2; d <= 3; ++d) EXPECT_LE(exactness_residual(sparse_grid(A, d), 2 * A + 1), 1e-9);
}

TEST(SparseGrid, CapExceeded) { EXPECT_THROW(sparse_grid(2, 25, 100.0), SizeError); }

TEST(SubsampleGrid, SinglePoint) {
  RowMatrix p(1, 2);
  p << 0.3, -1.2;
  Vector w(1);
  w << 1.0;
  const GridQuadrature g(p, w);
  for (std::size_t D : {1u, 7u, 100u}) {
    const auto s = subsample_grid(g, D, 11);
    ASSERT_EQ(s.count(), 1u);
    EXPECT_EQ(s.weights()[0], 1.0);
    EXPECT_EQ(s.point(0)[1], -1.2);
  }
}

TEST(SubsampleGrid, FrequenciesMatchWeights) {
  const auto g = dense_grid(3, 2);
  const auto ref = as_map(g);
  std::map<Key, double> draws;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto s = subsample_grid(g, 4, static_cast<Seed>(t));
    for (std::size_t i = 0; i < s.count(); ++i) draws[key_of(s.point(i))] += s.weights()[i] * 4.0;
  }
  const double N = 4.0 * trials;
  for (const auto& [k, p] : ref) {
    const double se = std::sqrt(N * p * (1 - p));
    EXPECT_LE(std::abs(draws[k] - N * p), 3.0 * se);
  }
}

TEST(SubsampleGrid, UnbiasedKernelEstimate) {
  const auto g = dense_grid(3, 2);
  const std::vector<double> u{0.7, -0.4};
  const double target = approx_at(g, u);
  const int seeds = 500;
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const double v = approx_at(subsample_grid(g, 4, static_cast<Seed>(1000 + s)), u);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / seeds;
  const double se = std::sqrt((sum2 / seeds - mean * mean) / (seeds - 1));
  EXPECT_LE(std::abs(mean - target), 3.0 * se);
}

TEST(SubsampleGrid, WeightsAndReproducibility) {
  const auto g = dense_grid(4, 3);
  for (Seed s = 0; s < 50; ++s) {
    const auto a = subsample_grid(g, 37, s);
    EXPECT_NEAR(a.weight_sum(), 1.0, 1e-12);
    EXPECT_TRUE(a.nonnegative());
    for (std::size_t i = 0; i < a.count(); ++i) {
      const double draws = a.weights()[i] * 37.0;
      EXPECT_NEAR(draws, std::round(draws), 1e-9);
    }
    const auto b = subsample_grid(g, 37, s);
    EXPECT_EQ(a.points(), b.points());
    EXPECT_EQ(a.weights(), b.weights());
  }
}

TEST(SubsampleGrid, RejectsSignedRule) {
  EXPECT_THROW(subsample_grid(sparse_grid(2, 3), 10, 0), ContractError);
  EXPECT_THROW(subsample_grid(dense_grid(2, 2), 0, 0), ArgumentError);
}

TEST(SubsampleDense, FrequenciesMatchDenseWeights) {
  const auto g = dense_grid(3, 2);
  const auto ref = as_map(g);
  std::map<Key, double> draws;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto s = subsample_dense(3, 2, 4, static_cast<Seed>(t));
    EXPECT_NEAR(s.weight_sum(), 1.0, 1e-12);
    for (std::size_t i = 0; i < s.count(); ++i) draws[key_of(s.point(i))] += s.weights()[i] * 4.0;
  }
  EXPECT_EQ(draws.size(), ref.size());
  const double N = 4.0 * trials;
  for (const auto& [k, p] : ref) EXPECT_LE(std::abs(draws[k] - N * p), 3.0 * std::sqrt(N * p * (1 - p)));
}

TEST(ExactnessResidual, Examples) {
  EXPECT_LE(exactness_residual(dense_grid(2, 3), 3), 1e-10);
  EXPECT_DOUBLE_EQ(exactness_residual(dense_grid(1, 2), 2), 1.0);
  EXPECT_EQ(exactness_residual(dense_grid(1, 2), 0), 0.0);
  EXPECT_THROW(exactness_residual(dense_grid(2, 10), 20), SizeError);
}

TEST(Monomials, CountAndEnumeration) {
  RowMatrix p = RowMatrix::Random(3, 4);
  std::size_t n = 0;
  std::set<std::vector<unsigned>> seen;
  for_each_monomial(p, 3, [&](const SparseMonomial& m, const Vector& v) {
    std::vector<unsigned> dense(4, 0);
    unsigned deg = 0;
    for (auto [j, e] : m) {
      dense[j] = e;
      deg += e;
    }
    EXPECT_LE(deg, 3u);
    seen.insert(dense);
    for (Eigen::Index i = 0; i < 3; ++i) {
      double ref = 1.0;
      for (std::size_t j = 0; j < 4; ++j) ref *= std::pow(p(i, j), dense[j]);
      EXPECT_NEAR(v[i], ref, 1e-14);
    }
    ++n;
  });
  EXPECT_EQ(n, 35u);
  EXPECT_EQ(seen.size(), 35u);
  EXPECT_EQ(monomial_count(4, 3), 35.0);
  EXPECT_EQ(monomial_moment({{0, 2}, {3, 4}}), 3.0);
  EXPECT_EQ(monomial_moment({{1, 3}}), 0.0);
}
